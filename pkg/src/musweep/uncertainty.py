"""Boxes of real diagonal uncertainty parameters.

A box ``Q`` is the product of intervals ``[lo_k, hi_k]``; the parameter
``delta_k`` multiplies the k-th channel, i.e. ``Delta = diag(delta)``. The
admissible set is the unit box ``[-1, 1]^n``.
"""

import math

import numpy as np

from .errors import CapacityError, DegenerateBoxError, DimensionError, InputError

__all__ = [
    "UncertaintyBox",
    "unit_box",
    "diameter",
    "bisect_longest_edge",
    "vertices",
    "corner_patterns",
    "VERTEX_LIMIT",
    "SAMPLED_CORNERS",
    "MIN_EDGE",
]

#: largest n for which all 2**n corners are enumerated
VERTEX_LIMIT = 10
#: corners drawn (with a fixed seed) when n exceeds VERTEX_LIMIT
SAMPLED_CORNERS = 64
#: boxes whose longest edge is below this width are never bisected
MIN_EDGE = 1e-12


class UncertaintyBox:
    """Immutable axis-aligned box ``[lo, hi]`` in R^n."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.array(lo, dtype=float).reshape(-1)
        hi = np.array(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionError(f"lo has {lo.size} entries, hi has {hi.size}")
        if lo.size < 1:
            raise InputError("a box needs at least one parameter")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("box bounds must be finite")
        if np.any(lo > hi):
            raise InputError(f"box has lo > hi: lo={lo}, hi={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("UncertaintyBox is immutable")

    @classmethod
    def _trusted(cls, lo, hi):
        # skips validation; callers guarantee finite, ordered, read-only arrays
        self = object.__new__(cls)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        return self

    @property
    def n(self):
        return self.lo.size

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self):
        """Half-widths of the edges."""
        return 0.5 * (self.hi - self.lo)

    @property
    def widths(self):
        return self.hi - self.lo

    def contains(self, point, tol=0.0):
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def is_subset_of(self, other):
        return bool(np.all(self.lo >= other.lo) and np.all(self.hi <= other.hi))

    def __eq__(self, other):
        if not isinstance(other, UncertaintyBox):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    def __repr__(self):
        parts = ", ".join(f"[{l:.6g}, {h:.6g}]" for l, h in zip(self.lo, self.hi))
        return f"UncertaintyBox({parts})"

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


def unit_box(n):
    """The admissible set ``[-1, 1]^n``."""
    if int(n) != n or n < 1:
        raise InputError(f"number of parameters must be a positive integer, got {n!r}")
    n = int(n)
    return UncertaintyBox(-np.ones(n), np.ones(n))


def diameter(q):
    """Euclidean length of the box diagonal."""
    # hypot rescales internally, so tiny widths do not underflow to 0
    return math.hypot(*(q.hi - q.lo).tolist())


def bisect_longest_edge(q):
    """Split ``q`` at the midpoint of its longest edge.

    Ties go to the lowest parameter index. Returns ``(lower_half, upper_half)``.
    """
    w = q.hi - q.lo
    k = int(np.argmax(w))
    if not w[k] > 0.0:
        raise DegenerateBoxError(f"cannot bisect a point box {q!r}")
    mid = 0.5 * (q.lo[k] + q.hi[k])
    hi_a = q.hi.copy()
    hi_a[k] = mid
    lo_b = q.lo.copy()
    lo_b[k] = mid
    hi_a.setflags(write=False)
    lo_b.setflags(write=False)
    return UncertaintyBox._trusted(q.lo, hi_a), UncertaintyBox._trusted(lo_b, q.hi)


_PATTERNS = {}


def corner_patterns(n, seed=0):
    """Boolean ``(p, n)`` array selecting ``hi`` (True) or ``lo`` per corner.

    For ``n <= VERTEX_LIMIT`` this lists all ``2**n`` corners in lexicographic
    bit order (index 0 varies slowest). Above the limit, ``SAMPLED_CORNERS``
    random patterns drawn from ``seed``. The second return value tells which.
    """
    key = (n, seed if n > VERTEX_LIMIT else None)
    if key not in _PATTERNS:
        if n <= VERTEX_LIMIT:
            idx = np.arange(2 ** n)[:, None]
            bits = (idx >> np.arange(n - 1, -1, -1)[None, :]) & 1
            pats = bits.astype(bool)
        else:
            rng = np.random.default_rng(seed)
            pats = rng.integers(0, 2, size=(SAMPLED_CORNERS, n)).astype(bool)
        pats.setflags(write=False)
        _PATTERNS[key] = pats
    return _PATTERNS[key], n <= VERTEX_LIMIT


def vertices(q):
    """All ``2**n`` corners of ``q`` as a ``(2**n, n)`` array.

    Raises
    ------
    CapacityError
        If ``n > VERTEX_LIMIT``.
    """
    if q.n > VERTEX_LIMIT:
        raise CapacityError(
            f"{q.n} parameters exceed the vertex enumeration limit {VERTEX_LIMIT}")
    pats, _ = corner_patterns(q.n)
    return np.where(pats, q.hi, q.lo)
