"""Bounds on mu restricted to a box of real diagonal uncertainty.

For a square complex ``M`` and a box ``Q``::

    mu(M, Q) = max over delta in Q of lambda_R(M diag(delta))

where ``lambda_R`` is the largest positive real eigenvalue (0 if there is
none). This module provides

* :func:`lower_bound`: best ``lambda_R`` found at feasible points of ``Q``
  (centre, corners, and an exact real-eigenvalue search along the edges);
* :func:`upper_bound`: the smaller of a norm-product bound and an
  eigenvalue-perturbation bound around the box centre;
* :func:`evaluate_box`: both, with the early-exit economies used by the engine;
* :func:`mu_box_oracle`: an independent brute-force reference for ``n = 2``.

The numeric work is done by :mod:`musweep.kernels`.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .errors import CapacityError, DimensionError
from .kernels import TAG_NAMES, TAU_IMAG
from .numerics import as_complex_matrix, max_singular_value
from .uncertainty import UncertaintyBox, corner_patterns

__all__ = [
    "BoundPair",
    "lambda_r_max",
    "lower_bound",
    "upper_bound",
    "evaluate_box",
    "mu_box_oracle",
    "TAU_IMAG",
]


@dataclass(frozen=True)
class BoundPair:
    """Lower and upper bound of ``mu(M, Q)`` for one box.

    ``lb_witness`` is the parameter vector at which ``lb`` was observed.
    ``ub_basis`` is ``"perturbation"`` or ``"coarse-norm"``. When
    ``lb_skipped`` is set the lower bound was not computed (it could not beat
    the incumbent) and ``lb`` is reported as 0 with the box centre as witness.
    """

    lb: float
    ub: float
    lb_witness: np.ndarray = field(repr=False)
    ub_basis: str
    early_exit: bool = False
    lb_skipped: bool = False


def _check_pair(m, q):
    m = as_complex_matrix(m, "M")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"M must be square, got shape {m.shape}")
    if not isinstance(q, UncertaintyBox):
        raise TypeError(f"expected an UncertaintyBox, got {type(q).__name__}")
    if q.n != m.shape[0]:
        raise DimensionError(f"box has {q.n} parameters but M is {m.shape[0]}x{m.shape[0]}")
    return np.ascontiguousarray(m)


def lambda_r_max(m, tau=TAU_IMAG):
    """Largest positive real eigenvalue of ``m``, or 0 if it has none.

    An eigenvalue counts as real when ``|Im| <= tau * (1 + |lambda|)``.
    """
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {m.shape}")
    if m.size == 0:
        return 0.0
    return kernels.active.lambda_r_max(np.ascontiguousarray(m), tau)


def _lower(m, lo, hi, pats, full, cutoff, tau):
    return kernels.active.lower_bound(m, lo, hi, pats, full, tau, cutoff)


def lower_bound(m, q, cutoff=math.inf, seed=0, tau=TAU_IMAG):
    """Lower bound on ``mu(m, q)`` and the parameter vector achieving it.

    Every candidate is an actual point of ``q``, so the value never exceeds
    ``mu(m, q)`` (up to the realness tolerance ``tau``). Evaluation stops once
    the running value reaches ``cutoff``. Above ``VERTEX_LIMIT`` parameters a
    seeded sample of corners replaces full enumeration.

    Returns
    -------
    value : float
    witness : ndarray
    """
    m = _check_pair(m, q)
    pats, full = corner_patterns(q.n, seed)
    return _lower(m, q.lo, q.hi, pats.view(np.uint8), full, cutoff, tau)


def upper_bound(m, q, early_exit_threshold=None, tau=TAU_IMAG):
    """Upper bound on ``mu(m, q)``.

    The value is ``min(coarse, perturbation)``:

    ``coarse``
        ``sigma_max(m) * max_k max(|lo_k|, |hi_k|)``.
    ``perturbation``
        Write ``m diag(delta) = A + E`` with ``A = m diag(centre)`` and
        ``||E|| <= eta = sigma_max(m diag(radius))``. A real eigenvalue
        ``alpha`` of ``A + E`` lies within ``kappa(V) * eta`` of an eigenvalue
        of ``A`` (Bauer-Fike, ``V`` the eigenvectors of ``A``) and also
        satisfies ``sigma_max((alpha I - A)^-1 m diag(radius)) >= 1``. The
        first gives ``Re(l) + sqrt(r^2 - Im(l)^2)`` per eigenvalue ``l``; the
        second is bounded by the largest real eigenvalue of
        ``[[A, W W^H], [I, A^H]]`` with ``W = m diag(radius)``, whose real
        eigenvalues are exactly the points where that singular value is 1.

    With a threshold, evaluation stops at the first stage whose value is
    already below it. Ties go to the coarse tag.

    Returns
    -------
    value : float
    basis : str
        ``"perturbation"`` or ``"coarse-norm"``.
    """
    m = _check_pair(m, q)
    thr = -math.inf if early_exit_threshold is None else float(early_exit_threshold)
    value, tag, _ = kernels.active.upper_bound(m, q.lo, q.hi, thr, tau)
    return value, TAG_NAMES[tag]


def _evaluate(m, lo, hi, pats, full, threshold, incumbent, tau):
    ub, tag, early = kernels.active.upper_bound(m, lo, hi, threshold, tau)
    if ub <= incumbent:
        # cannot raise the incumbent: skip the lower bound entirely
        return 0.0, ub, None, tag, early, True
    lb, wit = kernels.active.lower_bound(m, lo, hi, pats, full, tau, ub)
    if lb > ub:
        # realness tolerance can put a feasible value a hair above ub; lb is a
        # value attained in the box, so max(ub, lb) is still an upper bound
        ub = lb
    return lb, ub, wit, tag, early, False


def evaluate_box(m, q, threshold=None, incumbent=None, seed=0, tau=TAU_IMAG):
    """Both bounds for one box, as a :class:`BoundPair`.

    ``threshold`` enables the upper-bound early exit (the box will be pruned
    anyway). ``incumbent`` enables skipping the lower bound when the upper
    bound shows it cannot exceed the incumbent. ``lb <= ub`` always holds.
    """
    m = _check_pair(m, q)
    pats, full = corner_patterns(q.n, seed)
    thr = -math.inf if threshold is None else float(threshold)
    inc = -math.inf if incumbent is None else float(incumbent)
    lb, ub, wit, tag, early, skipped = _evaluate(
        m, q.lo, q.hi, pats.view(np.uint8), full, thr, inc, tau)
    if wit is None:
        wit = q.center
    return BoundPair(lb, ub, wit, TAG_NAMES[tag], early, skipped)


# --------------------------------------------------------------------------
# n = 2 reference oracle
#
# det(alpha I - M diag(d1, d2)) = alpha^2 - alpha (m11 d1 + m22 d2) + det(M) d1 d2
#                               = u(d1) + d2 v(d1)
# with u = alpha^2 - alpha m11 d1 and v = -alpha m22 + det(M) d1. For fixed
# alpha a real d2 exists iff Im(u conj(v)) = 0, a quadratic in d1.

_RANGE_TOL = 1e-12


def _feasible_generic(m11, m22, det, lo, hi, alphas):
    """Vectorised feasibility of each alpha for the non-degenerate case."""
    a2 = -(m11 * np.conj(det)).imag
    b1 = (m11 * np.conj(m22)).imag - det.imag
    b0 = m22.imag
    A1 = alphas * b1
    A0 = alphas ** 2 * b0
    out = np.zeros(alphas.shape, dtype=bool)
    cands = []
    if a2 != 0.0:
        disc = A1 * A1 - 4.0 * a2 * A0
        ok = disc >= 0.0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        # numerically stable pair of roots
        qq = -0.5 * (A1 + np.copysign(sq, A1))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = qq / a2
            r2 = np.where(qq != 0.0, A0 / qq, -A1 / (2.0 * a2))
        cands += [(r1, ok), (r2, ok)]
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -A0 / A1
        cands.append((r, A1 != 0.0))
    for d1, ok in cands:
        ok = ok & np.isfinite(d1) & (d1 >= lo[0] - _RANGE_TOL) & (d1 <= hi[0] + _RANGE_TOL)
        d1c = np.clip(np.nan_to_num(d1), lo[0], hi[0])
        u = alphas ** 2 - alphas * m11 * d1c
        v = -alphas * m22 + det * d1c
        vv = np.abs(v) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            d2 = -(u * np.conj(v)).real / vv
        ok = ok & (vv > 0.0) & (d2 >= lo[1] - _RANGE_TOL) & (d2 <= hi[1] + _RANGE_TOL)
        out |= ok
    return out


def _feasible_real(m11, m22, det, lo, hi, alphas):
    """Real data: the bilinear det has a zero in the box iff it changes sign on the corners."""
    vals = []
    for d1 in (lo[0], hi[0]):
        for d2 in (lo[1], hi[1]):
            vals.append(alphas ** 2 - alphas * (m11.real * d1 + m22.real * d2) + det.real * d1 * d2)
    vals = np.array(vals)
    return (vals.min(axis=0) <= 0.0) & (vals.max(axis=0) >= 0.0)


def _feasible_scan(m11, m22, det, lo, hi, alphas, points=4001):
    """Fallback: scan d1 on a fine grid and solve for d2 in least squares."""
    d1 = np.linspace(lo[0], hi[0], points)
    out = np.zeros(alphas.shape, dtype=bool)
    for i, a in enumerate(alphas):
        u = a * a - a * m11 * d1
        v = -a * m22 + det * d1
        vv = np.abs(v) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            d2 = -(u * np.conj(v)).real / vv
            resid = np.abs(u + d2 * v)
        ok = (vv > 0.0) & (resid <= 1e-9 * (np.abs(u) + np.abs(v))) \
            & (d2 >= lo[1] - _RANGE_TOL) & (d2 <= hi[1] + _RANGE_TOL)
        if np.any(ok):
            out[i] = True
            continue
        # v identically zero along the scan: need u(d1) = 0 with d1 in range
        if m11 != 0.0 and np.all(vv == 0.0):
            root = a / m11
            if abs(root.imag) <= 1e-12 * (1 + abs(root)) and lo[0] - _RANGE_TOL <= root.real <= hi[0] + _RANGE_TOL:
                out[i] = True
    return out


def _segment_oracle(m11, m22, det, d1, lo2, hi2, scale):
    """Exact answer when d1 is fixed: Im(u conj(v)) is a cubic in alpha.

    Returns ``None`` when the cubic vanishes identically (real data), in which
    case the caller falls back to the alpha scan.
    """
    c3 = m22.imag
    c2 = (np.conj(det) * d1 + m11 * d1 * np.conj(m22)).imag
    c1 = -d1 * d1 * (m11 * np.conj(det)).imag
    coef = np.array([c3, c2, c1])
    if np.max(np.abs(coef)) <= 1e-13 * scale:
        return None
    best = 0.0
    nz = np.flatnonzero(coef)
    for r in np.roots(coef[nz[0]:]) if nz.size else ():
        a = r.real
        if a <= 0.0 or abs(r.imag) > 1e-9 * (1.0 + abs(r)):
            continue
        u = a * a - a * m11 * d1
        v = -a * m22 + det * d1
        vv = abs(v) ** 2
        if vv == 0.0:
            continue
        d2 = -(u * np.conj(v)).real / vv
        if lo2 - _RANGE_TOL <= d2 <= hi2 + _RANGE_TOL and a > best:
            best = a
    return best


def mu_box_oracle(m, q, alpha_grid=20000, tol=1e-10):
    """Brute-force ``mu(m, q)`` for two real parameters.

    Scans ``alpha`` downward from the coarse bound over ``alpha_grid`` points,
    deciding for each whether some ``delta`` in ``q`` makes ``alpha`` an
    eigenvalue of ``m diag(delta)``. The highest feasible grid value is then
    refined by bisection to relative width ``tol``. Test reference only.

    Raises
    ------
    CapacityError
        If ``q`` does not have exactly two parameters.
    """
    if not isinstance(q, UncertaintyBox) or q.n != 2:
        raise CapacityError("mu_box_oracle handles exactly two real parameters")
    m = _check_pair(m, q)
    lo, hi = q.lo, q.hi
    if lo[0] == hi[0] and lo[1] == hi[1]:
        return lambda_r_max(m * lo)
    if lo[1] == hi[1]:
        # put the fixed parameter first; permutation similarity keeps mu
        m = m[::-1, ::-1].copy()
        lo, hi = lo[::-1], hi[::-1]
    m11, m22 = m[0, 0], m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    mag = max(np.max(np.abs(q.lo)), np.max(np.abs(q.hi)))
    top = max_singular_value(m) * mag * (1.0 + 1e-9)
    if top == 0.0:
        return 0.0
    scale = abs(m11) * abs(det) + abs(m11) * abs(m22) + abs(det) + abs(m22)
    im_coeffs = (abs((m11 * np.conj(det)).imag),
                 abs((m11 * np.conj(m22)).imag - det.imag),
                 abs(m22.imag))
    if lo[0] == hi[0]:
        exact = _segment_oracle(m11, m22, det, lo[0], lo[1], hi[1], scale)
        if exact is not None:
            return float(exact)
    if max(im_coeffs) > 1e-13 * scale:
        feasible = _feasible_generic
    elif max(abs(m11.imag), abs(m22.imag), abs(det.imag)) <= 1e-13 * scale:
        feasible = _feasible_real
    else:
        feasible = _feasible_scan

    def ok(alpha):
        return bool(feasible(m11, m22, det, lo, hi, np.array([alpha]))[0])

    alphas = np.linspace(top, 0.0, alpha_grid + 1)[:-1]
    feas = feasible(m11, m22, det, lo, hi, alphas)
    hits = np.flatnonzero(feas)
    if hits.size == 0:
        return 0.0
    k = hits[0]
    if k == 0:
        return float(alphas[0])
    good, bad = alphas[k], alphas[k - 1]
    while bad - good > tol * max(1.0, bad):
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return float(good)
