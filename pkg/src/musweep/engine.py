"""Frequency sweeps for the maximal structured singular value.

Two algorithms are provided over the same uniform grid:

``run_conventional``
    Best-first branch and bound at every frequency independently, until the
    gap between that frequency's upper and lower bound is below ``eps_abs``.
``run_parallel``
    The grid is split into ``N`` interleaved branches of ``K`` frequencies.
    For each step ``j`` the ``N`` frequencies ``omega_ij`` are refined
    together, sharing a single incumbent ``mu_hat`` (the best lower bound seen
    anywhere). A box is dropped once its upper bound is below
    ``mu_hat / (1 - eps_rel)``, so most frequencies are never bounded
    tightly.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import heapq
import itertools
import logging
import math

import numpy as np

from . import kernels
from .bounds import _evaluate
from .errors import InputError
from .plant import freq_response
from .uncertainty import MIN_EDGE, UncertaintyBox, bisect_longest_edge, corner_patterns, unit_box

__all__ = [
    "FrequencyGrid",
    "BoxRecord",
    "Metrics",
    "SweepResult",
    "Comparison",
    "make_grid",
    "relabel_grid",
    "run_conventional",
    "run_parallel",
    "compare",
    "DEFAULT_MAX_BOXES",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_BOXES = 10 ** 6


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """``N*K`` uniformly spaced frequencies on ``[a, b]``, endpoints included.

    ``points[K*(i-1) + (j-1)]`` is the relabelled frequency ``omega_ij``
    (``i = 1..N`` branch, ``j = 1..K`` step), both indices 1-based.
    """

    a: float
    b: float
    N: int
    K: int
    points: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.N * self.K

    @property
    def step(self):
        return (self.b - self.a) / (self.size - 1)

    def flat_index(self, i, j):
        return self.K * (i - 1) + (j - 1)

    def omega(self, i, j):
        return float(self.points[self.flat_index(i, j)])

    def ij(self, flat):
        return flat // self.K + 1, flat % self.K + 1


def make_grid(a, b, N, K):
    """Uniform grid ``omega_j = a + (b - a)(j - 1)/(N K - 1)``, ``j = 1..N K``."""
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InputError("grid endpoints must be finite")
    if not b > a:
        raise InputError(f"need b > a, got a={a}, b={b}")
    if int(N) != N or int(K) != K:
        raise InputError("N and K must be integers")
    N, K = int(N), int(K)
    if N < 2 or K < 1:
        raise InputError(f"need N >= 2 and K >= 1, got N={N}, K={K}")
    nk = N * K
    idx = np.arange(nk)
    points = a + (b - a) * idx / (nk - 1)
    points.setflags(write=False)
    return FrequencyGrid(a, b, N, K, points)


def relabel_grid(grid):
    """``(N, K)`` array whose entry ``[i-1, j-1]`` is ``omega_ij``."""
    i = np.arange(grid.N)[:, None]
    j = np.arange(grid.K)[None, :]
    idx = grid.K * i + j
    return grid.a + (grid.b - grid.a) * idx / (grid.size - 1)


@dataclass(slots=True)
class BoxRecord:
    """A box in a working list together with its cached bounds."""

    box: UncertaintyBox
    ub: float
    lb: float
    frequency_index: tuple
    seq: int
    witness: np.ndarray = None
    lb_skipped: bool = False


@dataclass
class Metrics:
    boxes_created: int = 0
    boxes_pruned: int = 0
    partitions: int = 0
    lb_evaluations: int = 0
    ub_evaluations: int = 0
    ub_early_exits: int = 0
    lb_skipped: int = 0
    stalled: int = 0

    @property
    def bound_evaluations(self):
        return self.lb_evaluations + self.ub_evaluations

    def to_dict(self):
        d = asdict(self)
        d["bound_evaluations"] = self.bound_evaluations
        return d


@dataclass
class SweepResult:
    """Outcome of one sweep.

    ``r`` holds the recorded round counter ``r(j)`` per step for the parallel
    algorithm, and the partition count per grid point for the conventional one.
    ``mu_upper`` is a certified upper bound on the grid maximum when the
    algorithm produces one (conventional only).
    """

    algorithm: str
    mu_hat: float
    peak_omega: float
    peak_index: tuple
    r: list
    converged: bool
    metrics: Metrics
    peak_delta: list = None
    mu_upper: float = None
    lb_per_frequency: list = None
    ub_per_frequency: list = None
    frequency_converged: list = None

    def to_dict(self):
        d = {
            "algorithm": self.algorithm,
            "mu_hat": self.mu_hat,
            "peak_omega": self.peak_omega,
            "peak_index": list(self.peak_index),
            "peak_delta": self.peak_delta,
            "converged": self.converged,
            "r": list(self.r),
            "metrics": self.metrics.to_dict(),
        }
        if self.mu_upper is not None:
            d["mu_upper"] = self.mu_upper
            d["lb_per_frequency"] = self.lb_per_frequency
            d["ub_per_frequency"] = self.ub_per_frequency
            d["frequency_converged"] = self.frequency_converged
        return d


@dataclass
class Comparison:
    parallel: SweepResult
    conventional: SweepResult

    @property
    def box_ratio(self):
        """Conventional boxes evaluated per parallel box evaluated."""
        return self.conventional.metrics.boxes_created / max(1, self.parallel.metrics.boxes_created)

    @property
    def evaluation_ratio(self):
        return (self.conventional.metrics.bound_evaluations
                / max(1, self.parallel.metrics.bound_evaluations))

    def to_dict(self):
        return {
            "parallel": self.parallel.to_dict(),
            "conventional": self.conventional.to_dict(),
            "box_ratio": self.box_ratio,
            "evaluation_ratio": self.evaluation_ratio,
        }


class _Evaluator:
    """Binds the corner patterns for one problem size; thread-safe."""

    def __init__(self, n, seed, tau):
        pats, self.full = corner_patterns(n, seed)
        self.pats = pats.view(np.uint8)
        self.tau = tau

    def __call__(self, m, box, threshold, incumbent):
        return _evaluate(m, box.lo, box.hi, self.pats, self.full, threshold, incumbent, self.tau)


def _record(metrics, res, box, where, seq, debug):
    lb, ub, wit, _tag, early, skipped = res
    metrics.boxes_created += 1
    metrics.ub_evaluations += 1
    if early:
        metrics.ub_early_exits += 1
    if skipped:
        metrics.lb_skipped += 1
    else:
        metrics.lb_evaluations += 1
    if debug:
        assert 0.0 <= lb <= ub, f"bound sandwich violated: lb={lb}, ub={ub}"
        if wit is not None:
            assert box.contains(wit, tol=1e-12), "lower-bound witness outside its box"
    return BoxRecord(box, ub, lb, where, seq, wit, skipped)


def _split(box):
    """Children of ``box`` or ``None`` when it is too small to bisect."""
    if float(np.max(box.hi - box.lo)) < MIN_EDGE:
        return None
    return bisect_longest_edge(box)


def _check_children(parent, a, b):
    assert a.is_subset_of(parent) and b.is_subset_of(parent)
    k = int(np.argmax(parent.hi - parent.lo))
    assert a.hi[k] == b.lo[k] and a.lo[k] == parent.lo[k] and b.hi[k] == parent.hi[k]


def _pool(workers):
    return ThreadPoolExecutor(max_workers=workers) if workers and workers > 1 else None


def run_parallel(model, grid, eps_rel=0.01, IT=100, *, seed=0, workers=1,
                 debug=False, tau=kernels.TAU_IMAG):
    """Parallel branch and bound sweep with a shared incumbent.

    Parameters
    ----------
    model : StateSpaceModel
    grid : FrequencyGrid
    eps_rel : float
        Relative tolerance, ``0 < eps_rel < 1``. Boxes with
        ``UB < mu_hat / (1 - eps_rel)`` are pruned.
    IT : int
        Maximum number of rounds per step ``j``.
    workers : int
        Threads used to evaluate the ``N`` bound computations of a round.
        Results are merged in index order, so any value gives identical output.
    debug : bool
        Assert the run invariants (monotone incumbent, prune condition,
        bound sandwich, single partition per box).

    Returns
    -------
    SweepResult
        ``mu_hat`` is always a valid lower bound on the grid maximum. If
        ``converged`` it is also within ``eps_rel`` (relative) of it.
    """
    if not 0.0 < eps_rel < 1.0:
        raise InputError(f"eps_rel must lie in (0, 1), got {eps_rel}")
    if int(IT) != IT or IT < 1:
        raise InputError(f"IT must be a positive integer, got {IT}")
    IT = int(IT)
    n = model.n_uncertain
    root = unit_box(n)
    evaluate = _Evaluator(n, seed, tau)
    relax = 1.0 / (1.0 - eps_rel)
    metrics = Metrics()
    counter = itertools.count()
    mu_hat = 0.0
    peak = (1, 1)
    peak_delta = None
    r_rec = []
    converged = True
    partitioned = set() if debug else None
    pool = _pool(workers)
    mapper = pool.map if pool is not None else map

    def raise_incumbent(rec):
        nonlocal mu_hat, peak, peak_delta
        if rec.lb > mu_hat:
            mu_hat = rec.lb
            peak = rec.frequency_index
            peak_delta = [float(x) for x in rec.witness]

    def prune(lst):
        limit = mu_hat * relax
        keep = []
        for e in lst:
            rec = e[2]
            if rec.ub < limit or rec.ub == 0.0:
                if debug:
                    log.debug("prune %s ub=%r limit=%r", rec.frequency_index, rec.ub, limit)
            else:
                keep.append(e)
        if len(keep) != len(lst):
            metrics.boxes_pruned += len(lst) - len(keep)
            heapq.heapify(keep)
        return keep

    try:
        for j in range(1, grid.K + 1):
            mats = [np.ascontiguousarray(freq_response(model, grid.omega(i, j)))
                    for i in range(1, grid.N + 1)]
            # step 2-1: every branch starts from the full box
            snap = mu_hat
            firsts = list(mapper(lambda i: evaluate(mats[i], root, snap * relax, snap),
                                 range(grid.N)))
            lists = []
            for i, res in enumerate(firsts):
                rec = _record(metrics, res, root, (i + 1, j), next(counter), debug)
                prev = mu_hat
                raise_incumbent(rec)
                if debug:
                    assert mu_hat >= prev
                lists.append([(-rec.ub, rec.seq, rec)])
            lists = [prune(lst) for lst in lists]

            r = 1
            while True:
                active = [i for i in range(grid.N) if lists[i]]
                if r == IT + 1 or not active:
                    break
                snap = mu_hat
                thr = snap * relax
                picked = [(i, heapq.heappop(lists[i])[2]) for i in active]

                def work(item, thr=thr, snap=snap):
                    i, rec = item
                    kids = _split(rec.box)
                    if kids is None:
                        return None
                    return kids, [evaluate(mats[i], q, thr, snap) for q in kids]

                outs = list(mapper(work, picked))
                for (i, parent), out in zip(picked, outs):
                    if out is None:
                        metrics.stalled += 1
                        log.warning("box %r at %s is below the minimum edge width; dropped",
                                    parent.box, parent.frequency_index)
                        lists[i] = prune(lists[i])
                        continue
                    kids, results = out
                    metrics.partitions += 1
                    if debug:
                        assert parent.seq not in partitioned, "box partitioned twice"
                        partitioned.add(parent.seq)
                        _check_children(parent.box, *kids)
                    for q, res in zip(kids, results):
                        rec = _record(metrics, res, q, (i + 1, j), next(counter), debug)
                        heapq.heappush(lists[i], (-rec.ub, rec.seq, rec))
                        prev = mu_hat
                        raise_incumbent(rec)
                        if debug:
                            assert mu_hat >= prev, "incumbent decreased"
                    lists[i] = prune(lists[i])
                r += 1
            r_rec.append(r)
            if any(lists):
                converged = False
    finally:
        if pool is not None:
            pool.shutdown()

    if metrics.stalled:
        converged = False
    return SweepResult(
        algorithm="parallel",
        mu_hat=float(mu_hat),
        peak_omega=grid.omega(*peak),
        peak_index=peak,
        r=r_rec,
        converged=converged,
        metrics=metrics,
        peak_delta=peak_delta,
    )


def run_conventional(model, grid, eps_abs=0.005, max_boxes=DEFAULT_MAX_BOXES, *,
                     seed=0, debug=False, tau=kernels.TAU_IMAG):
    """Independent best-first branch and bound at every grid frequency.

    Each frequency is refined until ``UB_j - LB_j <= eps_abs`` or
    ``max_boxes`` boxes have been evaluated for it. The returned
    ``mu_hat = max_j LB_j`` and ``mu_upper = max_j UB_j`` bracket the grid
    maximum; per-frequency values are in ``lb_per_frequency`` /
    ``ub_per_frequency``.
    """
    if not eps_abs > 0.0:
        raise InputError(f"eps_abs must be positive, got {eps_abs}")
    if int(max_boxes) != max_boxes or max_boxes < 1:
        raise InputError(f"max_boxes must be a positive integer, got {max_boxes}")
    n = model.n_uncertain
    root = unit_box(n)
    evaluate = _Evaluator(n, seed, tau)
    metrics = Metrics()
    counter = itertools.count()
    lbs, ubs, iters, conv = [], [], [], []
    best_lb, best_flat, best_delta = -1.0, 0, None

    for flat in range(grid.size):
        where = grid.ij(flat)
        m = np.ascontiguousarray(freq_response(model, grid.points[flat]))
        rec = _record(metrics, evaluate(m, root, -math.inf, -math.inf), root, where,
                      next(counter), debug)
        lb_j, wit_j = rec.lb, rec.witness
        heap = [(-rec.ub, rec.seq, rec)]
        created, parts, ok = 1, 0, False
        while True:
            ub_j = -heap[0][0] if heap else lb_j
            if ub_j - lb_j <= eps_abs:
                ok = True
                break
            if created + 2 > max_boxes:
                break
            parent = heapq.heappop(heap)[2]
            kids = _split(parent.box)
            if kids is None:
                metrics.stalled += 1
                log.warning("box %r at %s is below the minimum edge width; dropped",
                            parent.box, where)
                continue
            parts += 1
            metrics.partitions += 1
            if debug:
                _check_children(parent.box, *kids)
            raised = False
            for q in kids:
                child = _record(metrics, evaluate(m, q, lb_j, lb_j), q, where,
                                next(counter), debug)
                created += 1
                if child.lb > lb_j:
                    lb_j, wit_j, raised = child.lb, child.witness, True
                if child.ub < lb_j:
                    metrics.boxes_pruned += 1
                else:
                    heapq.heappush(heap, (-child.ub, child.seq, child))
            if raised:
                keep = [e for e in heap if not e[2].ub < lb_j]
                metrics.boxes_pruned += len(heap) - len(keep)
                heap = keep
                heapq.heapify(heap)
        ub_j = max(-heap[0][0], lb_j) if heap else lb_j
        lbs.append(float(lb_j))
        ubs.append(float(ub_j))
        iters.append(parts)
        conv.append(ok)
        if lb_j > best_lb:
            best_lb, best_flat = lb_j, flat
            best_delta = None if wit_j is None else [float(x) for x in wit_j]

    peak = grid.ij(best_flat)
    return SweepResult(
        algorithm="conventional",
        mu_hat=float(max(lbs)),
        peak_omega=float(grid.points[best_flat]),
        peak_index=peak,
        r=iters,
        converged=all(conv) and metrics.stalled == 0,
        metrics=metrics,
        peak_delta=best_delta,
        mu_upper=float(max(ubs)),
        lb_per_frequency=lbs,
        ub_per_frequency=ubs,
        frequency_converged=conv,
    )


def compare(model, grid, eps_rel=0.01, eps_abs=0.005, IT=100,
            max_boxes=DEFAULT_MAX_BOXES, *, seed=0, workers=1):
    """Run both algorithms on the same grid and report the work ratio."""
    par = run_parallel(model, grid, eps_rel, IT, seed=seed, workers=workers)
    conv = run_conventional(model, grid, eps_abs, max_boxes, seed=seed)
    return Comparison(par, conv)
