"""Pure numpy implementation of the per-box bound kernels.

This is the fallback used when the compiled ``_fast`` extension is not
available, and the reference the extension is tested against. Both follow the
same sequence of LAPACK calls (``zgeev`` / ``zgesvd``) so results agree to
rounding.

All functions take raw arrays: ``m`` is a C-contiguous ``complex128`` square
matrix, ``lo``/``hi`` are ``float64`` vectors and ``pats`` is a ``uint8``
corner-selection array (1 -> take ``hi``).
"""

import math

import numpy as np

from .constants import (
    COARSE,
    CROSSING_TOL,
    DEGENERATE_TOL,
    PERTURBATION,
    ROOT_TOL,
    RATIO_TOL,
)

__all__ = ["lambda_r_max", "lower_bound", "upper_bound", "max_singular_value"]


def max_singular_value(m):
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def _lrm_from_eigs(ev, tau):
    best = 0.0
    for z in ev:
        re = z.real
        if re > 0.0 and abs(z.imag) <= tau * (1.0 + abs(z)) and re > best:
            best = re
    return best


def lambda_r_max(m, tau):
    return _lrm_from_eigs(np.linalg.eigvals(m), tau)


def _charpoly(p):
    n = p.shape[0]
    if n == 1:
        return np.array([1.0, -p[0, 0]], dtype=np.complex128)
    if n == 2:
        return np.array(
            [1.0, -(p[0, 0] + p[1, 1]), p[0, 0] * p[1, 1] - p[0, 1] * p[1, 0]],
            dtype=np.complex128,
        )
    out = np.zeros(n + 1, dtype=np.complex128)
    out[0] = 1.0
    for i, z in enumerate(np.linalg.eigvals(p)):
        for k in range(i + 1, 0, -1):
            out[k] = out[k] - z * out[k - 1]
    return out


def _horner(coef, x):
    acc = coef[0]
    for c in coef[1:]:
        acc = acc * x + c
    return acc


def _real_roots_positive(p, cap):
    """Positive, numerically real roots of the real polynomial ``p`` that are <= cap."""
    nz = np.flatnonzero(p)
    if nz.size == 0:
        return []
    p = p[nz[0]:nz[-1] + 1]
    deg = p.size - 1
    if deg < 1:
        return []
    comp = np.zeros((deg, deg), dtype=np.complex128)
    comp[0, :] = -p[1:] / p[0]
    for i in range(1, deg):
        comp[i, i - 1] = 1.0
    dp = p[:-1] * np.arange(deg, 0, -1)
    out = []
    for z in np.linalg.eigvals(comp):
        x = z.real
        if not (x > 0.0 and abs(z.imag) <= ROOT_TOL * (1.0 + abs(z))):
            continue
        # one Newton step on the real polynomial
        fx = _horner(p, x)
        dfx = _horner(dp, x)
        if dfx != 0.0:
            x1 = x - fx / dfx
            if x1 > 0.0 and abs(_horner(p, x1)) <= abs(fx):
                x = x1
        if x <= cap:
            out.append(x)
    return out


def _edge_search(m, d, k, lo_k, hi_k, cap):
    """Largest real eigenvalue of ``m diag(d)`` with ``d[k]`` ranging over [lo_k, hi_k].

    ``det(alpha I - P - t m[:, k] e_k^T) = a(alpha) - t c(alpha)`` is affine in
    ``t``; ``t = a/c`` is real exactly where ``Im(a conj(c))`` vanishes. Returns
    ``(alpha, t)`` or ``(0.0, nan)``.
    """
    p_mat = m * d
    q_mat = p_mat.copy()
    q_mat[:, k] += m[:, k]
    a = _charpoly(p_mat)
    c = (a - _charpoly(q_mat))[1:]
    g = np.convolve(a, np.conj(c))
    pim = g.imag
    scale = np.max(np.abs(g))
    if scale == 0.0 or np.max(np.abs(pim)) <= DEGENERATE_TOL * scale:
        return 0.0, math.nan
    best, best_t = 0.0, math.nan
    for alpha in _real_roots_positive(pim, cap):
        cv = _horner(c, alpha)
        if cv == 0.0:
            continue
        t = _horner(a, alpha) / cv
        if abs(t.imag) > RATIO_TOL * (1.0 + abs(t)):
            continue
        tr = t.real
        if lo_k <= tr <= hi_k and alpha > best:
            best, best_t = alpha, tr
    return best, best_t


def lower_bound(m, lo, hi, pats, full, tau, cutoff):
    """Feasible-point lower bound on ``max lambda_R(m diag(delta))`` over the box.

    Evaluates the centre, the corners selected by ``pats`` and the edges leaving
    those corners. Stops as soon as the running value reaches ``cutoff``.
    Returns ``(value, witness)``.
    """
    n = lo.shape[0]
    center = 0.5 * (lo + hi)
    best = lambda_r_max(m * center, tau)
    wit = center
    if best >= cutoff:
        return best, wit
    corners = np.where(pats.astype(bool), hi, lo)
    for x in corners:
        v = lambda_r_max(m * x, tau)
        if v > best:
            best, wit = v, x
            if best >= cutoff:
                return best, wit
    mag = max(np.max(np.abs(lo)), np.max(np.abs(hi)))
    cap = max_singular_value(m) * mag * (1.0 + 1e-9)
    for x, pat in zip(corners, pats):
        for k in range(n):
            if lo[k] == hi[k] or (full and pat[k]):
                continue
            d = x.copy()
            d[k] = 0.0
            v, t = _edge_search(m, d, k, lo[k], hi[k], cap)
            if v > best:
                d[k] = t
                best, wit = v, d
                if best >= cutoff:
                    return best, wit
    return best, wit


def upper_bound(m, lo, hi, threshold, tau):
    """Sound upper bound on ``max lambda_R(m diag(delta))`` over the box.

    Returns ``(value, tag, early_exit)``; see ``musweep.bounds.upper_bound``.
    """
    n = lo.shape[0]
    mag = max(np.max(np.abs(lo)), np.max(np.abs(hi)))
    coarse = max_singular_value(m) * mag
    if coarse < threshold:
        return coarse, COARSE, True
    if coarse == 0.0:
        return 0.0, COARSE, False
    center = 0.5 * (lo + hi)
    radius = 0.5 * (hi - lo)
    a = m * center
    e = m * radius
    enorm = max_singular_value(e)
    if enorm == 0.0:
        pert = lambda_r_max(a, tau)
    else:
        ev, vecs = np.linalg.eig(a)
        s = np.linalg.svd(vecs, compute_uv=False)
        pert = math.inf
        if s[0] > 0.0 and s[-1] >= 1e-300 * s[0]:
            radius_bf = (s[0] / s[-1]) * enorm
            bf = 0.0
            for z in ev:
                im = abs(z.imag)
                if im <= radius_bf or (z.real > 0.0 and im <= tau * (1.0 + abs(z))):
                    v = z.real + math.sqrt(max(0.0, radius_bf * radius_bf - im * im))
                    if v > bf:
                        bf = v
            pert = bf
            if min(pert, coarse) < threshold:
                return min(pert, coarse), (PERTURBATION if pert < coarse else COARSE), True
        ham = np.zeros((2 * n, 2 * n), dtype=np.complex128)
        ham[:n, :n] = a
        ham[:n, n:] = e @ e.conj().T
        ham[n:, :n] = np.eye(n)
        ham[n:, n:] = a.conj().T
        ev2 = np.linalg.eigvals(ham)
        lim = CROSSING_TOL * (1.0 + np.max(np.abs(ev2)))
        res = _lrm_from_eigs(ev, tau)
        for z in ev2:
            if abs(z.imag) <= lim and z.real > res:
                res = z.real
        pert = min(pert, res)
    if pert < coarse:
        return pert, PERTURBATION, False
    return coarse, COARSE, False
