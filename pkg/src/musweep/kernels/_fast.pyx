# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-box bound kernels.

Same algorithms and call sequence as ``musweep.kernels.reference``; LAPACK is
reached through ``scipy.linalg.cython_lapack`` and all numerical work runs
without the GIL so bound evaluations can overlap across threads.
"""

from libc.math cimport sqrt, fabs, INFINITY, NAN
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from scipy.linalg.cython_lapack cimport zgeev, zgesvd

import numpy as np

ctypedef double complex z_t

from .constants import (
    TAU_IMAG as _TAU, ROOT_TOL as _ROOT_TOL, RATIO_TOL as _RATIO_TOL,
    DEGENERATE_TOL as _DEG_TOL, CROSSING_TOL as _CROSS_TOL,
    COARSE as _COARSE, PERTURBATION as _PERT,
)

cdef double ROOT_TOL = _ROOT_TOL
cdef double RATIO_TOL = _RATIO_TOL
cdef double DEGENERATE_TOL = _DEG_TOL
cdef double CROSSING_TOL = _CROSS_TOL
cdef int COARSE = _COARSE
cdef int PERTURBATION = _PERT


cdef struct Work:
    int n          # problem size
    int big        # 2n, largest matrix handled
    int lwork
    z_t* mat       # LAPACK input copy, big*big
    z_t* w         # eigenvalues, big
    z_t* w2        # eigenvalues (second set), big
    z_t* vr        # right eigenvectors, n*n (column-major)
    z_t* work      # LAPACK workspace
    z_t* p         # n*n scratch
    z_t* q         # n*n scratch
    z_t* e         # n*n scratch
    z_t* ham       # big*big
    z_t* pa        # n+1
    z_t* pb        # n+1
    z_t* pc        # n
    z_t* g         # 2n
    double* rp     # 2n real polynomial
    double* dp     # 2n derivative
    double* s      # singular values, big
    double* rwork  # 5*big + 8
    double* d      # n
    double* wit    # n
    double* x      # n (corner)


cdef Work* work_new(int n) nogil:
    cdef Work* ws = <Work*> malloc(sizeof(Work))
    if ws == NULL:
        return NULL
    cdef int big = 2 * n if n > 1 else 2
    ws.n = n
    ws.big = big
    ws.lwork = 66 * big + 64
    ws.mat = <z_t*> malloc(big * big * sizeof(z_t))
    ws.w = <z_t*> malloc(big * sizeof(z_t))
    ws.w2 = <z_t*> malloc(big * sizeof(z_t))
    ws.vr = <z_t*> malloc(n * n * sizeof(z_t))
    ws.work = <z_t*> malloc(ws.lwork * sizeof(z_t))
    ws.p = <z_t*> malloc(n * n * sizeof(z_t))
    ws.q = <z_t*> malloc(n * n * sizeof(z_t))
    ws.e = <z_t*> malloc(n * n * sizeof(z_t))
    ws.ham = <z_t*> malloc(big * big * sizeof(z_t))
    ws.pa = <z_t*> malloc((n + 1) * sizeof(z_t))
    ws.pb = <z_t*> malloc((n + 1) * sizeof(z_t))
    ws.pc = <z_t*> malloc((n + 1) * sizeof(z_t))
    ws.g = <z_t*> malloc((2 * n + 1) * sizeof(z_t))
    ws.rp = <double*> malloc((2 * n + 1) * sizeof(double))
    ws.dp = <double*> malloc((2 * n + 1) * sizeof(double))
    ws.s = <double*> malloc(big * sizeof(double))
    ws.rwork = <double*> malloc((5 * big + 8) * sizeof(double))
    ws.d = <double*> malloc(n * sizeof(double))
    ws.wit = <double*> malloc(n * sizeof(double))
    ws.x = <double*> malloc(n * sizeof(double))
    return ws


cdef void work_free(Work* ws) nogil:
    if ws == NULL:
        return
    free(ws.mat); free(ws.w); free(ws.w2); free(ws.vr); free(ws.work)
    free(ws.p); free(ws.q); free(ws.e); free(ws.ham)
    free(ws.pa); free(ws.pb); free(ws.pc); free(ws.g)
    free(ws.rp); free(ws.dp); free(ws.s); free(ws.rwork)
    free(ws.d); free(ws.wit); free(ws.x)
    free(ws)


cdef int eig(Work* ws, int n, const z_t* a, z_t* w, bint vectors) noexcept nogil:
    """Eigenvalues (and optionally right eigenvectors into ws.vr) of row-major a."""
    cdef int i, j, info = 0, one = 1, lwork = ws.lwork
    cdef char jobvl = b'N'
    cdef char jobvr = b'V' if vectors else b'N'
    for i in range(n):
        for j in range(n):
            ws.mat[i + j * n] = a[i * n + j]
    zgeev(&jobvl, &jobvr, &n, ws.mat, &n, w, ws.vr, &one,
          ws.vr if vectors else ws.mat, &n if vectors else &one,
          ws.work, &lwork, ws.rwork, &info)
    return info


cdef int svals(Work* ws, int rows, int cols, const z_t* a, bint colmajor) noexcept nogil:
    """Singular values of a rows x cols matrix into ws.s (descending)."""
    cdef int i, j, info = 0, one = 1, lwork = ws.lwork
    cdef char job = b'N'
    if colmajor:
        memcpy(ws.mat, a, rows * cols * sizeof(z_t))
    else:
        for i in range(rows):
            for j in range(cols):
                ws.mat[i + j * rows] = a[i * cols + j]
    zgesvd(&job, &job, &rows, &cols, ws.mat, &rows, ws.s, ws.mat, &one,
           ws.mat, &one, ws.work, &lwork, ws.rwork, &info)
    return info


cdef double smax(Work* ws, int n, const z_t* a) noexcept nogil:
    if n == 0:
        return 0.0
    svals(ws, n, n, a, False)
    return ws.s[0]


cdef double lrm_from(const z_t* w, int n, double tau) noexcept nogil:
    cdef double best = 0.0, re
    cdef int i
    for i in range(n):
        re = (w[i]).real
        if re > 0.0 and fabs((w[i]).imag) <= tau * (1.0 + abs(w[i])) and re > best:
            best = re
    return best


cdef void scale_cols(int n, const z_t* m, const double* d, z_t* out) noexcept nogil:
    cdef int i, j
    for i in range(n):
        for j in range(n):
            out[i * n + j] = m[i * n + j] * d[j]


cdef double lrm(Work* ws, int n, const z_t* a, double tau) noexcept nogil:
    eig(ws, n, a, ws.w, False)
    return lrm_from(ws.w, n, tau)


cdef void charpoly(Work* ws, int n, const z_t* p, z_t* out) noexcept nogil:
    cdef int i, k
    cdef z_t zz
    if n == 1:
        out[0] = 1.0
        out[1] = -p[0]
        return
    if n == 2:
        out[0] = 1.0
        out[1] = -(p[0] + p[3])
        out[2] = p[0] * p[3] - p[1] * p[2]
        return
    eig(ws, n, p, ws.w2, False)
    out[0] = 1.0
    for i in range(1, n + 1):
        out[i] = 0.0
    for i in range(n):
        zz = ws.w2[i]
        for k in range(i + 1, 0, -1):
            out[k] = out[k] - zz * out[k - 1]


cdef inline double horner_r(const double* c, int len_, double x) noexcept nogil:
    cdef double acc = c[0]
    cdef int i
    for i in range(1, len_):
        acc = acc * x + c[i]
    return acc


cdef inline z_t horner_c(const z_t* c, int len_, double x) noexcept nogil:
    cdef z_t acc = c[0]
    cdef int i
    for i in range(1, len_):
        acc = acc * x + c[i]
    return acc


cdef double edge_search(Work* ws, int n, const z_t* m, const double* d, int k,
                        double lo_k, double hi_k, double cap, double* t_out) noexcept nogil:
    cdef int i, j, f, l, deg, glen = 2 * n
    cdef double scale, pmax, x, fx, dfx, x1, best = 0.0, tr
    cdef z_t cv, t, zz
    t_out[0] = NAN
    scale_cols(n, m, d, ws.p)
    memcpy(ws.q, ws.p, n * n * sizeof(z_t))
    for i in range(n):
        ws.q[i * n + k] = ws.q[i * n + k] + m[i * n + k]
    charpoly(ws, n, ws.p, ws.pa)
    charpoly(ws, n, ws.q, ws.pb)
    for i in range(n):
        ws.pc[i] = ws.pa[i + 1] - ws.pb[i + 1]
    # g = pa (*) conj(pc), length (n+1) + n - 1 = 2n
    for i in range(glen):
        ws.g[i] = 0.0
    for i in range(n + 1):
        for j in range(n):
            ws.g[i + j] = ws.g[i + j] + ws.pa[i] * (ws.pc[j]).conjugate()
    scale = 0.0
    pmax = 0.0
    for i in range(glen):
        ws.rp[i] = (ws.g[i]).imag
        if abs(ws.g[i]) > scale:
            scale = abs(ws.g[i])
        if fabs(ws.rp[i]) > pmax:
            pmax = fabs(ws.rp[i])
    if scale == 0.0 or pmax <= DEGENERATE_TOL * scale:
        return 0.0
    f = 0
    while ws.rp[f] == 0.0:
        f += 1
    l = glen - 1
    while ws.rp[l] == 0.0:
        l -= 1
    deg = l - f
    if deg < 1:
        return 0.0
    cdef double* p = ws.rp + f
    for i in range(deg * deg):
        ws.ham[i] = 0.0
    for j in range(deg):
        ws.ham[j] = -p[1 + j] / p[0]
    for i in range(1, deg):
        ws.ham[i * deg + i - 1] = 1.0
    for i in range(deg):
        ws.dp[i] = p[i] * (deg - i)
    eig(ws, deg, ws.ham, ws.w, False)
    for i in range(deg):
        zz = ws.w[i]
        x = (zz).real
        if not (x > 0.0 and fabs((zz).imag) <= ROOT_TOL * (1.0 + abs(zz))):
            continue
        fx = horner_r(p, deg + 1, x)
        dfx = horner_r(ws.dp, deg, x)
        if dfx != 0.0:
            x1 = x - fx / dfx
            if x1 > 0.0 and fabs(horner_r(p, deg + 1, x1)) <= fabs(fx):
                x = x1
        if x > cap:
            continue
        cv = horner_c(ws.pc, n, x)
        if cv == 0.0:
            continue
        t = horner_c(ws.pa, n + 1, x) / cv
        if fabs((t).imag) > RATIO_TOL * (1.0 + abs(t)):
            continue
        tr = (t).real
        if lo_k <= tr and tr <= hi_k and x > best:
            best = x
            t_out[0] = tr
    return best


cdef double lower_c(Work* ws, int n, const z_t* m, const double* lo, const double* hi,
                    const unsigned char* pats, int npats, bint full, double tau,
                    double cutoff) noexcept nogil:
    cdef int i, k, c
    cdef double best, v, mag = 0.0, cap, t
    for i in range(n):
        ws.wit[i] = 0.5 * (lo[i] + hi[i])
    scale_cols(n, m, ws.wit, ws.e)
    best = lrm(ws, n, ws.e, tau)
    if best >= cutoff:
        return best
    for c in range(npats):
        for i in range(n):
            ws.x[i] = hi[i] if pats[c * n + i] else lo[i]
        scale_cols(n, m, ws.x, ws.e)
        v = lrm(ws, n, ws.e, tau)
        if v > best:
            best = v
            memcpy(ws.wit, ws.x, n * sizeof(double))
            if best >= cutoff:
                return best
    for i in range(n):
        if fabs(lo[i]) > mag:
            mag = fabs(lo[i])
        if fabs(hi[i]) > mag:
            mag = fabs(hi[i])
    cap = smax(ws, n, m) * mag * (1.0 + 1e-9)
    for c in range(npats):
        for k in range(n):
            if lo[k] == hi[k] or (full and pats[c * n + k]):
                continue
            for i in range(n):
                ws.d[i] = hi[i] if pats[c * n + i] else lo[i]
            ws.d[k] = 0.0
            v = edge_search(ws, n, m, ws.d, k, lo[k], hi[k], cap, &t)
            if v > best:
                best = v
                ws.d[k] = t
                memcpy(ws.wit, ws.d, n * sizeof(double))
                if best >= cutoff:
                    return best
    return best


cdef double upper_c(Work* ws, int n, const z_t* m, const double* lo, const double* hi,
                    double threshold, double tau, int* tag, bint* early) noexcept nogil:
    cdef int i, j, k, nn = 2 * n
    cdef double mag = 0.0, coarse, enorm, rbf, bf, im, v, lim, res, pert, specrad
    cdef z_t acc
    early[0] = False
    tag[0] = COARSE
    for i in range(n):
        if fabs(lo[i]) > mag:
            mag = fabs(lo[i])
        if fabs(hi[i]) > mag:
            mag = fabs(hi[i])
    coarse = smax(ws, n, m) * mag
    if coarse < threshold:
        early[0] = True
        return coarse
    if coarse == 0.0:
        return 0.0
    for i in range(n):
        ws.d[i] = 0.5 * (lo[i] + hi[i])
        ws.x[i] = 0.5 * (hi[i] - lo[i])
    scale_cols(n, m, ws.d, ws.p)   # centre matrix
    scale_cols(n, m, ws.x, ws.e)   # perturbation scale
    enorm = smax(ws, n, ws.e)
    if enorm == 0.0:
        pert = lrm(ws, n, ws.p, tau)
    else:
        eig(ws, n, ws.p, ws.w, True)
        memcpy(ws.w2, ws.w, n * sizeof(z_t))
        svals(ws, n, n, ws.vr, True)
        pert = INFINITY
        if ws.s[0] > 0.0 and ws.s[n - 1] >= 1e-300 * ws.s[0]:
            rbf = (ws.s[0] / ws.s[n - 1]) * enorm
            bf = 0.0
            for i in range(n):
                im = fabs((ws.w2[i]).imag)
                if im <= rbf or ((ws.w2[i]).real > 0.0 and im <= tau * (1.0 + abs(ws.w2[i]))):
                    v = rbf * rbf - im * im
                    v = (ws.w2[i]).real + sqrt(v if v > 0.0 else 0.0)
                    if v > bf:
                        bf = v
            pert = bf
            if (pert if pert < coarse else coarse) < threshold:
                early[0] = True
                if pert < coarse:
                    tag[0] = PERTURBATION
                    return pert
                return coarse
        for i in range(nn * nn):
            ws.ham[i] = 0.0
        for i in range(n):
            for j in range(n):
                ws.ham[i * nn + j] = ws.p[i * n + j]
                ws.ham[(n + i) * nn + n + j] = (ws.p[j * n + i]).conjugate()
                acc = 0.0
                for k in range(n):
                    acc = acc + ws.e[i * n + k] * (ws.e[j * n + k]).conjugate()
                ws.ham[i * nn + n + j] = acc
            ws.ham[(n + i) * nn + i] = 1.0
        eig(ws, nn, ws.ham, ws.w, False)
        specrad = 0.0
        for i in range(nn):
            if abs(ws.w[i]) > specrad:
                specrad = abs(ws.w[i])
        lim = CROSSING_TOL * (1.0 + specrad)
        res = lrm_from(ws.w2, n, tau)
        for i in range(nn):
            if fabs((ws.w[i]).imag) <= lim and (ws.w[i]).real > res:
                res = (ws.w[i]).real
        if res < pert:
            pert = res
    if pert < coarse:
        tag[0] = PERTURBATION
        return pert
    return coarse


def max_singular_value(const z_t[:, ::1] m):
    cdef int n = m.shape[0]
    cdef Work* ws
    cdef double out
    if m.shape[0] * m.shape[1] == 0:
        return 0.0
    if m.shape[0] != m.shape[1]:
        return float(np.linalg.svd(np.asarray(m), compute_uv=False)[0])
    ws = work_new(n)
    if ws == NULL:
        raise MemoryError()
    with nogil:
        out = smax(ws, n, &m[0, 0])
    work_free(ws)
    return out


def lambda_r_max(const z_t[:, ::1] m, double tau):
    cdef int n = m.shape[0]
    cdef Work* ws = work_new(n)
    cdef double out
    if ws == NULL:
        raise MemoryError()
    with nogil:
        out = lrm(ws, n, &m[0, 0], tau)
    work_free(ws)
    return out


def lower_bound(const z_t[:, ::1] m, const double[::1] lo, const double[::1] hi,
                const unsigned char[:, ::1] pats, bint full, double tau, double cutoff):
    cdef int n = m.shape[0]
    cdef int npats = pats.shape[0]
    cdef Work* ws = work_new(n)
    cdef double best
    if ws == NULL:
        raise MemoryError()
    with nogil:
        best = lower_c(ws, n, &m[0, 0], &lo[0], &hi[0],
                       &pats[0, 0] if npats > 0 else NULL, npats, full, tau, cutoff)
    wit = np.empty(n)
    cdef double[::1] wv = wit
    cdef int i
    for i in range(n):
        wv[i] = ws.wit[i]
    work_free(ws)
    return best, wit


def upper_bound(const z_t[:, ::1] m, const double[::1] lo, const double[::1] hi,
                double threshold, double tau):
    cdef int n = m.shape[0]
    cdef Work* ws = work_new(n)
    cdef double out
    cdef int tag
    cdef bint early
    if ws == NULL:
        raise MemoryError()
    with nogil:
        out = upper_c(ws, n, &m[0, 0], &lo[0], &hi[0], threshold, tau, &tag, &early)
    work_free(ws)
    return out, tag, bool(early)
