"""Dense complex linear algebra used by the rest of the package.

Everything here is a thin, validated layer over LAPACK as exposed by numpy.
Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; tolerances
are always relative to the norm of the input.
"""

import numpy as np

from .errors import DimensionError, InputError, SingularMatrixError

__all__ = [
    "as_complex_matrix",
    "eigenvalues",
    "max_singular_value",
    "solve",
    "condition_2",
]

#: ratio sigma_min/sigma_max below which a matrix is treated as exactly singular
CONDITION_FLOOR = 1e-300


def as_complex_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D complex128 array.

    Raises
    ------
    DimensionError
        If ``m`` is not two-dimensional.
    InputError
        If any entry is NaN or infinite.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1 and a.size == 1:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    return a


def _square(m, name):
    a = as_complex_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def eigenvalues(m):
    """Eigenvalues of a square complex matrix, with multiplicity."""
    a = _square(m, "matrix")
    if a.size == 0:
        return np.empty(0, dtype=np.complex128)
    return np.linalg.eigvals(a)


def max_singular_value(m):
    """Largest singular value (spectral norm) of ``m``; 0 for empty input."""
    a = as_complex_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def condition_2(m):
    """Spectral condition number ``sigma_max / sigma_min``.

    Returns ``inf`` when ``sigma_min`` falls below ``1e-300 * sigma_max`` (this
    includes the zero matrix).
    """
    a = _square(m, "matrix")
    if a.size == 0:
        return 1.0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0 or s[-1] < CONDITION_FLOOR * s[0]:
        return float("inf")
    return float(s[0] / s[-1])


def solve(a, b):
    """Solve ``a @ x = b`` for ``x``.

    ``b`` may be a vector or a matrix. A system whose condition number exceeds
    ``1 / (n * machine_eps)`` is rejected as numerically rank deficient.

    Raises
    ------
    SingularMatrixError
        Carrying the condition estimate in ``.condition``.
    """
    a = _square(a, "a")
    b_arr = np.asarray(b, dtype=np.complex128)
    vector = b_arr.ndim == 1
    b2 = as_complex_matrix(b_arr.reshape(-1, 1) if vector else b_arr, "b")
    n = a.shape[0]
    if b2.shape[0] != n:
        raise DimensionError(
            f"a is {n}x{n} but b has {b2.shape[0]} rows")
    cond = condition_2(a)
    if not cond < 1.0 / (max(n, 1) * np.finfo(float).eps):
        raise SingularMatrixError(
            f"matrix is numerically singular (cond = {cond:.3e})", cond)
    x = np.linalg.solve(a, b2)
    return x[:, 0] if vector else x
