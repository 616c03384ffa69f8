"""Generalized plant ``M(s) = C (sI - A)^-1 B + D`` and its frequency response."""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DimensionError, InputError, SingularMatrixError, SingularFrequencyError

__all__ = ["StateSpaceModel", "freq_response"]


def _real_matrix(x, name):
    a = np.array(x, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    bad = np.argwhere(~np.isfinite(a))
    if bad.size:
        r, c = bad[0]
        raise InputError(f"{name}[{r}][{c}] is not finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Continuous-time LTI model with real matrices.

    The uncertainty loop closes ``Delta`` around the ``n`` inputs/outputs, so
    ``C`` must have as many rows as ``B`` has columns. ``D`` defaults to zero.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        A = _real_matrix(self.A, "A")
        B = _real_matrix(self.B, "B")
        C = _real_matrix(self.C, "C")
        nx = A.shape[0]
        if A.shape != (nx, nx):
            raise DimensionError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != nx:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {nx} (rows of A)")
        if C.shape[1] != nx:
            raise DimensionError(f"C has {C.shape[1]} columns, expected {nx} (rows of A)")
        n_u, n_y = B.shape[1], C.shape[0]
        if n_u != n_y:
            raise DimensionError(
                f"M(s) must be square for M*Delta: C has {n_y} rows but B has {n_u} columns")
        if n_u < 1:
            raise DimensionError("model needs at least one uncertainty channel")
        D = np.zeros((n_y, n_u)) if self.D is None else self.D
        D = _real_matrix(D, "D")
        if D.shape != (n_y, n_u):
            raise DimensionError(f"D must be {n_y}x{n_u}, got shape {D.shape}")
        for name, val in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, val)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_uncertain(self):
        """Number of real scalar uncertainty parameters (size of ``M``)."""
        return self.B.shape[1]


def freq_response(model, omega):
    """Evaluate ``M(j*omega)`` as an ``n x n`` complex array.

    ``j*omega*I - A`` is factored once and solved against all columns of ``B``.

    Raises
    ------
    SingularFrequencyError
        If ``j*omega`` is (numerically) an eigenvalue of ``A``.
    """
    omega = float(omega)
    if not np.isfinite(omega):
        raise InputError(f"frequency must be finite, got {omega!r}")
    nx = model.n_states
    if nx == 0:
        return model.D.astype(np.complex128)
    lhs = 1j * omega * np.eye(nx) - model.A
    try:
        x = numerics.solve(lhs, model.B)
    except SingularMatrixError as exc:
        raise SingularFrequencyError(omega, exc.condition) from exc
    return model.C @ x + model.D
