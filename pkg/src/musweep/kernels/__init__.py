"""Per-box bound kernels with a compiled fast path.

``_fast`` (Cython, LAPACK through ``scipy.linalg.cython_lapack``) is used when
it has been built; otherwise the numpy ``reference`` module is. Set
``MUSWEEP_KERNEL=python`` to force the fallback, or call :func:`use`.
"""

import os

from . import reference
from .constants import COARSE, PERTURBATION, TAG_NAMES, TAU_IMAG

try:
    from . import _fast
except ImportError:  # extension not built
    _fast = None

__all__ = ["active", "available", "use", "backend_name", "TAU_IMAG", "TAG_NAMES",
           "COARSE", "PERTURBATION"]

_BACKENDS = {"python": reference}
if _fast is not None:
    _BACKENDS["cython"] = _fast

active = reference


def available():
    """Names of the kernel backends that can be selected."""
    return sorted(_BACKENDS)


def use(name):
    """Select the kernel backend (``"cython"`` or ``"python"``); returns the previous name."""
    global active
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} not available; have {available()}")
    prev = backend_name()
    active = _BACKENDS[name]
    return prev


def backend_name():
    return "cython" if active is _fast and _fast is not None else "python"


_requested = os.environ.get("MUSWEEP_KERNEL", "").strip().lower()
if _requested:
    use(_requested)
elif _fast is not None:
    active = _fast
