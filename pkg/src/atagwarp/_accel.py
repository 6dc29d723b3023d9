"""Backend selection for the per-pixel kernels.

Hot loops are written twice: once as a numba ``@njit`` kernel and once as a
vectorised numpy expression.  Numba is used when it imports cleanly and the
environment variable ``ATAGWARP_DISABLE_NUMBA`` is not set to a truthy value.
The choice is re-read on every dispatch so tests and benchmarks can flip it
with :func:`set_backend`.
"""
import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAS_NUMBA = False

_TRUTHY = {"1", "true", "yes", "on"}
_override = None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    kwargs.setdefault("cache", True)
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda fn: fn


def use_numba():
    if _override is not None:
        return _override == "numba" and HAS_NUMBA
    flag = os.environ.get("ATAGWARP_DISABLE_NUMBA", "").strip().lower()
    return HAS_NUMBA and flag not in _TRUTHY


def set_backend(name):
    """Force ``"numba"`` or ``"numpy"``; ``None`` restores the env-flag default."""
    global _override
    if name not in (None, "numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _override = name


def backend_name():
    return "numba" if use_numba() else "numpy"
