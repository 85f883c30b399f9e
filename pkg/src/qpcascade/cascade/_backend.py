"""Select the cascade kernel at import time.

The compiled kernel is used when it was built; setting the environment
variable ``QPCASCADE_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None


def get_kernel(name=None):
    """Return a kernel module by name ("cython" or "python"); None picks the default."""
    if name is None:
        if os.environ.get("QPCASCADE_PURE_PYTHON") or _ckernel is None:
            return _pykernel
        return _ckernel
    if name == "python":
        return _pykernel
    if name == "cython":
        if _ckernel is None:
            raise ImportError("compiled kernel qpcascade.cascade._ckernel is not built")
        return _ckernel
    raise ValueError(f"unknown kernel {name!r}")


def available_kernels():
    return ["python"] + (["cython"] if _ckernel is not None else [])


kernel = get_kernel()
BACKEND = kernel.BACKEND
