"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy/pure-Python ``_pykernels`` module is used. Setting the environment
variable ``DIPMSC_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("DIPMSC_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

impl = BACKENDS[BACKEND]


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        return impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None
