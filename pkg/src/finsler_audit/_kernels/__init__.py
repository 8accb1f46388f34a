"""Hot kernels: compiled extension when available, numpy fallback otherwise.

Set ``FINSLER_AUDIT_PURE=1`` to force the numpy versions.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("FINSLER_AUDIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

randers_legendre_inv = _impl.randers_legendre_inv
pcg = _impl.pcg
randers_tensor = _pykernels.randers_tensor
randers_legendre = _pykernels.randers_legendre

__all__ = ["BACKEND", "pcg", "randers_legendre", "randers_legendre_inv", "randers_tensor"]
