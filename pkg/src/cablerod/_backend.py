"""Pick the compiled kernels when they are importable, else the numpy fallback.

Set ``CABLEROD_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("CABLEROD_PURE_PYTHON", "") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

loaded_rk4_end = _impl.loaded_rk4_end
loaded_rk4_path = _impl.loaded_rk4_path
chord_terms = _impl.chord_terms
