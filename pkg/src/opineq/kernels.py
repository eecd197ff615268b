"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set OPINEQ_PURE_PYTHON=1 to force the numpy fallback (used by the
benchmark and the backend-agreement tests).
"""

import os

from . import _kernels_py

if os.environ.get("OPINEQ_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _kernels_py

backend_name = _impl.backend_name
polar_batch = _impl.polar_batch

python_impl = _kernels_py


def available_backends():
    names = {"python": _kernels_py.polar_batch}
    try:
        from . import _ckernels
        names["cython"] = _ckernels.polar_batch
    except ImportError:
        pass
    return names
