"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``ENGAGEMAX_PURE_PYTHON=1`` is set, the numpy fallback is used.  Both expose
the same functions: ``uniforms``, ``sample_dilution``, ``blahut_arimoto``,
``upper_hull`` and ``rk4_linear_backward``.
"""

import os

from . import _pykernels

if os.environ.get("ENGAGEMAX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND

uniforms = _impl.uniforms
sample_dilution = _impl.sample_dilution
blahut_arimoto = _impl.blahut_arimoto
upper_hull = _impl.upper_hull
rk4_linear_backward = _impl.rk4_linear_backward


def available_backends():
    """Map backend name -> kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
