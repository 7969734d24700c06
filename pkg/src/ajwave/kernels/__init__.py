"""Hot inner loops: compiled Cython core with a pure-Python fallback.

The compiled module is used when it imports cleanly. Set ``AJWAVE_PURE_PYTHON=1``
to force the fallback.
"""

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = ("jacobi_eigh", "line_minimize", "ppm_synthesize", "ppm_correlate")


def available_backends():
    return ["cython", "python"] if _ckernels is not None else ["python"]


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


if _ckernels is not None and not os.environ.get("AJWAVE_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = get_backend(BACKEND)
jacobi_eigh = _impl.jacobi_eigh
line_minimize = _impl.line_minimize
ppm_synthesize = _impl.ppm_synthesize
ppm_correlate = _impl.ppm_correlate

__all__ = ["BACKEND", "available_backends", "get_backend", *_NAMES]
