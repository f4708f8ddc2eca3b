"""Hot numeric kernels with selectable backend.

Two interchangeable implementations exist: a numba-compiled one (module
``nb_backend``, the default when numba imports cleanly) and a pure
NumPy/SciPy one (``np_backend``). The environment variable
``ENSCORE_BACKEND`` picks the path: ``numba``, ``numpy``, or ``auto``
(default). ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from ._common import GAUSS_KERNEL, GAUSS_RADIUS, GAUSS_SIGMA

__all__ = [
    "BACKEND",
    "GAUSS_KERNEL",
    "GAUSS_RADIUS",
    "GAUSS_SIGMA",
    "gauss_valid",
    "ols_distances",
    "w1_pixels",
    "w1_scalar",
]


def _load_backend():
    requested = os.environ.get("ENSCORE_BACKEND", "auto").strip().lower()
    if requested in ("auto", ""):
        try:
            from . import nb_backend as impl
        except ImportError:
            from . import np_backend as impl
        return impl
    if requested == "numba":
        from . import nb_backend as impl
    elif requested == "numpy":
        from . import np_backend as impl
    else:
        raise ValueError(
            f"ENSCORE_BACKEND={requested!r}; expected 'numba', 'numpy', or 'auto'"
        )
    return impl


_impl = _load_backend()
BACKEND: str = _impl.NAME

ols_distances = _impl.ols_distances
w1_pixels = _impl.w1_pixels
w1_scalar = _impl.w1_scalar
gauss_valid = _impl.gauss_valid
