"""Hot-loop kernels with two interchangeable backends.

The numba backend JIT-compiles the fused per-macrocell recovery / flux /
divergence loop; the numpy backend is a vectorized pure-numpy fallback with
identical semantics.  Selection order: an explicit ``name`` argument, the
``ENOSV_BACKEND`` environment variable (``numba`` or ``numpy``), then numba
when importable.  ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os
import warnings

from enosv.errors import ConfigError

BACKEND_ENV = "ENOSV_BACKEND"
BACKEND_NAMES = ("numba", "numpy")

_cache = {}


def get_backend(name: str | None = None):
    """Return the kernel backend module (lazily imported, cached)."""
    if name is None:
        name = os.environ.get(BACKEND_ENV, "").strip().lower() or None
    if name is not None and name not in BACKEND_NAMES:
        raise ConfigError(
            f"unknown backend {name!r}; choose from {BACKEND_NAMES}"
        )
    requested = name
    if name is None:
        name = "numba"
    if name not in _cache:
        if name == "numba":
            try:
                from enosv.kernels import numba_backend as module
            except ImportError:
                if requested == "numba":
                    raise ConfigError("numba backend requested but numba is "
                                      "not importable")
                warnings.warn("numba unavailable, falling back to the numpy "
                              "backend", RuntimeWarning, stacklevel=2)
                from enosv.kernels import numpy_backend as module
                name = "numpy"
        else:
            from enosv.kernels import numpy_backend as module
        _cache[name] = module
    return _cache[name]
