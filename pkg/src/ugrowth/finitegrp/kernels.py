"""Kernel backend selection.

The compiled extension is used when it imports; setting UGROWTH_PURE_PYTHON=1
forces the pure-Python kernels.  Both expose girth, collision_depth,
orbit_size and min_expansion with identical results.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:     # extension not built
    _ckernels = None


def backend(name=None):
    """Kernel module by name ('cython' or 'python'); None picks the default."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not available")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


if _ckernels is not None and os.environ.get("UGROWTH_PURE_PYTHON", "") != "1":
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = backend(BACKEND)
girth = _impl.girth
collision_depth = _impl.collision_depth
orbit_size = _impl.orbit_size
min_expansion = _impl.min_expansion
