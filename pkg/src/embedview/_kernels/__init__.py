"""Hot-loop kernels with a compiled core and a NumPy fallback.

The Cython extension (``embedview._kernels._native``) implements the two
loops that dominate runtime: the recursive Gaussian filter passes and the
point-splatting rasterizer. When the extension is missing (no compiler at
install time) the pure NumPy implementations take over; both produce
bit-identical output because they execute the same arithmetic in the same
per-pixel order.
"""

from . import _pure

try:
    from . import _native

    _default = _native
    BACKEND = "compiled"
except ImportError:  # extension not built
    _native = None
    _default = _pure
    BACKEND = "pure"

deriche_axis1 = _default.deriche_axis1
splat = _default.splat


def available_backends():
    names = ["pure"]
    if _native is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str = "auto"):
    """Return the kernel module for ``name`` ("auto", "compiled", "pure")."""
    if name == "auto":
        return _default
    if name == "pure":
        return _pure
    if name == "compiled":
        if _native is None:
            raise RuntimeError("compiled kernels are not available in this install")
        return _native
    raise ValueError(f"unknown backend {name!r}")
