"""Selects the compiled kernel module, falling back to pure numpy.

Set CIRCGP_PURE=1 to force the numpy implementations even when the
compiled extension is available (used by the backend benchmark and for
debugging).  Both backends implement the same contracts; results agree
to floating-point roundoff, so a fixed seed reproduces a run exactly
only on the same backend.
"""

import os

_force_pure = os.environ.get("CIRCGP_PURE", "").strip().lower() in {"1", "true", "yes"}

if _force_pure:
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "python"


def active_backend():
    """Name of the kernel backend in use: 'cython' or 'python'."""
    return BACKEND
