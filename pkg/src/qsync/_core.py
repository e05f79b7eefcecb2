"""Kernel backend selection.

Uses the compiled ``_kernels`` extension when importable, otherwise the
pure-Python ``_fallback``. Set ``QSYNC_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("QSYNC_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

h_closed_form_array = _impl.h_closed_form_array
volterra_recursive = _impl.volterra_recursive
volterra_direct = _impl.volterra_direct
fnv1a64 = _impl.fnv1a64

__all__ = [
    "BACKEND",
    "h_closed_form_array",
    "volterra_recursive",
    "volterra_direct",
    "fnv1a64",
]
