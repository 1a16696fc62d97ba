"""Backend selection for the hot advection/evaluation kernels.

The compiled Cython core is preferred when it imported successfully; the
pure-NumPy implementation is numerically equivalent (to roundoff) and is
used as a fallback.  Override with FLOEDA_BACKEND={auto,cython,numpy}.
"""

import os

_choice = os.environ.get("FLOEDA_BACKEND", "auto").lower()
if _choice not in ("auto", "cython", "numpy"):
    raise ValueError(f"FLOEDA_BACKEND must be auto, cython or numpy, got {_choice!r}")

if _choice == "numpy":
    from floeda._kernels import numpy_backend as _impl

    BACKEND = "numpy"
else:
    try:
        from floeda._kernels import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        from floeda._kernels import numpy_backend as _impl

        BACKEND = "numpy"

eval_point_velocity = _impl.eval_point_velocity
advance_system = _impl.advance_system

__all__ = ["BACKEND", "eval_point_velocity", "advance_system"]
