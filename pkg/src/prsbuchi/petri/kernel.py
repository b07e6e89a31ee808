"""Backend selection for the marking kernels.

The compiled extension is used when it was built and ``PRSBUCHI_PURE`` is
unset; otherwise the pure-Python module is used.
"""
from __future__ import annotations

import os

BACKEND = "python"
if not os.environ.get("PRSBUCHI_PURE"):
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _impl
else:
    from . import _kernel_py as _impl

OMEGA = _impl.OMEGA
fire = _impl.fire
successors = _impl.successors
leq = _impl.leq
pre_image = _impl.pre_image
covered = _impl.covered
insert_minimal = _impl.insert_minimal
omega_fire = _impl.omega_fire
omega_leq = _impl.omega_leq
accelerate = _impl.accelerate
