"""Hot-kernel backend selection.

The compiled extension is preferred when it built successfully; the
pure-numpy fallback is always available.  Set ``BITEMPER_PURE=1`` to force
the fallback (useful for benchmarking the two side by side).
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BITEMPER_PURE") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

KIND_MIN = _kernels_py.KIND_MIN
KIND_SQRT = _kernels_py.KIND_SQRT
KIND_BOUNDED_SQRT = _kernels_py.KIND_BOUNDED_SQRT
KIND_MAX = _kernels_py.KIND_MAX

log_ratios = _impl.log_ratios
single_log_ratio = _impl.single_log_ratio
log_h = _impl.log_h
informed_step = _impl.informed_step
ssiit_advance = _impl.ssiit_advance
