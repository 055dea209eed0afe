"""Hot numeric kernels with a compiled core and a NumPy fallback.

The compiled Cython extension is preferred when present; set the
environment variable ``LOGIFOLD_PURE_PYTHON=1`` to force the fallback.
``BACKEND`` names the implementation actually in use.
"""

import os

from . import reference

if os.environ.get("LOGIFOLD_PURE_PYTHON"):
    _impl = reference
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = reference

BACKEND = _impl.BACKEND

row_entropy_nats = _impl.row_entropy_nats
row_cross_entropy_nats = _impl.row_cross_entropy_nats
pair_cross_total_nats = _impl.pair_cross_total_nats
batch_pair_cross_total_nats = _impl.batch_pair_cross_total_nats

__all__ = [
    "BACKEND",
    "batch_pair_cross_total_nats",
    "pair_cross_total_nats",
    "reference",
    "row_cross_entropy_nats",
    "row_entropy_nats",
]
