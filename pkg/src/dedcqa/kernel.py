"""Kernel backend selection.

The compiled extension and its pure-Python twin expose the same five
functions; whichever is importable wins, with ``CQA_PURE_KERNEL=1``
forcing the fallback (the benchmark and the backend-equivalence tests
use that knob).
"""

from __future__ import annotations

import os

from . import _bitkernel_py as _pure

if os.environ.get("CQA_PURE_KERNEL") == "1":
    _impl = _pure
else:
    try:
        from . import _bitkernel as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND

is_consistent = _impl.is_consistent
consistent_masks = _impl.consistent_masks
maximal_consistent_masks = _impl.maximal_consistent_masks
weakly_consistent_table = _impl.weakly_consistent_table
exists_consistent_superset = _impl.exists_consistent_superset

pure = _pure
