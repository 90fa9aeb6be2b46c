"""Kernel backend selection.

The hot inner loops (sparse dot/add, sorted-index intersection, ADWIN
insertion) live in a compiled Cython extension with a pure-Python twin.
The compiled backend is used when available; set ``ACTSTREAM_PURE_PYTHON=1``
to force the fallback.  Both backends are bit-compatible, so experiment
outputs do not depend on which one is active.
"""

import os

from . import _pyref

if os.environ.get("ACTSTREAM_PURE_PYTHON"):
    _impl = _pyref
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pyref

BACKEND = _impl.IMPL

sparse_dot = _impl.sparse_dot
sparse_add = _impl.sparse_add
intersect_size = _impl.intersect_size
AdwinEngine = _impl.AdwinEngine


def rebuild_adwin(state):
    """Unpickle hook: rebuild a detector state on whichever backend is active."""
    engine = AdwinEngine(state["delta"], state["max_buckets"])
    engine.set_state(state)
    return engine


__all__ = [
    "BACKEND",
    "AdwinEngine",
    "intersect_size",
    "rebuild_adwin",
    "sparse_add",
    "sparse_dot",
]
