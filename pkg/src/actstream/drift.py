"""ADWIN change detection over a stream of bounded reals.

The detector keeps an adaptive window of everything inserted so far,
compressed into an exponential histogram, and drops the oldest buckets
whenever some split of the window into an older and a newer part shows a
mean difference larger than the cut threshold.  Callers feed it the 0/1
prediction-error stream; a drop event signals concept drift.
"""

from __future__ import annotations

import math

from ._kernels import AdwinEngine, rebuild_adwin

DEFAULT_DELTA = 0.002
MAX_BUCKETS_PER_ROW = 5


def epsilon_cut(n0, n1, delta_prime):
    """Mean-difference threshold for sub-windows of n0 (older) and n1 values.

    ``sqrt((1/(2m)) * ln(4/delta'))`` with ``m`` the harmonic-style mean
    ``1/(1/n0 + 1/n1)``; symmetric in ``(n0, n1)`` and decreasing in both.
    """
    if n0 < 1 or n1 < 1:
        raise ValueError("sub-window sizes must be >= 1")
    if not 0.0 < delta_prime < 1.0:
        raise ValueError("delta_prime must be in (0, 1)")
    return math.sqrt(0.5 * (1.0 / n0 + 1.0 / n1) * math.log(4.0 / delta_prime))


class Adwin:
    """Adaptive-window detector; ``insert`` returns ``(drift, n_drops)``.

    The per-comparison confidence is ``delta / width``, so the false-alarm
    budget is spread over the current window.
    """

    __slots__ = ("_engine",)

    def __init__(self, delta=DEFAULT_DELTA):
        self._engine = AdwinEngine(delta, MAX_BUCKETS_PER_ROW)

    @property
    def delta(self):
        return self._engine.delta

    @property
    def width(self):
        return self._engine.width

    @property
    def total(self):
        return self._engine.total

    def insert(self, x):
        return self._engine.insert(x)

    def mean(self):
        return self._engine.mean()

    def n_buckets(self):
        return self._engine.n_buckets()

    def bucket_rows(self):
        return self._engine.bucket_rows()

    def reset(self):
        self._engine = AdwinEngine(self.delta, MAX_BUCKETS_PER_ROW)

    def __getstate__(self):
        return self._engine.get_state()

    def __setstate__(self, state):
        self._engine = rebuild_adwin(state)
