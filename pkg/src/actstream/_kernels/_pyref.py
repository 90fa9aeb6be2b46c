"""Pure-Python reference kernels.

Drop-in fallback for the compiled extension.  Every function here must
produce bit-identical results to its counterpart in ``_speedups``: the
floating-point accumulation order is part of the contract, which is why
``sparse_dot`` sums sequentially instead of calling ``numpy.sum``.
"""

from math import log, sqrt

import numpy as np

IMPL = "python"

_MAX_BUCKETS_DEFAULT = 5


def sparse_dot(w, indices):
    """Sum of ``w[i]`` over ``indices``, accumulated left to right."""
    s = 0.0
    for i in indices:
        s += w[i]
    return float(s)


def sparse_add(w, indices, value):
    """In-place ``w[i] += value`` for each index (indices must be unique)."""
    w[indices] += value


def intersect_size(a, b):
    """Size of the intersection of two sorted, duplicate-free index arrays."""
    return int(np.intersect1d(a, b, assume_unique=True).size)


class AdwinEngine:
    """Adaptive-windowing change detector over values in [0, 1].

    The window is stored as an exponential histogram: row ``r`` holds up to
    ``max_buckets`` buckets that each summarise ``2**r`` values (sum only;
    the count is implied by the row).  Buckets are ordered oldest-first
    within a row, and higher rows hold older data.
    """

    __slots__ = ("delta", "max_buckets", "_rows", "_width", "_total")

    def __init__(self, delta=0.002, max_buckets=_MAX_BUCKETS_DEFAULT):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {delta}")
        if max_buckets < 1:
            raise ValueError("max_buckets must be >= 1")
        self.delta = delta
        self.max_buckets = max_buckets
        self._rows = [[]]
        self._width = 0
        self._total = 0.0

    @property
    def width(self):
        return self._width

    @property
    def total(self):
        return self._total

    def mean(self):
        return self._total / self._width if self._width else 0.0

    def insert(self, x):
        """Append one value; returns ``(drift, n_drops)``.

        ``drift`` is true iff the cut test dropped at least one bucket from
        the old end of the window; ``n_drops`` counts dropped buckets.
        """
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"ADWIN input must be in [0, 1], got {x}")
        self._rows[0].append(x)
        self._width += 1
        self._total += x
        self._compress()
        n_drops = 0
        while self._has_cut():
            self._drop_oldest()
            n_drops += 1
        return n_drops > 0, n_drops

    def _compress(self):
        rows = self._rows
        r = 0
        while r < len(rows) and len(rows[r]) > self.max_buckets:
            if r + 1 == len(rows):
                rows.append([])
            # merge the two oldest buckets of this row into the next row;
            # the merged bucket is newer than everything already up there
            merged = rows[r][0] + rows[r][1]
            del rows[r][:2]
            rows[r + 1].append(merged)
            r += 1

    def _has_cut(self):
        """True if any boundary between adjacent buckets violates the bound.

        Scans boundaries from the oldest side.  For a split into the older
        part (n0, sum s0) and newer part (n1, s1) the threshold is
        ``sqrt(0.5 * (1/n0 + 1/n1) * ln(4 * width / delta))``, i.e. the
        mean-difference bound with delta' = delta / width.
        """
        width = self._width
        if width < 2:
            return False
        log4w = log(4.0 * width / self.delta)
        total = self._total
        n0 = 0
        s0 = 0.0
        for r in range(len(self._rows) - 1, -1, -1):
            cap = 1 << r
            for s in self._rows[r]:
                n0 += cap
                s0 += s
                n1 = width - n0
                if n1 <= 0:
                    return False
                eps = sqrt(0.5 * (1.0 / n0 + 1.0 / n1) * log4w)
                if abs(s0 / n0 - (total - s0) / n1) > eps:
                    return True
        return False

    def _drop_oldest(self):
        for r in range(len(self._rows) - 1, -1, -1):
            row = self._rows[r]
            if row:
                self._total -= row.pop(0)
                self._width -= 1 << r
                return
        raise RuntimeError("drop from empty window")

    def n_buckets(self):
        return sum(len(row) for row in self._rows)

    def bucket_rows(self):
        """Rows as ``[(sum, count), ...]`` lists, oldest-first, row 0 first."""
        out = []
        for r, row in enumerate(self._rows):
            out.append([(s, 1 << r) for s in row])
        while out and not out[-1]:
            out.pop()
        return out

    def get_state(self):
        return {
            "delta": self.delta,
            "max_buckets": self.max_buckets,
            "rows": [list(row) for row in self._rows],
            "width": self._width,
            "total": self._total,
        }

    def set_state(self, state):
        self.delta = state["delta"]
        self.max_buckets = state["max_buckets"]
        self._rows = [list(row) for row in state["rows"]] or [[]]
        self._width = state["width"]
        self._total = state["total"]

    def __reduce__(self):
        from actstream._kernels import rebuild_adwin

        return rebuild_adwin, (self.get_state(),)
