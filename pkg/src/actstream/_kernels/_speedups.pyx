# cython: language_level=3, cdivision=True
"""Compiled kernels: sparse vector ops and the ADWIN engine.

Semantics (including floating-point accumulation order) are identical to
``_pyref``; the two are interchangeable and differentially tested.  Bounds
checks are disabled only inside the hot loops.
"""

cimport cython

from libc.math cimport fabs, log, sqrt

import numpy as np

IMPL = "compiled"

DEF MAX_ROWS = 64


@cython.boundscheck(False)
@cython.wraparound(False)
def sparse_dot(double[::1] w, const int[::1] indices):
    """Sum of ``w[i]`` over ``indices``, accumulated left to right."""
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(indices.shape[0]):
        s += w[indices[i]]
    return s


@cython.boundscheck(False)
@cython.wraparound(False)
def sparse_add(double[::1] w, const int[::1] indices, double value):
    """In-place ``w[i] += value`` for each index (indices must be unique)."""
    cdef Py_ssize_t i
    for i in range(indices.shape[0]):
        w[indices[i]] += value


@cython.boundscheck(False)
@cython.wraparound(False)
def intersect_size(const int[::1] a, const int[::1] b):
    """Size of the intersection of two sorted, duplicate-free index arrays."""
    cdef Py_ssize_t i = 0, j = 0
    cdef long n = 0
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    while i < na and j < nb:
        if a[i] == b[j]:
            n += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return n


cdef class AdwinEngine:
    """Adaptive-windowing change detector over values in [0, 1].

    Exponential-histogram window: row ``r`` holds up to ``max_buckets``
    buckets of ``2**r`` values each (sum stored, count implied).  Buckets
    are oldest-first within a row; higher rows hold older data.
    """

    cdef public double delta
    cdef public int max_buckets
    cdef double[:, ::1] _sums
    cdef int[::1] _lens
    cdef int _nrows
    cdef long long _width
    cdef double _total
    cdef object _sums_arr, _lens_arr

    def __init__(self, double delta=0.002, int max_buckets=5):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {delta}")
        if max_buckets < 1:
            raise ValueError("max_buckets must be >= 1")
        self.delta = delta
        self.max_buckets = max_buckets
        self._sums_arr = np.zeros((MAX_ROWS, max_buckets + 1), dtype=np.float64)
        self._lens_arr = np.zeros(MAX_ROWS, dtype=np.intc)
        self._sums = self._sums_arr
        self._lens = self._lens_arr
        self._nrows = 1
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

    @cython.boundscheck(False)
    @cython.wraparound(False)
    def insert(self, double x):
        """Append one value; returns ``(drift, n_drops)``."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"ADWIN input must be in [0, 1], got {x}")
        self._sums[0, self._lens[0]] = x
        self._lens[0] += 1
        self._width += 1
        self._total += x
        self._compress()
        cdef int n_drops = 0
        while self._has_cut():
            self._drop_oldest()
            n_drops += 1
        return n_drops > 0, n_drops

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef void _compress(self) except *:
        cdef int r = 0
        cdef double merged
        cdef int i
        while r < self._nrows and self._lens[r] > self.max_buckets:
            if r + 1 == self._nrows:
                if self._nrows == MAX_ROWS:
                    raise OverflowError("ADWIN window exceeded bucket capacity")
                self._nrows += 1
            merged = self._sums[r, 0] + self._sums[r, 1]
            for i in range(2, self._lens[r]):
                self._sums[r, i - 2] = self._sums[r, i]
            self._lens[r] -= 2
            self._sums[r + 1, self._lens[r + 1]] = merged
            self._lens[r + 1] += 1
            r += 1

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef bint _has_cut(self):
        cdef long long width = self._width
        if width < 2:
            return False
        cdef double log4w = log(4.0 * width / self.delta)
        cdef double total = self._total
        cdef long long n0 = 0, n1, cap
        cdef double s0 = 0.0, eps
        cdef int r, i
        for r in range(self._nrows - 1, -1, -1):
            cap = 1LL << r
            for i in range(self._lens[r]):
                n0 += cap
                s0 += self._sums[r, i]
                n1 = width - n0
                if n1 <= 0:
                    return False
                eps = sqrt(0.5 * (1.0 / n0 + 1.0 / n1) * log4w)
                if fabs(s0 / n0 - (total - s0) / n1) > eps:
                    return True
        return False

    @cython.boundscheck(False)
    @cython.wraparound(False)
    cdef void _drop_oldest(self) except *:
        cdef int r, i
        for r in range(self._nrows - 1, -1, -1):
            if self._lens[r]:
                self._total -= self._sums[r, 0]
                self._width -= 1LL << r
                for i in range(1, self._lens[r]):
                    self._sums[r, i - 1] = self._sums[r, i]
                self._lens[r] -= 1
                return
        raise RuntimeError("drop from empty window")

    def n_buckets(self):
        cdef int r, n = 0
        for r in range(self._nrows):
            n += self._lens[r]
        return n

    def bucket_rows(self):
        """Rows as ``[(sum, count), ...]`` lists, oldest-first, row 0 first."""
        out = []
        cdef int r, i
        for r in range(self._nrows):
            out.append([(self._sums[r, i], 1 << r) for i in range(self._lens[r])])
        while out and not out[-1]:
            out.pop()
        return out

    def get_state(self):
        rows = []
        cdef int r, i
        for r in range(self._nrows):
            rows.append([self._sums[r, i] for i in range(self._lens[r])])
        return {
            "delta": self.delta,
            "max_buckets": self.max_buckets,
            "rows": rows,
            "width": int(self._width),
            "total": self._total,
        }

    def set_state(self, state):
        rows = state["rows"] or [[]]
        if len(rows) > MAX_ROWS:
            raise ValueError("too many bucket rows for compiled engine")
        self.delta = state["delta"]
        self.max_buckets = state["max_buckets"]
        self._sums_arr = np.zeros((MAX_ROWS, self.max_buckets + 1), dtype=np.float64)
        self._lens_arr = np.zeros(MAX_ROWS, dtype=np.intc)
        self._sums = self._sums_arr
        self._lens = self._lens_arr
        self._nrows = len(rows)
        cdef int r = 0
        cdef int i
        for row in rows:
            if len(row) > self.max_buckets + 1:
                raise ValueError("bucket row longer than capacity")
            i = 0
            for s in row:
                self._sums[r, i] = s
                i += 1
            self._lens[r] = len(row)
            r += 1
        self._width = state["width"]
        self._total = state["total"]

    def __reduce__(self):
        from actstream._kernels import rebuild_adwin

        return rebuild_adwin, (self.get_state(),)
