"""k-nearest-neighbour classifier over a sliding buffer of recent instances."""

from __future__ import annotations

import math
from collections import deque

from .._kernels import intersect_size
from .base import Learner, Prediction


class KnnClassifier(Learner):
    """Majority vote of the k nearest buffered instances (Euclidean distance).

    For binary vectors the squared distance is ``nnz(a) + nnz(b) - 2·|a∩b|``,
    so each comparison is one sorted-index intersection.  Ties are
    deterministic: neighbour selection prefers earlier-buffered instances at
    equal distance; an even vote goes to the label with the smaller summed
    distance, then to benign.
    """

    def __init__(self, dim, k=5, window=1000):
        if k < 1:
            raise ValueError("k must be >= 1")
        if window < k:
            raise ValueError("window must be >= k")
        self.dim = dim
        self.k = k
        self.window = window
        self._buffer = deque(maxlen=window)  # (FeatureVector, label), oldest first

    def reset(self):
        self._buffer.clear()

    def __len__(self):
        return len(self._buffer)

    def learn(self, x, y):
        self._check(x)
        self._buffer.append((x, y))

    def predict(self, x) -> Prediction:
        self._check(x)
        if not self._buffer:
            return Prediction(0, 0.0)
        xi = x.indices
        xn = x.nnz
        d2 = [
            xn + v.nnz - 2 * intersect_size(xi, v.indices)
            for v, _ in self._buffer
        ]
        n_used = min(self.k, len(d2))
        order = sorted(range(len(d2)), key=d2.__getitem__)[:n_used]
        votes = [0, 0]
        dist_sum = [0.0, 0.0]
        labels = [y for _, y in self._buffer]
        for pos in order:
            y = labels[pos]
            votes[y] += 1
            dist_sum[y] += math.sqrt(d2[pos])
        if votes[1] > votes[0]:
            label = 1
        elif votes[0] > votes[1]:
            label = 0
        else:
            label = 1 if dist_sum[1] < dist_sum[0] else 0
        return Prediction(label, votes[label] / n_used)
