"""Incremental Hoeffding tree for binary presence features.

Leaves accumulate class counts and, per feature, how often the feature was
active in each class; every ``grace_period`` arrivals the leaf considers a
two-way presence/absence split, committing when the information-gain lead
of the best feature clears the Hoeffding bound (or the bound has shrunk
below the tie threshold).
"""

from __future__ import annotations

import math

from .base import Learner, Prediction


def hoeffding_bound(r, delta, n):
    """Confidence radius ``sqrt(r^2 * ln(1/delta) / (2n))``."""
    if r <= 0:
        raise ValueError("r must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(r * r * math.log(1.0 / delta) / (2.0 * n))


def _entropy2(a, b):
    """Binary entropy in bits of a two-class count pair."""
    n = a + b
    if a == 0 or b == 0:
        return 0.0
    pa = a / n
    pb = b / n
    return -(pa * math.log2(pa) + pb * math.log2(pb))


class _Node:
    __slots__ = ("feature", "present", "absent", "class_counts", "feat_counts", "since_eval")

    def __init__(self, class_counts=None):
        self.feature = None  # None -> leaf
        self.present = None
        self.absent = None
        self.class_counts = class_counts or [0, 0]
        self.feat_counts = {}  # feature -> [active in class 0, active in class 1]
        self.since_eval = 0


class HoeffdingTree(Learner):
    def __init__(self, dim, delta=1e-7, grace_period=200, tie_threshold=0.05):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if grace_period < 1:
            raise ValueError("grace_period must be >= 1")
        self.dim = dim
        self.delta = delta
        self.grace_period = grace_period
        self.tie_threshold = tie_threshold
        self._root = _Node()
        self.n_leaves = 1

    def reset(self):
        self._root = _Node()
        self.n_leaves = 1

    def _leaf_for(self, x):
        node = self._root
        while node.feature is not None:
            node = node.present if x.has(node.feature) else node.absent
        return node

    def predict(self, x) -> Prediction:
        self._check(x)
        c0, c1 = self._leaf_for(x).class_counts
        total = c0 + c1
        if total == 0:
            return Prediction(0, 0.5)
        label = 1 if c1 > c0 else 0
        return Prediction(label, (c1 if label else c0) / total)

    def learn(self, x, y):
        self._check(x)
        leaf = self._leaf_for(x)
        leaf.class_counts[y] += 1
        counts = leaf.feat_counts
        for j in x.indices.tolist():
            row = counts.get(j)
            if row is None:
                counts[j] = row = [0, 0]
            row[y] += 1
        leaf.since_eval += 1
        if leaf.since_eval >= self.grace_period:
            leaf.since_eval = 0
            self._attempt_split(leaf)

    def _attempt_split(self, leaf):
        n0, n1 = leaf.class_counts
        n = n0 + n1
        if n0 == 0 or n1 == 0:
            return  # pure leaf, every gain is zero
        h_parent = _entropy2(n0, n1)
        best_gain = 0.0
        second_gain = 0.0
        best_feature = None
        best_split = None
        for j in sorted(leaf.feat_counts):
            p0, p1 = leaf.feat_counts[j]
            a0, a1 = n0 - p0, n1 - p1
            n_present = p0 + p1
            n_absent = a0 + a1
            gain = (
                h_parent
                - (n_present / n) * _entropy2(p0, p1)
                - (n_absent / n) * _entropy2(a0, a1)
            )
            if gain > best_gain:
                second_gain = best_gain
                best_gain = gain
                best_feature = j
                best_split = (p0, p1, a0, a1)
            elif gain > second_gain:
                second_gain = gain
        if best_feature is None:
            return
        eps = hoeffding_bound(1.0, self.delta, n)
        if best_gain - second_gain > eps or eps < self.tie_threshold:
            p0, p1, a0, a1 = best_split
            leaf.feature = best_feature
            leaf.present = _Node([p0, p1])
            leaf.absent = _Node([a0, a1])
            leaf.feat_counts = None
            self.n_leaves += 1
