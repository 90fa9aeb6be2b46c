"""Gaussian naive Bayes over binary features, with O(active) updates.

For 0/1 features the running per-feature moments reduce to exact closed
forms of the activation counts: mean = k/n and population variance
= mean·(1 - mean).  Learning therefore only touches the active features.
Prediction aggregates the all-zeros log-likelihood per class through a
histogram of activation counts (features sharing a count share a
contribution), then corrects for the query's active features.
"""

from __future__ import annotations

import math

from .base import Learner, Prediction

_LOG_2PI = math.log(2.0 * math.pi)


class GaussianNaiveBayes(Learner):
    def __init__(self, dim, var_smoothing=1e-9):
        if var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")
        self.dim = dim
        self.var_smoothing = float(var_smoothing)
        self.counts = [0, 0]
        self._ones = [{}, {}]  # feature -> times seen active, per class
        self._hist = [{}, {}]  # activation count -> number of features
        self._base = None      # per-class all-zeros log-likelihood (derived)

    def reset(self):
        self.counts = [0, 0]
        self._ones = [{}, {}]
        self._hist = [{}, {}]
        self._base = None

    def __getstate__(self):
        return {
            "dim": self.dim,
            "var_smoothing": self.var_smoothing,
            "counts": self.counts,
            "ones": self._ones,
        }

    def __setstate__(self, state):
        self.dim = state["dim"]
        self.var_smoothing = state["var_smoothing"]
        self.counts = state["counts"]
        self._ones = state["ones"]
        self._hist = [{}, {}]
        for c in (0, 1):
            hist = self._hist[c]
            for k in self._ones[c].values():
                hist[k] = hist.get(k, 0) + 1
        self._base = None

    def mean(self, c, j):
        n = self.counts[c]
        return self._ones[c].get(j, 0) / n if n else 0.0

    def variance(self, c, j):
        m = self.mean(c, j)
        return m * (1.0 - m)

    def learn(self, x, y):
        self._check(x)
        self.counts[y] += 1
        ones = self._ones[y]
        hist = self._hist[y]
        for j in x.indices.tolist():
            k = ones.get(j, 0)
            if k:
                if hist[k] == 1:
                    del hist[k]
                else:
                    hist[k] -= 1
            ones[j] = k + 1
            hist[k + 1] = hist.get(k + 1, 0) + 1
        self._base = None

    def _logpdf_parts(self, k, n):
        """(log N(0; m, v+s), log N(1; m, v+s)) for a feature active k of n times."""
        m = k / n
        v = m * (1.0 - m) + self.var_smoothing
        norm = -0.5 * (_LOG_2PI + math.log(v))
        return norm - 0.5 * m * m / v, norm - 0.5 * (1.0 - m) * (1.0 - m) / v

    def _class_base(self, c):
        n = self.counts[c]
        zero_unseen = -0.5 * (_LOG_2PI + math.log(self.var_smoothing))
        base = (self.dim - len(self._ones[c])) * zero_unseen
        for k in sorted(self._hist[c]):
            base += self._hist[c][k] * self._logpdf_parts(k, n)[0]
        return base

    def predict(self, x) -> Prediction:
        self._check(x)
        total = self.counts[0] + self.counts[1]
        if total == 0:
            return Prediction(0, 0.5)
        if self._base is None:
            self._base = [
                self._class_base(c) if self.counts[c] else None for c in (0, 1)
            ]
        s = self.var_smoothing
        unseen_adj = -0.5 / s  # log N(1;0,s) - log N(0;0,s)
        loglik = [None, None]
        for c in (0, 1):
            n = self.counts[c]
            if not n:
                continue
            ll = math.log(n / total) + self._base[c]
            ones = self._ones[c]
            for j in x.indices.tolist():
                k = ones.get(j, 0)
                if k:
                    zero, one = self._logpdf_parts(k, n)
                    ll += one - zero
                else:
                    ll += unseen_adj
            loglik[c] = ll
        if loglik[0] is None:
            return Prediction(1, 1.0)
        if loglik[1] is None:
            return Prediction(0, 1.0)
        label = 1 if loglik[1] > loglik[0] else 0
        top = max(loglik)
        z = math.exp(loglik[0] - top) + math.exp(loglik[1] - top)
        return Prediction(label, math.exp(loglik[label] - top) / z)
