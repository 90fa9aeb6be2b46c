"""Passive-aggressive linear classifier (PA-I) on sparse binary features."""

from __future__ import annotations

import math

import numpy as np

from .._kernels import sparse_add, sparse_dot
from .base import Learner, Prediction


class PassiveAggressive(Learner):
    """Online hinge-loss linear model with a bounded update step.

    The bias is folded in as an always-on feature, so the update denominator
    is ``nnz(x) + 1``.  Both predict and learn touch only the active
    coordinates, which keeps the cost independent of the total
    dimensionality.
    """

    def __init__(self, dim, c=1.0):
        if c <= 0:
            raise ValueError("c must be positive")
        self.dim = dim
        self.c = float(c)
        self.w = np.zeros(dim, dtype=np.float64)
        self.b = 0.0

    def reset(self):
        self.w = np.zeros(self.dim, dtype=np.float64)
        self.b = 0.0

    def margin(self, x) -> float:
        self._check(x)
        return sparse_dot(self.w, x.indices) + self.b

    def predict(self, x) -> Prediction:
        m = self.margin(x)
        label = 1 if m > 0 else 0
        # |margin| -> [0, 1): logistic of the separation, rescaled from [0.5, 1)
        confidence = 2.0 * (1.0 / (1.0 + math.exp(-abs(m))) - 0.5)
        return Prediction(label, confidence)

    def learn(self, x, y):
        y_signed = 2 * y - 1
        loss = 1.0 - y_signed * self.margin(x)
        if loss <= 0.0:
            return  # passive: already at the hinge target
        tau = min(self.c, loss / (x.norm_sq + 1.0))
        step = tau * y_signed
        sparse_add(self.w, x.indices, step)
        self.b += step
