"""Adaptive random forest: Hoeffding trees + online bagging + drift recovery.

Each member tree sees instances projected onto its own random feature
subspace and is trained ``Poisson(lambda)`` times per arrival.  A pair of
detectors watches each tree's own prequential error: the looser one spawns
a background tree that trains alongside, the stricter one swaps the
background tree in (or a fresh tree if none exists).
"""

from __future__ import annotations

import math
import random

import numpy as np

from ..drift import Adwin
from .base import Learner, Prediction
from .tree import HoeffdingTree

WARN_DELTA = 1e-2
DRIFT_DELTA = 1e-3


def _poisson(rng, lam):
    """Knuth inversion; exact for the small lambdas used here."""
    limit = math.exp(-lam)
    k = 0
    p = rng.random()
    while p > limit:
        k += 1
        p *= rng.random()
    return k


class _Member:
    __slots__ = ("tree", "subspace", "warn", "drift", "background", "bg_subspace")

    def __init__(self, tree, subspace):
        self.tree = tree
        self.subspace = subspace
        self.warn = Adwin(WARN_DELTA)
        self.drift = Adwin(DRIFT_DELTA)
        self.background = None
        self.bg_subspace = None


class AdaptiveRandomForest(Learner):
    def __init__(
        self,
        dim,
        n_trees=10,
        lambda_poisson=6.0,
        subspace_size=None,
        rng_seed=0,
        delta=1e-7,
        grace_period=200,
        tie_threshold=0.05,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.dim = dim
        self.n_trees = n_trees
        self.lambda_poisson = lambda_poisson
        self.subspace_size = subspace_size or max(1, round(math.sqrt(dim)))
        self.rng_seed = rng_seed
        self._tree_params = (delta, grace_period, tie_threshold)
        self.reset()

    def reset(self):
        self._rng = random.Random(self.rng_seed)
        self._members = [
            _Member(self._new_tree(), self._draw_subspace()) for _ in range(self.n_trees)
        ]

    def _new_tree(self):
        delta, grace, tie = self._tree_params
        return HoeffdingTree(self.dim, delta=delta, grace_period=grace, tie_threshold=tie)

    def _draw_subspace(self):
        picks = sorted(self._rng.sample(range(self.dim), self.subspace_size))
        return np.array(picks, dtype=np.int32)

    def _project(self, x, subspace):
        from ..core import FeatureVector

        kept = np.intersect1d(x.indices, subspace, assume_unique=True)
        return FeatureVector(self.dim, kept.astype(np.int32, copy=False))

    def predict(self, x) -> Prediction:
        self._check(x)
        votes = sum(
            m.tree.predict(self._project(x, m.subspace)).label for m in self._members
        )
        label = 1 if votes > self.n_trees - votes else 0
        agreeing = votes if label else self.n_trees - votes
        return Prediction(label, agreeing / self.n_trees)

    def learn(self, x, y):
        self._check(x)
        for m in self._members:
            xp = self._project(x, m.subspace)
            err = 1.0 if m.tree.predict(xp).label != y else 0.0
            for _ in range(_poisson(self._rng, self.lambda_poisson)):
                m.tree.learn(xp, y)
            if m.background is not None:
                xb = self._project(x, m.bg_subspace)
                for _ in range(_poisson(self._rng, self.lambda_poisson)):
                    m.background.learn(xb, y)
            warned, _ = m.warn.insert(err)
            drifted, _ = m.drift.insert(err)
            if drifted:
                self._replace(m)
            elif warned and m.background is None:
                m.background = self._new_tree()
                m.bg_subspace = self._draw_subspace()

    def _replace(self, m):
        if m.background is not None:
            m.tree = m.background
            m.subspace = m.bg_subspace
        else:
            m.tree = self._new_tree()
            m.subspace = self._draw_subspace()
        m.background = None
        m.bg_subspace = None
        m.warn = Adwin(WARN_DELTA)
        m.drift = Adwin(DRIFT_DELTA)
