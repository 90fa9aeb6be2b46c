"""Shared learner interface, configuration and model snapshots."""

from __future__ import annotations

import hashlib
import math
import pickle
from dataclasses import dataclass

SNAPSHOT_FORMAT = 1

MODEL_NAMES = ("pa", "htree", "arf", "knn", "gnb")


@dataclass(frozen=True)
class Prediction:
    """Predicted class plus the model's confidence in that class, in [0, 1]."""

    label: int
    confidence: float


@dataclass
class LearnerConfig:
    """Hyperparameters for all five model families (unused fields ignored)."""

    model: str = "pa"
    c: float = 1.0                 # PA aggressiveness cap
    delta_tree: float = 1e-7       # Hoeffding split confidence
    grace_period: int = 200
    tie_threshold: float = 0.05
    n_trees: int = 10
    lambda_poisson: float = 6.0
    subspace_size: int | str = "sqrt"
    k: int = 5
    knn_window: int = 1000
    var_smoothing: float = 1e-9
    rng_seed: int = 0

    def validate(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODEL_NAMES}")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0.0 < self.delta_tree < 1.0:
            raise ValueError("delta_tree must be in (0, 1)")
        if self.grace_period < 1:
            raise ValueError("grace_period must be >= 1")
        if self.tie_threshold < 0:
            raise ValueError("tie_threshold must be non-negative")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.lambda_poisson <= 0:
            raise ValueError("lambda_poisson must be positive")
        if isinstance(self.subspace_size, str):
            if self.subspace_size != "sqrt":
                raise ValueError("subspace_size must be an integer or 'sqrt'")
        elif self.subspace_size < 1:
            raise ValueError("subspace_size must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.knn_window < self.k:
            raise ValueError("knn_window must be >= k")
        if self.var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")

    def resolved_subspace_size(self, dim):
        if self.subspace_size == "sqrt":
            return max(1, round(math.sqrt(dim)))
        return min(int(self.subspace_size), dim)


class Learner:
    """Incremental binary classifier: predict with confidence, learn, reset.

    ``predict`` never mutates observable state; ``learn`` consumes one
    labelled instance; ``reset`` returns the model to its blank state.
    """

    dim: int

    def predict(self, x) -> Prediction:
        raise NotImplementedError

    def learn(self, x, y) -> None:
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def _check(self, x):
        if x.dim != self.dim:
            raise ValueError(f"dimensionality mismatch: model {self.dim}, input {x.dim}")


def snapshot_bytes(learner) -> bytes:
    """Canonical serialized form of a model (derived caches excluded)."""
    return pickle.dumps({"format": SNAPSHOT_FORMAT, "model": learner}, protocol=4)


def save_snapshot(learner, path):
    with open(path, "wb") as fh:
        fh.write(snapshot_bytes(learner))


def load_snapshot(path):
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != SNAPSHOT_FORMAT:
        raise ValueError("unrecognized snapshot format")
    return payload["model"]


def state_digest(learner) -> str:
    """Hex digest of the canonical state; equal digests mean equal models."""
    return hashlib.sha256(snapshot_bytes(learner)).hexdigest()
