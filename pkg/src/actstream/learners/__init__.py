"""Five incremental binary classifiers behind one predict/learn/reset interface."""

from .base import (
    Learner,
    LearnerConfig,
    MODEL_NAMES,
    Prediction,
    load_snapshot,
    save_snapshot,
    snapshot_bytes,
    state_digest,
)
from .bayes import GaussianNaiveBayes
from .forest import AdaptiveRandomForest
from .knn import KnnClassifier
from .pa import PassiveAggressive
from .tree import HoeffdingTree, hoeffding_bound


def make_learner(config: LearnerConfig, dim: int) -> Learner:
    """Blank model for ``config.model`` at the given dimensionality."""
    config.validate()
    if config.model == "pa":
        return PassiveAggressive(dim, c=config.c)
    if config.model == "htree":
        return HoeffdingTree(
            dim,
            delta=config.delta_tree,
            grace_period=config.grace_period,
            tie_threshold=config.tie_threshold,
        )
    if config.model == "arf":
        return AdaptiveRandomForest(
            dim,
            n_trees=config.n_trees,
            lambda_poisson=config.lambda_poisson,
            subspace_size=config.resolved_subspace_size(dim),
            rng_seed=config.rng_seed,
            delta=config.delta_tree,
            grace_period=config.grace_period,
            tie_threshold=config.tie_threshold,
        )
    if config.model == "knn":
        return KnnClassifier(dim, k=config.k, window=config.knn_window)
    return GaussianNaiveBayes(dim, var_smoothing=config.var_smoothing)


__all__ = [
    "AdaptiveRandomForest",
    "GaussianNaiveBayes",
    "HoeffdingTree",
    "KnnClassifier",
    "Learner",
    "LearnerConfig",
    "MODEL_NAMES",
    "PassiveAggressive",
    "Prediction",
    "hoeffding_bound",
    "load_snapshot",
    "make_learner",
    "save_snapshot",
    "snapshot_bytes",
    "state_digest",
]
