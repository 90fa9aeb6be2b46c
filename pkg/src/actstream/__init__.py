"""actstream: streaming malware-detection experiments.

Incremental classifiers (PA, Hoeffding tree, adaptive random forest, kNN,
Gaussian naive Bayes), ADWIN drift detection, and four training/evaluation
protocols (progressive, delayed-label, seed-only static, and active
learning with a label budget) over day-grouped sparse feature-vector
streams.
"""

from ._kernels import BACKEND
from .active import ActiveConfig, LabelOracle, RetrainBuffer, run_active
from .core import (
    DatasetMeta,
    FeatureVector,
    GenConfig,
    Instance,
    StreamDay,
    estimate_release_day,
    generate_synthetic,
    load_dataset,
    split_seed,
    write_dataset,
)
from .drift import Adwin, epsilon_cut
from .eval import (
    ConfusionMatrix,
    MetricSeries,
    metrics_from_cm,
    run_delayed,
    run_progressive,
    run_static,
    summarize,
)
from .learners import (
    LearnerConfig,
    Prediction,
    hoeffding_bound,
    load_snapshot,
    make_learner,
    save_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveConfig",
    "Adwin",
    "BACKEND",
    "ConfusionMatrix",
    "DatasetMeta",
    "FeatureVector",
    "GenConfig",
    "Instance",
    "LabelOracle",
    "LearnerConfig",
    "MetricSeries",
    "Prediction",
    "RetrainBuffer",
    "StreamDay",
    "epsilon_cut",
    "estimate_release_day",
    "generate_synthetic",
    "hoeffding_bound",
    "load_dataset",
    "load_snapshot",
    "make_learner",
    "metrics_from_cm",
    "run_active",
    "run_delayed",
    "run_progressive",
    "run_static",
    "save_snapshot",
    "split_seed",
    "summarize",
    "write_dataset",
]
