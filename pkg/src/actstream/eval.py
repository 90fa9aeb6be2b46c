"""Prequential evaluation engines and per-day metric accounting.

Three non-active protocols share the same test-then-train skeleton:

* progressive   — every instance trains the model right after being tested;
* delayed       — training waits for the instance's label-availability day,
                  with due labels applied at the start of a day before that
                  day's releases are tested;
* static        — the model is never updated after the seed.

A detector watches the 0/1 error stream in the updating protocols and its
firings are counted per day (no model intervention here; recovery belongs
to the active controller).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .drift import DEFAULT_DELTA, Adwin
from .learners import LearnerConfig, make_learner

PROTOCOLS = ("progressive", "delayed", "static", "active")


@dataclass
class ConfusionMatrix:
    """Counts with malware as the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, predicted, actual):
        if actual == 1:
            if predicted == 1:
                self.tp += 1
            else:
                self.fn += 1
        elif predicted == 1:
            self.fp += 1
        else:
            self.tn += 1

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def copy(self):
        return ConfusionMatrix(self.tp, self.fp, self.tn, self.fn)


@dataclass(frozen=True)
class MetricValues:
    accuracy: float
    precision: float
    tpr: float
    f1: float


def metrics_from_cm(cm) -> MetricValues:
    """Accuracy/precision/TPR/F1 with the 0/0 -> 0 convention throughout."""
    total = cm.total
    accuracy = (cm.tp + cm.tn) / total if total else 0.0
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    tpr = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2.0 * precision * tpr / (precision + tpr) if precision + tpr else 0.0
    return MetricValues(accuracy, precision, tpr, f1)


@dataclass(frozen=True)
class DayRecord:
    day: int
    n_tested: int
    daily: ConfusionMatrix
    cumulative: ConfusionMatrix
    drifts_so_far: int
    labels_requested_so_far: int
    labels_available_so_far: int


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    day: int
    pred: int
    conf: float
    label: int
    label_day: int


@dataclass(frozen=True)
class Summary:
    protocol: str
    model: str
    n_days: int
    n_tested: int
    acc_mean: float
    acc_std: float
    f1_mean: float
    f1_std: float
    prec_mean: float
    prec_std: float
    tpr_mean: float
    tpr_std: float
    labels_fraction: float
    drifts: int


@dataclass
class MetricSeries:
    protocol: str
    model: str
    records: list = field(default_factory=list)        # of DayRecord
    prediction_log: list = field(default_factory=list)  # of PredictionRecord
    train_events: list = field(default_factory=list)    # of (day, instance id)
    oracle_events: list = field(default_factory=list)   # active protocol only


def summarize(series) -> Summary:
    """Mean and population std of the daily metrics over days with tests."""
    days = [r for r in series.records if r.n_tested > 0]
    per_metric = {"accuracy": [], "precision": [], "tpr": [], "f1": []}
    for rec in days:
        m = metrics_from_cm(rec.daily)
        per_metric["accuracy"].append(m.accuracy)
        per_metric["precision"].append(m.precision)
        per_metric["tpr"].append(m.tpr)
        per_metric["f1"].append(m.f1)

    def stats(values):
        if not values:
            return 0.0, 0.0
        arr = np.asarray(values)
        return float(arr.mean()), float(arr.std())

    acc = stats(per_metric["accuracy"])
    prec = stats(per_metric["precision"])
    tpr = stats(per_metric["tpr"])
    f1 = stats(per_metric["f1"])
    n_tested = series.records[-1].cumulative.total if series.records else 0
    requested = series.records[-1].labels_requested_so_far if series.records else 0
    drifts = series.records[-1].drifts_so_far if series.records else 0
    return Summary(
        protocol=series.protocol,
        model=series.model,
        n_days=len(days),
        n_tested=n_tested,
        acc_mean=acc[0], acc_std=acc[1],
        f1_mean=f1[0], f1_std=f1[1],
        prec_mean=prec[0], prec_std=prec[1],
        tpr_mean=tpr[0], tpr_std=tpr[1],
        labels_fraction=requested / n_tested if n_tested else 0.0,
        drifts=drifts,
    )


class Recorder:
    """Incremental per-day accounting shared by every protocol engine."""

    def __init__(self, protocol, model):
        self.series = MetricSeries(protocol, model)
        self._cumulative = ConfusionMatrix()
        self._daily = None
        self._day = None
        self._n_tested_today = 0
        self.drifts = 0
        self.requested = 0
        self.available = 0

    def begin_day(self, day):
        self._day = day
        self._daily = ConfusionMatrix()
        self._n_tested_today = 0

    def record_test(self, inst, pred):
        self._daily.add(pred.label, inst.label)
        self._cumulative.add(pred.label, inst.label)
        self._n_tested_today += 1
        self.series.prediction_log.append(
            PredictionRecord(
                inst.id, self._day, pred.label, pred.confidence,
                inst.label, inst.label_day,
            )
        )

    def note_drift(self):
        self.drifts += 1

    def note_request(self):
        self.requested += 1

    def note_available(self):
        self.available += 1

    def note_train(self, inst_id):
        self.series.train_events.append((self._day, inst_id))

    def end_day(self):
        self.series.records.append(
            DayRecord(
                day=self._day,
                n_tested=self._n_tested_today,
                daily=self._daily,
                cumulative=self._cumulative.copy(),
                drifts_so_far=self.drifts,
                labels_requested_so_far=self.requested,
                labels_available_so_far=self.available,
            )
        )


def train_on_seed(learner, seed):
    """Single pass in stream order (day, then id) over the bootstrap set."""
    for inst in seed:
        learner.learn(inst.features, inst.label)


def _require_seed(seed):
    if not seed:
        raise ValueError("seed must be non-empty")


def _stream_dim(seed):
    return seed[0].features.dim


def run_progressive(stream, seed, learner_config: LearnerConfig, adwin_delta=DEFAULT_DELTA):
    """Test-then-train with labels available immediately."""
    _require_seed(seed)
    learner = make_learner(learner_config, _stream_dim(seed))
    train_on_seed(learner, seed)
    detector = Adwin(adwin_delta)
    rec = Recorder("progressive", learner_config.model)
    for day in stream:
        rec.begin_day(day.day)
        for inst in day.releases:
            pred = learner.predict(inst.features)
            rec.record_test(inst, pred)
            rec.note_request()
            drifted, _ = detector.insert(1.0 if pred.label != inst.label else 0.0)
            if drifted:
                rec.note_drift()
            learner.learn(inst.features, inst.label)
            rec.note_train(inst.id)
            rec.note_available()
        rec.end_day()
    return rec.series


def run_delayed(stream, seed, learner_config: LearnerConfig, adwin_delta=DEFAULT_DELTA):
    """Test-then-train with training deferred to each label's availability day.

    Due labels (label_day <= today) are applied at the start of the day,
    ascending by (label_day, id), before today's releases are tested.  The
    error of the release-time prediction is what feeds the detector, at
    training time.
    """
    _require_seed(seed)
    learner = make_learner(learner_config, _stream_dim(seed))
    train_on_seed(learner, seed)
    detector = Adwin(adwin_delta)
    rec = Recorder("delayed", learner_config.model)
    pending = []  # heap of (label_day, id, instance, error-at-test)
    for day in stream:
        rec.begin_day(day.day)
        while pending and pending[0][0] <= day.day:
            _, inst_id, inst, err = heapq.heappop(pending)
            learner.learn(inst.features, inst.label)
            rec.note_train(inst_id)
            rec.note_available()
            drifted, _ = detector.insert(err)
            if drifted:
                rec.note_drift()
        for inst in day.releases:
            pred = learner.predict(inst.features)
            rec.record_test(inst, pred)
            rec.note_request()
            err = 1.0 if pred.label != inst.label else 0.0
            heapq.heappush(pending, (inst.label_day, inst.id, inst, err))
        rec.end_day()
    return rec.series


def run_static(stream, seed, learner_config: LearnerConfig):
    """Seed-trained baseline that is never updated afterwards."""
    _require_seed(seed)
    learner = make_learner(learner_config, _stream_dim(seed))
    train_on_seed(learner, seed)
    rec = Recorder("static", learner_config.model)
    for day in stream:
        rec.begin_day(day.day)
        for inst in day.releases:
            rec.record_test(inst, learner.predict(inst.features))
        rec.end_day()
    return rec.series


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

SERIES_COLUMNS = (
    "day,n_tested,acc,prec,tpr,f1,cum_acc,cum_prec,cum_tpr,cum_f1,"
    "drifts,labels_requested,labels_available"
)


def series_to_csv(series) -> str:
    """Plot-ready per-day series; line 1 carries protocol/model metadata."""
    lines = [f"#protocol={series.protocol},model={series.model}", SERIES_COLUMNS]
    for rec in series.records:
        daily = metrics_from_cm(rec.daily)
        cum = metrics_from_cm(rec.cumulative)
        lines.append(
            f"{rec.day},{rec.n_tested},"
            f"{daily.accuracy:.6f},{daily.precision:.6f},{daily.tpr:.6f},{daily.f1:.6f},"
            f"{cum.accuracy:.6f},{cum.precision:.6f},{cum.tpr:.6f},{cum.f1:.6f},"
            f"{rec.drifts_so_far},{rec.labels_requested_so_far},{rec.labels_available_so_far}"
        )
    return "\n".join(lines) + "\n"


PREDICTION_LOG_COLUMNS = "id,day,pred,conf,label,label_day"


def prediction_log_to_csv(series) -> str:
    lines = [PREDICTION_LOG_COLUMNS]
    for p in series.prediction_log:
        lines.append(f"{p.id},{p.day},{p.pred},{p.conf:.6f},{p.label},{p.label_day}")
    return "\n".join(lines) + "\n"


SUMMARY_COLUMNS = (
    "protocol,model,n_days,n_tested,acc_mean,acc_std,f1_mean,f1_std,"
    "prec_mean,prec_std,tpr_mean,tpr_std,labels_fraction,drifts"
)


def summary_to_csv_row(s: Summary) -> str:
    return (
        f"{s.protocol},{s.model},{s.n_days},{s.n_tested},"
        f"{s.acc_mean:.6f},{s.acc_std:.6f},{s.f1_mean:.6f},{s.f1_std:.6f},"
        f"{s.prec_mean:.6f},{s.prec_std:.6f},{s.tpr_mean:.6f},{s.tpr_std:.6f},"
        f"{s.labels_fraction:.6f},{s.drifts}"
    )
