"""Confidence-gated active learning with a budgeted label oracle.

Per streamed day the controller: grants backlogged label requests from the
oracle queue, trains on every granted label that has become available
(feeding the release-time prediction error to the drift detector, and
retraining from the recent-label buffer when it fires), then tests the
day's releases and submits a label request for each prediction whose
confidence falls below the gate.  Same-day requests are granted from the
day's remaining budget at the end of the day, lowest confidence first;
the overflow is deferred (or dropped) for future budgets.

Unrequested instances are never trained on: no label ever reaches the
model without an oracle grant, and no pseudo-labels exist.
"""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass

from .drift import Adwin
from .eval import Recorder, train_on_seed
from .learners import LearnerConfig, make_learner

logger = logging.getLogger(__name__)

UNLIMITED = 0


@dataclass
class ActiveConfig:
    theta: float = 0.8
    retrain_buffer_size: int | None = None  # None -> seed size
    oracle_daily_budget: int = 500          # 0 = unlimited
    budget_overflow: str = "defer"          # defer | drop
    adwin_delta: float = 0.002
    retrain_source: str = "recent"          # recent | seed

    def validate(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1]")
        if self.retrain_buffer_size is not None and self.retrain_buffer_size < 1:
            raise ValueError("retrain_buffer_size must be >= 1")
        if self.oracle_daily_budget < 0:
            raise ValueError("oracle_daily_budget must be >= 0 (0 = unlimited)")
        if self.budget_overflow not in ("defer", "drop"):
            raise ValueError("budget_overflow must be 'defer' or 'drop'")
        if not 0.0 < self.adwin_delta < 1.0:
            raise ValueError("adwin_delta must be in (0, 1)")
        if self.retrain_source not in ("recent", "seed"):
            raise ValueError("retrain_source must be 'recent' or 'seed'")


@dataclass(frozen=True)
class OracleEvent:
    day: int
    id: str
    confidence: float
    action: str  # granted | deferred | dropped


class LabelOracle:
    """Budgeted label source; grants lowest-confidence requests first.

    New requests submitted during a day compete for the day's remaining
    budget when the day closes; unfunded ones join the deferred queue
    (sorted by confidence, then id) for the next morning's budget, or are
    discarded in drop mode.
    """

    def __init__(self, daily_budget=500, overflow="defer"):
        self.daily_budget = daily_budget
        self.overflow = overflow
        self.today_spent = 0
        self._deferred = []  # heap of (confidence, id, payload)
        self._new = []
        self.events = []

    def _has_budget(self):
        return self.daily_budget == UNLIMITED or self.today_spent < self.daily_budget

    def submit(self, confidence, inst_id, payload):
        self._new.append((confidence, inst_id, payload))

    def start_day(self, day):
        """Reset the daily budget and grant from the deferred backlog."""
        self.today_spent = 0
        granted = []
        while self._deferred and self._has_budget():
            confidence, inst_id, payload = heapq.heappop(self._deferred)
            self.today_spent += 1
            self.events.append(OracleEvent(day, inst_id, confidence, "granted"))
            granted.append(payload)
        return granted

    def close_day(self, day):
        """Fund today's requests from the remaining budget, cheapest doubt first."""
        granted = []
        for confidence, inst_id, payload in sorted(self._new, key=lambda t: (t[0], t[1])):
            if self._has_budget():
                self.today_spent += 1
                self.events.append(OracleEvent(day, inst_id, confidence, "granted"))
                granted.append(payload)
            elif self.overflow == "defer":
                heapq.heappush(self._deferred, (confidence, inst_id, payload))
                self.events.append(OracleEvent(day, inst_id, confidence, "deferred"))
            else:
                self.events.append(OracleEvent(day, inst_id, confidence, "dropped"))
        self._new = []
        return granted

    @property
    def n_deferred(self):
        return len(self._deferred)


class RetrainBuffer:
    """Ring of the most recently labelled (features, label) pairs."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items = deque(maxlen=capacity)

    def push(self, features, label):
        self._items.append((features, label))

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)  # oldest to newest


class ActiveController:
    """One experiment's mutable state: model, detector, oracle, buffer."""

    def __init__(self, learner, config: ActiveConfig, seed, recorder: Recorder):
        config.validate()
        self.learner = learner
        self.config = config
        self.seed = seed
        self.rec = recorder
        self.adwin = Adwin(config.adwin_delta)
        self.buffer = RetrainBuffer(config.retrain_buffer_size or len(seed))
        self.oracle = LabelOracle(config.oracle_daily_budget, config.budget_overflow)
        self._arrivals = []  # heap of (trainable_day, id, instance, error-at-test)
        self._arrived = set()
        self.retrains = 0

    # -- per-day phases -----------------------------------------------------

    def start_day(self, day):
        self._schedule(self.oracle.start_day(day), day)
        self._process_arrivals(day)

    def step_release(self, inst):
        """Test one release; request its label when the model is unsure."""
        pred = self.learner.predict(inst.features)
        self.rec.record_test(inst, pred)
        if pred.confidence < self.config.theta:
            err = 1.0 if pred.label != inst.label else 0.0
            self.oracle.submit(pred.confidence, inst.id, (inst, err))
            self.rec.note_request()
        return pred

    def close_day(self, day):
        self._schedule(self.oracle.close_day(day), day)
        self._process_arrivals(day)

    # -- label arrival and recovery ------------------------------------------

    def _schedule(self, granted, grant_day):
        for inst, err in granted:
            trainable = max(grant_day, inst.label_day)
            heapq.heappush(self._arrivals, (trainable, inst.id, inst, err))

    def _process_arrivals(self, today):
        while self._arrivals and self._arrivals[0][0] <= today:
            _, _, inst, err = heapq.heappop(self._arrivals)
            self.on_label_arrival(inst, err)

    def on_label_arrival(self, inst, err):
        if inst.id in self._arrived:
            raise RuntimeError(f"label for {inst.id!r} arrived twice")
        self._arrived.add(inst.id)
        self.learner.learn(inst.features, inst.label)
        self.rec.note_train(inst.id)
        self.rec.note_available()
        self.buffer.push(inst.features, inst.label)
        drifted, _ = self.adwin.insert(err)
        if drifted:
            self.retrain()
            self.rec.note_drift()

    def retrain(self):
        """Rebuild the model from scratch on the configured source."""
        self.learner.reset()
        if self.config.retrain_source == "seed":
            for inst in self.seed:
                self.learner.learn(inst.features, inst.label)
        else:
            if not len(self.buffer):
                logger.warning("drift retrain with empty buffer: model left blank")
            for features, label in self.buffer:
                self.learner.learn(features, label)
        self.adwin.reset()
        self.retrains += 1


def run_active(stream, seed, learner_config: LearnerConfig, active_config: ActiveConfig):
    if not seed:
        raise ValueError("seed must be non-empty")
    learner = make_learner(learner_config, seed[0].features.dim)
    train_on_seed(learner, seed)
    rec = Recorder("active", learner_config.model)
    ctrl = ActiveController(learner, active_config, seed, rec)
    for day in stream:
        rec.begin_day(day.day)
        ctrl.start_day(day.day)
        for inst in day.releases:
            ctrl.step_release(inst)
        ctrl.close_day(day.day)
        rec.end_day()
    rec.series.oracle_events = ctrl.oracle.events
    return rec.series


ORACLE_LOG_COLUMNS = "day,id,confidence,action"


def oracle_log_to_csv(events) -> str:
    lines = [ORACLE_LOG_COLUMNS]
    for e in events:
        lines.append(f"{e.day},{e.id},{e.confidence:.6f},{e.action}")
    return "\n".join(lines) + "\n"
