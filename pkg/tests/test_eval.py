"""Protocol engines: metric accounting, ordering rules, exports."""

import numpy as np
import pytest

from actstream.core import DriftSpec, GenConfig, generate_synthetic, load_dataset, split_seed
from actstream.eval import (
    ConfusionMatrix,
    Recorder,
    metrics_from_cm,
    prediction_log_to_csv,
    run_delayed,
    run_progressive,
    run_static,
    series_to_csv,
    summarize,
    train_on_seed,
)
from actstream.learners import LearnerConfig, make_learner, state_digest

from conftest import fv, make_days, make_instance


class TestMetrics:
    def test_worked_example(self):
        m = metrics_from_cm(ConfusionMatrix(tp=50, fp=10, tn=30, fn=10))
        assert m.accuracy == pytest.approx(0.8, abs=1e-4)
        assert m.precision == pytest.approx(0.8333, abs=1e-4)
        assert m.tpr == pytest.approx(0.8333, abs=1e-4)
        assert m.f1 == pytest.approx(0.8333, abs=1e-4)

    def test_all_benign_convention(self):
        m = metrics_from_cm(ConfusionMatrix(tn=25))
        assert (m.accuracy, m.precision, m.tpr, m.f1) == (1.0, 0.0, 0.0, 0.0)

    def test_perfect_classifier(self):
        m = metrics_from_cm(ConfusionMatrix(tp=5, tn=5))
        assert (m.accuracy, m.precision, m.tpr, m.f1) == (1.0, 1.0, 1.0, 1.0)

    def test_empty_matrix(self):
        m = metrics_from_cm(ConfusionMatrix())
        assert (m.accuracy, m.precision, m.tpr, m.f1) == (0.0, 0.0, 0.0, 0.0)


def seed_and_stream(days, seed_end):
    seed, rest = split_seed(days, seed_end)
    return seed, rest


class TestProgressive:
    def test_separable_stream_perfect_after_first_day(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 1)
        series = run_progressive(stream, seed, LearnerConfig(model="pa"))
        daily_acc = [metrics_from_cm(r.daily).accuracy for r in series.records]
        assert all(a == 1.0 for a in daily_acc[1:])

    def test_empty_poststream(self, separable_stream):
        seed, _ = seed_and_stream(separable_stream, 1)
        series = run_progressive([], seed, LearnerConfig(model="pa"))
        assert series.records == []
        summary = summarize(series)
        assert summary.n_days == 0 and summary.n_tested == 0
        assert summary.acc_mean == 0.0 and summary.labels_fraction == 0.0

    def test_every_instance_tested_once_and_counters(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_progressive(stream, seed, LearnerConfig(model="pa"))
        streamed = [i.id for d in stream for i in d.releases]
        logged = [p.id for p in series.prediction_log]
        assert logged == streamed  # tested once, in stream order
        last = series.records[-1]
        assert last.cumulative.total == len(streamed)
        assert last.labels_requested_so_far == len(streamed)
        assert last.labels_available_so_far == len(streamed)
        trained = [i for _, i in series.train_events]
        assert trained == streamed

    def test_empty_seed_rejected(self, separable_stream):
        with pytest.raises(ValueError):
            run_progressive(separable_stream, [], LearnerConfig(model="pa"))


class TestDelayed:
    def test_equivalent_to_progressive_with_zero_delay_one_per_day(self):
        rng = np.random.default_rng(2)
        instances = []
        for day in range(20):
            y = int(rng.integers(0, 2))
            noise = sorted({int(j) for j in rng.choice(range(2, 8), 2)})
            idx = ([0] if y else [1]) + noise
            instances.append(make_instance(f"a{day:02d}", 8, sorted(idx), y, day, day))
        days = make_days(instances)
        seed, stream = split_seed(days, 3)
        prog = run_progressive(stream, seed, LearnerConfig(model="pa"))
        dely = run_delayed(stream, seed, LearnerConfig(model="pa"))
        assert [(p.id, p.pred, p.conf) for p in prog.prediction_log] == [
            (p.id, p.pred, p.conf) for p in dely.prediction_log
        ]

    def test_never_trains_before_label_day(self):
        instances = [make_instance(f"s{i}", 6, [i % 3], i % 2, 0, 0) for i in range(4)]
        for day in range(1, 6):
            instances.append(make_instance(f"a{day}", 6, [0], 1, day, day + 2))
        days = make_days(instances)
        seed, stream = split_seed(days, 1)
        series = run_delayed(stream, seed, LearnerConfig(model="pa"))
        label_day = {i.id: i.label_day for d in stream for i in d.releases}
        for train_day, inst_id in series.train_events:
            assert train_day >= label_day[inst_id]

    def test_label_beyond_last_day_tested_but_never_trained(self):
        instances = [make_instance(f"s{i}", 6, [i % 3], i % 2, 0, 0) for i in range(4)]
        instances.append(make_instance("late", 6, [1], 1, 2, 99))
        instances.append(make_instance("ontime", 6, [2], 0, 2, 3))
        instances.append(make_instance("end", 6, [0], 1, 4, 4))
        days = make_days(instances)
        seed, stream = split_seed(days, 1)
        series = run_delayed(stream, seed, LearnerConfig(model="pa"))
        tested = {p.id for p in series.prediction_log}
        trained = {i for _, i in series.train_events}
        assert "late" in tested and "late" not in trained
        assert "ontime" in trained
        # released on the last day with same-day label: trains only before a
        # later day's tests, and there is none
        assert "end" not in trained

    def test_due_labels_train_in_label_day_then_id_order(self):
        instances = [make_instance(f"s{i}", 6, [i % 3], i % 2, 0, 0) for i in range(4)]
        # all three become available by day 3, with distinct (label_day, id)
        instances.append(make_instance("b", 6, [1], 1, 1, 3))
        instances.append(make_instance("a", 6, [2], 0, 1, 3))
        instances.append(make_instance("c", 6, [0], 1, 1, 2))
        instances.append(make_instance("probe", 6, [3], 0, 3, 10))
        days = make_days(instances)
        seed, stream = split_seed(days, 1)
        series = run_delayed(stream, seed, LearnerConfig(model="pa"))
        assert [i for _, i in series.train_events] == ["c", "a", "b"]

    def test_tests_match_progressive_test_set(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        prog = run_progressive(stream, seed, LearnerConfig(model="pa"))
        dely = run_delayed(stream, seed, LearnerConfig(model="pa"))
        assert [p.id for p in prog.prediction_log] == [p.id for p in dely.prediction_log]


class TestStatic:
    def test_predictions_equal_frozen_model_replay(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_static(stream, seed, LearnerConfig(model="pa"))
        oracle = make_learner(LearnerConfig(model="pa"), 4)
        train_on_seed(oracle, seed)
        digest_before = state_digest(oracle)
        expected = []
        for d in stream:
            for inst in d.releases:
                p = oracle.predict(inst.features)
                expected.append((inst.id, p.label, p.confidence))
        assert [(p.id, p.pred, p.conf) for p in series.prediction_log] == expected
        assert state_digest(oracle) == digest_before  # predict never mutates

    def test_no_labels_requested(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_static(stream, seed, LearnerConfig(model="pa"))
        assert all(r.labels_requested_so_far == 0 for r in series.records)
        assert series.train_events == []

    def test_accuracy_declines_after_abrupt_drift(self, tmp_path):
        cfg = GenConfig(
            dim=150, days=60, per_day_benign=20, per_day_malware=20,
            delay_min=0, delay_max=0, seed=5,
            drift=[DriftSpec(30, "abrupt", 0.8)],
        )
        path = tmp_path / "d.ds"
        generate_synthetic(cfg, 5, path)
        _, days = load_dataset(path)
        seed, stream = split_seed(days, 10)
        series = run_static(stream, seed, LearnerConfig(model="pa"))
        acc = {r.day: metrics_from_cm(r.daily).accuracy for r in series.records}
        before = np.mean([acc[d] for d in range(10, 30)])
        after = np.mean([acc[d] for d in range(30, 60)])
        assert after < before


class TestSummarize:
    def make_series(self, daily_accs):
        rec = Recorder("static", "pa")
        for day, acc in enumerate(daily_accs):
            rec.begin_day(day)
            n = 10
            correct = int(round(acc * n))
            for i in range(n):
                inst = make_instance(f"d{day}i{i}", 4, [0], 1, day)
                pred_label = 1 if i < correct else 0
                rec.record_test(inst, type("P", (), {"label": pred_label, "confidence": 0.5})())
            rec.end_day()
        return rec.series

    def test_mean_and_population_std(self):
        summary = summarize(self.make_series([0.8, 1.0]))
        assert summary.acc_mean == pytest.approx(0.9)
        assert summary.acc_std == pytest.approx(0.1)

    def test_single_day_std_zero(self):
        summary = summarize(self.make_series([0.7]))
        assert summary.acc_std == 0.0

    def test_identical_days_std_zero(self):
        summary = summarize(self.make_series([0.9, 0.9, 0.9]))
        assert summary.acc_std == 0.0
        assert summary.acc_mean == pytest.approx(0.9)


class TestConservation:
    @pytest.mark.parametrize("runner", [run_progressive, run_delayed, run_static])
    def test_cumulative_matches_log_recompute(self, separable_stream, runner):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = runner(stream, seed, LearnerConfig(model="pa"))
        cm = ConfusionMatrix()
        by_day = {}
        for p in series.prediction_log:
            cm.add(p.pred, p.label)
            by_day[p.day] = ConfusionMatrix(cm.tp, cm.fp, cm.tn, cm.fn)
        for rec in series.records:
            expected = by_day.get(rec.day)
            if expected is not None:
                assert rec.cumulative == expected

    def test_cumulative_counts_nondecreasing(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_progressive(stream, seed, LearnerConfig(model="pa"))
        prev = 0
        for rec in series.records:
            assert rec.cumulative.total >= prev
            prev = rec.cumulative.total


class TestCsvExport:
    def test_series_csv_shape_and_determinism(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_progressive(stream, seed, LearnerConfig(model="pa"))
        text = series_to_csv(series)
        lines = text.splitlines()
        assert lines[0] == "#protocol=progressive,model=pa"
        assert lines[1].startswith("day,n_tested,acc,prec")
        assert len(lines) == 2 + len(series.records)
        first = lines[2].split(",")
        assert len(first) == 13
        assert first[2].count(".") == 1 and len(first[2].split(".")[1]) == 6
        rerun = run_progressive(stream, seed, LearnerConfig(model="pa"))
        assert series_to_csv(rerun) == text

    def test_prediction_log_csv(self, separable_stream):
        seed, stream = seed_and_stream(separable_stream, 2)
        series = run_progressive(stream, seed, LearnerConfig(model="pa"))
        lines = prediction_log_to_csv(series).splitlines()
        assert lines[0] == "id,day,pred,conf,label,label_day"
        assert len(lines) == 1 + len(series.prediction_log)
