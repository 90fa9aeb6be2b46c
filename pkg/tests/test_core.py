"""Data model, dataset file format, splitting and the synthetic generator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actstream import core
from actstream.core import (
    ConfigError,
    DatasetError,
    DriftSpec,
    FeatureVector,
    GenConfig,
    estimate_release_day,
    generate_synthetic,
    load_dataset,
    split_seed,
    write_dataset,
)

from conftest import fv, make_days, make_instance


class TestFeatureVector:
    def test_valid_vector(self):
        v = fv(100, 3, 17, 90)
        assert v.dim == 100 and v.nnz == 3 and v.norm_sq == 3
        assert v.has(17) and not v.has(18)

    def test_rejects_unsorted_and_duplicates(self):
        with pytest.raises(ValueError):
            FeatureVector(10, np.array([3, 1], dtype=np.int32))
        with pytest.raises(ValueError):
            FeatureVector(10, np.array([3, 3], dtype=np.int32))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            FeatureVector(10, np.array([10], dtype=np.int32))
        with pytest.raises(ValueError):
            FeatureVector(10, np.array([-1], dtype=np.int32))

    def test_indices_immutable(self):
        v = fv(10, 2)
        with pytest.raises(ValueError):
            v.indices[0] = 5

    @given(st.sets(st.integers(0, 49)))
    @settings(max_examples=50, derandomize=True)
    def test_norm_equals_active_count(self, idx):
        v = FeatureVector(50, np.array(sorted(idx), dtype=np.int32))
        assert v.norm_sq == len(idx)


class TestInstanceFileFormat:
    HEADER = "#dim=100,delay=40\n#epoch=synthetic\n"

    def write(self, tmp_path, body):
        path = tmp_path / "data.ds"
        path.write_text(self.HEADER + body)
        return path

    def test_single_record(self, tmp_path):
        meta, days = load_dataset(self.write(tmp_path, "a1,5,45,1,3:17:90\n"))
        assert meta.dim == 100 and meta.delay_estimate == 40
        assert meta.n_benign == 0 and meta.n_malware == 1
        assert len(days) == 1 and days[0].day == 5
        inst = days[0].releases[0]
        assert inst.id == "a1" and inst.label == 1 and inst.label_day == 45
        assert list(inst.features.indices) == [3, 17, 90]

    def test_empty_body(self, tmp_path):
        meta, days = load_dataset(self.write(tmp_path, ""))
        assert days == []
        assert meta.n_benign == 0 and meta.n_malware == 0
        assert meta.first_day == -1 and meta.last_day == -1

    def test_days_sorted(self, tmp_path):
        body = "a1,7,7,0,-\na2,3,3,1,1\n"
        _, days = load_dataset(self.write(tmp_path, body))
        assert [d.day for d in days] == [3, 7]

    def test_empty_index_list(self, tmp_path):
        _, days = load_dataset(self.write(tmp_path, "a1,0,0,0,-\n"))
        assert days[0].releases[0].features.nnz == 0

    def test_malformed_line_reports_line_number(self, tmp_path):
        with pytest.raises(DatasetError) as err:
            load_dataset(self.write(tmp_path, "a1,5,45,1\n"))
        assert err.value.line == 3

    def test_index_beyond_dim_rejected(self, tmp_path):
        with pytest.raises(DatasetError) as err:
            load_dataset(self.write(tmp_path, "a1,5,45,1,100\n"))
        assert err.value.line == 3

    def test_label_before_release_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(self.write(tmp_path, "a1,5,4,1,1\n"))

    def test_duplicate_id_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(self.write(tmp_path, "a1,5,45,1,1\na1,6,46,0,-\n"))

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.ds"
        path.write_text("#dims=100\n#epoch=x\n")
        with pytest.raises(DatasetError) as err:
            load_dataset(path)
        assert err.value.line == 1

    def test_roundtrip(self, tmp_path):
        instances = [
            make_instance("a0", 50, [0, 7], 0, 2, 2),
            make_instance("a1", 50, [], 1, 2, 40),
            make_instance("a2", 50, [49], 1, 5, 9),
        ]
        path = tmp_path / "rt.ds"
        write_dataset(path, 50, 7, instances, epoch="2020-01-01")
        meta, days = load_dataset(path)
        assert meta.dim == 50 and meta.delay_estimate == 7 and meta.epoch == "2020-01-01"
        loaded = [inst for d in days for inst in d.releases]
        assert loaded == instances
        # writing again reproduces the same bytes
        path2 = tmp_path / "rt2.ds"
        write_dataset(path2, 50, 7, loaded, epoch="2020-01-01")
        assert path.read_bytes() == path2.read_bytes()

    def test_malware_release_estimation_regroups(self, tmp_path):
        body = "a1,50,50,1,1\na2,10,10,0,2\n"
        _, days = load_dataset(
            self.write(tmp_path, body), estimate_malware_release=True
        )
        # malware release day becomes 50 - 40 = 10; benign untouched
        assert [d.day for d in days] == [10]
        assert [i.id for i in days[0].releases] == ["a1", "a2"]


class TestEstimateReleaseDay:
    def test_delay_subtracted(self):
        assert estimate_release_day(100, 40) == 60

    def test_clamped_at_origin(self):
        assert estimate_release_day(5, 40) == 0

    def test_zero_delay_identity(self):
        assert estimate_release_day(40, 0) == 40

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            estimate_release_day(10, -1)


class TestSplitSeed:
    def make_stream(self):
        instances = []
        for day in range(3):
            for i in range(2):
                instances.append(make_instance(f"a{day}{i}", 10, [i], i % 2, day, day + 40))
        return make_days(instances)

    def test_split_counts(self):
        days = self.make_stream()
        seed, rest = split_seed(days, 2)
        assert len(seed) == 4
        assert [d.day for d in rest] == [2]

    def test_zero_seed_end(self):
        days = self.make_stream()
        seed, rest = split_seed(days, 0)
        assert seed == [] and len(rest) == 3

    def test_partition_is_exact(self):
        days = self.make_stream()
        total = sum(len(d.releases) for d in days)
        for end in range(0, 4):
            seed, rest = split_seed(days, end)
            rest_count = sum(len(d.releases) for d in rest)
            assert len(seed) + rest_count == total
            seed_ids = {i.id for i in seed}
            rest_ids = {i.id for d in rest for i in d.releases}
            assert not (seed_ids & rest_ids)


def default_gen_config(**overrides):
    base = dict(
        dim=200,
        days=100,
        per_day_benign=25,
        per_day_malware=25,
        delay_min=10,
        delay_max=10,
        seed=9,
    )
    base.update(overrides)
    return GenConfig(**base)


class TestGenerator:
    def test_deterministic_bytes(self, tmp_path):
        cfg = default_gen_config(drift=[DriftSpec(50, "abrupt", 0.5)])
        a, b = tmp_path / "a.ds", tmp_path / "b.ds"
        generate_synthetic(cfg, 9, a)
        generate_synthetic(cfg, 9, b)
        assert a.read_bytes() == b.read_bytes()
        generate_synthetic(cfg, 10, b)
        assert a.read_bytes() != b.read_bytes()

    def test_output_loads_and_matches_config(self, tmp_path):
        cfg = default_gen_config(days=20, delay_min=3, delay_max=8)
        path = tmp_path / "g.ds"
        generate_synthetic(cfg, 1, path)
        meta, days = load_dataset(path)
        assert meta.dim == 200
        assert meta.n_benign == meta.n_malware == 20 * 25
        assert [d.day for d in days] == list(range(20))
        for d in days:
            for inst in d.releases:
                assert 3 <= inst.label_day - inst.release_day <= 8

    def test_magnitude_zero_drift_is_noop(self, tmp_path):
        cfg = default_gen_config(days=40, drift=[DriftSpec(20, "abrupt", 0.0)])
        path = tmp_path / "g.ds"
        generate_synthetic(cfg, 2, path)
        _, days = load_dataset(path)
        before = self._malware_frequencies(days, 200, range(0, 20))
        after = self._malware_frequencies(days, 200, range(20, 40))
        shifted = self._count_shifted(before, after, 25 * 20)
        assert shifted <= 3  # chance-level only

    @staticmethod
    def _malware_frequencies(days, dim, day_range):
        day_set = set(day_range)
        counts = np.zeros(dim)
        n = 0
        for d in days:
            if d.day in day_set:
                for inst in d.releases:
                    if inst.label == 1:
                        counts[inst.features.indices] += 1
                        n += 1
        return counts / n

    @staticmethod
    def _count_shifted(f_before, f_after, n_per_side):
        """Coordinates whose frequency moved beyond 3-sigma binomial bounds."""
        p_pool = (f_before + f_after) / 2
        sigma = np.sqrt(np.maximum(p_pool * (1 - p_pool), 1e-12) * 2 / n_per_side)
        return int(np.sum(np.abs(f_after - f_before) > 3 * sigma))

    def test_abrupt_drift_shifts_about_half_the_coordinates(self, tmp_path):
        cfg = default_gen_config(
            dim=200, days=100, drift=[DriftSpec(50, "abrupt", 0.5)]
        )
        path = tmp_path / "g.ds"
        generate_synthetic(cfg, 4, path)
        _, days = load_dataset(path)
        before = self._malware_frequencies(days, 200, range(0, 50))
        after = self._malware_frequencies(days, 200, range(51, 100))
        shifted = self._count_shifted(before, after, 25 * 49)
        # magnitude 0.5 re-draws ~100 of 200 coordinates; most re-draws move
        # the activation probability detectably, some land near the old value
        assert 50 <= shifted <= 110

    def test_drift_day_validation(self):
        cfg = default_gen_config(drift=[DriftSpec(100, "abrupt", 0.5)])
        with pytest.raises(ConfigError):
            cfg.validate()
        cfg = default_gen_config(drift=[DriftSpec(5, "abrupt", 1.5)])
        with pytest.raises(ConfigError):
            cfg.validate()
        cfg = default_gen_config(drift=[DriftSpec(5, "sudden", 0.5)])
        with pytest.raises(ConfigError):
            cfg.validate()


class TestGenConfigFile:
    def test_parse_complete_file(self, tmp_path):
        path = tmp_path / "gen.cfg"
        path.write_text(
            "dim=500\ndays=200\nper_day_benign=50\nper_day_malware=50\n"
            "delay_min=40\ndelay_max=40\nseed=7\n"
            "drift=30:gradual:0.4;100:abrupt:0.5\ndrift_span=50\n"
        )
        cfg = core.parse_gen_config(path)
        assert cfg.dim == 500 and cfg.seed == 7
        assert cfg.drift == [DriftSpec(30, "gradual", 0.4), DriftSpec(100, "abrupt", 0.5)]
        assert cfg.drift_span == 50

    def test_missing_key_named_in_error(self, tmp_path):
        path = tmp_path / "gen.cfg"
        path.write_text("days=10\n")
        with pytest.raises(ConfigError, match="dim"):
            core.parse_gen_config(path)
