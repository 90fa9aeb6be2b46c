"""Stream data model and dataset plumbing.

An application stream is a sequence of days; each day carries the
applications released on it as sparse binary feature vectors with a true
label and the day their label becomes obtainable.  This module owns the
instance file format, day grouping, release-day estimation, seed/stream
splitting and a synthetic drifting-stream generator used in place of the
(unavailable) real corpus.
"""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass, field

import numpy as np

BENIGN = 0
MALWARE = 1

DEFAULT_LABEL_DELAY = 40


class DatasetError(ValueError):
    """Malformed dataset file; carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class ConfigError(ValueError):
    """Invalid generator or experiment configuration."""


class FeatureVector:
    """Sparse binary vector: sorted unique active indices over ``[0, dim)``.

    Binary features make the squared norm equal to the number of active
    indices, which the learners exploit for O(active) updates.
    """

    __slots__ = ("dim", "indices")

    def __init__(self, dim, indices):
        arr = np.ascontiguousarray(indices, dtype=np.int32)
        if arr.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        if arr.size:
            if arr[0] < 0 or arr[-1] >= dim:
                raise ValueError(f"feature index out of range [0, {dim})")
            if arr.size > 1 and not (np.diff(arr) > 0).all():
                raise ValueError("indices must be strictly increasing")
        arr.setflags(write=False)
        self.dim = int(dim)
        self.indices = arr

    @property
    def nnz(self):
        return self.indices.size

    @property
    def norm_sq(self):
        """Squared Euclidean norm; equals the active count for binary data."""
        return self.indices.size

    def has(self, j):
        pos = int(np.searchsorted(self.indices, j))
        return pos < self.indices.size and int(self.indices[pos]) == j

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.indices, other.indices)

    def __repr__(self):
        return f"FeatureVector(dim={self.dim}, nnz={self.nnz})"


@dataclass(frozen=True)
class Instance:
    """One application: features, true label, release day, label-availability day."""

    id: str
    features: FeatureVector
    label: int
    release_day: int
    label_day: int

    def __post_init__(self):
        if self.label not in (BENIGN, MALWARE):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.release_day < 0:
            raise ValueError("release_day must be non-negative")
        if self.label_day < self.release_day:
            raise ValueError(
                f"label_day {self.label_day} precedes release_day {self.release_day}"
            )


@dataclass(frozen=True)
class StreamDay:
    day: int
    releases: list  # of Instance, ordered by id


@dataclass(frozen=True)
class DatasetMeta:
    dim: int
    n_benign: int
    n_malware: int
    first_day: int  # -1 when the dataset is empty
    last_day: int   # -1 when the dataset is empty
    delay_estimate: int = DEFAULT_LABEL_DELAY
    epoch: str = "synthetic"


def estimate_release_day(label_day, delay):
    """Estimated release day: ``label_day - delay``, clamped at the stream origin."""
    if delay < 0:
        raise ValueError(f"delay must be non-negative, got {delay}")
    return max(0, label_day - delay)


_HEADER_RE = re.compile(r"#dim=(\d+),delay=(\d+)$")
_EPOCH_RE = re.compile(r"#epoch=(.+)$")


def _parse_record(line, lineno, dim):
    parts = line.split(",")
    if len(parts) != 5:
        raise DatasetError(f"expected 5 comma-separated fields, got {len(parts)}", lineno)
    app_id, rel_s, lab_s, y_s, idx_s = parts
    if not app_id:
        raise DatasetError("empty instance id", lineno)
    try:
        release_day = int(rel_s)
        label_day = int(lab_s)
        y = int(y_s)
    except ValueError:
        raise DatasetError("day/label fields must be integers", lineno) from None
    if y not in (BENIGN, MALWARE):
        raise DatasetError(f"label must be 0 or 1, got {y}", lineno)
    if release_day < 0:
        raise DatasetError("negative release day", lineno)
    if label_day < release_day:
        raise DatasetError(
            f"label_day {label_day} precedes release_day {release_day}", lineno
        )
    if idx_s == "-":
        indices = np.empty(0, dtype=np.int32)
    else:
        try:
            indices = np.array(idx_s.split(":"), dtype=np.int32)
        except ValueError:
            raise DatasetError("feature indices must be integers", lineno) from None
    try:
        fv = FeatureVector(dim, indices)
    except ValueError as exc:
        raise DatasetError(str(exc), lineno) from None
    return Instance(app_id, fv, y, release_day, label_day)


def load_dataset(path, *, estimate_malware_release=False):
    """Load an instance file; returns ``(DatasetMeta, [StreamDay, ...])``.

    Instances are grouped by release day (days with no releases are simply
    absent; numbering is untouched) and ordered by id within a day.  With
    ``estimate_malware_release`` the release day of every malware instance
    is replaced by ``label_day - delay`` (clamped at 0) using the delay
    recorded in the header, mirroring how release dates are reconstructed
    when only report dates are known.
    """
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise DatasetError("missing header lines", 1)
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise DatasetError("first header must be #dim=<d>,delay=<D>", 1)
    dim, delay = int(m.group(1)), int(m.group(2))
    if dim <= 0:
        raise DatasetError("dim must be positive", 1)
    m = _EPOCH_RE.match(lines[1])
    if not m:
        raise DatasetError("second header must be #epoch=<...>", 2)
    epoch = m.group(1)

    instances = []
    seen_ids = set()
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        inst = _parse_record(line, lineno, dim)
        if inst.id in seen_ids:
            raise DatasetError(f"duplicate instance id {inst.id!r}", lineno)
        seen_ids.add(inst.id)
        if estimate_malware_release and inst.label == MALWARE:
            inst = Instance(
                inst.id,
                inst.features,
                inst.label,
                estimate_release_day(inst.label_day, delay),
                inst.label_day,
            )
        instances.append(inst)

    by_day = {}
    for inst in instances:
        by_day.setdefault(inst.release_day, []).append(inst)
    days = [
        StreamDay(day, sorted(group, key=lambda i: i.id))
        for day, group in sorted(by_day.items())
    ]
    n_mal = sum(inst.label == MALWARE for inst in instances)
    meta = DatasetMeta(
        dim=dim,
        n_benign=len(instances) - n_mal,
        n_malware=n_mal,
        first_day=days[0].day if days else -1,
        last_day=days[-1].day if days else -1,
        delay_estimate=delay,
        epoch=epoch,
    )
    return meta, days


def _format_record(inst):
    idx = ":".join(str(int(i)) for i in inst.features.indices) or "-"
    return f"{inst.id},{inst.release_day},{inst.label_day},{inst.label},{idx}"


def atomic_write_text(path, text):
    """Write a file via temp-and-rename so failures never leave partial output."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_dataset(path, dim, delay, instances, epoch="synthetic"):
    """Write instances in the line-oriented dataset format (LF endings)."""
    lines = [f"#dim={dim},delay={delay}", f"#epoch={epoch}"]
    lines.extend(_format_record(inst) for inst in instances)
    atomic_write_text(path, "\n".join(lines) + "\n")


def split_seed(days, seed_end_day):
    """Split a stream into the fully-labelled seed set and the remaining days.

    The seed is every instance released before ``seed_end_day`` (labels are
    exposed immediately regardless of label day, since the bootstrap set is
    assumed fully labelled); the rest of the stream is returned untouched.
    """
    seed = [
        inst for d in days if d.day < seed_end_day for inst in d.releases
    ]
    rest = [d for d in days if d.day >= seed_end_day]
    return seed, rest


# ---------------------------------------------------------------------------
# Synthetic drifting streams
# ---------------------------------------------------------------------------

_DRIFT_KINDS = ("abrupt", "gradual")


@dataclass(frozen=True)
class DriftSpec:
    day: int
    kind: str  # abrupt | gradual
    magnitude: float


@dataclass
class GenConfig:
    """Synthetic stream shape.

    Each class has a per-feature activation probability vector; instances
    sample features independently.  Abrupt drift re-draws a ``magnitude``
    fraction of the malware vector's entries; gradual drift interpolates
    linearly to such a re-draw over ``drift_span`` days.  Only the malware
    concept moves.
    """

    dim: int
    days: int
    per_day_benign: int
    per_day_malware: int
    delay_min: int
    delay_max: int
    seed: int = 0
    drift: list = field(default_factory=list)  # of DriftSpec
    drift_span: int = 30
    p_lo: float = 0.02
    p_hi: float = 0.25
    informative: float = 0.25
    out: str | None = None

    def validate(self):
        if self.dim <= 0:
            raise ConfigError("dim must be positive")
        if self.days <= 0:
            raise ConfigError("days must be positive")
        if self.per_day_benign < 0 or self.per_day_malware < 0:
            raise ConfigError("per-day instance counts must be non-negative")
        if not 0 <= self.delay_min <= self.delay_max:
            raise ConfigError("need 0 <= delay_min <= delay_max")
        if self.drift_span <= 0:
            raise ConfigError("drift_span must be positive")
        if not 0.0 <= self.p_lo <= self.p_hi <= 1.0:
            raise ConfigError("need 0 <= p_lo <= p_hi <= 1")
        if not 0.0 <= self.informative <= 1.0:
            raise ConfigError("informative must be in [0, 1]")
        for spec in self.drift:
            if spec.kind not in _DRIFT_KINDS:
                raise ConfigError(f"unknown drift kind {spec.kind!r}")
            if not 0 <= spec.day < self.days:
                raise ConfigError(
                    f"drift day {spec.day} outside stream range [0, {self.days})"
                )
            if not 0.0 <= spec.magnitude <= 1.0:
                raise ConfigError(f"drift magnitude {spec.magnitude} outside [0, 1]")


def parse_kv_file(path):
    """Parse a flat ``key = value`` file; blank lines and # comments ignored."""
    values = {}
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _parse_drift_list(text):
    specs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) != 3:
            raise ConfigError(f"drift entry {part!r} must be day:kind:magnitude")
        try:
            specs.append(DriftSpec(int(fields[0]), fields[1], float(fields[2])))
        except ValueError:
            raise ConfigError(f"drift entry {part!r} has non-numeric fields") from None
    return specs


_GEN_REQUIRED = (
    "dim", "days", "per_day_benign", "per_day_malware", "delay_min", "delay_max",
)


def parse_gen_config(path):
    values = parse_kv_file(path)
    for key in _GEN_REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    try:
        cfg = GenConfig(
            dim=int(values["dim"]),
            days=int(values["days"]),
            per_day_benign=int(values["per_day_benign"]),
            per_day_malware=int(values["per_day_malware"]),
            delay_min=int(values["delay_min"]),
            delay_max=int(values["delay_max"]),
            seed=int(values.get("seed", "0")),
            drift=_parse_drift_list(values.get("drift", "")),
            drift_span=int(values.get("drift_span", "30")),
            p_lo=float(values.get("p_lo", "0.02")),
            p_hi=float(values.get("p_hi", "0.25")),
            informative=float(values.get("informative", "0.25")),
            out=values.get("out"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value in generator config: {exc}") from None
    cfg.validate()
    return cfg


def _redraw(rng, p, magnitude, lo, hi):
    """Copy of ``p`` with a ``magnitude`` fraction of entries drawn afresh."""
    out = p.copy()
    k = int(round(magnitude * p.size))
    if k:
        idx = rng.choice(p.size, size=k, replace=False)
        out[idx] = rng.uniform(lo, hi, size=k)
    return out


def _sample_day(rng, p, n, dim):
    draws = rng.random((n, dim)) < p
    return [np.flatnonzero(row).astype(np.int32) for row in draws]


def generate_synthetic(cfg, rng_seed, out_path):
    """Generate a dataset file; a pure function of ``(cfg, rng_seed)``."""
    cfg.validate()
    rng = np.random.default_rng(rng_seed)
    lo, hi = cfg.p_lo, cfg.p_hi
    p_ben = rng.uniform(lo, hi, cfg.dim)
    p_mal = _redraw(rng, p_ben, cfg.informative, lo, hi)

    by_day = {}
    for spec in cfg.drift:
        by_day.setdefault(spec.day, []).append(spec)
    gradual = None  # (start_day, start_p, target_p)

    instances = []
    seq = 0
    for day in range(cfg.days):
        for spec in by_day.get(day, ()):
            if spec.kind == "abrupt":
                p_mal = _redraw(rng, p_mal, spec.magnitude, lo, hi)
                if gradual is not None:
                    # restart any in-flight ramp from the jolted concept
                    gradual = (gradual[0], p_mal, gradual[2])
            else:
                gradual = (day, p_mal, _redraw(rng, p_mal, spec.magnitude, lo, hi))
        if gradual is not None:
            start_day, start_p, target_p = gradual
            frac = (day - start_day + 1) / cfg.drift_span
            if frac >= 1.0:
                p_mal = target_p
                gradual = None
            else:
                p_mal = start_p + frac * (target_p - start_p)

        for label, p, count in (
            (BENIGN, p_ben, cfg.per_day_benign),
            (MALWARE, p_mal, cfg.per_day_malware),
        ):
            rows = _sample_day(rng, p, count, cfg.dim)
            delays = rng.integers(cfg.delay_min, cfg.delay_max + 1, size=count)
            for row, delay in zip(rows, delays):
                instances.append(
                    Instance(
                        f"a{seq:06d}",
                        FeatureVector(cfg.dim, row),
                        label,
                        day,
                        day + int(delay),
                    )
                )
                seq += 1

    header_delay = (cfg.delay_min + cfg.delay_max) // 2
    write_dataset(out_path, cfg.dim, header_delay, instances, epoch="synthetic")
