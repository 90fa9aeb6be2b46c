"""Experiment runner CLI: dataset generation, protocol runs, report aggregation.

Exit codes: 0 success; 2 configuration error; 3 dataset/input-schema error;
4 runtime failure.  Output files are written atomically, so a failed run
never leaves a partial CSV behind.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import core
from .active import ActiveConfig, oracle_log_to_csv, run_active
from .core import ConfigError, DatasetError, atomic_write_text
from .eval import (
    SERIES_COLUMNS,
    SUMMARY_COLUMNS,
    metrics_from_cm,
    prediction_log_to_csv,
    run_delayed,
    run_progressive,
    run_static,
    series_to_csv,
    summarize,
    summary_to_csv_row,
)
from .learners import LearnerConfig

EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_RUNTIME = 4

SEED_ENV_VAR = "ACTSTREAM_SEED"


def _env_seed():
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _parse_bool(raw, key):
    if raw in ("1", "true", "yes"):
        return True
    if raw in ("0", "false", "no"):
        return False
    raise ConfigError(f"key {key!r} must be a boolean flag, got {raw!r}")


@dataclass
class ExperimentConfig:
    dataset: str
    protocol: str
    learner: LearnerConfig
    seed_end_day: int
    out_dir: str
    active: ActiveConfig
    adwin_delta: float = 0.002
    rng_seed: int = 0
    log_predictions: bool = False
    log_oracle: bool = False
    estimate_malware_release: bool = False


_LEARNER_KEYS = {
    "c": float,
    "delta_tree": float,
    "grace_period": int,
    "tie_threshold": float,
    "n_trees": int,
    "lambda_poisson": float,
    "k": int,
    "knn_window": int,
    "var_smoothing": float,
}

_ACTIVE_KEYS = {
    "theta": float,
    "retrain_buffer_size": int,
    "oracle_daily_budget": int,
}


def load_experiment_config(path) -> ExperimentConfig:
    values = core.parse_kv_file(path)
    for key in ("dataset", "protocol", "model", "seed_end_day", "out_dir"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        rng_seed = int(values.get("rng_seed", "0"))
        learner = LearnerConfig(model=values["model"], rng_seed=rng_seed)
        for key, cast in _LEARNER_KEYS.items():
            if key in values:
                setattr(learner, key, cast(values[key]))
        if "subspace_size" in values:
            raw = values["subspace_size"]
            learner.subspace_size = raw if raw == "sqrt" else int(raw)
        active = ActiveConfig(adwin_delta=float(values.get("adwin_delta", "0.002")))
        for key, cast in _ACTIVE_KEYS.items():
            if key in values:
                setattr(active, key, cast(values[key]))
        if "budget_overflow" in values:
            active.budget_overflow = values["budget_overflow"]
        if "retrain_source" in values:
            active.retrain_source = values["retrain_source"]
        cfg = ExperimentConfig(
            dataset=resolve(values["dataset"]),
            protocol=values["protocol"],
            learner=learner,
            seed_end_day=int(values["seed_end_day"]),
            out_dir=resolve(values["out_dir"]),
            active=active,
            adwin_delta=float(values.get("adwin_delta", "0.002")),
            rng_seed=rng_seed,
            log_predictions=_parse_bool(values.get("log_predictions", "0"), "log_predictions"),
            log_oracle=_parse_bool(values.get("log_oracle", "0"), "log_oracle"),
            estimate_malware_release=_parse_bool(
                values.get("estimate_malware_release", "0"), "estimate_malware_release"
            ),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value in experiment config: {exc}") from None

    if cfg.protocol not in ("progressive", "delayed", "static", "active"):
        raise ConfigError(f"unknown protocol {cfg.protocol!r}")
    env = _env_seed()
    if env is not None:
        cfg.rng_seed = env
        cfg.learner.rng_seed = env
    cfg.learner.validate()
    cfg.active.validate()
    return cfg


def cmd_generate(args):
    try:
        cfg = core.parse_gen_config(args.config)
        seed = _env_seed()
        if seed is None:
            seed = cfg.seed
        out = args.output or cfg.out
        if out is None:
            out = os.path.splitext(os.path.abspath(args.config))[0] + ".ds"
        elif not os.path.isabs(out):
            out = os.path.join(os.path.dirname(os.path.abspath(args.config)), out)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    core.generate_synthetic(cfg, seed, out)
    print(f"wrote {out}")
    return 0


def _format_result_line(summary):
    return (
        f"RESULT protocol={summary.protocol} model={summary.model} "
        f"acc={summary.acc_mean:.3f}±{summary.acc_std:.3f} "
        f"f1={summary.f1_mean:.3f}±{summary.f1_std:.3f} "
        f"prec={summary.prec_mean:.3f}±{summary.prec_std:.3f} "
        f"tpr={summary.tpr_mean:.3f}±{summary.tpr_std:.3f} "
        f"labels={summary.labels_fraction:.3f} drifts={summary.drifts}"
    )


def cmd_run(args):
    try:
        cfg = load_experiment_config(args.config)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        meta, days = core.load_dataset(
            cfg.dataset, estimate_malware_release=cfg.estimate_malware_release
        )
    except (DatasetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATASET

    seed, stream = core.split_seed(days, cfg.seed_end_day)
    if not seed:
        print(
            f"error: seed_end_day={cfg.seed_end_day} leaves an empty seed set",
            file=sys.stderr,
        )
        return EXIT_CONFIG

    try:
        if cfg.protocol == "progressive":
            series = run_progressive(stream, seed, cfg.learner, cfg.adwin_delta)
        elif cfg.protocol == "delayed":
            series = run_delayed(stream, seed, cfg.learner, cfg.adwin_delta)
        elif cfg.protocol == "static":
            series = run_static(stream, seed, cfg.learner)
        else:
            series = run_active(stream, seed, cfg.learner, cfg.active)

        summary = summarize(series)
        os.makedirs(cfg.out_dir, exist_ok=True)
        atomic_write_text(os.path.join(cfg.out_dir, "series.csv"), series_to_csv(series))
        atomic_write_text(
            os.path.join(cfg.out_dir, "summary.csv"),
            SUMMARY_COLUMNS + "\n" + summary_to_csv_row(summary) + "\n",
        )
        if cfg.log_predictions:
            atomic_write_text(
                os.path.join(cfg.out_dir, "predictions.csv"),
                prediction_log_to_csv(series),
            )
        if cfg.log_oracle and cfg.protocol == "active":
            atomic_write_text(
                os.path.join(cfg.out_dir, "oracle_log.csv"),
                oracle_log_to_csv(series.oracle_events),
            )
    except Exception as exc:  # runtime failure: no partial outputs remain
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(_format_result_line(summary))
    return 0


def _read_series_csv(path):
    """Parse one series CSV back into (protocol, model, rows)."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or not lines[0].startswith("#protocol="):
        raise DatasetError("missing #protocol=...,model=... metadata line", 1)
    meta = dict(item.split("=", 1) for item in lines[0][1:].split(",") if "=" in item)
    if "protocol" not in meta or "model" not in meta:
        raise DatasetError("metadata line must carry protocol and model", 1)
    if lines[1] != SERIES_COLUMNS:
        raise DatasetError("unexpected series header", 2)
    rows = []
    n_cols = len(SERIES_COLUMNS.split(","))
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise DatasetError(f"expected {n_cols} columns", lineno)
        try:
            rows.append(
                {
                    "day": int(parts[0]),
                    "n_tested": int(parts[1]),
                    "acc": float(parts[2]),
                    "prec": float(parts[3]),
                    "tpr": float(parts[4]),
                    "f1": float(parts[5]),
                    "drifts": int(parts[10]),
                    "labels_requested": int(parts[11]),
                }
            )
        except ValueError:
            raise DatasetError("non-numeric value in series row", lineno) from None
    return meta["protocol"], meta["model"], rows


def _aggregate_series(path):
    import numpy as np

    protocol, model, rows = _read_series_csv(path)
    tested = [r for r in rows if r["n_tested"] > 0]
    n_tested = sum(r["n_tested"] for r in rows)

    def stat(key):
        if not tested:
            return 0.0, 0.0
        arr = np.array([r[key] for r in tested])
        return float(arr.mean()), float(arr.std())

    acc, f1, prec, tpr = stat("acc"), stat("f1"), stat("prec"), stat("tpr")
    requested = rows[-1]["labels_requested"] if rows else 0
    drifts = rows[-1]["drifts"] if rows else 0
    labels_fraction = requested / n_tested if n_tested else 0.0
    return (
        f"{protocol},{model},{len(tested)},{n_tested},"
        f"{acc[0]:.6f},{acc[1]:.6f},{f1[0]:.6f},{f1[1]:.6f},"
        f"{prec[0]:.6f},{prec[1]:.6f},{tpr[0]:.6f},{tpr[1]:.6f},"
        f"{labels_fraction:.6f},{drifts}"
    )


def cmd_report(args):
    rows = []
    for path in args.series:
        try:
            rows.append(_aggregate_series(path))
        except (DatasetError, FileNotFoundError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_DATASET
    text = SUMMARY_COLUMNS + "\n" + "\n".join(rows) + "\n"
    if args.output:
        atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="actstream",
        description="Streaming malware-detection experiments on feature-vector datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a synthetic drifting dataset")
    p_gen.add_argument("config", help="generator config file (key=value lines)")
    p_gen.add_argument("-o", "--output", help="dataset output path (default: <config>.ds)")
    p_gen.set_defaults(func=cmd_generate)

    p_run = sub.add_parser("run", help="run one protocol/model experiment")
    p_run.add_argument("config", help="experiment config file (key=value lines)")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="aggregate series CSVs into one table")
    p_rep.add_argument("series", nargs="+", help="series.csv files from runs")
    p_rep.add_argument("-o", "--output", help="write the table here instead of stdout")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
