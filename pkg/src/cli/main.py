"""Command-line entry point: simulate, verify, bounds and predict subcommands.

Exit codes: 0 clean run, 1 unexpected failure, 2 invalid config or arguments,
3 collision detected, 4 infeasible tick under ``--strict``.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from src.bounds import BoundKind, bound_table, write_bound_table
from src.bounds.monte_carlo import DEFAULT_NS, DEFAULT_THETAS
from src.cli.files import RunManifest, prepare_output_dir
from src.formats import read_versioned_csv, write_versioned_csv
from src.errors import (
    ConfigError,
    InsufficientHistoryError,
    InvalidArgumentError,
    NpvoError,
    ShapeError,
    VersionError,
)
from src.model_check import VerificationConfig, verify_prediction_system
from src.nn_core import Variant
from src.observability import get_tracker
from src.prediction import (
    ObservationHistory,
    PredictorConfig,
    constant_velocity_prediction,
    predict_obstacle_motion,
    train_network_online,
)
from src.settings import configure_logging, load_config, output_root
from src.sim import ScenarioConfig, run_scenario, write_metrics, write_trace

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_COLLISION = 3
EXIT_INFEASIBLE = 4

_ALIASES = {"constant-velocity": "const", "whole-plane": "whole_plane"}


def _kind(value: Optional[str]) -> Optional[str]:
    return None if value is None else _ALIASES.get(value, value)


def _output_dir(args, default_name: str) -> Path:
    path = Path(args.out) if args.out else output_root() / default_name
    return prepare_output_dir(path, force=args.force)


def _manifest(args, out: Path, seed: Optional[int]) -> None:
    arguments = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "handler"}
    RunManifest(
        subcommand=args.command,
        config_path=str(args.config) if getattr(args, "config", None) else None,
        output_dir=str(out),
        master_seed=seed,
        arguments=arguments,
    ).save(out)


# ----- simulate -----

def cmd_simulate(args) -> int:
    cfg = load_config(args.config, ScenarioConfig)
    cfg = cfg.with_overrides(master_seed=args.seed, predictor_kind=_kind(args.predictor), gamma=args.gamma)
    out = _output_dir(args, f"{cfg.name}-{cfg.predictor_kind}-seed{cfg.master_seed}")
    tracker = get_tracker() if args.track else None

    frame, metrics = run_scenario(cfg, tracker=tracker)
    write_trace(frame, out / "trace.csv")
    write_metrics(metrics, out / "metrics.json")
    _manifest(args, out, cfg.master_seed)

    print(f"Scenario: {cfg.name} (predictor={cfg.predictor_kind}, seed={cfg.master_seed})")
    print(f"  Steps run:        {metrics.steps_run}")
    print(f"  Min distance:     {metrics.min_distance}")
    print(f"  Collision steps:  {metrics.collision_count}")
    print(f"  Infeasible ticks: {metrics.infeasible_ticks}")
    print(f"  Outputs:          {out}")

    if metrics.collision_count > 0:
        return EXIT_COLLISION
    if args.strict and metrics.infeasible_ticks > 0:
        return EXIT_INFEASIBLE
    return EXIT_OK


# ----- verify -----

def cmd_verify(args) -> int:
    cfg = load_config(args.config, VerificationConfig)
    cfg = cfg.with_overrides(master_seed=args.seed, predictor_kind=_kind(args.predictor))
    out = _output_dir(args, f"{cfg.name}-{cfg.predictor_kind}-seed{cfg.master_seed}")

    report = verify_prediction_system(cfg)
    report.save(out)
    _manifest(args, out, cfg.master_seed)

    print(f"Verification: {cfg.name} (predictor={cfg.predictor_kind}, gamma={cfg.gamma})")
    print(report.table().to_string())
    print(f"  Outputs: {out}")
    return EXIT_OK


# ----- bounds -----

def cmd_bounds(args) -> int:
    if args.trials < 0:
        raise InvalidArgumentError("--trials must be non-negative")
    trials = args.trials if args.validate else 0
    kinds = [BoundKind(args.kind)] if args.kind else None
    frame = bound_table(
        thetas=[args.theta] if args.theta is not None else DEFAULT_THETAS,
        ns=[args.n] if args.n is not None else DEFAULT_NS,
        kinds=kinds,
        trials=trials,
        seed=args.seed or 0,
    )
    print(frame.to_string(index=False))
    if args.out or args.validate:
        out = _output_dir(args, f"bounds-seed{args.seed or 0}")
        write_bound_table(frame, out / "bounds.csv")
        _manifest(args, out, args.seed or 0)
        print(f"  Outputs: {out}")
    if trials > 0 and not frame["dominated"].all():
        logger.warning("Some empirical collision rates exceed their bound by more than 3 standard errors")
    return EXIT_OK


# ----- predict -----

def _read_deltas(path: Path) -> np.ndarray:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        versioned = f.readline().startswith("#")
    frame = read_versioned_csv(path, "deltas") if versioned else pd.read_csv(path)
    missing = {"dx", "dy"} - set(frame.columns)
    if missing:
        raise InvalidArgumentError(f"{path}: missing columns {sorted(missing)}")
    return frame[["dx", "dy"]].to_numpy(dtype=np.float64)


def cmd_predict(args) -> int:
    cfg = load_config(args.config, PredictorConfig) if args.config else PredictorConfig()
    kind = _kind(args.predictor) or cfg.variant.value
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    if kind in ("lstm", "rnn"):
        cfg = cfg.model_copy(update={"variant": Variant(kind)})
    history = ObservationHistory.from_deltas(_read_deltas(args.deltas), dt=args.dt)

    if kind == "const":
        prediction = constant_velocity_prediction(history, cfg.horizon, args.gamma)
    else:
        train_rng, predict_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
        weights = train_network_online(history, cfg, rng=train_rng)
        prediction = predict_obstacle_motion(history, weights, cfg, args.gamma, predict_rng)

    records = prediction.to_records()
    print(records.to_string(index=False))
    if args.out:
        out = _output_dir(args, "predict")
        write_versioned_csv(records, out / "prediction.csv", "prediction")
        _manifest(args, out, cfg.seed)
        print(f"  Outputs: {out}")
    return EXIT_OK


# ----- parser -----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npvo", description="Probabilistic velocity obstacles with learned obstacle prediction")
    parser.add_argument("--log-level", default=None, help="loguru level (default: NPVO_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required, help="YAML config file")
        p.add_argument("--out", type=Path, default=None, help="Output directory (default: under NPVO_OUTPUT_ROOT)")
        p.add_argument("--seed", type=int, default=None, help="Override the master seed")
        p.add_argument("--force", action="store_true", help="Replace an existing output directory")

    p = sub.add_parser("simulate", help="Run a scenario and write its trace and metrics")
    common(p)
    p.add_argument("--predictor", choices=["lstm", "rnn", "const", "constant-velocity", "synthetic"])
    p.add_argument("--gamma", type=float, default=None, help="Override the ellipsoid confidence")
    p.add_argument("--strict", action="store_true", help="Exit 4 when any tick was infeasible")
    p.add_argument("--track", action="store_true", help="Also write a step log through the run tracker")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify", help="Statistically check prediction containment on grid traces")
    common(p)
    p.add_argument("--predictor", choices=["lstm", "rnn", "const", "constant-velocity", "whole-plane", "whole_plane", "point"])
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("bounds", help="Evaluate, and optionally validate, the collision bounds")
    p.add_argument("--kind", choices=[k.value for k in BoundKind], default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--validate", action="store_true", help="Add Monte-Carlo event-model rates")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("predict", help="One-shot training and prediction on a delta CSV")
    common(p, config_required=False)
    p.add_argument("--deltas", type=Path, required=True, help="CSV with dx, dy columns")
    p.add_argument("--predictor", choices=["lstm", "rnn", "const", "constant-velocity"])
    p.add_argument("--gamma", type=float, default=0.95)
    p.add_argument("--dt", type=float, default=0.5)
    p.set_defaults(handler=cmd_predict)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ConfigError, InvalidArgumentError, VersionError, ShapeError, InsufficientHistoryError, ValidationError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NpvoError as e:
        logger.exception(f"{args.command} failed: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
