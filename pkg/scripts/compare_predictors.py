"""
Predictor Comparison

Replays every scripted obstacle of a scenario through the LSTM, the simple RNN and
the constant-velocity baseline and reports the mean one-step prediction error.
"""

import sys
import os
sys.path.append(os.path.abspath('.'))

import argparse
from pathlib import Path

from dotenv import load_dotenv

from src.cli.files import prepare_output_dir
from src.formats import write_versioned_csv
from src.settings import configure_logging, load_config, output_root
from src.sim import ScenarioConfig, compare_predictors

load_dotenv()


def run_comparison(config: Path, kinds, n_seeds: int, out: Path = None, force: bool = False):
    """Run the comparison and save a versioned CSV of per-seed errors."""
    cfg = load_config(config, ScenarioConfig)

    print(f"Comparing predictors on '{cfg.name}'")
    print(f"Kinds: {', '.join(kinds)} | seeds: {n_seeds}")
    print("=" * 60)

    frame = compare_predictors(cfg, kinds=kinds, seeds=range(n_seeds))
    summary = frame.groupby(["obstacle", "kind"])["mean_error"].agg(["mean", "std"]).reset_index()

    out_dir = prepare_output_dir(out or output_root() / f"compare-{cfg.name}", force=force)
    report_file = write_versioned_csv(frame, out_dir / "comparison.csv", "comparison")

    print(summary.to_string(index=False))
    print(f"\nReport saved to: {report_file}")
    print("=" * 60)
    return frame


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Compare obstacle predictors")
    parser.add_argument("--config", type=Path, default=Path("scenarios/sharp_oscillation.yaml"))
    parser.add_argument("--kinds", nargs="+", default=["lstm", "rnn", "const"], choices=["lstm", "rnn", "const"])
    parser.add_argument("--seeds", type=int, default=10, help="Number of seeds per predictor")
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args()

    configure_logging()
    run_comparison(args.config, args.kinds, args.seeds, args.out, args.force)
