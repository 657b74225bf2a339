"""Scenario-level checks; run with ``pytest -m slow``."""

from pathlib import Path

import numpy as np
import pytest

from src.bounds import BoundQuery, collision_bound
from src.model_check import Decision, VerificationConfig, verify_prediction_system
from src.settings import load_config
from src.sim import ScenarioConfig, compare_predictors, run_scenario

pytestmark = pytest.mark.slow

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
SEEDS = range(10)


def runs(name, seeds=SEEDS, **overrides):
    base = load_config(SCENARIOS / f"{name}.yaml", ScenarioConfig)
    return [run_scenario(base.with_overrides(master_seed=s, **overrides))[1] for s in seeds]


def contained(name, seeds=range(3)):
    """Runs of ``name`` with predictions centred on the realized motion."""
    return runs(name, seeds=seeds, predictor_kind="synthetic")


def assert_premise_holds(metrics):
    assert sum(m.premise_ticks for m in metrics) > 0
    assert sum(m.premise_collisions for m in metrics) == 0


def test_learned_prediction_avoids_oscillating_obstacle():
    learned = runs("oscillating_drift", predictor_kind="lstm")
    baseline = runs("oscillating_drift", predictor_kind="const")
    assert sum(m.collision_events == 0 for m in learned) >= 9
    assert sum(m.collision_events >= 1 for m in baseline) >= 9
    assert_premise_holds(learned + baseline + contained("oscillating_drift"))


def test_higher_confidence_keeps_more_distance():
    tight = runs("corridor", gamma=0.5)
    wide = runs("corridor", gamma=0.99)
    assert np.mean([m.total_path_deviation for m in wide]) >= np.mean([m.total_path_deviation for m in tight])
    assert np.mean([m.min_distance for m in wide]) >= np.mean([m.min_distance for m in tight])
    assert_premise_holds(tight + wide + contained("corridor"))


def test_reciprocal_collision_rate_within_bound():
    metrics = runs("reciprocal_synthetic")
    cfg = load_config(SCENARIOS / "reciprocal_synthetic.yaml", ScenarioConfig)
    bound = collision_bound(BoundQuery("reciprocal", cfg.synthetic.theta, len(cfg.agents)))
    rate = sum(m.collision_count for m in metrics) / sum(m.steps_run for m in metrics)
    assert rate <= bound
    assert_premise_holds(metrics)


def test_multi_obstacle_and_two_agent_scenarios_respect_premise():
    assert_premise_holds(runs("multi_obstacle", seeds=range(3)) + contained("multi_obstacle"))
    assert_premise_holds(runs("two_agents", seeds=range(3)) + contained("two_agents"))


def test_lstm_tracks_sharp_corners_at_least_as_well_as_rnn():
    cfg = load_config(SCENARIOS / "sharp_oscillation.yaml", ScenarioConfig)
    frame = compare_predictors(cfg, kinds=["lstm", "rnn"], seeds=SEEDS)
    errors = frame.groupby("kind")["mean_error"].mean()
    assert (frame.groupby("kind")["ticks"].min() > 0).all()
    assert errors["lstm"] <= errors["rnn"]


def test_verification_table_trends():
    cfg = load_config(SCENARIOS / "verify_table.yaml", VerificationConfig)
    cfg = VerificationConfig.model_validate({
        **cfg.model_dump(),
        "noise_variances": [0.0, 0.01],
        "predictor": {**cfg.predictor.model_dump(), "hidden_size": 10, "n_iter": 30, "n_samples": 20},
        "sprt": {**cfg.sprt.model_dump(), "max_samples": 400},
    })
    report = verify_prediction_system(cfg)

    def max_sat(sigma2):
        sat = [t for t in cfg.thetas if report.decision(sigma2, t) is Decision.SAT]
        return max(sat, default=0.0)

    for sigma2 in cfg.noise_variances:
        row = [report.decision(sigma2, t) for t in cfg.thetas]
        sat = [d is Decision.SAT for d in row]
        assert sat == sorted(sat, reverse=True)
    assert max_sat(0.01) >= max_sat(0.0)
