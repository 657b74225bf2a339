import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigError, InvalidArgumentError
from src.model_check import VerificationConfig
from src.settings import load_config, parse_config
from src.sim import (
    AgentState,
    BehaviorSwitch,
    Circular,
    ConstantVelocity,
    GridRandomWalk,
    Oscillating,
    Replay,
    ScenarioConfig,
    WorldState,
    collision_check,
    compare_predictors,
    read_metrics,
    read_trace,
    run_scenario,
    step_world,
    trajectory,
    write_metrics,
    write_trace,
)
from src.sim.metrics import TraceBuilder
from src.sim.policies import GRID_ALPHABET

from conftest import scenario, scenario_data, write_yaml

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
SCENARIOS = sorted(SCENARIO_DIR.glob("*.yaml"))


class TestPolicies:
    def test_sine_returns_to_start_after_one_period(self):
        policy = Oscillating(axis=(0.0, 1.0), amplitude=1.5, period=4.0)
        path = trajectory(policy, (2.0, 0.0), dt=0.5, steps=8)
        np.testing.assert_allclose(path[-1], path[0], atol=1e-12)
        assert path[:, 1].max() == pytest.approx(1.5)

    def test_drift_accumulates(self):
        policy = Oscillating(axis=(0.0, 1.0), amplitude=1.0, period=4.0, drift=(0.25, 0.0))
        path = trajectory(policy, (0.0, 0.0), dt=0.5, steps=8)
        np.testing.assert_allclose(path[-1], [1.0, 0.0], atol=1e-12)

    def test_triangle_peaks_at_quarter_period(self):
        policy = Oscillating(axis=(1.0, 0.0), amplitude=2.0, period=8.0, waveform="triangle")
        assert policy.offset(0.0) == pytest.approx(0.0)
        assert policy.offset(2.0) == pytest.approx(2.0)
        assert policy.offset(4.0) == pytest.approx(0.0, abs=1e-12)
        assert policy.offset(6.0) == pytest.approx(-2.0)

    def test_oscillation_rejects_bad_parameters(self):
        with pytest.raises(InvalidArgumentError):
            Oscillating(axis=(0.0, 0.0), amplitude=1.0, period=1.0)
        with pytest.raises(InvalidArgumentError):
            Oscillating(axis=(0.0, 1.0), amplitude=1.0, period=0.0)

    def test_circular_stays_on_circle(self):
        policy = Circular(center=(1.0, 1.0), radius=2.0, angular_rate=0.3)
        path = trajectory(policy, policy.initial_position(), dt=0.5, steps=40)
        np.testing.assert_allclose(np.linalg.norm(path - [1.0, 1.0], axis=1), 2.0)

    def test_grid_walk_is_deterministic_and_on_alphabet(self):
        a = trajectory(GridRandomWalk(seed=3, cell_size=0.5), (0.0, 0.0), 0.5, 50)
        b = trajectory(GridRandomWalk(seed=3, cell_size=0.5), (0.0, 0.0), 0.5, 50)
        c = trajectory(GridRandomWalk(seed=4, cell_size=0.5), (0.0, 0.0), 0.5, 50)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        steps = np.diff(a, axis=0) / 0.5
        assert all(any(np.allclose(s, g) for g in GRID_ALPHABET) for s in steps)

    def test_behavior_switch_changes_policy(self):
        policy = BehaviorSwitch((ConstantVelocity((1.0, 0.0)), ConstantVelocity((0.0, 1.0))), (4,))
        path = trajectory(policy, (0.0, 0.0), dt=0.5, steps=8)
        np.testing.assert_allclose(path[4], [2.0, 0.0])
        np.testing.assert_allclose(path[8], [2.0, 2.0])

    def test_behavior_switch_validates_steps(self):
        with pytest.raises(InvalidArgumentError):
            BehaviorSwitch((ConstantVelocity((1.0, 0.0)), ConstantVelocity((0.0, 1.0))), ())

    def test_replay_holds_after_recording(self):
        policy = Replay(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
        path = trajectory(policy, policy.initial_position(), dt=0.5, steps=5)
        np.testing.assert_allclose(path[-1], [1.0, 1.0])
        np.testing.assert_allclose(path[2], path[5])


class TestConfig:
    def test_unknown_key_names_the_field(self):
        data = scenario_data()
        data["bogus"] = 1
        with pytest.raises(ConfigError) as info:
            parse_config(data, ScenarioConfig)
        assert info.value.field == "bogus"

    def test_invalid_value_names_the_field(self):
        data = scenario_data()
        data["dt"] = -1.0
        with pytest.raises(ConfigError) as info:
            parse_config(data, ScenarioConfig)
        assert info.value.field == "dt"

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            scenario(obstacles=[{"id": "robot", "start": [1.0, 1.0], "motion": {"kind": "constant_velocity", "velocity": [0, 0]}}])

    def test_obstacle_needs_start_unless_motion_defines_it(self):
        with pytest.raises(ValueError):
            scenario(obstacles=[{"id": "o", "motion": {"kind": "constant_velocity", "velocity": [0, 0]}}])
        cfg = scenario(obstacles=[{"id": "o", "motion": {"kind": "circular", "center": [0, 5], "radius": 1.0, "angular_rate": 0.5}}])
        np.testing.assert_allclose(WorldState.initial(cfg).obstacles[0].position, [1.0, 5.0])

    def test_predictor_horizon_must_match(self):
        with pytest.raises(ValueError):
            scenario(predictor={"horizon": 5})

    def test_overrides_revalidate(self):
        cfg = scenario().with_overrides(gamma=0.5, master_seed=9, predictor_kind=None)
        assert (cfg.gamma, cfg.master_seed, cfg.predictor_kind) == (0.5, 9, "const")
        with pytest.raises(ValueError):
            scenario().with_overrides(gamma=1.5)

    def test_predictor_config_follows_scenario(self):
        pcfg = scenario(predictor_kind="rnn").predictor_config()
        assert pcfg.horizon == 3
        assert pcfg.variant.value == "rnn"

    @pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        model = VerificationConfig if path.stem.startswith("verify") else ScenarioConfig
        assert load_config(path, model).name

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml", ScenarioConfig)

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("agents: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path, ScenarioConfig)


class TestWorld:
    def test_desired_velocity_does_not_overshoot(self):
        agent = AgentState("a", np.array([0.0, 0.0]), np.zeros(2), np.array([0.3, 0.0]), 1.0, 1.0)
        v = agent.desired_velocity(0.5)
        np.testing.assert_allclose(v, [0.6, 0.0])
        assert agent.with_velocity(v).advanced(0.5).at_goal

    def test_desired_velocity_zero_at_goal(self):
        agent = AgentState("a", np.array([0.0, 0.1]), np.zeros(2), np.zeros(2), 1.0, 1.0)
        np.testing.assert_array_equal(agent.desired_velocity(0.5), np.zeros(2))

    def test_step_moves_everyone(self):
        cfg = scenario(obstacles=[{"id": "o", "start": [3.0, 3.0], "motion": {"kind": "constant_velocity", "velocity": [-1.0, 0.0]}}])
        world = WorldState.initial(cfg)
        world = world.with_agents([a.with_velocity([1.0, 0.0]) for a in world.agents])
        nxt = step_world(world, cfg.dt)
        assert nxt.step == 1
        np.testing.assert_allclose(nxt.positions(), [[0.5, 0.0], [2.5, 3.0]])


def _frame(rows):
    builder = TraceBuilder()
    for step, entity, kind, pos in rows:
        builder.add(step, entity, kind, pos, (0.0, 0.0))
    return builder.frame()


class TestMetrics:
    def test_collision_is_strict(self):
        frame = _frame([(0, "a", "agent", (0.0, 0.0)), (0, "o", "obstacle", (0.5, 0.0)),
                        (1, "a", "agent", (0.0, 0.0)), (1, "o", "obstacle", (0.49, 0.0))])
        events = collision_check(frame, 0.5)
        assert [(e.step, e.a, e.b) for e in events] == [(1, "a", "o")]

    def test_obstacle_pairs_are_ignored(self):
        frame = _frame([(0, "a", "agent", (5.0, 5.0)), (0, "o1", "obstacle", (0.0, 0.0)), (0, "o2", "obstacle", (0.1, 0.0))])
        assert collision_check(frame, 0.5) == []

    def test_running_min_distance(self):
        frame = _frame([(0, "a", "agent", (0.0, 0.0)), (0, "o", "obstacle", (2.0, 0.0)),
                        (1, "a", "agent", (0.0, 0.0)), (1, "o", "obstacle", (1.0, 0.0)),
                        (2, "a", "agent", (0.0, 0.0)), (2, "o", "obstacle", (3.0, 0.0))])
        assert frame.groupby("step")["min_dist"].first().tolist() == [2.0, 1.0, 1.0]


class TestRunScenario:
    def test_const_run_reaches_goal(self):
        frame, metrics = run_scenario(scenario())
        assert metrics.collision_count == 0
        assert metrics.infeasible_ticks == 0
        assert metrics.goal_times["robot"] is not None
        assert metrics.steps_run < 30
        assert metrics.min_distance > 0.5

    def test_runs_are_deterministic(self):
        a, ma = run_scenario(scenario())
        b, mb = run_scenario(scenario())
        pd.testing.assert_frame_equal(a, b)
        assert ma == mb

    def test_agent_avoids_crossing_obstacle(self):
        cfg = scenario(obstacles=[{"id": "o", "start": [3.0, -3.0], "motion": {"kind": "constant_velocity", "velocity": [0.0, 1.0]}}])
        _, metrics = run_scenario(cfg)
        assert metrics.collision_count == 0
        assert metrics.total_path_deviation > 0.0

    def test_constant_velocity_walks_into_swinging_obstacle(self):
        # the repeated last delta always points 0.9 m or more off the corridor
        cfg = load_config(SCENARIO_DIR / "oscillating_drift.yaml", ScenarioConfig)
        cfg = cfg.with_overrides(predictor_kind="const")
        frame, metrics = run_scenario(cfg)
        events = collision_check(frame, cfg.safe_radius)
        assert [e.step for e in events] == [37]
        assert events[0].distance == pytest.approx(np.hypot(0.1, 0.3), abs=1e-9)
        assert metrics.collision_events == 1
        assert metrics.infeasible_ticks == 0
        assert metrics.total_path_deviation == pytest.approx(0.0, abs=1e-9)

    def test_perfect_synthetic_predictor_never_collides_when_contained(self):
        cfg = scenario(
            predictor_kind="synthetic",
            synthetic={"theta": 1.0, "variance": 0.01},
            obstacles=[{"id": "o", "start": [3.0, -3.0], "motion": {"kind": "constant_velocity", "velocity": [0.0, 1.0]}}],
        )
        _, metrics = run_scenario(cfg)
        assert metrics.premise_ticks > 0
        assert metrics.premise_collisions == 0

    def test_tracker_receives_events(self, tmp_path):
        from src.observability import RunTracker

        tracker = RunTracker(log_dir=str(tmp_path / "track"))
        run_scenario(scenario(), tracker=tracker)
        logs = list((tmp_path / "track").glob("run_*.json"))
        assert len(logs) == 1
        data = json.loads(logs[0].read_text())
        assert data["summary"]["collision_count"] == 0
        assert data["metrics"]["solver_calls"] == sum(e["step"] == "solver" for e in data["steps"]) > 0


class TestOutputs:
    def test_trace_round_trip(self, tmp_path):
        frame, metrics = run_scenario(scenario())
        write_trace(frame, tmp_path / "trace.csv")
        back = read_trace(tmp_path / "trace.csv")
        assert list(back.columns) == list(frame.columns)
        assert len(back) == len(frame)
        assert (tmp_path / "trace.csv").read_text().startswith("# npvo-trace v1\n")
        write_metrics(metrics, tmp_path / "metrics.json")
        assert read_metrics(tmp_path / "metrics.json").model_dump() == metrics.model_dump()

    def test_wrong_kind_rejected(self, tmp_path):
        _, metrics = run_scenario(scenario(steps=2))
        write_metrics(metrics, tmp_path / "metrics.json")
        with pytest.raises(InvalidArgumentError):
            read_trace(tmp_path / "metrics.json")


class TestComparePredictors:
    def test_const_is_exact_on_straight_motion(self):
        cfg = scenario(steps=12, obstacles=[{"id": "o", "start": [3.0, 3.0], "motion": {"kind": "constant_velocity", "velocity": [0.4, 0.0]}}])
        frame = compare_predictors(cfg, kinds=["const"], seeds=range(2))
        assert len(frame) == 2
        assert (frame["ticks"] > 0).all()
        np.testing.assert_allclose(frame["mean_error"], 0.0, atol=1e-12)

    def test_script_writes_report(self, tmp_path):
        import scripts.compare_predictors as script

        data = scenario_data(steps=10, obstacles=[{"id": "o", "start": [3.0, 3.0], "motion": {"kind": "constant_velocity", "velocity": [0.4, 0.0]}}])
        config = write_yaml(tmp_path / "cfg.yaml", data)
        frame = script.run_comparison(config, ["const"], 1, out=tmp_path / "cmp")
        assert len(frame) == 1
        assert (tmp_path / "cmp" / "comparison.csv").exists()
