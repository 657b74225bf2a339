import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.npvo import (
    Ellipsoid,
    Feasibility,
    Npvo,
    SolverConfig,
    VelocityQuery,
    build_multi_agent_npvo,
    find_safe_velocity,
    membership_grid,
    npvo_membership,
)
from src.prediction import PredictionDistribution, gamma_threshold

DT = 0.5
R_S = 0.5


def static_prediction(center, horizon=4, variance=0.01, gamma=0.95):
    """Obstacle standing still at ``center`` for the whole horizon."""
    means = np.zeros((horizon, 2))
    covs = np.tile(variance * np.eye(2), (horizon, 1, 1))
    return PredictionDistribution(np.asarray(center, dtype=float), means, covs, gamma)


class TestEllipsoid:
    def test_boundary_is_inside(self):
        e = Ellipsoid(np.zeros(2), np.eye(2), 4.0)
        assert e.contains(np.array([2.0, 0.0]))
        assert not e.contains(np.array([2.0 + 1e-6, 0.0]))

    def test_semi_axes(self):
        e = Ellipsoid(np.zeros(2), np.diag([4.0, 1.0]), 1.0)
        np.testing.assert_allclose(sorted(e.semi_axes()), [1.0, 2.0])

    def test_rejects_indefinite_shape(self):
        with pytest.raises(InvalidArgumentError):
            Ellipsoid(np.zeros(2), np.diag([1.0, -1.0]), 1.0)

    def test_inflating_a_circle_adds_the_radius(self):
        c = gamma_threshold(0.95)
        e = Ellipsoid(np.zeros(2), 0.04 * np.eye(2), c).inflated(R_S)
        radius = np.sqrt(c) * 0.2 + R_S
        assert e.contains(np.array([radius, 0.0]))
        assert not e.contains(np.array([radius + 1e-3, 0.0]))

    def test_inflation_contains_minkowski_sum(self, rng):
        base = Ellipsoid(np.array([1.0, -1.0]), np.array([[0.3, 0.1], [0.1, 0.05]]), 5.99)
        grown = base.inflated(0.4)
        # boundary points of the base plus points of the disk boundary
        angles = rng.uniform(0, 2 * np.pi, size=(2000, 2))
        L = np.linalg.cholesky(base.threshold * base.shape)
        edge = base.center + (L @ np.stack([np.cos(angles[:, 0]), np.sin(angles[:, 0])])).T
        disk = 0.4 * np.stack([np.cos(angles[:, 1]), np.sin(angles[:, 1])], axis=1)
        assert grown.contains(edge + disk).all()

    def test_inflation_is_monotone_in_radius(self, rng):
        base = Ellipsoid(np.zeros(2), np.array([[0.5, 0.2], [0.2, 0.1]]), 2.0)
        small, large = base.inflated(0.2), base.inflated(0.6)
        points = rng.uniform(-3, 3, size=(5000, 2))
        assert np.all(large.contains(points) | ~small.contains(points))


class TestNpvo:
    def test_velocity_into_obstacle_is_member(self):
        npvo = build_multi_agent_npvo([static_prediction([2.0, 0.0])], np.zeros(2), R_S, DT)
        assert npvo_membership([1.0, 0.0], npvo)
        assert not npvo_membership([-1.0, 0.0], npvo)
        assert not npvo_membership([0.0, 1.0], npvo)

    def test_union_over_obstacles(self):
        east = static_prediction([2.0, 0.0])
        north = static_prediction([0.0, 2.0])
        union = build_multi_agent_npvo([east, north], np.zeros(2), R_S, DT)
        only_east = build_multi_agent_npvo([east], np.zeros(2), R_S, DT)
        only_north = build_multi_agent_npvo([north], np.zeros(2), R_S, DT)
        v = np.random.default_rng(0).uniform(-1, 1, size=(500, 2))
        np.testing.assert_array_equal(union.members(v), only_east.members(v) | only_north.members(v))

    def test_empty_npvo_has_no_members(self):
        npvo = build_multi_agent_npvo([], np.zeros(2), R_S, DT)
        assert npvo.is_empty
        assert not npvo_membership([1.0, 0.0], npvo)

    def test_horizon_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            build_multi_agent_npvo(
                [static_prediction([2.0, 0.0], horizon=3), static_prediction([0.0, 2.0], horizon=4)],
                np.zeros(2), R_S, DT,
            )

    def test_membership_grid_inside_speed_disk(self):
        npvo = build_multi_agent_npvo([static_prediction([2.0, 0.0])], np.zeros(2), R_S, DT)
        grid = membership_grid(npvo, 1.0, 0.1)
        assert list(grid.columns) == ["vx", "vy", "member"]
        assert (np.hypot(grid["vx"], grid["vy"]) <= 1.0 + 1e-9).all()
        assert grid["member"].any() and not grid["member"].all()

    def test_rejects_bad_radius(self):
        with pytest.raises(InvalidArgumentError):
            Npvo((), np.zeros(2), 0.0, DT)


class TestSolver:
    def test_returns_desired_velocity_when_safe(self):
        npvo = build_multi_agent_npvo([static_prediction([2.0, 0.0])], np.zeros(2), R_S, DT)
        v, flag = find_safe_velocity(VelocityQuery(np.array([0.0, 1.0]), 1.0), npvo)
        np.testing.assert_array_equal(v, [0.0, 1.0])
        assert flag is Feasibility.FEASIBLE

    def test_blocked_velocity_is_deflected(self):
        npvo = build_multi_agent_npvo([static_prediction([2.0, 0.0])], np.zeros(2), R_S, DT)
        v_des = np.array([1.0, 0.0])
        v, flag = find_safe_velocity(VelocityQuery(v_des, 1.0), npvo)
        assert flag is Feasibility.FEASIBLE
        assert not npvo_membership(v, npvo)
        assert np.linalg.norm(v) <= 1.0 + 1e-9
        # (0, 1) is feasible and costs 2; the solver must do at least as well
        assert np.sum((v - v_des) ** 2) <= 2.0

    def test_solution_hugs_the_boundary(self):
        npvo = build_multi_agent_npvo([static_prediction([2.0, 0.0])], np.zeros(2), R_S, DT)
        v_des = np.array([1.0, 0.0])
        v, _ = find_safe_velocity(VelocityQuery(v_des, 1.0), npvo)
        toward = v + 0.02 * (v_des - v) / np.linalg.norm(v_des - v)
        assert npvo_membership(toward, npvo)

    def test_infeasible_when_everything_is_blocked(self):
        huge = PredictionDistribution(np.zeros(2), np.zeros((3, 2)), np.tile(100.0 * np.eye(2), (3, 1, 1)), 0.95)
        npvo = build_multi_agent_npvo([huge], np.zeros(2), R_S, DT)
        v, flag = find_safe_velocity(VelocityQuery(np.array([0.5, 0.0]), 1.0), npvo)
        assert flag is Feasibility.INFEASIBLE
        assert np.linalg.norm(v) <= 1.0 + 1e-9

    def test_rejects_desired_speed_above_limit(self):
        with pytest.raises(InvalidArgumentError):
            VelocityQuery(np.array([2.0, 0.0]), 1.0)

    def test_coarser_config_still_feasible(self):
        npvo = build_multi_agent_npvo([static_prediction([1.5, 0.0])], np.zeros(2), R_S, DT)
        cfg = SolverConfig(n_angles=16, n_speeds=4, refine_halvings=1, top_k=1, bisection_steps=10, polish_rounds=2)
        v, flag = find_safe_velocity(VelocityQuery(np.array([1.0, 0.0]), 1.0, cfg), npvo)
        assert flag is Feasibility.FEASIBLE
        assert not npvo_membership(v, npvo)


def random_scene(rng, horizon=5):
    """One to three obstacles drifting at up to 0.8 m/s, 1.5 to 4 m from the agent."""
    predictions = []
    for _ in range(rng.integers(1, 4)):
        bearing, heading = rng.uniform(0.0, 2.0 * np.pi, size=2)
        origin = rng.uniform(1.5, 4.0) * np.array([np.cos(bearing), np.sin(bearing)])
        step = rng.uniform(0.0, 0.8) * DT * np.array([np.cos(heading), np.sin(heading)])
        variance = rng.uniform(0.01, 0.1)
        covs = np.array([variance * k * np.eye(2) for k in range(1, horizon + 1)])
        predictions.append(PredictionDistribution(origin, np.tile(step, (horizon, 1)), covs, 0.95))
    return build_multi_agent_npvo(predictions, np.zeros(2), R_S, DT)


def speed_disk(resolution, v_max=1.0):
    axis = np.arange(-v_max, v_max + 0.5 * resolution, resolution)
    grid = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
    return grid[np.linalg.norm(grid, axis=1) <= v_max]


class TestSolverAgainstGrid:
    def test_matches_dense_grid_on_random_scenes(self):
        rng = np.random.default_rng(2024)
        grid = speed_disk(0.01)
        slack = 0.01 * np.sqrt(2.0)
        for _ in range(50):
            npvo = random_scene(rng)
            angle = rng.uniform(0.0, 2.0 * np.pi)
            v_des = np.array([np.cos(angle), np.sin(angle)])
            free = grid[~npvo.members(grid)]
            v, flag = find_safe_velocity(VelocityQuery(v_des, 1.0), npvo)
            if flag is Feasibility.FEASIBLE:
                assert not npvo_membership(v, npvo)
            if len(free) >= 0.01 * len(grid):
                assert flag is Feasibility.FEASIBLE
            if flag is Feasibility.FEASIBLE and len(free):
                best = np.min(np.linalg.norm(free - v_des, axis=1))
                assert np.linalg.norm(v - v_des) <= best + slack


class TestMonotoneMembership:
    @pytest.fixture
    def velocities(self):
        return speed_disk(0.02)

    def test_larger_safe_radius_blocks_more(self, velocities, rng):
        for _ in range(10):
            scene = random_scene(rng)
            preds = [tuple(track) for track in scene.obstacles]
            small = Npvo(preds, np.zeros(2), 0.5, DT).members(velocities)
            large = Npvo(preds, np.zeros(2), 0.7, DT).members(velocities)
            assert np.all(large | ~small)
            assert large.sum() >= small.sum()

    @pytest.mark.parametrize("low, high", [(0.9, 0.99), (0.5, 0.95)])
    def test_higher_confidence_blocks_more(self, velocities, low, high):
        means = np.tile([-0.2, 0.05], (5, 1))
        covs = np.array([0.03 * k * np.eye(2) for k in range(1, 6)])
        members = {}
        for gamma in (low, high):
            pred = PredictionDistribution(np.array([2.5, 0.4]), means, covs, gamma)
            members[gamma] = build_multi_agent_npvo([pred], np.zeros(2), R_S, DT).members(velocities)
        assert np.all(members[high] | ~members[low])
        assert members[high].sum() > members[low].sum()
