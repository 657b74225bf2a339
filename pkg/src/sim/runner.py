"""Closed-loop scenario runs: predict every other entity, build the NPVO, pick v_safe, step."""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.npvo import VelocityQuery, build_multi_agent_npvo, find_safe_velocity
from src.npvo.solver import Feasibility
from src.observability import RunTracker
from src.prediction import (
    ObservationHistory,
    PredictionDistribution,
    PredictorConfig,
    constant_velocity_prediction,
    synthetic_prediction,
)
from src.runtime import DualNetworkPredictor, WeightSnapshot
from src.sim.config import ScenarioConfig
from src.sim.metrics import RunMetrics, TraceBuilder, collision_check, metrics_from_trace
from src.sim.world import WorldState, step_world


class LearnedPredictor:
    """Online training plus dropout prediction for one observed entity, train-then-predict each tick."""

    def __init__(self, cfg: PredictorConfig, gamma: float, seed, dt: float, warmup_variance: float):
        self.net = DualNetworkPredictor(cfg, gamma, seed, dt=dt, warmup_variance=warmup_variance)
        self.last_snapshot: Optional[WeightSnapshot] = None

    @property
    def diverged(self) -> int:
        return self.net.diverged

    def update(self, position, true_future=None) -> PredictionDistribution:
        self.net.observe(position)
        self.last_snapshot = self.net.train()
        return self.net.predict()


class ConstantVelocityPredictor:
    """Straight-line extrapolation of the last observed delta with a fixed small covariance."""

    diverged = 0
    last_snapshot = None

    def __init__(self, horizon: int, gamma: float, variance: float, dt: float):
        self.horizon, self.gamma, self.variance, self.dt = horizon, gamma, variance, dt
        self.history: Optional[ObservationHistory] = None

    def update(self, position, true_future=None) -> PredictionDistribution:
        p = np.asarray(position, dtype=np.float64).reshape(1, 2)
        self.history = ObservationHistory(p, self.dt) if self.history is None else self.history.append(p)
        return constant_velocity_prediction(self.history, self.horizon, self.gamma, self.variance)


class SyntheticPredictor:
    """Calibrated oracle: centred on the true future path with probability theta."""

    diverged = 0
    last_snapshot = None

    def __init__(self, cfg: ScenarioConfig, seed):
        self.cfg = cfg
        self.rng = np.random.default_rng(np.random.SeedSequence(seed))

    def update(self, position, true_future=None) -> PredictionDistribution:
        s = self.cfg.synthetic
        return synthetic_prediction(position, true_future, self.cfg.gamma, s.variance, s.theta, s.miss_offset, self.rng)


def make_predictor(cfg: ScenarioConfig, kind: str, seed):
    if kind in ("lstm", "rnn"):
        pcfg = cfg.with_overrides(predictor_kind=kind).predictor_config()
        return LearnedPredictor(pcfg, cfg.gamma, seed, cfg.dt, cfg.warmup_variance)
    if kind == "const":
        return ConstantVelocityPredictor(cfg.horizon, cfg.gamma, cfg.baseline_variance, cfg.dt)
    return SyntheticPredictor(cfg, seed)


@dataclass
class _Entity:
    id: str
    kind: str
    position: np.ndarray
    future: np.ndarray


def _entities(world: WorldState, cfg: ScenarioConfig) -> List[_Entity]:
    m, dt = cfg.horizon, cfg.dt
    steps = np.arange(1, m + 1)[:, None] * dt
    out = [_Entity(a.id, "agent", a.position, a.position + steps * a.velocity) for a in world.agents]
    out += [_Entity(o.id, "obstacle", o.position, o.future(world.step, dt, m)) for o in world.obstacles]
    return out


def _summary(pred: PredictionDistribution) -> Dict[str, object]:
    return {
        "first_center": pred.centers[0].tolist(),
        "last_center": pred.centers[-1].tolist(),
        "max_semi_axis": float(max(e.semi_axes().max() for e in pred.ellipsoids)),
    }


@dataclass
class _Tick:
    step: int
    agent: str
    predictions: Dict[str, PredictionDistribution]


def _premise_check(ticks: Sequence[_Tick], positions: List[Dict[str, np.ndarray]], cfg: ScenarioConfig) -> Tuple[int, int]:
    """Count feasible ticks whose predictions contained the realized paths, and collisions right after them."""
    held, collisions = 0, 0
    last = len(positions) - 1
    for tick in ticks:
        n = tick.step
        if n + cfg.horizon > last:
            continue
        contained = all(
            pred.contains_path([positions[n + k][eid] for k in range(1, cfg.horizon + 1)])
            for eid, pred in tick.predictions.items()
        )
        if not contained:
            continue
        held += 1
        agent_next = positions[n + 1][tick.agent]
        for eid in tick.predictions:
            d = float(np.linalg.norm(agent_next - positions[n + 1][eid]))
            if d < cfg.safe_radius:
                collisions += 1
                logger.error(f"Collision of {tick.agent} with {eid} at step {n + 1} despite contained predictions")
    return held, collisions


def run_scenario(cfg: ScenarioConfig, tracker: Optional[RunTracker] = None) -> Tuple[pd.DataFrame, RunMetrics]:
    """Run the predict / NPVO / solve / step loop until every agent is home or the step limit is reached."""
    dt = cfg.dt
    world = WorldState.initial(cfg)
    ids = [a.id for a in world.agents] + [o.id for o in world.obstacles]
    predictors = {
        (a.id, eid): make_predictor(cfg, cfg.predictor_kind, [cfg.master_seed, i, j])
        for i, a in enumerate(world.agents)
        for j, eid in enumerate(ids)
        if eid != a.id
    }
    if tracker is not None:
        tracker.start_run(cfg.name, predictor=cfg.predictor_kind, master_seed=cfg.master_seed)
    logger.info(
        f"Running '{cfg.name}' with {len(world.agents)} agents, {len(world.obstacles)} obstacles, "
        f"predictor={cfg.predictor_kind}, seed={cfg.master_seed}"
    )

    trace = TraceBuilder()
    positions: List[Dict[str, np.ndarray]] = []
    ticks: List[_Tick] = []
    for n in range(cfg.steps):
        entities = _entities(world, cfg)
        positions.append({e.id: e.position.copy() for e in entities})
        moved = []
        for agent in world.agents:
            preds = {}
            for e in entities:
                if e.id == agent.id:
                    continue
                predictor = predictors[(agent.id, e.id)]
                preds[e.id] = predictor.update(e.position, e.future)
                if tracker is not None and predictor.last_snapshot is not None:
                    snap = predictor.last_snapshot
                    tracker.log_training(agent.id, e.id, n, snap.version, snap.final_loss, snap.iterations)
            v_des = np.zeros(2) if (cfg.stop_at_goal and agent.at_goal) else agent.desired_velocity(dt)
            npvo = build_multi_agent_npvo(list(preds.values()), agent.position, cfg.safe_radius, dt)
            v_safe, flag = find_safe_velocity(VelocityQuery(v_des, agent.v_max, cfg.solver), npvo)
            feasible = flag is Feasibility.FEASIBLE
            if not feasible:
                logger.warning(f"Step {n}: no safe velocity for {agent.id}; applying least-penetrating {v_safe}")
            else:
                ticks.append(_Tick(n, agent.id, preds))
            if tracker is not None:
                tracker.log_prediction(agent.id, n, {eid: _summary(p) for eid, p in preds.items()})
                tracker.log_solver(agent.id, n, v_des, v_safe, feasible)
            trace.add(n, agent.id, "agent", agent.position, v_safe, v_des, feasible)
            moved.append(agent.with_velocity(v_safe))
        for o in world.obstacles:
            trace.add(n, o.id, "obstacle", o.position, o.displacement(n, dt) / dt)
        world = step_world(world.with_agents(moved), dt)
        if cfg.stop_at_goal and all(a.at_goal for a in world.agents):
            break

    final = world.step
    positions.append({e.id: e.position.copy() for e in _entities(world, cfg)})
    for a in world.agents:
        trace.add(final, a.id, "agent", a.position, np.zeros(2), np.zeros(2))
    for o in world.obstacles:
        trace.add(final, o.id, "obstacle", o.position, o.displacement(final, dt) / dt)

    frame = trace.frame()
    held, premise_collisions = _premise_check(ticks, positions, cfg)
    metrics = metrics_from_trace(
        frame,
        cfg,
        premise_ticks=held,
        premise_collisions=premise_collisions,
        training_divergences=sum(p.diverged for p in predictors.values()),
    )
    if tracker is not None:
        for event in collision_check(frame, cfg.safe_radius):
            tracker.log_collision(event.step, event.a, event.b, event.distance)
        tracker.end_run(metrics.model_dump())
    logger.info(
        f"Finished '{cfg.name}' after {metrics.steps_run} steps: min distance {metrics.min_distance}, "
        f"{metrics.collision_count} collision steps, {metrics.infeasible_ticks} infeasible ticks"
    )
    return frame, metrics


def compare_predictors(
    cfg: ScenarioConfig,
    kinds: Iterable[str] = ("lstm", "rnn", "const"),
    seeds: Iterable[int] = range(10),
) -> pd.DataFrame:
    """Mean one-step prediction error per predictor kind on every obstacle of ``cfg``.

    Only ticks with more than ``horizon`` observed deltas are scored, so warm-up
    predictions do not enter the comparison.
    """
    rows = []
    base = WorldState.initial(cfg)
    for j, obstacle in enumerate(base.obstacles):
        path = np.vstack([obstacle.position[None], obstacle.policy.rollout(obstacle.position, 0, cfg.dt, cfg.steps)])
        for seed in seeds:
            for kind in kinds:
                predictor = make_predictor(cfg, kind, [seed, j])
                errors = []
                for n in range(cfg.steps - 1):
                    future = path[n + 1: n + 1 + cfg.horizon]
                    if future.shape[0] < cfg.horizon:
                        break
                    pred = predictor.update(path[n], future)
                    if n > cfg.horizon:
                        errors.append(float(np.linalg.norm(pred.centers[0] - path[n + 1])))
                rows.append({
                    "obstacle": obstacle.id,
                    "kind": kind,
                    "seed": seed,
                    "ticks": len(errors),
                    "mean_error": float(np.mean(errors)) if errors else float("nan"),
                })
                logger.debug(f"{obstacle.id} {kind} seed={seed}: mean one-step error {rows[-1]['mean_error']:.4f}")
    return pd.DataFrame(rows)
