"""Per-step trace of a run, collision detection and aggregate run metrics."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from src.formats import read_versioned_csv, read_versioned_json, write_versioned_csv, write_versioned_json
from src.sim.config import ScenarioConfig

TRACE_KIND = "trace"
METRICS_KIND = "metrics"
TRACE_COLUMNS = ["step", "entity", "kind", "x", "y", "vx", "vy", "vdx", "vdy", "feasible", "min_dist"]


@dataclass(frozen=True)
class CollisionEvent:
    step: int
    a: str
    b: str
    distance: float


class RunMetrics(BaseModel):
    scenario: str
    predictor_kind: str
    master_seed: int
    steps_run: int
    dt: float
    safe_radius: float
    gamma: float
    min_distance: Optional[float] = Field(description="Smallest agent-to-entity distance over the run (m).")
    collision_count: int = Field(description="Steps with at least one pair closer than r_s.")
    collision_events: int = Field(description="Colliding (step, pair) combinations.")
    goal_times: Dict[str, Optional[float]] = Field(default_factory=dict)
    path_deviation: Dict[str, float] = Field(default_factory=dict, description="Sum of |v_safe - v_des| * dt per agent.")
    total_path_deviation: float = 0.0
    infeasible_ticks: int = 0
    premise_ticks: int = Field(default=0, description="Ticks that were feasible with every prediction containing the realized path.")
    premise_collisions: int = Field(default=0, description="Collisions at the step after a premise tick.")
    training_divergences: int = 0


class TraceBuilder:
    """Collects one row per (step, entity); ``frame`` adds the running minimum distance."""

    def __init__(self):
        self._rows: List[list] = []

    def add(self, step: int, entity: str, kind: str, position, velocity, desired=None, feasible=None) -> None:
        vd = (np.nan, np.nan) if desired is None else tuple(desired)
        flag = pd.NA if feasible is None else int(bool(feasible))
        self._rows.append([step, entity, kind, *position, *velocity, *vd, flag])

    def frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self._rows, columns=TRACE_COLUMNS[:-1])
        df["feasible"] = df["feasible"].astype("Int64")
        per_step = step_min_distances(df)
        df["min_dist"] = df["step"].map(per_step.cummin())
        return df


def _pair_distances(df_step: pd.DataFrame):
    """(i, j, distance) for every agent-to-entity pair at one step, agent pairs counted once."""
    ids = df_step["entity"].to_numpy()
    kinds = df_step["kind"].to_numpy()
    xy = df_step[["x", "y"]].to_numpy(dtype=np.float64)
    for i in np.flatnonzero(kinds == "agent"):
        for j in range(len(ids)):
            if j == i or (kinds[j] == "agent" and j < i):
                continue
            yield ids[i], ids[j], float(np.linalg.norm(xy[i] - xy[j]))


def step_min_distances(trace: pd.DataFrame) -> pd.Series:
    out = {}
    for step, group in trace.groupby("step", sort=True):
        distances = [d for _, _, d in _pair_distances(group)]
        out[step] = min(distances) if distances else np.inf
    return pd.Series(out, dtype=np.float64)


def collision_check(trace: pd.DataFrame, safe_radius: float) -> List[CollisionEvent]:
    """Every (step, pair) whose distance is strictly below ``safe_radius``."""
    events = []
    for step, group in trace.groupby("step", sort=True):
        for a, b, d in _pair_distances(group):
            if d < safe_radius:
                events.append(CollisionEvent(int(step), a, b, d))
    return events


def metrics_from_trace(trace: pd.DataFrame, cfg: ScenarioConfig, **extra) -> RunMetrics:
    """Aggregate metrics computed from the trace alone; ``extra`` fills the online-only fields."""
    events = collision_check(trace, cfg.safe_radius)
    per_step = step_min_distances(trace)
    agents = trace[trace["kind"] == "agent"]
    deviation, goal_times = {}, {}
    goals = {a.id: (np.asarray(a.goal), a.goal_tolerance) for a in cfg.agents}
    for agent_id, rows in agents.groupby("entity", sort=False):
        diff = rows[["vx", "vy"]].to_numpy() - rows[["vdx", "vdy"]].to_numpy()
        deviation[agent_id] = float(np.nansum(np.linalg.norm(diff, axis=1)) * cfg.dt)
        goal, tol = goals[agent_id]
        reached = np.linalg.norm(rows[["x", "y"]].to_numpy() - goal, axis=1) <= tol
        goal_times[agent_id] = float(rows["step"].to_numpy()[reached][0] * cfg.dt) if reached.any() else None
    min_distance = float(per_step.min()) if len(per_step) and np.isfinite(per_step.min()) else None
    return RunMetrics(
        scenario=cfg.name,
        predictor_kind=cfg.predictor_kind,
        master_seed=cfg.master_seed,
        steps_run=int(trace["step"].max()) if len(trace) else 0,
        dt=cfg.dt,
        safe_radius=cfg.safe_radius,
        gamma=cfg.gamma,
        min_distance=min_distance,
        collision_count=len({e.step for e in events}),
        collision_events=len(events),
        goal_times=goal_times,
        path_deviation=deviation,
        total_path_deviation=float(sum(deviation.values())),
        infeasible_ticks=int((agents["feasible"] == 0).sum()),
        **extra,
    )


def write_trace(trace: pd.DataFrame, path: Path) -> Path:
    return write_versioned_csv(trace, path, TRACE_KIND)


def read_trace(path: Path) -> pd.DataFrame:
    df = read_versioned_csv(path, TRACE_KIND, dtype={"entity": str, "kind": str})
    df["feasible"] = df["feasible"].astype("Int64")
    return df


def write_metrics(metrics: RunMetrics, path: Path) -> Path:
    return write_versioned_json(metrics.model_dump(), path, METRICS_KIND)


def read_metrics(path: Path) -> RunMetrics:
    data = read_versioned_json(path, METRICS_KIND)
    data.pop("format")
    data.pop("format_version")
    return RunMetrics.model_validate(data)
