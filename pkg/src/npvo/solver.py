"""Safe-velocity selection: argmin ||v_des - v||^2 over the speed disk minus the NPVO."""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InvalidArgumentError
from src.npvo.ellipsoid import BOUNDARY_RTOL
from src.npvo.obstacle import Npvo


class Feasibility(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class SolverConfig(BaseModel):
    """Resolution of the coarse-to-fine velocity search."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_angles: int = Field(default=64, ge=4, description="Headings on the coarse polar grid.")
    n_speeds: int = Field(default=16, ge=1, description="Speed rings on the coarse polar grid.")
    refine_halvings: int = Field(default=3, ge=0, description="Local patch refinements per candidate.")
    top_k: int = Field(default=4, ge=1, description="Coarse candidates refined locally.")
    bisection_steps: int = Field(default=40, ge=0)
    polish_rounds: int = Field(default=10, ge=0, description="Pattern-search rounds along the NPVO boundary.")


@dataclass(frozen=True, eq=False)
class VelocityQuery:
    v_des: np.ndarray
    v_max: float
    config: SolverConfig = SolverConfig()

    def __post_init__(self):
        v = np.asarray(self.v_des, dtype=np.float64).reshape(2)
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("desired velocity must be finite")
        if not self.v_max > 0:
            raise InvalidArgumentError("v_max must be positive")
        if np.linalg.norm(v) > self.v_max * (1.0 + 1e-9):
            raise InvalidArgumentError(f"|v_des| = {np.linalg.norm(v):.4f} exceeds v_max = {self.v_max}")
        object.__setattr__(self, "v_des", v)


def _clip_to_disk(v: np.ndarray, v_max: float) -> np.ndarray:
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    scale = np.where(speed > v_max, v_max / np.maximum(speed, 1e-300), 1.0)
    return v * scale


def _polar(angles: np.ndarray, speeds: np.ndarray) -> np.ndarray:
    a, s = np.meshgrid(angles, speeds, indexing="ij")
    return np.column_stack([(s * np.cos(a)).ravel(), (s * np.sin(a)).ravel()])


class _Search:
    def __init__(self, query: VelocityQuery, npvo: Npvo):
        self.q = query
        self.npvo = npvo
        self.cfg = query.config

    def feasible(self, v: np.ndarray) -> np.ndarray:
        return self.npvo.penetration(v) < -BOUNDARY_RTOL

    def cost(self, v: np.ndarray) -> np.ndarray:
        return np.sum((np.asarray(v).reshape(-1, 2) - self.q.v_des) ** 2, axis=1)

    def coarse(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.cfg.n_angles) / self.cfg.n_angles
        speeds = self.q.v_max * np.arange(1, self.cfg.n_speeds + 1) / self.cfg.n_speeds
        return np.vstack([_polar(angles, speeds), np.zeros((1, 2)), self.q.v_des[None]])

    def refine(self, start: np.ndarray) -> np.ndarray:
        """5x5 polar patches around ``start``, halving the patch step each round."""
        best, best_cost = start, float(self.cost(start)[0])
        d_angle = 2.0 * np.pi / self.cfg.n_angles
        d_speed = self.q.v_max / self.cfg.n_speeds
        offsets = np.arange(-2, 3)
        for _ in range(self.cfg.refine_halvings):
            d_angle, d_speed = 0.5 * d_angle, 0.5 * d_speed
            angle0, speed0 = np.arctan2(best[1], best[0]), np.linalg.norm(best)
            speeds = np.clip(speed0 + d_speed * offsets, 0.0, self.q.v_max)
            patch = _polar(angle0 + d_angle * offsets, speeds)
            ok = self.feasible(patch)
            if ok.any():
                costs = np.where(ok, self.cost(patch), np.inf)
                i = int(np.argmin(costs))
                if costs[i] < best_cost:
                    best, best_cost = patch[i], float(costs[i])
        return best

    def bisect(self, lo: np.ndarray) -> np.ndarray:
        """Move from feasible ``lo`` toward v_des while staying feasible."""
        hi = self.q.v_des
        for _ in range(self.cfg.bisection_steps):
            mid = 0.5 * (lo + hi)
            if self.feasible(mid)[0]:
                lo = mid
            else:
                hi = mid
        return lo

    def polish(self, best: np.ndarray, radius: float) -> np.ndarray:
        directions = _polar(2.0 * np.pi * np.arange(16) / 16, np.array([1.0]))
        best_cost = float(self.cost(best)[0])
        for _ in range(self.cfg.polish_rounds):
            ring = _clip_to_disk(best + radius * directions, self.q.v_max)
            ok = self.feasible(ring)
            costs = np.where(ok, self.cost(ring), np.inf)
            i = int(np.argmin(costs))
            if costs[i] < best_cost:
                best = self.bisect(ring[i])
                best_cost = float(self.cost(best)[0])
            else:
                radius *= 0.5
        return best


def find_safe_velocity(query: VelocityQuery, npvo: Npvo) -> Tuple[np.ndarray, Feasibility]:
    """Closest velocity to v_des outside the NPVO, or the least-penetrating one.

    The coarse polar grid is searched first; the ``top_k`` closest feasible grid
    points are refined on shrinking local patches, pulled toward v_des by
    bisection and polished along the NPVO boundary.
    """
    if npvo.is_empty or not npvo.members(query.v_des[None])[0]:
        return query.v_des.copy(), Feasibility.FEASIBLE

    search = _Search(query, npvo)
    grid = search.coarse()
    penetration = npvo.penetration(grid)
    ok = penetration < -BOUNDARY_RTOL
    if not ok.any():
        i = int(np.argmin(penetration))
        logger.warning(f"No feasible velocity on the search grid; least penetration {penetration[i]:.4f}")
        return grid[i].copy(), Feasibility.INFEASIBLE

    candidates = grid[ok]
    order = np.argsort(search.cost(candidates), kind="stable")[: query.config.top_k]
    step = query.v_max / query.config.n_speeds / 2 ** query.config.refine_halvings
    results = []
    for start in candidates[order]:
        v = search.bisect(search.refine(start))
        results.append(search.polish(v, step))
    results = np.array(results)
    best = results[int(np.argmin(search.cost(results)))]
    return best.copy(), Feasibility.FEASIBLE
