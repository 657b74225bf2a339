"""Nonlinear probabilistic velocity obstacles built from predicted ellipsoids."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import InvalidArgumentError
from src.npvo.ellipsoid import BOUNDARY_RTOL, Ellipsoid

if TYPE_CHECKING:
    from src.prediction.sampler import PredictionDistribution


@dataclass(frozen=True, eq=False)
class Npvo:
    """Velocities that put the agent's safety disk into some obstacle's e_k at step k.

    ``obstacles`` holds, per obstacle, the ellipsoids e_1..e_m. A velocity v is a
    member when p + v * k * dt lies in e_k inflated by ``safe_radius`` for some
    obstacle and some k.
    """

    obstacles: Tuple[Tuple[Ellipsoid, ...], ...]
    position: np.ndarray
    safe_radius: float
    dt: float
    _centers: np.ndarray = field(init=False, repr=False)
    _inverses: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.safe_radius > 0:
            raise InvalidArgumentError("safe radius must be positive")
        if not self.dt > 0:
            raise InvalidArgumentError("dt must be positive")
        obstacles = tuple(tuple(e) for e in self.obstacles)
        horizons = {len(e) for e in obstacles}
        if len(horizons) > 1:
            raise InvalidArgumentError(f"all obstacles must share one horizon, got {sorted(horizons)}")
        if horizons == {0}:
            raise InvalidArgumentError("an obstacle needs at least one ellipsoid")
        object.__setattr__(self, "obstacles", obstacles)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64).reshape(2))
        inflated = [[e.inflated(self.safe_radius) for e in track] for track in obstacles]
        m = self.horizon
        # (J, m, 2) and (J, m, 2, 2); inflated ellipsoids all have threshold 1
        centers = np.array([[e.center for e in track] for track in inflated]).reshape(len(obstacles), m, 2)
        inverses = np.array([[e._inverse for e in track] for track in inflated]).reshape(len(obstacles), m, 2, 2)
        object.__setattr__(self, "_centers", centers)
        object.__setattr__(self, "_inverses", inverses)

    @property
    def horizon(self) -> int:
        return len(self.obstacles[0]) if self.obstacles else 0

    @property
    def is_empty(self) -> bool:
        return not self.obstacles

    def agent_positions(self, velocities) -> np.ndarray:
        """Agent positions p + v * k * dt, shape (K, m, 2)."""
        v = np.asarray(velocities, dtype=np.float64).reshape(-1, 2)
        steps = np.arange(1, self.horizon + 1) * self.dt
        return self.position + v[:, None, :] * steps[None, :, None]

    def penetration(self, velocities) -> np.ndarray:
        """Deepest containment margin over obstacles and steps, one value per velocity.

        Non-negative (up to the boundary tolerance) means the velocity is a member.
        """
        v = np.asarray(velocities, dtype=np.float64).reshape(-1, 2)
        if self.is_empty:
            return np.full(v.shape[0], -np.inf)
        q = self.agent_positions(v)
        d = q[:, None, :, :] - self._centers[None]
        maha = np.einsum("kjmi,jmil,kjml->kjm", d, self._inverses, d)
        return (1.0 - maha).max(axis=(1, 2))

    def members(self, velocities) -> np.ndarray:
        return self.penetration(velocities) >= -BOUNDARY_RTOL


def npvo_membership(v, npvo: Npvo) -> bool:
    return bool(npvo.members(np.asarray(v, dtype=np.float64).reshape(1, 2))[0])


def build_multi_agent_npvo(
    predictions: Sequence["PredictionDistribution"],
    position,
    safe_radius: float,
    dt: float,
) -> Npvo:
    """Union of the single-obstacle NPVOs of every prediction."""
    horizons = {p.horizon for p in predictions}
    if len(horizons) > 1:
        raise InvalidArgumentError(f"predictions must share one horizon, got {sorted(horizons)}")
    return Npvo(tuple(tuple(p.ellipsoids) for p in predictions), position, safe_radius, dt)


def membership_grid(npvo: Npvo, v_max: float, resolution: float) -> pd.DataFrame:
    """Square velocity grid clipped to the speed disk, with membership flags."""
    if resolution <= 0 or v_max <= 0:
        raise InvalidArgumentError("grid resolution and v_max must be positive")
    axis = np.arange(-v_max, v_max + 0.5 * resolution, resolution)
    vx, vy = np.meshgrid(axis, axis, indexing="xy")
    grid = np.column_stack([vx.ravel(), vy.ravel()])
    grid = grid[np.linalg.norm(grid, axis=1) <= v_max * (1.0 + 1e-12)]
    return pd.DataFrame({"vx": grid[:, 0], "vy": grid[:, 1], "member": npvo.members(grid)})
