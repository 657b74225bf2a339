"""Scripted obstacle motion. Every policy maps (position, step index) to a displacement."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.signal import sawtooth

from src.errors import InvalidArgumentError

GRID_ALPHABET = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)], dtype=np.float64)


class ObstaclePolicy:
    def displacement(self, position: np.ndarray, k: int, dt: float) -> np.ndarray:
        raise NotImplementedError

    def initial_position(self):
        """Start position implied by the policy itself, or None."""
        return None

    def rollout(self, position, k: int, dt: float, steps: int) -> np.ndarray:
        """Positions at steps k+1..k+steps starting from ``position`` at step k."""
        p = np.asarray(position, dtype=np.float64).copy()
        out = np.empty((steps, 2))
        for i in range(steps):
            p = p + self.displacement(p, k + i, dt)
            out[i] = p
        return out


@dataclass(frozen=True)
class ConstantVelocity(ObstaclePolicy):
    velocity: Tuple[float, float]

    def displacement(self, position, k, dt):
        return np.asarray(self.velocity, dtype=np.float64) * dt


def _waveform(kind: str, phase: np.ndarray) -> np.ndarray:
    if kind == "sine":
        return np.sin(phase)
    # triangle wave in phase with the sine: 0 at phase 0, peak 1 at pi/2
    return sawtooth(phase + 0.5 * np.pi, width=0.5)


@dataclass(frozen=True)
class Oscillating(ObstaclePolicy):
    """Periodic motion of ``amplitude`` along ``axis`` on top of a constant ``drift``."""

    axis: Tuple[float, float]
    amplitude: float
    period: float
    drift: Tuple[float, float] = (0.0, 0.0)
    waveform: str = "sine"
    phase: float = 0.0

    def __post_init__(self):
        if self.period <= 0:
            raise InvalidArgumentError("oscillation period must be positive")
        if self.waveform not in ("sine", "triangle"):
            raise InvalidArgumentError(f"unknown waveform {self.waveform!r}")
        if np.linalg.norm(self.axis) == 0:
            raise InvalidArgumentError("oscillation axis must be non-zero")

    def offset(self, t: float) -> float:
        return self.amplitude * float(_waveform(self.waveform, 2.0 * np.pi * t / self.period + self.phase))

    def displacement(self, position, k, dt):
        axis = np.asarray(self.axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        lateral = self.offset((k + 1) * dt) - self.offset(k * dt)
        return np.asarray(self.drift, dtype=np.float64) * dt + lateral * axis


@dataclass(frozen=True)
class Circular(ObstaclePolicy):
    center: Tuple[float, float]
    radius: float
    angular_rate: float
    phase: float = 0.0

    def at(self, t: float) -> np.ndarray:
        angle = self.phase + self.angular_rate * t
        return np.asarray(self.center, dtype=np.float64) + self.radius * np.array([np.cos(angle), np.sin(angle)])

    def initial_position(self):
        return self.at(0.0)

    def displacement(self, position, k, dt):
        return self.at((k + 1) * dt) - self.at(k * dt)


@dataclass(frozen=True)
class BehaviorSwitch(ObstaclePolicy):
    """Runs ``policies[i]`` from ``switch_steps[i-1]`` until ``switch_steps[i]``."""

    policies: Tuple[ObstaclePolicy, ...]
    switch_steps: Tuple[int, ...]

    def __post_init__(self):
        if len(self.switch_steps) != len(self.policies) - 1:
            raise InvalidArgumentError("behaviour switch needs one switch step between consecutive policies")
        if list(self.switch_steps) != sorted(self.switch_steps):
            raise InvalidArgumentError("switch steps must be increasing")

    def active(self, k: int) -> ObstaclePolicy:
        return self.policies[int(np.searchsorted(self.switch_steps, k, side="right"))]

    def displacement(self, position, k, dt):
        return self.active(k).displacement(position, k, dt)


@dataclass(frozen=True)
class GridRandomWalk(ObstaclePolicy):
    """Uniform draws from the 3x3 delta grid, one generator per (seed, step)."""

    seed: int
    cell_size: float = 1.0

    def displacement(self, position, k, dt):
        rng = np.random.default_rng([self.seed, k])
        return self.cell_size * GRID_ALPHABET[rng.integers(len(GRID_ALPHABET))]


@dataclass(frozen=True, eq=False)
class Replay(ObstaclePolicy):
    """Follows recorded positions; holds still once the recording runs out."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
            raise InvalidArgumentError("replay positions must have shape (n, 2)")
        object.__setattr__(self, "positions", p)

    def initial_position(self):
        return self.positions[0]

    def displacement(self, position, k, dt):
        if k + 1 >= self.positions.shape[0]:
            return np.zeros(2)
        return self.positions[k + 1] - self.positions[k]


def trajectory(policy: ObstaclePolicy, start, dt: float, steps: int) -> np.ndarray:
    """Positions at steps 0..steps, start included."""
    p = np.asarray(start, dtype=np.float64).reshape(1, 2)
    return np.vstack([p, policy.rollout(p[0], 0, dt, steps)])
