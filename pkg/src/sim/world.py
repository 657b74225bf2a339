"""Discrete-time world: single-integrator agents and scripted obstacles."""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from src.sim.config import AgentSpec, ObstacleSpec, ScenarioConfig
from src.sim.policies import ObstaclePolicy


def _vec(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64).reshape(2)


@dataclass(frozen=True, eq=False)
class AgentState:
    id: str
    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    v_max: float
    speed: float
    v_des_fixed: Optional[np.ndarray] = None
    goal_tolerance: float = 0.2

    @classmethod
    def from_spec(cls, spec: AgentSpec) -> "AgentState":
        return cls(
            id=spec.id,
            position=_vec(spec.start),
            velocity=np.zeros(2),
            goal=_vec(spec.goal),
            v_max=spec.v_max,
            speed=min(spec.speed or spec.v_max, spec.v_max),
            v_des_fixed=None if spec.v_des is None else _vec(spec.v_des),
            goal_tolerance=spec.goal_tolerance,
        )

    @property
    def at_goal(self) -> bool:
        return float(np.linalg.norm(self.goal - self.position)) <= self.goal_tolerance

    def desired_velocity(self, dt: float) -> np.ndarray:
        """Fixed v_des, or a goal-seeking velocity that does not overshoot the goal."""
        if self.v_des_fixed is not None:
            return self.v_des_fixed.copy()
        to_goal = self.goal - self.position
        dist = float(np.linalg.norm(to_goal))
        if dist <= self.goal_tolerance:
            return np.zeros(2)
        return to_goal / dist * min(self.speed, dist / dt, self.v_max)

    def with_velocity(self, velocity) -> "AgentState":
        return replace(self, velocity=_vec(velocity))

    def advanced(self, dt: float) -> "AgentState":
        return replace(self, position=self.position + self.velocity * dt)


@dataclass(frozen=True, eq=False)
class ObstacleState:
    id: str
    position: np.ndarray
    policy: ObstaclePolicy

    @classmethod
    def from_spec(cls, spec: ObstacleSpec, seed: int) -> "ObstacleState":
        policy = spec.motion.build(seed)
        start = spec.start if spec.start is not None else policy.initial_position()
        return cls(spec.id, _vec(start), policy)

    def displacement(self, k: int, dt: float) -> np.ndarray:
        return self.policy.displacement(self.position, k, dt)

    def future(self, k: int, dt: float, steps: int) -> np.ndarray:
        return self.policy.rollout(self.position, k, dt, steps)


@dataclass(frozen=True, eq=False)
class WorldState:
    step: int
    agents: Tuple[AgentState, ...]
    obstacles: Tuple[ObstacleState, ...]

    @classmethod
    def initial(cls, cfg: ScenarioConfig) -> "WorldState":
        agents = tuple(AgentState.from_spec(a) for a in cfg.agents)
        obstacles = tuple(
            ObstacleState.from_spec(o, obstacle_seed(cfg.master_seed, j)) for j, o in enumerate(cfg.obstacles)
        )
        return cls(0, agents, obstacles)

    def positions(self) -> np.ndarray:
        """Agents first, then obstacles."""
        return np.array([a.position for a in self.agents] + [o.position for o in self.obstacles]).reshape(-1, 2)

    def with_agents(self, agents) -> "WorldState":
        return replace(self, agents=tuple(agents))


def obstacle_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, 0xB5, index]).generate_state(1)[0])


def step_world(state: WorldState, dt: float) -> WorldState:
    """Advance every obstacle by its policy and every agent by its applied velocity."""
    obstacles = tuple(
        replace(o, position=o.position + o.displacement(state.step, dt)) for o in state.obstacles
    )
    agents = tuple(a.advanced(dt) for a in state.agents)
    return WorldState(state.step + 1, agents, obstacles)
