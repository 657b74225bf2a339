"""Scenario configuration models (YAML files under ``scenarios/``)."""

from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.nn_core import Variant
from src.npvo import SolverConfig
from src.prediction import PredictorConfig
from src.sim.policies import (
    BehaviorSwitch,
    Circular,
    ConstantVelocity,
    GridRandomWalk,
    ObstaclePolicy,
    Oscillating,
    Replay,
)

Vec2 = Tuple[float, float]
PredictorKind = Literal["lstm", "rnn", "const", "synthetic"]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConstantVelocitySpec(_Spec):
    kind: Literal["constant_velocity"] = "constant_velocity"
    velocity: Vec2

    def build(self, seed: int) -> ObstaclePolicy:
        return ConstantVelocity(self.velocity)


class OscillatingSpec(_Spec):
    kind: Literal["oscillating"] = "oscillating"
    axis: Vec2 = (0.0, 1.0)
    amplitude: float = Field(gt=0.0, description="Peak lateral offset (m).")
    period: float = Field(gt=0.0, description="Oscillation period (s).")
    drift: Vec2 = (0.0, 0.0)
    waveform: Literal["sine", "triangle"] = "sine"
    phase: float = 0.0

    def build(self, seed: int) -> ObstaclePolicy:
        return Oscillating(self.axis, self.amplitude, self.period, self.drift, self.waveform, self.phase)


class CircularSpec(_Spec):
    kind: Literal["circular"] = "circular"
    center: Vec2
    radius: float = Field(gt=0.0)
    angular_rate: float = Field(description="rad/s, positive is counter-clockwise.")
    phase: float = 0.0

    def build(self, seed: int) -> ObstaclePolicy:
        return Circular(self.center, self.radius, self.angular_rate, self.phase)


class GridRandomWalkSpec(_Spec):
    kind: Literal["grid_random_walk"] = "grid_random_walk"
    cell_size: float = Field(default=1.0, gt=0.0)
    seed: Optional[int] = Field(default=None, description="Defaults to a seed derived from the master seed.")

    def build(self, seed: int) -> ObstaclePolicy:
        return GridRandomWalk(self.seed if self.seed is not None else seed, self.cell_size)


class ReplaySpec(_Spec):
    kind: Literal["replay"] = "replay"
    positions: List[Vec2] = Field(min_length=1)

    def build(self, seed: int) -> ObstaclePolicy:
        return Replay(self.positions)


MotionSpec = Annotated[
    Union[ConstantVelocitySpec, OscillatingSpec, CircularSpec, GridRandomWalkSpec, ReplaySpec],
    Field(discriminator="kind"),
]


class BehaviorSwitchSpec(_Spec):
    kind: Literal["behavior_switch"] = "behavior_switch"
    motions: List[MotionSpec] = Field(min_length=2)
    switch_steps: List[int]

    @model_validator(mode="after")
    def _check_switches(self):
        if len(self.switch_steps) != len(self.motions) - 1:
            raise ValueError("switch_steps needs exactly one entry between consecutive motions")
        if self.switch_steps != sorted(self.switch_steps):
            raise ValueError("switch_steps must be increasing")
        return self

    def build(self, seed: int) -> ObstaclePolicy:
        return BehaviorSwitch(tuple(m.build(seed + i) for i, m in enumerate(self.motions)), tuple(self.switch_steps))


ObstacleMotion = Annotated[
    Union[ConstantVelocitySpec, OscillatingSpec, CircularSpec, GridRandomWalkSpec, ReplaySpec, BehaviorSwitchSpec],
    Field(discriminator="kind"),
]


class ObstacleSpec(_Spec):
    id: str
    start: Optional[Vec2] = Field(default=None, description="Omitted for circular and replay motions.")
    motion: ObstacleMotion

    @model_validator(mode="after")
    def _check_start(self):
        if self.start is None and self.motion.kind not in ("circular", "replay"):
            raise ValueError(f"obstacle '{self.id}' needs a start position")
        return self


class AgentSpec(_Spec):
    id: str
    start: Vec2
    goal: Vec2
    v_max: float = Field(default=1.0, gt=0.0, description="Speed limit (m/s).")
    speed: Optional[float] = Field(default=None, gt=0.0, description="Preferred speed; defaults to v_max.")
    v_des: Optional[Vec2] = Field(default=None, description="Fixed desired velocity instead of goal seeking.")
    goal_tolerance: float = Field(default=0.2, gt=0.0)


class SyntheticPredictorSpec(_Spec):
    theta: float = Field(default=1.0, ge=0.0, le=1.0, description="Probability that a prediction is centred on the truth.")
    variance: float = Field(default=0.01, gt=0.0)
    miss_offset: float = Field(default=3.0, ge=0.0, description="Center shift (m) of a missed prediction.")


class ScenarioConfig(_Spec):
    format_version: int = 1
    name: str = "scenario"
    description: str = ""
    dt: float = Field(default=0.5, gt=0.0, description="Control period (s).")
    steps: int = Field(default=100, ge=1, description="Maximum number of simulation steps.")
    safe_radius: float = Field(default=0.5, gt=0.0, description="r_s (m).")
    gamma: float = Field(default=0.95, gt=0.0, lt=1.0, description="Ellipsoid confidence.")
    horizon: int = Field(default=10, ge=1, description="Lookahead m (steps).")
    predictor_kind: PredictorKind = "lstm"
    predictor: PredictorConfig = PredictorConfig()
    baseline_variance: float = Field(default=1e-3, gt=0.0, description="Covariance scale of the const predictor.")
    warmup_variance: float = Field(default=0.05, gt=0.0, description="Covariance scale before training starts.")
    synthetic: SyntheticPredictorSpec = SyntheticPredictorSpec()
    solver: SolverConfig = SolverConfig()
    master_seed: int = 0
    stop_at_goal: bool = True
    agents: List[AgentSpec] = Field(min_length=1)
    obstacles: List[ObstacleSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        ids = [a.id for a in self.agents] + [o.id for o in self.obstacles]
        if len(ids) != len(set(ids)):
            raise ValueError("agent and obstacle ids must be unique")
        if "horizon" in self.predictor.model_fields_set and self.predictor.horizon != self.horizon:
            raise ValueError("predictor.horizon must match the scenario horizon")
        for a in self.agents:
            if a.v_des is not None and (a.v_des[0] ** 2 + a.v_des[1] ** 2) ** 0.5 > a.v_max:
                raise ValueError(f"agent '{a.id}' has |v_des| above v_max")
        return self

    def predictor_config(self) -> PredictorConfig:
        variant = Variant.RNN if self.predictor_kind == "rnn" else Variant.LSTM
        return self.predictor.model_copy(update={"horizon": self.horizon, "variant": variant})

    def with_overrides(self, **updates) -> "ScenarioConfig":
        """Validated copy with top-level fields replaced."""
        data = self.model_dump()
        if "horizon" not in self.predictor.model_fields_set:
            data["predictor"].pop("horizon")
        data.update({k: v for k, v in updates.items() if v is not None})
        return ScenarioConfig.model_validate(data)
