"""Statistical verification of the online predictor on uniform grid traces.

Each SPRT sample is one fresh trace from the grid chain, run through a fresh
copy of the prediction pipeline exactly as it would run live. The sample is a
success when every labelled state of the trace is good, i.e. the realized
positions of the last m steps fell inside the ellipsoids predicted m steps
earlier.
"""

import itertools
import time
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.formats import write_versioned_csv, write_versioned_json
from src.errors import InvalidArgumentError
from src.model_check.markov import GridModelConfig, GridMotionModel, sample_markov_trace
from src.model_check.sprt import Decision, SprtConfig, expected_sample_size, run_sprt
from src.nn_core import Variant
from src.prediction import (
    ObservationHistory,
    PredictionDistribution,
    PredictorConfig,
    constant_velocity_prediction,
)
from src.runtime import DualNetworkPredictor
from src.settings import FORMAT_VERSION

REPORT_COLUMNS = ["sigma2", "theta", "decision", "samples", "successes", "llr", "expected_samples", "wall_time"]


# ----- prediction pipelines -----

class PredictionPipeline:
    """Consumes one observed position per step and returns the current prediction.

    ``step`` returns None until the history holds more than ``horizon`` deltas.
    """

    def __init__(self, horizon: int, gamma: float):
        self.horizon = horizon
        self.gamma = gamma
        self.history: Optional[ObservationHistory] = None

    @property
    def ready(self) -> bool:
        return self.history is not None and self.history.n > self.horizon

    def observe(self, position) -> None:
        p = np.asarray(position, dtype=np.float64).reshape(1, 2)
        self.history = ObservationHistory(p) if self.history is None else self.history.append(p)

    def step(self, position) -> Optional[PredictionDistribution]:
        self.observe(position)
        return self._predict() if self.ready else None

    def _predict(self) -> PredictionDistribution:
        raise NotImplementedError


class OnlinePredictionPipeline(PredictionPipeline):
    """Training and prediction networks run alternately, one training call per step."""

    def __init__(self, cfg: PredictorConfig, gamma: float, seed, warmup_variance: float = 0.05):
        super().__init__(cfg.horizon, gamma)
        self.predictor = DualNetworkPredictor(cfg, gamma, seed, warmup_variance=warmup_variance)

    def step(self, position) -> Optional[PredictionDistribution]:
        self.observe(position)
        self.predictor.observe(position)
        if not self.ready:
            return None
        self.predictor.train()
        return self.predictor.predict()


class ConstantVelocityPipeline(PredictionPipeline):
    def __init__(self, horizon: int, gamma: float, variance: float = 1e-3):
        super().__init__(horizon, gamma)
        self.variance = variance

    def _predict(self) -> PredictionDistribution:
        return constant_velocity_prediction(self.history, self.horizon, self.gamma, self.variance)


class WholePlanePipeline(PredictionPipeline):
    """Ellipsoids so large that every reachable position is inside."""

    def _predict(self) -> PredictionDistribution:
        covs = np.tile(1e12 * np.eye(2), (self.horizon, 1, 1))
        return PredictionDistribution(self.history.last, np.zeros((self.horizon, 2)), covs, self.gamma)


class PointPipeline(PredictionPipeline):
    """Tiny ellipsoids parked far away from the obstacle."""

    def __init__(self, horizon: int, gamma: float, offset=(1e3, 1e3)):
        super().__init__(horizon, gamma)
        self.offset = np.asarray(offset, dtype=np.float64)

    def _predict(self) -> PredictionDistribution:
        means = np.zeros((self.horizon, 2))
        means[0] = self.offset
        covs = np.tile(1e-12 * np.eye(2), (self.horizon, 1, 1))
        return PredictionDistribution(self.history.last, means, covs, self.gamma)


# ----- labelling -----

def _labels(deltas, pipeline: PredictionPipeline, horizon: int, origin) -> Iterator[Tuple[int, bool]]:
    d = np.asarray(deltas, dtype=np.float64).reshape(-1, 2)
    start = np.asarray(origin, dtype=np.float64).reshape(1, 2)
    positions = np.vstack([start, start + np.cumsum(d, axis=0)])
    last = d.shape[0]
    pending: Dict[int, PredictionDistribution] = {}
    for t in range(last + 1):
        if t + horizon <= last:
            prediction = pipeline.step(positions[t])
            if prediction is not None:
                pending[t] = prediction
        made_at = t - horizon
        if made_at in pending:
            yield t, pending.pop(made_at).contains_path(positions[made_at + 1: t + 1])


def label_trace(deltas, pipeline: PredictionPipeline, horizon: int, origin=(0.0, 0.0)) -> List[Tuple[int, bool]]:
    """Every (step, good) label along the trace."""
    return list(_labels(deltas, pipeline, horizon, origin))


def evaluate_trace(deltas, pipeline: PredictionPipeline, horizon: int, origin=(0.0, 0.0)) -> bool:
    """True iff no labelled state of the trace is bad; stops at the first bad one.

    The confidence level lives in the pipeline, which builds the ellipsoids.
    """
    return all(good for _, good in _labels(deltas, pipeline, horizon, origin))


# ----- configuration -----

PipelineKind = Literal["lstm", "rnn", "const", "whole_plane", "point"]
PipelineFactory = Callable[[PredictorConfig, list], PredictionPipeline]


class SprtSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    indifference: float = Field(default=0.05, gt=0.0)
    alpha: float = Field(default=0.1, gt=0.0, lt=0.5)
    beta: float = Field(default=0.1, gt=0.0, lt=0.5)
    max_samples: int = Field(default=10_000, ge=1)

    def for_theta(self, theta: float) -> SprtConfig:
        return SprtConfig(theta=theta, **self.model_dump())


class VerificationConfig(BaseModel):
    """One verification grid: rows are noise variances, columns are thresholds."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    format_version: int = FORMAT_VERSION
    name: str = "verification"
    grid: GridModelConfig = Field(default_factory=GridModelConfig)
    predictor_kind: PipelineKind = "lstm"
    predictor: PredictorConfig = Field(default_factory=PredictorConfig)
    gamma: float = Field(default=0.95, gt=0.0, lt=1.0)
    noise_variances: List[float] = Field(default_factory=lambda: [0.0, 0.001, 0.01, 0.05], min_length=1)
    thetas: List[float] = Field(default_factory=lambda: [0.75, 0.8, 0.85, 0.9], min_length=1)
    sprt: SprtSettings = Field(default_factory=SprtSettings)
    baseline_variance: float = Field(default=1e-3, gt=0.0)
    warmup_variance: float = Field(default=0.05, gt=0.0)
    master_seed: int = 0

    @field_validator("noise_variances")
    @classmethod
    def _non_negative(cls, values):
        if any(v < 0 for v in values):
            raise ValueError("noise variances must be non-negative")
        return values

    @field_validator("thetas")
    @classmethod
    def _sorted_unique(cls, values):
        return sorted(set(values))

    def row_config(self, sigma2: float) -> PredictorConfig:
        update = {"noise_variance": sigma2}
        if self.predictor_kind in ("lstm", "rnn"):
            update["variant"] = Variant(self.predictor_kind)
        return self.predictor.model_copy(update=update)

    def with_overrides(self, **updates) -> "VerificationConfig":
        data = self.model_dump()
        data.update({k: v for k, v in updates.items() if v is not None})
        return VerificationConfig.model_validate(data)


def make_pipeline(cfg: VerificationConfig, predictor_cfg: PredictorConfig, seed) -> PredictionPipeline:
    kind = cfg.predictor_kind
    m = predictor_cfg.horizon
    if kind in ("lstm", "rnn"):
        return OnlinePredictionPipeline(predictor_cfg, cfg.gamma, seed, cfg.warmup_variance)
    if kind == "const":
        return ConstantVelocityPipeline(m, cfg.gamma, cfg.baseline_variance)
    if kind == "whole_plane":
        return WholePlanePipeline(m, cfg.gamma)
    if kind == "point":
        return PointPipeline(m, cfg.gamma)
    raise InvalidArgumentError(f"unknown predictor kind {kind!r}")


# ----- the verification grid -----

class SampleStream:
    """Memoized Bernoulli samples shared by every threshold of one row.

    Each reader starts at sample 0, so two thresholds read identical outcomes.
    """

    def __init__(self, draw: Callable[[int], bool]):
        self._draw = draw
        self.outcomes: List[bool] = []

    def __getitem__(self, i: int) -> bool:
        while len(self.outcomes) <= i:
            self.outcomes.append(bool(self._draw(len(self.outcomes))))
        return self.outcomes[i]

    def reader(self) -> Callable[[], bool]:
        position = itertools.count()
        return lambda: self[next(position)]


class VerificationCell(BaseModel):
    sigma2: float
    theta: float
    decision: Decision
    samples: int
    successes: int
    llr: float
    expected_samples: float
    wall_time: float


class VerificationReport(BaseModel):
    name: str
    predictor_kind: str
    gamma: float
    horizon: int
    trace_length: int
    master_seed: int
    cells: List[VerificationCell] = Field(default_factory=list)

    def decision(self, sigma2: float, theta: float) -> Decision:
        for cell in self.cells:
            if cell.sigma2 == sigma2 and cell.theta == theta:
                return cell.decision
        raise KeyError((sigma2, theta))

    def to_frame(self) -> pd.DataFrame:
        rows = [{**c.model_dump(), "decision": c.decision.value} for c in self.cells]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def table(self) -> pd.DataFrame:
        """Decisions pivoted to rows = sigma2, columns = theta."""
        return self.to_frame().pivot(index="sigma2", columns="theta", values="decision")

    def save(self, directory: Path) -> Tuple[Path, Path]:
        directory = Path(directory)
        grid = {}
        for c in self.cells:
            grid.setdefault(repr(c.sigma2), {})[repr(c.theta)] = c.decision.value
        payload = self.model_dump(mode="json")
        payload["table"] = grid
        json_path = write_versioned_json(payload, directory / "verification.json", "verification")
        csv_path = write_versioned_csv(self.to_frame(), directory / "verification.csv", "verification")
        return json_path, csv_path


def _row_stream(cfg: VerificationConfig, row: int, model: GridMotionModel, factory: PipelineFactory) -> SampleStream:
    predictor_cfg = cfg.row_config(cfg.noise_variances[row])
    length = model.labelled_trace_length(predictor_cfg.horizon)

    def draw(i: int) -> bool:
        rng = np.random.default_rng([cfg.master_seed, row, i, 0])
        deltas = sample_markov_trace(model, rng, length)
        pipeline = factory(predictor_cfg, [cfg.master_seed, row, i, 1])
        return evaluate_trace(deltas, pipeline, predictor_cfg.horizon)

    return SampleStream(draw)


def verify_prediction_system(
    cfg: VerificationConfig,
    pipeline_factory: Optional[PipelineFactory] = None,
) -> VerificationReport:
    """Run one SPRT per (sigma2, theta) cell and collect the decisions.

    All thresholds of a row read the same sample stream, so a row's SAT cells
    always form a lower set of thresholds.
    """
    model = GridMotionModel.from_config(cfg.grid)
    factory = pipeline_factory or (lambda pcfg, seed: make_pipeline(cfg, pcfg, seed))
    sprt_cfgs = [cfg.sprt.for_theta(theta) for theta in cfg.thetas]
    report = VerificationReport(
        name=cfg.name,
        predictor_kind=cfg.predictor_kind,
        gamma=cfg.gamma,
        horizon=cfg.predictor.horizon,
        trace_length=cfg.grid.trace_length,
        master_seed=cfg.master_seed,
    )
    for row, sigma2 in enumerate(cfg.noise_variances):
        stream = _row_stream(cfg, row, model, factory)
        for sprt_cfg in sprt_cfgs:
            started = time.perf_counter()
            outcome = run_sprt(stream.reader(), sprt_cfg)
            elapsed = time.perf_counter() - started
            rate = outcome.successes / outcome.samples
            report.cells.append(VerificationCell(
                sigma2=sigma2,
                theta=sprt_cfg.theta,
                decision=outcome.decision,
                samples=outcome.samples,
                successes=outcome.successes,
                llr=outcome.llr,
                expected_samples=expected_sample_size(sprt_cfg, rate),
                wall_time=elapsed,
            ))
            logger.info(
                f"sigma2={sigma2} theta={sprt_cfg.theta}: {outcome.decision.value} "
                f"after {outcome.samples} samples ({outcome.successes} good)"
            )
    return report
