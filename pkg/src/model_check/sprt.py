"""Wald's sequential probability ratio test for P(good) >= theta."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq


class Decision(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INCONCLUSIVE = "INCONCLUSIVE"


class SprtConfig(BaseModel):
    """H0: p >= theta + indifference against H1: p < theta - indifference."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta: float
    indifference: float = Field(default=0.05, gt=0.0)
    alpha: float = Field(default=0.1, gt=0.0, lt=0.5)
    beta: float = Field(default=0.1, gt=0.0, lt=0.5)
    max_samples: int = Field(default=10_000, ge=1)

    @model_validator(mode="after")
    def _band_inside_unit_interval(self):
        if not 0.0 < self.theta - self.indifference < self.theta + self.indifference < 1.0:
            raise ValueError(
                f"indifference band [{self.theta - self.indifference}, {self.theta + self.indifference}] "
                "must lie strictly inside (0, 1)"
            )
        return self

    @property
    def p0(self) -> float:
        return self.theta + self.indifference

    @property
    def p1(self) -> float:
        return self.theta - self.indifference

    @property
    def upper(self) -> float:
        """Accept H1 (UNSAT) at or above this log-likelihood ratio."""
        return float(np.log((1.0 - self.beta) / self.alpha))

    @property
    def lower(self) -> float:
        """Accept H0 (SAT) at or below this log-likelihood ratio."""
        return float(np.log(self.beta / (1.0 - self.alpha)))

    def increments(self):
        """LLR increments for a success and for a failure."""
        return float(np.log(self.p1 / self.p0)), float(np.log((1.0 - self.p1) / (1.0 - self.p0)))


@dataclass
class SprtOutcome:
    decision: Decision
    samples: int
    llr: float
    successes: int = 0
    llr_trace: List[float] = field(default_factory=list)


def run_sprt(sample_oracle: Callable[[], bool], cfg: SprtConfig) -> SprtOutcome:
    up_success, up_failure = cfg.increments()
    llr, successes = 0.0, 0
    trace = []
    for n in range(1, cfg.max_samples + 1):
        ok = bool(sample_oracle())
        successes += ok
        llr += up_success if ok else up_failure
        trace.append(llr)
        if llr >= cfg.upper:
            return SprtOutcome(Decision.UNSAT, n, llr, successes, trace)
        if llr <= cfg.lower:
            return SprtOutcome(Decision.SAT, n, llr, successes, trace)
    logger.warning(f"SPRT at theta={cfg.theta} hit the {cfg.max_samples}-sample cap (llr={llr:.3f})")
    return SprtOutcome(Decision.INCONCLUSIVE, cfg.max_samples, llr, successes, trace)


def acceptance_probability(cfg: SprtConfig, p: float) -> float:
    """Wald's operating characteristic: probability of deciding SAT when P(good) = p."""
    if p >= 1.0:
        return 1.0
    if p <= 0.0:
        return 0.0
    z_s, z_f = cfg.increments()
    drift = p * z_s + (1.0 - p) * z_f
    if abs(drift) < 1e-12:
        return cfg.upper / (cfg.upper - cfg.lower)

    def g(h):
        return p * np.exp(h * z_s) + (1.0 - p) * np.exp(h * z_f) - 1.0

    sign = 1.0 if drift < 0 else -1.0
    far = sign
    while g(far) <= 0:
        far *= 2.0
    h = brentq(g, sign * 1e-9, far)
    ea, eb = np.exp(h * cfg.upper), np.exp(h * cfg.lower)
    return float((ea - 1.0) / (ea - eb))


def expected_sample_size(cfg: SprtConfig, p: float) -> float:
    """Wald's approximation of the mean number of samples when P(good) = p."""
    z_s, z_f = cfg.increments()
    drift = p * z_s + (1.0 - p) * z_f
    if abs(drift) < 1e-12:
        second = p * z_s ** 2 + (1.0 - p) * z_f ** 2
        return float(-cfg.upper * cfg.lower / second)
    accept = acceptance_probability(cfg, p)
    return float((accept * cfg.lower + (1.0 - accept) * cfg.upper) / drift)
