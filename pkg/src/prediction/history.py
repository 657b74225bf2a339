from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InsufficientHistoryError, InvalidArgumentError
from src.nn_core import Variant


class PredictorConfig(BaseModel):
    """Hyperparameters of the online obstacle-motion predictor."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: Variant = Field(default=Variant.LSTM, description="Recurrent cell: lstm or rnn.")
    horizon: int = Field(default=10, ge=1, description="Prediction horizon m in steps.")
    noise_variance: float = Field(default=0.0, ge=0.0, description="Perception noise variance sigma^2 (m^2).")
    huber_delta: float = Field(default=1.0, gt=0.0)
    keep_prob: float = Field(default=0.9, ge=0.0, le=1.0, description="Bernoulli keep probability p.")
    hidden_size: int = Field(default=20, ge=1)
    n_iter: int = Field(default=100, ge=1, description="Adam iterations per training call.")
    n_samples: int = Field(default=30, ge=2, description="Dropout samples N_s per prediction.")
    learning_rate: float = Field(default=0.003, gt=0.0)
    seed: int = 0
    max_history: Optional[int] = Field(default=50, ge=2, description="Cap on deltas fed to training and prediction.")
    covariance_floor: float = Field(default=1e-6, gt=0.0, description="Minimum covariance eigenvalue (m^2).")


@dataclass(frozen=True, eq=False)
class ObservationHistory:
    """Observed obstacle positions p_0..p_n (meters) sampled every ``dt`` seconds."""

    positions: np.ndarray
    dt: float = 0.5

    def __post_init__(self):
        p = np.array(self.positions, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] != 2:
            raise InvalidArgumentError(f"positions must have shape (n+1, 2), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidArgumentError("positions contain non-finite values")
        if not self.dt > 0:
            raise InvalidArgumentError("dt must be positive")
        p.flags.writeable = False
        object.__setattr__(self, "positions", p)

    @classmethod
    def from_deltas(cls, deltas, origin=(0.0, 0.0), dt: float = 0.5) -> "ObservationHistory":
        d = np.asarray(deltas, dtype=np.float64).reshape(-1, 2)
        start = np.asarray(origin, dtype=np.float64).reshape(1, 2)
        return cls(np.vstack([start, start + np.cumsum(d, axis=0)]), dt)

    @property
    def n(self) -> int:
        """Number of deltas."""
        return self.positions.shape[0] - 1

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.positions, axis=0)

    @property
    def last(self) -> np.ndarray:
        return self.positions[-1]

    def window(self, max_deltas: Optional[int]) -> "ObservationHistory":
        if max_deltas is None or self.n <= max_deltas:
            return self
        return ObservationHistory(self.positions[-(max_deltas + 1):], self.dt)

    def append(self, position) -> "ObservationHistory":
        return ObservationHistory(np.vstack([self.positions, np.asarray(position, dtype=np.float64).reshape(1, 2)]), self.dt)

    def translated(self, offset) -> "ObservationHistory":
        return ObservationHistory(self.positions + np.asarray(offset, dtype=np.float64), self.dt)


@dataclass(frozen=True, eq=False)
class TrainingDataset:
    """Noisy delta history and the (x_k, y_k) pairs cut from it, k = 1..n-m."""

    noisy_deltas: np.ndarray
    horizon: int

    @property
    def size(self) -> int:
        return self.noisy_deltas.shape[0] - self.horizon

    def pair(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        if not 1 <= k <= self.size:
            raise IndexError(k)
        return self.noisy_deltas[:k], self.noisy_deltas[k: k + self.horizon]

    @property
    def pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [self.pair(k) for k in range(1, self.size + 1)]


def perturb(deltas: np.ndarray, noise_variance: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. G(0, sigma^2) noise to every delta coordinate."""
    return deltas + rng.normal(0.0, np.sqrt(noise_variance), size=deltas.shape)


def build_dataset(history: ObservationHistory, cfg: PredictorConfig, rng: np.random.Generator) -> TrainingDataset:
    deltas = history.window(cfg.max_history).deltas
    if deltas.shape[0] <= cfg.horizon:
        raise InsufficientHistoryError(
            f"need more than {cfg.horizon} deltas to train, have {deltas.shape[0]}"
        )
    return TrainingDataset(perturb(deltas, cfg.noise_variance, rng), cfg.horizon)
