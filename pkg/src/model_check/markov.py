"""Uniform grid Markov chain over obstacle deltas."""

from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InvalidArgumentError

DEFAULT_ALPHABET = [(dx, dy) for dx in (-1.0, 0.0, 1.0) for dy in (-1.0, 0.0, 1.0)]


class GridModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    alphabet: List[tuple] = Field(default_factory=lambda: list(DEFAULT_ALPHABET), min_length=1,
                                  description="Delta alphabet in grid units.")
    cell_size: float = Field(default=1.0, gt=0.0, description="Meters per grid unit.")
    trace_length: int = Field(default=20, ge=1, description="N, the number of labelled states.")


@dataclass(frozen=True, eq=False)
class GridMotionModel:
    alphabet: np.ndarray
    trace_length: int = 20
    cell_size: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.alphabet, dtype=np.float64).reshape(-1, 2)
        if a.shape[0] < 1:
            raise InvalidArgumentError("delta alphabet must not be empty")
        if len({tuple(row) for row in a}) != a.shape[0]:
            raise InvalidArgumentError("delta alphabet has duplicate entries")
        object.__setattr__(self, "alphabet", a)

    @classmethod
    def from_config(cls, cfg: GridModelConfig) -> "GridMotionModel":
        return cls(np.asarray(cfg.alphabet, dtype=np.float64), cfg.trace_length, cfg.cell_size)

    def transition_probability(self, delta) -> float:
        """T(s, s + delta): uniform over the alphabet, zero elsewhere."""
        hit = np.all(np.isclose(self.alphabet, np.asarray(delta, dtype=np.float64)), axis=1).any()
        return 1.0 / self.alphabet.shape[0] if hit else 0.0

    def labelled_trace_length(self, horizon: int) -> int:
        """Deltas needed so that exactly ``trace_length`` states carry a good/bad label.

        A state can be labelled once a prediction made ``horizon`` steps earlier
        exists, and predictions need more than ``horizon`` deltas of history.
        """
        return self.trace_length + 2 * horizon


def sample_markov_trace(model: GridMotionModel, rng: np.random.Generator, length: int = None) -> np.ndarray:
    """i.i.d. uniform draws from the alphabet, scaled to meters; shape (length, 2)."""
    n = model.trace_length if length is None else int(length)
    idx = rng.integers(model.alphabet.shape[0], size=n)
    return model.cell_size * model.alphabet[idx]
