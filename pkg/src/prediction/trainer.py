"""Online training of the motion network on the growing delta history."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger

from src.errors import NumericError, TrainingDivergedError
from src.nn_core import (
    AdamState,
    MaskPolicy,
    WeightSet,
    adam_step,
    draw_masks,
    forward,
    init_weights,
    loss_and_gradients,
    rollout_length,
)
from src.nn_core.backprop import sequence_cost
from src.prediction.history import ObservationHistory, PredictorConfig, TrainingDataset, build_dataset

DELTA_DIM = 2


@dataclass
class TrainingResult:
    weights: WeightSet
    losses: List[float] = field(default_factory=list)

    @property
    def final_loss(self) -> Optional[float]:
        return self.losses[-1] if self.losses else None


def fresh_weights(cfg: PredictorConfig, rng: np.random.Generator) -> WeightSet:
    return init_weights(cfg.variant, DELTA_DIM, cfg.hidden_size, rng)


def total_cost(dataset: TrainingDataset, weights: WeightSet, delta: float) -> float:
    """Sum of per-pair Huber costs without dropout."""
    total = 0.0
    for x, y in dataset.pairs:
        outputs, _ = forward(x, weights, None, MaskPolicy.NO_DROPOUT, horizon=dataset.horizon)
        total += sequence_cost(outputs, y, delta)[0]
    return total


def _epoch(dataset: TrainingDataset, weights: WeightSet, cfg: PredictorConfig, rng: np.random.Generator):
    dims = (weights.input_dim, weights.hidden_dim)
    acc = {name: np.zeros_like(value) for name, value in weights.items()}
    total = 0.0
    for x, y in dataset.pairs:
        masks = draw_masks(MaskPolicy.FRESH_PER_STEP, cfg.keep_prob, dims, rollout_length(len(x), dataset.horizon), rng)
        loss, grads = loss_and_gradients(x, y, weights, masks, MaskPolicy.FRESH_PER_STEP, cfg.huber_delta)
        total += loss
        for name, g in grads.items():
            acc[name] += g
    return total, acc


def fit_online(
    history: ObservationHistory,
    cfg: PredictorConfig,
    rng: np.random.Generator,
    init: Optional[WeightSet] = None,
) -> TrainingResult:
    """N_iter full-dataset Adam steps with fresh noise and per-step dropout each iteration."""
    weights = init if init is not None else fresh_weights(cfg, rng)
    state = AdamState.fresh(weights)
    result = TrainingResult(weights)
    finite: Optional[WeightSet] = None
    for iteration in range(cfg.n_iter):
        dataset = build_dataset(history, cfg, rng)
        try:
            loss, grads = _epoch(dataset, weights, cfg, rng)
            if not np.isfinite(loss):
                raise NumericError(f"training cost is {loss}")
            finite = weights
            weights, state = adam_step(weights, grads, state, cfg.learning_rate)
        except NumericError as e:
            logger.warning(f"Training diverged at iteration {iteration}: {e}")
            raise TrainingDivergedError(str(e), last_weights=finite, iteration=iteration) from e
        result.losses.append(loss)
        result.weights = weights
    logger.debug(
        f"Trained {cfg.variant.value} on {history.n} deltas: "
        f"cost {result.losses[0]:.5f} -> {result.losses[-1]:.5f}"
    )
    return result


def train_network_online(
    history: ObservationHistory,
    cfg: PredictorConfig,
    init_weights: Optional[WeightSet] = None,
    rng: Optional[np.random.Generator] = None,
) -> WeightSet:
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return fit_online(history, cfg, rng, init=init_weights).weights
