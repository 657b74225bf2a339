"""Non-learned predictors: straight-line extrapolation and a calibrated oracle."""

import numpy as np

from src.errors import InvalidArgumentError
from src.prediction.history import ObservationHistory
from src.prediction.sampler import PredictionDistribution


def constant_velocity_prediction(
    history: ObservationHistory,
    horizon: int,
    gamma: float,
    variance: float = 1e-3,
    grow: bool = False,
) -> PredictionDistribution:
    """Repeat the last observed delta for ``horizon`` steps with covariance ``variance * I``.

    With ``grow`` the covariance at step k is ``k * variance * I``.
    """
    if horizon < 1:
        raise InvalidArgumentError("horizon must be at least 1")
    if variance <= 0:
        raise InvalidArgumentError("baseline variance must be positive")
    last_delta = history.deltas[-1] if history.n >= 1 else np.zeros(2)
    means = np.tile(last_delta, (horizon, 1))
    scale = np.arange(1, horizon + 1) if grow else np.ones(horizon)
    covs = scale[:, None, None] * variance * np.eye(2)
    return PredictionDistribution(history.last, means, covs, gamma)


def warmup_prediction(history: ObservationHistory, horizon: int, gamma: float, variance: float) -> PredictionDistribution:
    """Used before the learned predictor has enough history to train."""
    return constant_velocity_prediction(history, horizon, gamma, variance, grow=True)


def synthetic_prediction(
    current,
    true_future,
    gamma: float,
    variance: float,
    theta: float,
    miss_offset: float,
    rng: np.random.Generator,
) -> PredictionDistribution:
    """Ellipsoids centred on the true future path with probability ``theta``.

    Otherwise every center is shifted by ``miss_offset`` in a random direction,
    which moves the true positions outside the ellipsoids whenever
    ``miss_offset`` exceeds the ellipsoid radius.
    """
    if not 0.0 <= theta <= 1.0:
        raise InvalidArgumentError(f"theta must lie in [0, 1], got {theta}")
    future = np.asarray(true_future, dtype=np.float64).reshape(-1, 2)
    hit = rng.random() < theta
    angle = rng.uniform(0.0, 2.0 * np.pi)
    shift = np.zeros(2) if hit else miss_offset * np.array([np.cos(angle), np.sin(angle)])
    path = np.vstack([np.asarray(current, dtype=np.float64).reshape(1, 2), future + shift])
    means = np.diff(path, axis=0)
    covs = np.tile(variance * np.eye(2), (future.shape[0], 1, 1))
    return PredictionDistribution(path[0], means, covs, gamma)
