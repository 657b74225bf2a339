"""Monte-Carlo dropout prediction: sample rollouts, fit per-step Gaussians, build ellipsoids."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.stats import chi2

from src.errors import InsufficientHistoryError, InsufficientSamplesError, InvalidArgumentError, ShapeError
from src.nn_core import MaskPolicy, WeightSet, forward, sample_dropout_mask
from src.npvo.ellipsoid import Ellipsoid
from src.prediction.history import ObservationHistory, PredictorConfig, perturb

EXPORT_COLUMNS = ["k", "mu_x", "mu_y", "s_xx", "s_xy", "s_yx", "s_yy", "px", "py", "c"]


def gamma_threshold(gamma: float) -> float:
    """2-D chi-square quantile c(gamma) = -2 ln(1 - gamma)."""
    if not 0.0 < gamma < 1.0:
        raise InvalidArgumentError(f"gamma must lie in (0, 1), got {gamma}")
    return float(chi2.ppf(gamma, df=2))


def confidence_ellipsoid(mu, sigma, gamma: float) -> Ellipsoid:
    return Ellipsoid(np.asarray(mu, dtype=np.float64), np.asarray(sigma, dtype=np.float64), gamma_threshold(gamma))


def floor_covariance(sigma: np.ndarray, floor: float) -> np.ndarray:
    """Symmetrize and clip eigenvalues below ``floor``."""
    sigma = 0.5 * (sigma + sigma.T)
    eigvals, eigvecs = np.linalg.eigh(sigma)
    if eigvals[0] >= floor:
        return sigma
    clipped = np.maximum(eigvals, floor)
    return (eigvecs * clipped) @ eigvecs.T


def fit_gaussian_mle(samples, floor: float = 1e-6):
    """Sample mean and biased (divisor N_s) covariance of 2-D points."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ShapeError(f"samples must have shape (N_s, 2), got {x.shape}")
    if x.shape[0] < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {x.shape[0]}")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / x.shape[0]
    return mu, floor_covariance(sigma, floor)


@dataclass(frozen=True, eq=False)
class PredictionDistribution:
    """Per-step delta Gaussians for k = 1..m and the position ellipsoids built on them."""

    origin: np.ndarray      # p_n
    means: np.ndarray       # (m, 2) delta means mu_k
    covs: np.ndarray        # (m, 2, 2) delta covariances Sigma_k
    gamma: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        covs = np.asarray(self.covs, dtype=np.float64)
        if means.ndim != 2 or means.shape[1] != 2 or covs.shape != (means.shape[0], 2, 2):
            raise ShapeError(f"inconsistent prediction shapes {means.shape} and {covs.shape}")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64).reshape(2))
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "threshold", gamma_threshold(self.gamma))
        object.__setattr__(self, "centers", self.origin + np.cumsum(means, axis=0))

    @property
    def horizon(self) -> int:
        return self.means.shape[0]

    @property
    def ellipsoids(self) -> List[Ellipsoid]:
        return [Ellipsoid(c, s, self.threshold) for c, s in zip(self.centers, self.covs)]

    def contains_path(self, positions) -> bool:
        """True when position k lies inside e_k for every k = 1..m."""
        p = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        if p.shape[0] != self.horizon:
            raise ShapeError(f"expected {self.horizon} positions, got {p.shape[0]}")
        return all(bool(e.contains(q)) for e, q in zip(self.ellipsoids, p))

    def translated(self, offset) -> "PredictionDistribution":
        return PredictionDistribution(self.origin + np.asarray(offset, dtype=np.float64), self.means, self.covs, self.gamma)

    def to_records(self) -> pd.DataFrame:
        rows = []
        for k in range(self.horizon):
            s = self.covs[k]
            rows.append([k + 1, *self.means[k], s[0, 0], s[0, 1], s[1, 0], s[1, 1], *self.centers[k], self.threshold])
        return pd.DataFrame(rows, columns=EXPORT_COLUMNS)


def distribution_from_samples(samples: np.ndarray, origin, gamma: float, floor: float = 1e-6) -> PredictionDistribution:
    """Fit one Gaussian per horizon step to ``samples`` of shape (N_s, m, 2)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3 or samples.shape[2] != 2:
        raise ShapeError(f"samples must have shape (N_s, m, 2), got {samples.shape}")
    fits = [fit_gaussian_mle(samples[:, k, :], floor) for k in range(samples.shape[1])]
    means = np.array([mu for mu, _ in fits])
    covs = np.array([sigma for _, sigma in fits])
    return PredictionDistribution(origin, means, covs, gamma)


def sample_predictions(
    history: ObservationHistory,
    weights: WeightSet,
    cfg: PredictorConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """N_s closed-loop rollouts of m deltas, one fixed dropout mask per rollout.

    The perception noise is drawn once and shared by all samples, so the spread
    across samples comes from the dropout masks alone.
    """
    if weights.input_dim != 2 or weights.output_dim != 2:
        raise ShapeError("motion network must map 2-D deltas to 2-D deltas")
    deltas = history.window(cfg.max_history).deltas
    if deltas.shape[0] < 1:
        raise InsufficientHistoryError("prediction needs at least one observed delta")
    noisy = perturb(deltas, cfg.noise_variance, rng)
    dims = (weights.input_dim, weights.hidden_dim)
    out = np.empty((cfg.n_samples, cfg.horizon, 2))
    for s in range(cfg.n_samples):
        mask = sample_dropout_mask(cfg.keep_prob, dims, rng)
        out[s], _ = forward(noisy, weights, mask, MaskPolicy.FIXED_PER_SEQUENCE, horizon=cfg.horizon)
    return out


def predict_obstacle_motion(
    history: ObservationHistory,
    weights: WeightSet,
    cfg: PredictorConfig,
    gamma: float,
    rng: Optional[np.random.Generator] = None,
) -> PredictionDistribution:
    gamma_threshold(gamma)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    samples = sample_predictions(history, weights, cfg, rng)
    return distribution_from_samples(samples, history.last, gamma, cfg.covariance_floor)
