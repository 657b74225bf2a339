# Prediction module initialization
from .history import ObservationHistory, PredictorConfig, TrainingDataset, build_dataset, perturb
from .trainer import TrainingResult, fit_online, fresh_weights, total_cost, train_network_online
from .sampler import (
    PredictionDistribution,
    confidence_ellipsoid,
    distribution_from_samples,
    fit_gaussian_mle,
    gamma_threshold,
    predict_obstacle_motion,
    sample_predictions,
)
from .baseline import constant_velocity_prediction, synthetic_prediction, warmup_prediction

__all__ = [
    'ObservationHistory', 'PredictorConfig', 'TrainingDataset', 'build_dataset', 'perturb',
    'TrainingResult', 'fit_online', 'fresh_weights', 'total_cost', 'train_network_online',
    'PredictionDistribution', 'confidence_ellipsoid', 'distribution_from_samples',
    'fit_gaussian_mle', 'gamma_threshold', 'predict_obstacle_motion', 'sample_predictions',
    'constant_velocity_prediction', 'synthetic_prediction', 'warmup_prediction',
]
