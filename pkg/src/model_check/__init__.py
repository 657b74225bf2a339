# Model checking module initialization
from .markov import DEFAULT_ALPHABET, GridModelConfig, GridMotionModel, sample_markov_trace
from .sprt import Decision, SprtConfig, SprtOutcome, acceptance_probability, expected_sample_size, run_sprt
from .verify import (
    ConstantVelocityPipeline,
    OnlinePredictionPipeline,
    PointPipeline,
    PredictionPipeline,
    SampleStream,
    SprtSettings,
    VerificationCell,
    VerificationConfig,
    VerificationReport,
    WholePlanePipeline,
    evaluate_trace,
    label_trace,
    make_pipeline,
    verify_prediction_system,
)

__all__ = [
    'DEFAULT_ALPHABET', 'GridModelConfig', 'GridMotionModel', 'sample_markov_trace',
    'Decision', 'SprtConfig', 'SprtOutcome', 'acceptance_probability', 'expected_sample_size', 'run_sprt',
    'ConstantVelocityPipeline', 'OnlinePredictionPipeline', 'PointPipeline', 'PredictionPipeline',
    'SampleStream', 'SprtSettings', 'VerificationCell', 'VerificationConfig', 'VerificationReport',
    'WholePlanePipeline', 'evaluate_trace', 'label_trace', 'make_pipeline', 'verify_prediction_system',
]
