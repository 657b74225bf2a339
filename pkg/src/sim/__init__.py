# Simulation module initialization
from .policies import (
    BehaviorSwitch,
    Circular,
    ConstantVelocity,
    GridRandomWalk,
    ObstaclePolicy,
    Oscillating,
    Replay,
    trajectory,
)
from .config import AgentSpec, ObstacleSpec, ScenarioConfig
from .world import AgentState, ObstacleState, WorldState, step_world
from .metrics import (
    CollisionEvent,
    RunMetrics,
    collision_check,
    metrics_from_trace,
    read_metrics,
    read_trace,
    write_metrics,
    write_trace,
)
from .runner import compare_predictors, run_scenario

__all__ = [
    'BehaviorSwitch', 'Circular', 'ConstantVelocity', 'GridRandomWalk', 'ObstaclePolicy',
    'Oscillating', 'Replay', 'trajectory',
    'AgentSpec', 'ObstacleSpec', 'ScenarioConfig',
    'AgentState', 'ObstacleState', 'WorldState', 'step_world',
    'CollisionEvent', 'RunMetrics', 'collision_check', 'metrics_from_trace',
    'read_metrics', 'read_trace', 'write_metrics', 'write_trace',
    'compare_predictors', 'run_scenario',
]
