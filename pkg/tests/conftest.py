import os
import sys

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
import yaml

from src.prediction import ObservationHistory, PredictorConfig
from src.sim import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    """Small enough that a training call takes milliseconds."""
    return PredictorConfig(horizon=3, hidden_size=4, n_iter=3, n_samples=5, max_history=10, seed=7)


@pytest.fixture
def straight_history():
    return ObservationHistory.from_deltas(np.tile([0.5, 0.0], (12, 1)))


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    monkeypatch.setenv("NPVO_OUTPUT_ROOT", str(tmp_path / "runs"))
    monkeypatch.setenv("NPVO_LOG_DIR", str(tmp_path / "logs"))


def scenario_data(**overrides) -> dict:
    """One agent heading east past a slow obstacle; cheap to run."""
    data = {
        "name": "unit",
        "dt": 0.5,
        "steps": 30,
        "safe_radius": 0.5,
        "gamma": 0.95,
        "horizon": 3,
        "predictor_kind": "const",
        "predictor": {"hidden_size": 4, "n_iter": 2, "n_samples": 4, "max_history": 8},
        "agents": [{"id": "robot", "start": [0.0, 0.0], "goal": [6.0, 0.0], "v_max": 1.0}],
        "obstacles": [
            {"id": "box", "start": [3.0, 3.0], "motion": {"kind": "constant_velocity", "velocity": [0.0, 0.0]}},
        ],
    }
    data.update(overrides)
    return data


def scenario(**overrides) -> ScenarioConfig:
    return ScenarioConfig.model_validate(scenario_data(**overrides))


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data, sort_keys=False))
    return path
