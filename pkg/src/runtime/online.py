"""Online predictor for one tracked entity: a training network and a prediction network.

Training always uses fresh-per-step dropout and prediction always uses one fixed
mask per sampled rollout; the two networks exchange weights only through a
:class:`WeightExchange`. ``tick`` runs train-then-predict in the caller's thread.
``start_background`` moves training onto a daemon thread instead.
"""

import threading
from typing import Callable, Optional

import numpy as np
from loguru import logger

from src.errors import InsufficientHistoryError, TrainingDivergedError
from src.prediction import (
    ObservationHistory,
    PredictionDistribution,
    PredictorConfig,
    TrainingResult,
    fit_online,
    fresh_weights,
    predict_obstacle_motion,
    warmup_prediction,
)
from src.runtime.exchange import WeightExchange, WeightSnapshot

FitFn = Callable[[ObservationHistory, PredictorConfig, np.random.Generator, object], TrainingResult]


class DualNetworkPredictor:
    def __init__(
        self,
        cfg: PredictorConfig,
        gamma: float,
        seed,
        dt: float = 0.5,
        warmup_variance: float = 0.05,
        fit_fn: FitFn = None,
    ):
        self.cfg = cfg
        self.gamma = gamma
        self.warmup_variance = warmup_variance
        init_ss, train_ss, predict_ss = np.random.SeedSequence(seed).spawn(3)
        self._train_rng = np.random.default_rng(train_ss)
        self._predict_rng = np.random.default_rng(predict_ss)
        self.exchange = WeightExchange(fresh_weights(cfg, np.random.default_rng(init_ss)))
        self.history: Optional[ObservationHistory] = None
        self._dt = dt
        self._fit = fit_fn or (lambda h, c, r, init: fit_online(h, c, r, init=init))
        self._new_data = threading.Event()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self.diverged = 0

    # ----- observations -----

    def observe(self, position) -> None:
        p = np.asarray(position, dtype=np.float64).reshape(1, 2)
        self.history = ObservationHistory(p, self._dt) if self.history is None else self.history.append(p)
        self._new_data.set()

    @property
    def can_train(self) -> bool:
        return self.history is not None and self.history.n > self.cfg.horizon

    # ----- training network -----

    def train(self) -> Optional[WeightSnapshot]:
        """One online training call on the current history, warm-started from the served weights."""
        history = self.history
        if history is None or history.n <= self.cfg.horizon:
            return None
        current = self.exchange.latest_weights()
        try:
            result = self._fit(history, self.cfg, self._train_rng, current.weights)
        except TrainingDivergedError as e:
            self.diverged += 1
            logger.warning(f"Keeping weights v{current.version}: training diverged at iteration {e.iteration}")
            return None
        snapshot = WeightSnapshot(
            result.weights,
            version=current.version + 1,
            iterations=len(result.losses),
            final_loss=result.final_loss,
            history_length=history.n,
        )
        self.exchange.publish_weights(snapshot)
        return snapshot

    # ----- prediction network -----

    def predict(self) -> PredictionDistribution:
        if self.history is None:
            raise InsufficientHistoryError("no observations yet")
        snapshot = self.exchange.latest_weights()
        if snapshot.version == 0:
            return warmup_prediction(self.history, self.cfg.horizon, self.gamma, self.warmup_variance)
        return predict_obstacle_motion(self.history, snapshot.weights, self.cfg, self.gamma, self._predict_rng)

    def tick(self, position) -> PredictionDistribution:
        self.observe(position)
        self.train()
        return self.predict()

    # ----- background mode -----

    def start_background(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._train_loop, name="npvo-trainer", daemon=True)
        self._thread.start()

    def stop_background(self, timeout: float = None) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._new_data.set()
        self._thread.join(timeout)
        self._thread = None

    def _train_loop(self) -> None:
        while not self._stop.is_set():
            self._new_data.wait()
            self._new_data.clear()
            if self._stop.is_set():
                break
            if self.can_train:
                self.train()
