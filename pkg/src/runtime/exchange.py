"""Versioned weight snapshots handed from the training network to the prediction network."""

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from loguru import logger

from src.errors import InvalidArgumentError
from src.nn_core import WeightSet


@dataclass(frozen=True, eq=False)
class WeightSnapshot:
    weights: WeightSet
    version: int
    iterations: int = 0
    final_loss: Optional[float] = None
    history_length: int = 0
    published_at: float = field(default_factory=time.time)

    def metadata(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "iterations": self.iterations,
            "final_loss": self.final_loss,
            "history_length": self.history_length,
        }


class WeightExchange:
    """Single-producer, multi-reader slot holding the most recent snapshot.

    Readers get the current reference without taking the lock; the writer swaps
    the reference under the lock after checking the version.
    """

    def __init__(self, initial: WeightSet):
        self._snapshot = WeightSnapshot(initial, version=0)
        self._lock = threading.Lock()

    def publish_weights(self, snapshot: WeightSnapshot) -> None:
        with self._lock:
            current = self._snapshot.version
            if snapshot.version <= current:
                raise InvalidArgumentError(
                    f"snapshot version {snapshot.version} is not newer than published version {current}"
                )
            if not snapshot.weights.same_shape(self._snapshot.weights):
                raise InvalidArgumentError("snapshot weights do not match the served network shape")
            self._snapshot = snapshot
        logger.debug(f"Published weights v{snapshot.version} (loss={snapshot.final_loss})")

    def latest_weights(self) -> WeightSnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version
