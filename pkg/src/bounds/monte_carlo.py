"""Monte-Carlo check of the collision bounds against their own event model.

Every directed prediction independently fails with probability 1 - theta. A
collision is scored when the event each bound accounts for occurs:
the single prediction fails, both predictions of a pair fail, or any
obstacle prediction fails.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.stats import binomtest

from src.bounds.formulas import BoundKind, BoundQuery, collision_bound, pair_count
from src.formats import read_versioned_csv, write_versioned_csv
from src.errors import InvalidArgumentError

TABLE_COLUMNS = ["kind", "theta", "n", "bound", "empirical", "ci_low", "ci_high", "stderr", "trials", "dominated"]
DEFAULT_THETAS = (0.5, 0.7, 0.8, 0.9, 0.95, 0.99)
DEFAULT_NS = tuple(range(1, 7))
CHUNK = 100_000


@dataclass(frozen=True)
class EmpiricalRate:
    collisions: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def rate(self) -> float:
        return self.collisions / self.trials


def _collisions(kind: BoundKind, theta: float, n: int, size: int, rng: np.random.Generator) -> int:
    if kind is BoundKind.SINGLE:
        return int(np.count_nonzero(rng.random(size) >= theta))
    if kind is BoundKind.DUAL:
        return int(np.count_nonzero((rng.random((size, 2)) >= theta).all(axis=1)))
    if kind is BoundKind.MULTI:
        return int(np.count_nonzero((rng.random((size, n)) >= theta).any(axis=1)))
    failed = rng.random((size, pair_count(n), 2)) >= theta
    return int(np.count_nonzero(failed.all(axis=2).any(axis=1)))


def empirical_collision_rate(
    kind,
    theta_true: float,
    n: int,
    trials: int,
    rng: np.random.Generator,
    confidence: float = 0.95,
) -> EmpiricalRate:
    """Collision frequency over ``trials`` horizons, with a Wilson interval."""
    kind = BoundKind(kind)
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    if not 0.0 <= theta_true <= 1.0:
        raise InvalidArgumentError(f"theta must lie in [0, 1], got {theta_true}")
    if kind is BoundKind.RECIPROCAL and n < 2:
        raise InvalidArgumentError("reciprocal event model needs at least two agents")
    hits, done = 0, 0
    while done < trials:
        size = min(CHUNK, trials - done)
        hits += _collisions(kind, theta_true, n, size, rng)
        done += size
    ci = binomtest(hits, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return EmpiricalRate(hits, trials, float(ci.low), float(ci.high))


def _cells(kinds: Iterable[BoundKind], ns: Sequence[int]):
    for kind in kinds:
        if kind is BoundKind.SINGLE:
            yield kind, [1]
        elif kind is BoundKind.DUAL:
            yield kind, [2]
        elif kind is BoundKind.RECIPROCAL:
            yield kind, [n for n in ns if n >= 2]
        else:
            yield kind, list(ns)


def bound_table(
    thetas: Sequence[float] = DEFAULT_THETAS,
    ns: Sequence[int] = DEFAULT_NS,
    kinds: Optional[Iterable] = None,
    trials: int = 0,
    seed: int = 0,
    n_se: float = 3.0,
) -> pd.DataFrame:
    """Closed-form bounds, plus event-model rates when ``trials`` > 0.

    ``dominated`` is empirical <= bound + ``n_se`` binomial standard errors of the bound.
    """
    kinds = [BoundKind(k) for k in (kinds or list(BoundKind))]
    rows = []
    for kind, cell_ns in _cells(kinds, ns):
        for theta in thetas:
            for n in cell_ns:
                bound = collision_bound(BoundQuery(kind, theta, n))
                row = {"kind": kind.value, "theta": theta, "n": n, "bound": bound, "trials": trials}
                if trials > 0:
                    rng = np.random.default_rng([seed, list(BoundKind).index(kind), int(round(theta * 1e6)), n])
                    measured = empirical_collision_rate(kind, theta, n, trials, rng)
                    stderr = float(np.sqrt(bound * (1.0 - bound) / trials))
                    row.update(
                        empirical=measured.rate,
                        ci_low=measured.ci_low,
                        ci_high=measured.ci_high,
                        stderr=stderr,
                        dominated=bool(measured.rate <= bound + n_se * stderr),
                    )
                rows.append(row)
    frame = pd.DataFrame(rows).reindex(columns=TABLE_COLUMNS)
    if trials > 0:
        logger.info(f"Bound table: {int(frame['dominated'].sum())}/{len(frame)} cells dominated at {trials} trials")
    return frame


def write_bound_table(frame: pd.DataFrame, path: Path) -> Path:
    return write_versioned_csv(frame, Path(path), "bounds")


def read_bound_table(path: Path) -> pd.DataFrame:
    return read_versioned_csv(Path(path), "bounds")
