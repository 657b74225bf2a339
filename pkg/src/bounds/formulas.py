"""Closed-form collision-probability bounds for calibrated predictors."""

from dataclasses import dataclass
from enum import Enum

from src.errors import InvalidArgumentError


class BoundKind(str, Enum):
    SINGLE = "single"            # one agent, one obstacle
    DUAL = "dual"                # two agents avoiding each other
    MULTI = "multi"              # one agent, N obstacles
    RECIPROCAL = "reciprocal"    # N agents avoiding each other


@dataclass(frozen=True)
class BoundQuery:
    kind: BoundKind
    theta: float
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundKind(self.kind))
        if not 0.0 < self.theta < 1.0:
            raise InvalidArgumentError(f"containment probability must lie in (0, 1), got {self.theta}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"N must be a positive integer, got {self.n}")
        if self.kind is BoundKind.RECIPROCAL and self.n < 2:
            raise InvalidArgumentError("reciprocal bounds need at least two agents")
        object.__setattr__(self, "n", int(self.n))

    @property
    def predictions(self) -> int:
        """Directed predictions whose failure the bound accounts for."""
        return {
            BoundKind.SINGLE: 1,
            BoundKind.DUAL: 2,
            BoundKind.MULTI: self.n,
            BoundKind.RECIPROCAL: self.n * (self.n - 1),
        }[self.kind]


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def collision_bound(q: BoundQuery) -> float:
    theta = q.theta
    if q.kind is BoundKind.SINGLE:
        return 1.0 - theta
    if q.kind is BoundKind.DUAL:
        return (1.0 - theta) ** 2
    if q.kind is BoundKind.MULTI:
        return 1.0 - theta ** q.n
    pairs = pair_count(q.n)
    if pairs == 1:
        return (1.0 - theta) ** 2
    return 1.0 - (2.0 * theta - theta ** 2) ** pairs
