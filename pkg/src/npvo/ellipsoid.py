from dataclasses import dataclass

import numpy as np

from src.errors import InvalidArgumentError, ShapeError

BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """{q : (q - center)^T shape^{-1} (q - center) <= threshold}, a closed set."""

    center: np.ndarray
    shape: np.ndarray
    threshold: float

    def __post_init__(self):
        center = np.array(self.center, dtype=np.float64).reshape(2)
        shape = np.array(self.shape, dtype=np.float64)
        if shape.shape != (2, 2):
            raise ShapeError(f"shape matrix must be 2x2, got {shape.shape}")
        if not (np.all(np.isfinite(center)) and np.all(np.isfinite(shape))):
            raise InvalidArgumentError("ellipsoid has non-finite entries")
        if not self.threshold > 0:
            raise InvalidArgumentError(f"threshold must be positive, got {self.threshold}")
        shape = 0.5 * (shape + shape.T)
        if np.linalg.eigvalsh(shape)[0] <= 0:
            raise InvalidArgumentError("shape matrix must be positive definite")
        for name, value in (("center", center), ("shape", shape)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "_inverse", np.linalg.inv(shape))

    def mahalanobis_sq(self, points) -> np.ndarray:
        d = np.asarray(points, dtype=np.float64) - self.center
        return np.einsum("...i,ij,...j->...", d, self._inverse, d)

    def contains(self, points) -> np.ndarray:
        return self.mahalanobis_sq(points) <= self.threshold * (1.0 + BOUNDARY_RTOL)

    def penetration(self, points) -> np.ndarray:
        """Positive inside, zero on the boundary, negative outside."""
        return 1.0 - self.mahalanobis_sq(points) / self.threshold

    def semi_axes(self) -> np.ndarray:
        return np.sqrt(self.threshold * np.linalg.eigvalsh(self.shape))

    def inflated(self, radius: float) -> "Ellipsoid":
        """Outer ellipsoid of this set (+) the disk of ``radius``.

        Uses the trace-minimal member of the family (1 + 1/p) Q + (1 + p) r^2 I,
        every member of which contains the Minkowski sum; it is exact for circles
        and grows monotonically with both ``radius`` and ``threshold``.
        """
        if radius < 0:
            raise InvalidArgumentError("inflation radius must be non-negative")
        if radius == 0:
            return self
        q = self.threshold * self.shape
        s = np.sqrt(np.trace(q))
        grown = q + (np.sqrt(2.0) * radius / s) * q + (radius * radius + radius * s / np.sqrt(2.0)) * np.eye(2)
        return Ellipsoid(self.center, grown, 1.0)

    def translated(self, offset) -> "Ellipsoid":
        return Ellipsoid(self.center + np.asarray(offset, dtype=np.float64), self.shape, self.threshold)
