"""
Toy-distribution quality metrics
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist
from sklearn.mixture import GaussianMixture

from src.exceptions import ConfigError, DimensionError, MetricError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeCoverage:
    fractions: Tuple[float, ...]
    outliers: float

    def as_dict(self) -> Dict[str, float]:
        out = {f"coverage_mode_{i}": f for i, f in enumerate(self.fractions, start=1)}
        out["outlier_fraction"] = self.outliers
        return out

    @property
    def max_fraction(self) -> float:
        return max(self.fractions) if self.fractions else 0.0


def mode_coverage(samples: np.ndarray, centers: Sequence[Sequence[float]], radius: float) -> ModeCoverage:
    """
    Fraction of samples within radius of each center; everything else is an outlier.

    Raises:
        ConfigError: radius <= 0 or two assignment discs overlap
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    if radius <= 0:
        raise ConfigError([f"evaluation.coverage_radius: must be > 0 (got {radius})"])
    if len(centers) > 1 and pdist(centers).min() <= 2 * radius:
        raise ConfigError([f"evaluation.coverage_radius: discs of radius {radius} around the centers overlap"])

    samples = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if len(samples) == 0:
        return ModeCoverage(tuple(0.0 for _ in centers), 0.0)

    inside = cdist(samples, centers) <= radius
    fractions = inside.mean(axis=0)
    outliers = 1.0 - float(inside.any(axis=1).mean())
    return ModeCoverage(tuple(float(f) for f in fractions), outliers)


def completion_rmse(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Root mean squared Euclidean error between completed and true channel points"""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise DimensionError("completion", f"shape {predicted.shape} != {truth.shape}")
    if predicted.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.sum((predicted - truth) ** 2, axis=-1))))


def downstream_coverage(train: np.ndarray, centers: Sequence[Sequence[float]], radius: float,
                        n_samples: int, seed: int = 0) -> ModeCoverage:
    """
    Mode coverage of a density model fit on `train`.

    A full-covariance Gaussian mixture with one component per center stands in for the
    downstream model; n_samples draws from it are scored with mode_coverage.

    Raises:
        MetricError: fewer training points than mixture components
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    train = np.asarray(train, dtype=np.float64).reshape(-1, 2)
    if len(train) < len(centers):
        raise MetricError(f"downstream fit needs at least {len(centers)} points, got {len(train)}")
    if n_samples <= 0:
        return mode_coverage(np.zeros((0, 2)), centers, radius)

    mixture = GaussianMixture(n_components=len(centers), covariance_type="full",
                              random_state=int(seed) % 2 ** 32)
    mixture.fit(train)
    draws, _ = mixture.sample(n_samples)
    logger.debug(f"downstream mixture weights {np.round(mixture.weights_, 3).tolist()}")
    return mode_coverage(draws, centers, radius)
