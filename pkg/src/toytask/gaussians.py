"""
Gaussian mixture toy task
Four 2-D subsets centered at (+-10, +-10) with covariance diag{0.5, 0.5}
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import chi2

from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CENTERS: Tuple[Tuple[float, float], ...] = ((10.0, 10.0), (10.0, -10.0), (-10.0, 10.0), (-10.0, -10.0))
DEFAULT_VARIANCE = 0.5
CONDITION_VARIANCE = 0.5

# shaped after an 88/102/20 split of real studies
HETEROGENEOUS_SIZES = (880, 1020, 200)


@dataclass(frozen=True)
class GaussianSubset:
    """One local dataset: count i.i.d. draws from N(center, diag(covariance))"""
    center: Tuple[float, float]
    covariance: Tuple[float, float] = (DEFAULT_VARIANCE, DEFAULT_VARIANCE)
    count: int = 1000

    def __post_init__(self):
        problems = []
        if len(self.center) != 2 or len(self.covariance) != 2:
            problems.append("subset: center and covariance must be 2-vectors")
        if any(v <= 0 for v in self.covariance):
            problems.append(f"subset.covariance: entries must be > 0 (got {tuple(self.covariance)})")
        if self.count < 0:
            problems.append(f"subset.count: must be >= 0 (got {self.count})")
        if problems:
            raise ConfigError(problems)


def sample_subset(spec: GaussianSubset, rng: np.random.Generator) -> np.ndarray:
    """(count, 2) draws from the subset's Gaussian"""
    scale = np.sqrt(np.asarray(spec.covariance, dtype=np.float64))
    return np.asarray(spec.center, dtype=np.float64) + scale * rng.standard_normal((spec.count, 2))


def sample_condition(rng: np.random.Generator, m: int, variance: float = CONDITION_VARIANCE,
                     dim: int = 2) -> np.ndarray:
    """Generator input for the toy task: (m, dim) draws from N(0, variance * I)"""
    if m < 0:
        raise ValueError(f"batch size must be >= 0, got {m}")
    return np.sqrt(variance) * rng.standard_normal((m, dim))


def default_subsets(count: int = 1000) -> List[GaussianSubset]:
    return [GaussianSubset(center=c, count=count) for c in DEFAULT_CENTERS]


def heterogeneous_subsets(sizes: Sequence[int] = HETEROGENEOUS_SIZES) -> List[GaussianSubset]:
    return [GaussianSubset(center=c, count=n) for c, n in zip(DEFAULT_CENTERS, sizes)]


def cross_mode_mass(subsets: Sequence[GaussianSubset], radius: float) -> float:
    """
    Upper bound on the probability that a draw from one subset lands within radius of
    another subset's center.

    For isotropic-bounded covariance the squared Mahalanobis distance is chi2(2); a
    point must travel at least (separation - radius) from its own center.
    """
    worst = 0.0
    for i, a in enumerate(subsets):
        for j, b in enumerate(subsets):
            if i == j:
                continue
            gap = float(np.linalg.norm(np.subtract(a.center, b.center))) - radius
            if gap <= 0:
                return 1.0
            max_var = max(a.covariance)
            worst = max(worst, float(chi2.sf(gap ** 2 / max_var, df=2)))
    return worst
