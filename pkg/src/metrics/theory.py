"""
Theory oracle
Optimal discriminator, the value functional at the optimum and the -log 4 lower bound,
checked numerically on discretized distributions
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

from src.exceptions import GridMismatchError, MetricError, SupportError

logger = logging.getLogger(__name__)

NEG_LOG4 = -math.log(4.0)
NORMALIZATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid: lower corner, step and cell count per axis"""
    lower: Tuple[float, ...]
    step: Tuple[float, ...]
    shape: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lower) == len(self.step) == len(self.shape)):
            raise MetricError("grid lower/step/shape must have one entry per axis")
        if any(s <= 0 for s in self.step) or any(n <= 0 for n in self.shape):
            raise MetricError("grid steps and cell counts must be positive")

    @classmethod
    def cells(cls, *shape: int) -> "GridSpec":
        return cls(lower=tuple(0.0 for _ in shape), step=tuple(1.0 for _ in shape), shape=tuple(shape))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def upper(self) -> Tuple[float, ...]:
        return tuple(lo + st * n for lo, st, n in zip(self.lower, self.step, self.shape))


@dataclass(frozen=True)
class DiscreteDist:
    grid: GridSpec
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.size != self.grid.size:
            raise GridMismatchError(f"{probs.size} probabilities for a grid of {self.grid.size} cells")
        probs = probs.reshape(self.grid.shape)
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise MetricError("probabilities must be finite and non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise MetricError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, weights, grid: Optional[GridSpec] = None) -> "DiscreteDist":
        w = np.asarray(weights, dtype=np.float64)
        grid = grid or GridSpec.cells(*w.shape)
        total = w.sum()
        if total <= 0:
            raise MetricError("weights must have positive mass")
        return cls(grid, w / total)

    @classmethod
    def uniform(cls, grid: GridSpec) -> "DiscreteDist":
        return cls.from_weights(np.ones(grid.shape), grid)

    @classmethod
    def dirichlet(cls, grid: GridSpec, rng: np.random.Generator, alpha: float = 1.0) -> "DiscreteDist":
        return cls.from_weights(rng.dirichlet(np.full(grid.size, alpha)).reshape(grid.shape), grid)

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def total_variation(self, other: "DiscreteDist") -> float:
        _shared_grid(self, other)
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


def _shared_grid(*dists: DiscreteDist) -> GridSpec:
    grid = dists[0].grid
    for d in dists[1:]:
        if d.grid != grid:
            raise GridMismatchError(f"grid {d.grid} differs from {grid}")
    return grid


def optimal_discriminator(p: DiscreteDist, q: DiscreteDist) -> np.ma.MaskedArray:
    """Pointwise p/(p+q); cells where both vanish are masked out"""
    _shared_grid(p, q)
    total = p.probs + q.probs
    empty = total == 0
    ratio = np.divide(p.probs, total, out=np.zeros_like(total), where=~empty)
    return np.ma.masked_array(ratio, mask=empty)


def discriminator_value(p: DiscreteDist, q: DiscreteDist, d: np.ndarray) -> float:
    """E_p[log D] + E_q[log(1 - D)] for a discriminator given per cell"""
    _shared_grid(p, q)
    d = np.ma.filled(np.ma.asarray(d, dtype=np.float64), 0.5).reshape(p.grid.shape)
    with np.errstate(divide="ignore"):
        return float(np.sum(xlogy(p.probs, d)) + np.sum(xlogy(q.probs, 1.0 - d)))


def _pair_term(a: np.ndarray, b: np.ndarray) -> float:
    total = a + b
    live = total > 0
    a, b, total = a[live], b[live], total[live]
    return float(np.sum(xlogy(a, a / total)) + np.sum(xlogy(b, b / total)))


def js_pair_loss(a: DiscreteDist, b: DiscreteDist) -> float:
    """
    sum a log(a/(a+b)) + b log(b/(a+b)) over the grid; bounded below by -log 4.

    Raises:
        SupportError: a puts mass where b has none
    """
    _shared_grid(a, b)
    if np.any(a.support & ~b.support):
        raise SupportError("support of a is not contained in support of b")
    return _pair_term(a.probs, b.probs)


DistOrSeq = Union[DiscreteDist, Sequence[DiscreteDist]]


def value_functional(p: DistOrSeq, q: DistOrSeq, priors: Sequence[float] = (1.0,),
                     conditions: Optional[Sequence[DiscreteDist]] = None) -> float:
    """
    Value of the distributed objective with every discriminator at its optimum.

    Args:
        p: real conditionals, one per condition cell (a single dist means one cell)
        q: synthetic conditionals on the same cells
        priors: node weights, summing to 1
        conditions: per-node condition distributions over the cells; one point mass when omitted

    Returns:
        sum_j pi_j sum_x s_j(x) sum_y [p log(p/(p+q)) + q log(q/(p+q))]
    """
    ps = [p] if isinstance(p, DiscreteDist) else list(p)
    qs = [q] if isinstance(q, DiscreteDist) else list(q)
    if len(ps) != len(qs):
        raise GridMismatchError(f"{len(ps)} real conditionals vs {len(qs)} synthetic")
    _shared_grid(*ps, *qs)

    priors = np.asarray(priors, dtype=np.float64)
    if abs(priors.sum() - 1.0) > 1e-9 or np.any(priors < 0):
        raise MetricError(f"priors must be non-negative and sum to 1, got {priors.tolist()}")
    if conditions is None:
        if len(ps) != 1:
            raise GridMismatchError("condition distributions are required for more than one cell")
        conditions = [DiscreteDist.from_weights([1.0]) for _ in priors]
    if len(conditions) != len(priors):
        raise GridMismatchError(f"{len(conditions)} condition distributions for {len(priors)} priors")
    _shared_grid(*conditions)
    if conditions[0].grid.size != len(ps):
        raise GridMismatchError(f"condition grid has {conditions[0].grid.size} cells, got {len(ps)} conditionals")

    cell_terms = np.array([_pair_term(pi.probs, qi.probs) for pi, qi in zip(ps, qs)])
    return float(sum(w * np.dot(s.probs.ravel(), cell_terms) for w, s in zip(priors, conditions)))


def _random_other(p: DiscreteDist, rng: np.random.Generator, min_tv: float) -> DiscreteDist:
    while True:
        q = DiscreteDist.dirichlet(p.grid, rng)
        if p.total_variation(q) >= min_tv:
            return q


def check_theory(seed: int = 0, trials: int = 50, perturbations: int = 1000,
                 grid: Optional[GridSpec] = None) -> Dict[str, Any]:
    """
    Numerical verification block: optimum value, strict gap away from it, optimality of
    p/(p+q) and the -log 4 bound on random pairs.
    """
    rng = np.random.default_rng(seed)
    grid = grid or GridSpec(lower=(-15.0, -15.0), step=(3.75, 3.75), shape=(8, 8))

    equality_errors, gaps = [], []
    for _ in range(trials):
        p = DiscreteDist.dirichlet(grid, rng)
        equality_errors.append(abs(value_functional(p, p) - NEG_LOG4))
        gaps.append(value_functional(p, _random_other(p, rng, 0.01)) - NEG_LOG4)

    small = GridSpec.cells(3)
    worst_margin = math.inf
    for _ in range(perturbations):
        p, q = DiscreteDist.dirichlet(small, rng), DiscreteDist.dirichlet(small, rng)
        d_star = optimal_discriminator(p, q)
        best = discriminator_value(p, q, d_star)
        other = np.clip(np.ma.filled(d_star, 0.5) + rng.normal(0.0, 0.1, small.shape), 1e-6, 1 - 1e-6)
        worst_margin = min(worst_margin, best - discriminator_value(p, q, other))

    bound_min, identical_err = math.inf, 0.0
    for _ in range(perturbations):
        a, b = DiscreteDist.dirichlet(small, rng), DiscreteDist.dirichlet(small, rng)
        bound_min = min(bound_min, js_pair_loss(a, b))
        identical_err = max(identical_err, abs(js_pair_loss(a, a) - NEG_LOG4))

    block = {
        "optimal_value": NEG_LOG4,
        "seed": seed,
        "equality": {"trials": trials, "max_abs_error": max(equality_errors),
                     "passed": max(equality_errors) <= 1e-9},
        "strict_gap": {"trials": trials, "min_gap": min(gaps), "passed": min(gaps) > 1e-6},
        "optimal_discriminator": {"perturbations": perturbations, "min_margin": worst_margin,
                                  "passed": worst_margin >= -1e-12},
        "lower_bound": {"pairs": perturbations, "min_loss": bound_min,
                        "identical_max_error": identical_err,
                        "passed": bound_min >= NEG_LOG4 - 1e-12 and identical_err <= 1e-12},
    }
    block["passed"] = all(v["passed"] for v in block.values() if isinstance(v, dict))
    logger.info(f"Theory check (seed={seed}): passed={block['passed']}, "
                f"max equality error {block['equality']['max_abs_error']:.2e}")
    return block
