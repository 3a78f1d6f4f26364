"""
Segmentation metrics: Dice, sensitivity, specificity and HD95 on 2-D binary masks
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
from scipy.ndimage import binary_erosion, generate_binary_structure
from scipy.spatial.distance import cdist

from src.exceptions import DegenerateDenominatorError, MetricError

logger = logging.getLogger(__name__)

# 4-neighbourhood
_CROSS = generate_binary_structure(2, 1)


@dataclass(frozen=True)
class BinaryMask:
    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.size != self.width * self.height:
            raise MetricError(f"mask holds {bits.size} bits, expected {self.width}x{self.height}")
        object.__setattr__(self, "bits", bits.reshape(self.height, self.width))

    @classmethod
    def from_array(cls, arr) -> "BinaryMask":
        arr = np.asarray(arr, dtype=bool)
        return cls(width=arr.shape[1], height=arr.shape[0], bits=arr)

    @classmethod
    def from_pixels(cls, width: int, height: int, pixels: Iterable[Tuple[int, int]]) -> "BinaryMask":
        """pixels are (row, col) pairs"""
        bits = np.zeros((height, width), dtype=bool)
        for r, c in pixels:
            bits[r, c] = True
        return cls(width, height, bits)

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def complement(self) -> "BinaryMask":
        return BinaryMask(self.width, self.height, ~self.bits)

    def boundary(self) -> np.ndarray:
        """Pixels with at least one 4-neighbour outside; the image border counts as outside"""
        return self.bits & ~binary_erosion(self.bits, structure=_CROSS, border_value=0)


@dataclass(frozen=True)
class OverlapScores:
    dice: float
    sens: float
    spec: float


def _same_shape(g: BinaryMask, s: BinaryMask) -> None:
    if (g.width, g.height) != (s.width, s.height):
        raise MetricError(f"mask dimensions differ: {g.width}x{g.height} vs {s.width}x{s.height}")


def dice(g: BinaryMask, s: BinaryMask) -> float:
    """2|G n S| / (|G| + |S|); two empty masks agree perfectly"""
    _same_shape(g, s)
    total = g.area + s.area
    if total == 0:
        return 1.0
    return 2.0 * int((g.bits & s.bits).sum()) / total


def sensitivity(g: BinaryMask, s: BinaryMask) -> float:
    _same_shape(g, s)
    if g.area == 0:
        raise DegenerateDenominatorError("sensitivity", "|G|")
    return int((g.bits & s.bits).sum()) / g.area


def specificity(g: BinaryMask, s: BinaryMask) -> float:
    _same_shape(g, s)
    negatives = int((~g.bits).sum())
    if negatives == 0:
        raise DegenerateDenominatorError("specificity", "|1-G|")
    return int((~g.bits & ~s.bits).sum()) / negatives


def overlap_metrics(g: BinaryMask, s: BinaryMask) -> OverlapScores:
    return OverlapScores(dice=dice(g, s), sens=sensitivity(g, s), spec=specificity(g, s))


def nearest_rank(values: np.ndarray, q: float = 95.0) -> float:
    """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value"""
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return float(ordered[rank - 1])


def directed_distances(a: BinaryMask, b: BinaryMask) -> np.ndarray:
    """For each boundary pixel of a, the Euclidean distance to the nearest boundary pixel of b"""
    pa = np.argwhere(a.boundary())
    pb = np.argwhere(b.boundary())
    return cdist(pa, pb).min(axis=1)


def hd95(g: BinaryMask, s: BinaryMask, combine: str = "max") -> float:
    """
    95th-percentile Hausdorff distance between mask boundaries, in pixels.

    Args:
        combine: "max" takes the larger of the two directed percentiles; "pooled" takes
            one percentile over both directed distance sets

    Raises:
        MetricError: either mask is empty or the dimensions differ
    """
    _same_shape(g, s)
    if g.area == 0 or s.area == 0:
        raise MetricError("hd95 needs two non-empty masks")
    d_gs = directed_distances(g, s)
    d_sg = directed_distances(s, g)
    if combine == "max":
        return max(nearest_rank(d_gs), nearest_rank(d_sg))
    if combine == "pooled":
        return nearest_rank(np.concatenate([d_gs, d_sg]))
    raise ValueError(f"unknown combine mode {combine!r}")
