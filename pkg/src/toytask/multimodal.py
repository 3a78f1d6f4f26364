"""
Multimodal toy construction
Each modality is an invertible affine view of the same base point
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.exceptions import ConfigError, IndexOutOfRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AffineTransform:
    matrix: Tuple[Tuple[float, float], Tuple[float, float]]
    offset: Tuple[float, float] = (0.0, 0.0)

    @property
    def A(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.float64)

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.offset, dtype=np.float64)


@dataclass(frozen=True)
class MultimodalSpec:
    transforms: Tuple[AffineTransform, ...]

    def __post_init__(self):
        problems = []
        for k, t in enumerate(self.transforms, start=1):
            if t.A.shape != (2, 2) or t.b.shape != (2,):
                problems.append(f"multimodal.transforms[{k}]: matrix must be 2x2 and offset a 2-vector")
            elif abs(np.linalg.det(t.A)) < 1e-12:
                problems.append(f"multimodal.transforms[{k}]: matrix is singular")
        if problems:
            raise ConfigError(problems)

    @property
    def c(self) -> int:
        return len(self.transforms)

    def transform(self, modality: int) -> AffineTransform:
        if not 1 <= modality <= self.c:
            raise IndexOutOfRangeError(f"modality {modality} outside 1..{self.c}")
        return self.transforms[modality - 1]

    @classmethod
    def from_dicts(cls, items: Sequence[dict]) -> "MultimodalSpec":
        return cls(tuple(
            AffineTransform(
                matrix=tuple(tuple(float(v) for v in row) for row in item["matrix"]),
                offset=tuple(float(v) for v in item.get("offset", (0.0, 0.0))),
            )
            for item in items
        ))


def rotation(degrees: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    t = np.deg2rad(degrees)
    return ((float(np.cos(t)), float(-np.sin(t))), (float(np.sin(t)), float(np.cos(t))))


def default_multimodal_spec() -> MultimodalSpec:
    """c=3: identity, 2I + (1, 1), 45 degree rotation"""
    return MultimodalSpec((
        AffineTransform(((1.0, 0.0), (0.0, 1.0))),
        AffineTransform(((2.0, 0.0), (0.0, 2.0)), (1.0, 1.0)),
        AffineTransform(rotation(45.0)),
    ))


def make_multimodal(base: np.ndarray, spec: MultimodalSpec) -> np.ndarray:
    """(n, 2) base points -> (n, c, 2) with channel k = A_k p + b_k"""
    base = np.asarray(base, dtype=np.float64).reshape(-1, 2)
    return np.stack([base @ t.A.T + t.b for t in spec.transforms], axis=1)


def apply_transform(base: np.ndarray, spec: MultimodalSpec, modality: int) -> np.ndarray:
    t = spec.transform(modality)
    return np.asarray(base, dtype=np.float64).reshape(-1, 2) @ t.A.T + t.b


def invert_channel(channel: np.ndarray, spec: MultimodalSpec, modality: int) -> np.ndarray:
    """Recover base points from one modality channel"""
    t = spec.transform(modality)
    return np.linalg.solve(t.A, (np.asarray(channel, dtype=np.float64) - t.b).T).T


def coarse_label(base: np.ndarray, resolution: float) -> np.ndarray:
    """
    The condition of the multimodal task: each base point snapped to a grid of step
    `resolution`. It locates the sample without reproducing any of its channels.
    """
    if resolution <= 0:
        raise ConfigError([f"multimodal.label_resolution: must be > 0 (got {resolution})"])
    base = np.asarray(base, dtype=np.float64).reshape(-1, 2)
    return resolution * np.round(base / resolution)
