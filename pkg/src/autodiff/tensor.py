"""
Dense tensors and parameter stores
Tensors are plain float64 numpy arrays; ParamStore owns named weights plus Adam state
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from src.exceptions import DimensionError, NumericError

logger = logging.getLogger(__name__)

Tensor = np.ndarray


def as_tensor(value, name: str = "tensor") -> Tensor:
    """Coerce to a contiguous float64 array and reject NaN/Inf"""
    arr = np.ascontiguousarray(value, dtype=np.float64)
    ensure_finite(arr, name)
    return arr


def ensure_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(name, f"non-finite entry in tensor of shape {arr.shape}")


@dataclass
class AdamMoments:
    """Per-parameter optimizer state"""
    first: np.ndarray
    second: np.ndarray
    step: int = 0


class ParamStore:
    """
    Ordered collection of named weight/bias tensors for one network.

    The Adam moments live next to the parameters so that a store moved between
    workers carries its optimizer state with it.
    """

    def __init__(self, tensors: Optional[Mapping[str, np.ndarray]] = None):
        self.tensors: "OrderedDict[str, Tensor]" = OrderedDict()
        self.moments: Dict[str, AdamMoments] = {}
        for name, value in (tensors or {}).items():
            self.add(name, value)

    def add(self, name: str, value) -> None:
        arr = as_tensor(np.array(value, dtype=np.float64), name)
        self.tensors[name] = arr
        self.moments[name] = AdamMoments(np.zeros_like(arr), np.zeros_like(arr), 0)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def names(self) -> Tuple[str, ...]:
        return tuple(self.tensors)

    def shape_of(self, name: str) -> Tuple[int, ...]:
        return self.tensors[name].shape

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def zeros_like(self) -> Dict[str, Tensor]:
        return {name: np.zeros_like(t) for name, t in self.tensors.items()}

    def copy(self) -> "ParamStore":
        clone = ParamStore()
        for name, value in self.tensors.items():
            clone.tensors[name] = value.copy()
            m = self.moments[name]
            clone.moments[name] = AdamMoments(m.first.copy(), m.second.copy(), m.step)
        return clone

    def check_shapes(self, grads: Mapping[str, np.ndarray]) -> None:
        for name, grad in grads.items():
            if name not in self.tensors:
                raise DimensionError(name, "gradient for unknown parameter")
            if np.shape(grad) != self.tensors[name].shape:
                raise DimensionError(
                    name, f"gradient shape {np.shape(grad)} != parameter shape {self.tensors[name].shape}"
                )

    def allclose(self, other: "ParamStore", atol: float = 0.0) -> bool:
        if self.names() != other.names():
            return False
        return all(np.allclose(self[n], other[n], rtol=0.0, atol=atol) for n in self)

    def __repr__(self) -> str:
        shapes = ", ".join(f"{n}{tuple(t.shape)}" for n, t in self.tensors.items())
        return f"ParamStore({shapes})"
