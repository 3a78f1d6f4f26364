"""
Layer menu for small MLPs
Fixed set of dense layers; no general graphs
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.autodiff.tensor import ParamStore
from src.exceptions import DimensionError


class Activation(Enum):
    """Activation applied after a dense layer"""
    LINEAR = "linear"
    TANH = "tanh"
    LEAKY_RELU = "leaky_relu"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class LayerSpec:
    name: str
    in_features: int
    out_features: int
    activation: Activation = Activation.LINEAR
    dropout: bool = False

    @property
    def weight(self) -> str:
        return f"{self.name}.weight"

    @property
    def bias(self) -> str:
        return f"{self.name}.bias"


@dataclass(frozen=True)
class MLPArch:
    """
    Stack of dense layers.

    Args:
        layers: layer specs in evaluation order
        leaky_slope: negative slope used by every LEAKY_RELU layer
        input_splits: widths of the inputs concatenated in front of the first
            layer; None means a single input
    """
    layers: Tuple[LayerSpec, ...]
    leaky_slope: float = 0.2
    input_splits: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not self.layers:
            raise DimensionError("arch", "at least one layer required")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_features != nxt.in_features:
                raise DimensionError(
                    nxt.name, f"expects {nxt.in_features} inputs but {prev.name} emits {prev.out_features}"
                )
        if self.input_splits is not None and sum(self.input_splits) != self.input_width:
            raise DimensionError(
                self.layers[0].name, f"input splits {self.input_splits} do not sum to {self.input_width}"
            )

    @property
    def input_width(self) -> int:
        return self.layers[0].in_features

    @property
    def output_width(self) -> int:
        return self.layers[-1].out_features

    @classmethod
    def build(cls, prefix: str, widths: Sequence[int],
              hidden: Activation, output: Activation,
              dropout_hidden: bool = False, leaky_slope: float = 0.2,
              input_splits: Optional[Sequence[int]] = None) -> "MLPArch":
        """Dense stack widths[0] -> ... -> widths[-1]"""
        layers = []
        n = len(widths) - 1
        for i in range(n):
            last = i == n - 1
            layers.append(LayerSpec(
                name=f"{prefix}.{i}",
                in_features=int(widths[i]),
                out_features=int(widths[i + 1]),
                activation=output if last else hidden,
                dropout=(not last) and dropout_hidden,
            ))
        splits = tuple(int(s) for s in input_splits) if input_splits else None
        return cls(tuple(layers), leaky_slope=leaky_slope, input_splits=splits)


def init_params(arch: MLPArch, rng: np.random.Generator) -> ParamStore:
    """Glorot-uniform weights stored as (in, out); zero biases"""
    store = ParamStore()
    for layer in arch.layers:
        limit = np.sqrt(6.0 / (layer.in_features + layer.out_features))
        store.add(layer.weight, rng.uniform(-limit, limit, size=(layer.in_features, layer.out_features)))
        store.add(layer.bias, np.zeros(layer.out_features))
    return store
