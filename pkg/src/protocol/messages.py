"""
Protocol message types
Everything that may cross the node / generator boundary
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Tuple, Union

import numpy as np


class Variant(IntEnum):
    AUX_BATCH = 1
    SYNTH_BATCH = 2
    ERROR_FEEDBACK = 3
    CONTROL = 4


class ControlKind(IntEnum):
    START = 1
    DISC_PHASE_DONE = 2
    SHUTDOWN = 3


class Direction(Enum):
    TO_GENERATOR = "to_generator"
    TO_NODE = "to_node"


def _f32(value) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(value, dtype=np.float32))


def _f32_scalar(value) -> float:
    return float(np.float32(value))


@dataclass(eq=False)
class AuxBatch:
    """Condition batch sampled by a node, node -> generator"""
    node: int
    x: np.ndarray

    def __post_init__(self):
        self.x = _f32(self.x)

    def __eq__(self, other):
        return (isinstance(other, AuxBatch) and self.node == other.node
                and self.x.shape == other.x.shape and np.array_equal(self.x, other.x))


@dataclass(eq=False)
class SynthBatch:
    """Synthetic channels for one condition batch, generator -> node; one tensor per modality"""
    node: int
    modalities: Tuple[int, ...]
    samples: Tuple[np.ndarray, ...]

    def __post_init__(self):
        self.modalities = tuple(int(k) for k in self.modalities)
        self.samples = tuple(_f32(s) for s in self.samples)
        if len(self.modalities) != len(self.samples):
            raise ValueError(f"{len(self.modalities)} modalities for {len(self.samples)} tensors")

    def channel(self, modality: int) -> np.ndarray:
        return self.samples[self.modalities.index(modality)]

    def __eq__(self, other):
        return (isinstance(other, SynthBatch) and self.node == other.node
                and self.modalities == other.modalities
                and all(a.shape == b.shape and np.array_equal(a, b)
                        for a, b in zip(self.samples, other.samples)))


@dataclass(eq=False)
class ErrorFeedback:
    """Gradient of the generator-side loss w.r.t. one synthetic channel, node -> generator"""
    node: int
    modality: int
    grad: np.ndarray
    adv: float
    l1: float

    def __post_init__(self):
        self.grad = _f32(self.grad)
        self.adv = _f32_scalar(self.adv)
        self.l1 = _f32_scalar(self.l1)

    def __eq__(self, other):
        return (isinstance(other, ErrorFeedback) and self.node == other.node
                and self.modality == other.modality and self.grad.shape == other.grad.shape
                and np.array_equal(self.grad, other.grad)
                and self.adv == other.adv and self.l1 == other.l1)


@dataclass(frozen=True)
class Control:
    kind: ControlKind


Body = Union[AuxBatch, SynthBatch, ErrorFeedback, Control]

_VARIANTS = {AuxBatch: Variant.AUX_BATCH, SynthBatch: Variant.SYNTH_BATCH,
             ErrorFeedback: Variant.ERROR_FEEDBACK, Control: Variant.CONTROL}


@dataclass
class Message:
    round: int
    body: Body

    @property
    def variant(self) -> Variant:
        return _VARIANTS[type(self.body)]

    @property
    def is_control(self) -> bool:
        return isinstance(self.body, Control)

    def __repr__(self):
        return f"Message(round={self.round}, {type(self.body).__name__})"


def control(round_: int, kind: ControlKind) -> Message:
    return Message(round_, Control(kind))
