"""
Generator and discriminator models for asyndgan-desk
Central conditional generator (noise via dropout) and per-node, per-modality discriminators
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.autodiff import Activation, DropoutSpec, MLPArch, ParamStore, Tape, forward, init_params
from src.exceptions import ConfigError, DimensionError, IndexOutOfRangeError

logger = logging.getLogger(__name__)

# Sigmoid outputs are clamped to [SIGMOID_CLAMP, 1 - SIGMOID_CLAMP] before any log
SIGMOID_CLAMP = 1e-7


class AdversarialForm(Enum):
    MINIMAX = "minimax"                # minimise log(1 - D(y_hat, x))
    NON_SATURATING = "non_saturating"  # minimise -log D(y_hat, x)


@dataclass(frozen=True)
class LossConfig:
    """
    Generator loss weights.

    The perceptual term needs a pretrained feature network and is pinned to zero.
    """
    l1_weight: float = 10.0
    perceptual_weight: float = 0.0
    adversarial: AdversarialForm = AdversarialForm.MINIMAX

    def __post_init__(self):
        problems = []
        if self.l1_weight < 0:
            problems.append(f"loss.l1_weight: must be >= 0 (got {self.l1_weight})")
        if self.perceptual_weight != 0:
            problems.append(f"loss.perceptual_weight: must be 0 (got {self.perceptual_weight})")
        if problems:
            raise ConfigError(problems)


@dataclass
class ChannelBatch:
    """One modality channel of a batch: x is (m, cond_dim), y is (m, sample_dim)"""
    x: np.ndarray
    y: np.ndarray
    modality: int = 1

    @property
    def size(self) -> int:
        return int(self.y.shape[0])


@dataclass
class LabeledBatch:
    """
    m conditioning vectors with their (possibly multi-channel) samples.

    y has shape (m, channels, sample_dim); modalities lists the 1-based modality index
    of each stored channel.
    """
    x: np.ndarray
    y: np.ndarray
    modalities: Tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.y.ndim != 3 or self.y.shape[1] != len(self.modalities):
            raise DimensionError("batch.y", f"shape {self.y.shape} does not hold channels {self.modalities}")
        if self.x.shape[0] != self.y.shape[0]:
            raise DimensionError("batch.x", f"{self.x.shape[0]} conditions for {self.y.shape[0]} samples")

    @property
    def size(self) -> int:
        return int(self.y.shape[0])

    def channel(self, modality: int) -> ChannelBatch:
        if modality not in self.modalities:
            raise IndexOutOfRangeError(f"modality {modality} not in batch {self.modalities}")
        return ChannelBatch(self.x, self.y[:, self.modalities.index(modality), :], modality)


@dataclass
class GeneratorModel:
    """
    Central generator G: condition -> c modality channels x sample_dim.

    No noise vector is fed in; randomness comes only from dropout, which stays on
    for every sampling call. version counts applied updates and stamps every tape.
    Conditions are divided by input_scale before the first layer and the network
    output is multiplied by output_scale, so the weights work in unit-scale coordinates.
    """
    params: ParamStore
    arch: MLPArch
    condition_dim: int
    modality_count: int
    sample_dim: int = 2
    dropout_rate: float = 0.5
    version: int = 0
    input_scale: float = 1.0
    output_scale: float = 1.0

    @classmethod
    def create(cls, condition_dim: int, modality_count: int, rng: np.random.Generator,
               sample_dim: int = 2, hidden: Sequence[int] = (64, 64),
               activation: Activation = Activation.TANH,
               dropout_rate: float = 0.5, input_scale: float = 1.0,
               output_scale: float = 1.0) -> "GeneratorModel":
        widths = [condition_dim, *hidden, modality_count * sample_dim]
        arch = MLPArch.build("generator", widths, hidden=activation, output=Activation.LINEAR,
                             dropout_hidden=True)
        return cls(init_params(arch, rng), arch, condition_dim, modality_count, sample_dim, dropout_rate,
                   input_scale=input_scale, output_scale=output_scale)

    def sample(self, x: np.ndarray, seed: int) -> Tuple[np.ndarray, Tape]:
        """Returns y_hat of shape (m, c, sample_dim) and the stamped tape"""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        flat, tape = forward(self.params, self.arch, x / self.input_scale, DropoutSpec(self.dropout_rate, seed))
        tape.stamp = self.version
        return (flat * self.output_scale).reshape(x.shape[0], self.modality_count, self.sample_dim), tape

    def generate(self, x: np.ndarray, seed: int) -> np.ndarray:
        return self.sample(x, seed)[0]

    def check_modality(self, modality: int) -> int:
        """1-based modality -> 0-based channel index"""
        if not 1 <= modality <= self.modality_count:
            raise IndexOutOfRangeError(f"modality {modality} outside 1..{self.modality_count}")
        return modality - 1


@dataclass
class DiscriminatorModel:
    """
    D_{j,k}: (one modality channel, condition) -> probability of being real.

    With condition_dim 0 the discriminator sees the sample alone. Inputs are divided by
    sample_scale and condition_scale before the first layer.
    """
    params: ParamStore
    arch: MLPArch
    sample_dim: int = 2
    condition_dim: int = 2
    modality: int = 1
    owner: Optional[int] = field(default=None, compare=False)
    sample_scale: float = 1.0
    condition_scale: float = 1.0

    @classmethod
    def create(cls, sample_dim: int, condition_dim: int, rng: np.random.Generator,
               hidden: Sequence[int] = (64, 64), leaky_slope: float = 0.2,
               modality: int = 1, owner: Optional[int] = None, sample_scale: float = 1.0,
               condition_scale: float = 1.0) -> "DiscriminatorModel":
        widths = [sample_dim + condition_dim, *hidden, 1]
        splits = (sample_dim, condition_dim) if condition_dim else None
        arch = MLPArch.build(f"disc.m{modality}", widths, hidden=Activation.LEAKY_RELU,
                             output=Activation.SIGMOID, leaky_slope=leaky_slope, input_splits=splits)
        return cls(init_params(arch, rng), arch, sample_dim, condition_dim, modality, owner,
                   sample_scale=sample_scale, condition_scale=condition_scale)

    @property
    def conditional(self) -> bool:
        return self.condition_dim > 0

    def predict(self, y: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
        """Raw sigmoid outputs (m, 1) and the tape; clamping happens in the losses"""
        y = np.atleast_2d(y) / self.sample_scale
        if not self.conditional:
            return forward(self.params, self.arch, y)
        return forward(self.params, self.arch, (y, np.atleast_2d(x) / self.condition_scale))

    def sample_gradient(self, input_grad) -> np.ndarray:
        """Gradient w.r.t. the unscaled sample, from backward()'s input gradient"""
        grad_y = input_grad[0] if isinstance(input_grad, tuple) else input_grad
        return grad_y / self.sample_scale

    def probabilities(self, y: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.clip(self.predict(y, x)[0][:, 0], SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP)
