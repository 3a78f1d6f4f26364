"""
Adam optimizer over a ParamStore
"""

import logging
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from src.autodiff.tensor import ParamStore
from src.exceptions import NumericError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamConfig:
    """Adam hyperparameters; defaults follow the reference training setup"""
    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8

    def step(self, params: ParamStore, grads: Mapping[str, np.ndarray]) -> ParamStore:
        return adam_step(params, grads, self.learning_rate, self.beta1, self.beta2, self.eps)


def adam_step(params: ParamStore, grads: Mapping[str, np.ndarray],
              lr: float = 1e-4, beta1: float = 0.5, beta2: float = 0.999,
              eps: float = 1e-8) -> ParamStore:
    """
    Bias-corrected Adam update applied in place.

    Parameters without an entry in grads are treated as having a zero gradient, so
    every parameter's step count advances by one.

    Raises:
        NumericError: a gradient holds NaN/Inf (nothing is updated in that case)
        DimensionError: a gradient shape differs from its parameter
    """
    params.check_shapes(grads)
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NumericError(name, "non-finite gradient entry")

    for name, value in params.items():
        grad = np.asarray(grads.get(name, 0.0), dtype=np.float64)
        state = params.moments[name]
        state.step += 1
        state.first *= beta1
        state.first += (1.0 - beta1) * grad
        state.second *= beta2
        state.second += (1.0 - beta2) * (grad * grad)
        m_hat = state.first / (1.0 - beta1 ** state.step)
        v_hat = state.second / (1.0 - beta2 ** state.step)
        value -= lr * m_hat / (np.sqrt(v_hat) + eps)

    return params
