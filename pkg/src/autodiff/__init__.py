"""
Autodiff package for asyndgan-desk
Dense reverse-mode differentiation and Adam for small MLPs
"""

from src.autodiff.layers import Activation, LayerSpec, MLPArch, init_params
from src.autodiff.optim import AdamConfig, adam_step
from src.autodiff.serialization import load_params, params_from_bytes, params_to_bytes, save_params
from src.autodiff.tape import DropoutSpec, Tape, backward, forward
from src.autodiff.tensor import ParamStore, Tensor, as_tensor

__all__ = [
    'Activation', 'LayerSpec', 'MLPArch', 'init_params',
    'AdamConfig', 'adam_step',
    'load_params', 'save_params', 'params_to_bytes', 'params_from_bytes',
    'DropoutSpec', 'Tape', 'backward', 'forward',
    'ParamStore', 'Tensor', 'as_tensor',
]
