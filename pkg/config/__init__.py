"""
Configuration package for asyndgan-desk
Default dictionaries and bundled experiment files
"""

from .settings import (
    DEFAULT_EXPERIMENT, DEFAULT_SECTIONS, DISCRIMINATOR_DEFAULTS, EVALUATION_DEFAULTS,
    EXPERIMENT_DEFAULTS, EXPERIMENTS_DIR, GENERATOR_DEFAULTS, LOSS_DEFAULTS, MULTIMODAL_DEFAULTS,
    NODE_DEFAULTS, OPTIMIZER_DEFAULTS, PROTOCOL_DEFAULTS, THEORY_DEFAULTS,
)

__all__ = [
    'DEFAULT_EXPERIMENT', 'DEFAULT_SECTIONS', 'DISCRIMINATOR_DEFAULTS', 'EVALUATION_DEFAULTS',
    'EXPERIMENT_DEFAULTS', 'EXPERIMENTS_DIR', 'GENERATOR_DEFAULTS', 'LOSS_DEFAULTS',
    'MULTIMODAL_DEFAULTS', 'NODE_DEFAULTS', 'OPTIMIZER_DEFAULTS', 'PROTOCOL_DEFAULTS',
    'THEORY_DEFAULTS',
]
