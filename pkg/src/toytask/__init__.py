"""
Toy task package for asyndgan-desk
Synthetic Gaussian subsets and the multimodal construction
"""

from src.toytask.export import dataset_frame, export_csv
from src.toytask.gaussians import (
    DEFAULT_CENTERS, GaussianSubset, cross_mode_mass, default_subsets, heterogeneous_subsets,
    sample_condition, sample_subset,
)
from src.toytask.multimodal import (
    AffineTransform, MultimodalSpec, apply_transform, coarse_label, default_multimodal_spec,
    invert_channel, make_multimodal,
)

__all__ = [
    'dataset_frame', 'export_csv',
    'DEFAULT_CENTERS', 'GaussianSubset', 'cross_mode_mass', 'default_subsets', 'heterogeneous_subsets',
    'sample_condition', 'sample_subset',
    'AffineTransform', 'MultimodalSpec', 'apply_transform', 'coarse_label', 'default_multimodal_spec',
    'invert_channel', 'make_multimodal',
]
