"""
Metrics package for asyndgan-desk
Segmentation scores, toy-distribution quality and the theory oracle
"""

from src.metrics.distribution import ModeCoverage, completion_rmse, downstream_coverage, mode_coverage
from src.metrics.segmentation import (
    BinaryMask, OverlapScores, dice, hd95, overlap_metrics, sensitivity, specificity,
)
from src.metrics.theory import (
    NEG_LOG4, DiscreteDist, GridSpec, check_theory, discriminator_value, js_pair_loss,
    optimal_discriminator, value_functional,
)

__all__ = [
    'ModeCoverage', 'completion_rmse', 'downstream_coverage', 'mode_coverage',
    'BinaryMask', 'OverlapScores', 'dice', 'hd95', 'overlap_metrics', 'sensitivity', 'specificity',
    'NEG_LOG4', 'DiscreteDist', 'GridSpec', 'check_theory', 'discriminator_value', 'js_pair_loss',
    'optimal_discriminator', 'value_functional',
]
