"""
Utilities package for asyndgan-desk
Helper functions and logging setup
"""

from src.utils.helpers import (
    async_retry_with_backoff, config_hash, create_summary_table, derive_seed, format_bytes,
    format_percentage,
)
from src.utils.logging_setup import setup_logging

__all__ = [
    'async_retry_with_backoff', 'config_hash', 'create_summary_table', 'derive_seed', 'format_bytes',
    'format_percentage', 'setup_logging',
]
