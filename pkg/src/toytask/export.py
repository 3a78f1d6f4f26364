"""
CSV export of toy datasets for external plotting
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def dataset_frame(x: np.ndarray, y: np.ndarray, modalities: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """One row per sample: condition columns x0, x1 then y<k>_0, y<k>_1 per channel"""
    x = np.asarray(x).reshape(len(x), -1)
    y = np.asarray(y)
    if y.ndim == 2:
        y = y[:, None, :]
    modalities = list(modalities or range(1, y.shape[1] + 1))
    columns = {f"x{i}": x[:, i] for i in range(x.shape[1])}
    for c, k in enumerate(modalities):
        for i in range(y.shape[2]):
            columns[f"y{k}_{i}"] = y[:, c, i]
    return pd.DataFrame(columns)


def export_csv(path: Union[str, Path], x: np.ndarray, y: np.ndarray,
               modalities: Optional[Sequence[int]] = None) -> Path:
    path = Path(path)
    dataset_frame(x, y, modalities).to_csv(path, index=False, float_format="%.10g")
    logger.info(f"Exported {len(x)} samples to {path}")
    return path
