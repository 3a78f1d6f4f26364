"""
Cross-run comparison
One row per run directory, built from each report.json
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd

from src.reporting.artifacts import REPORT_FILE
from src.utils.helpers import create_summary_table

logger = logging.getLogger(__name__)

COMPARISON_FILE = "comparison.csv"
BASE_COLUMNS = ["run", "setting"]


def _row(run_dir: Path) -> Dict[str, object]:
    report_path = run_dir / REPORT_FILE
    if not report_path.is_file():
        raise FileNotFoundError(f"{run_dir} has no {REPORT_FILE}")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    evaluation = report.get("evaluation") or {}
    row: Dict[str, object] = {"run": run_dir.name, "setting": report.get("setting", "")}
    row.update(evaluation.get("coverage", {}))
    completion = evaluation.get("completion_rmse") or {}
    if completion:
        row["max_completion_rmse"] = max(completion.values())
    row["total_bytes"] = (report.get("ledger") or {}).get("total", {}).get("framed_bytes", 0)
    return row


def compare_runs(run_dirs: Sequence[Union[str, Path]]) -> pd.DataFrame:
    rows = [_row(Path(d)) for d in run_dirs]
    frame = pd.DataFrame(rows)
    coverage = sorted((c for c in frame.columns if c.startswith("coverage_mode_")),
                      key=lambda c: int(c.rsplit("_", 1)[1]))
    extra = [c for c in ("outlier_fraction", "max_completion_rmse") if c in frame.columns]
    return frame.reindex(columns=BASE_COLUMNS + coverage + extra + ["total_bytes"])


def format_comparison(frame: pd.DataFrame) -> str:
    rows: List[Dict[str, str]] = []
    for record in frame.to_dict(orient="records"):
        rows.append({k: (f"{v:.3f}" if isinstance(v, float) and k != "total_bytes" else
                         "" if pd.isna(v) else str(v)) for k, v in record.items()})
    return create_summary_table(rows, list(frame.columns))


def write_comparison(run_dirs: Sequence[Union[str, Path]], out_file: Union[str, Path, None] = None) -> pd.DataFrame:
    frame = compare_runs(run_dirs)
    out_file = Path(out_file) if out_file is not None else Path(COMPARISON_FILE)
    frame.to_csv(out_file, index=False, float_format="%.6g", lineterminator="\n")
    logger.info(f"Compared {len(frame)} runs -> {out_file}")
    return frame
