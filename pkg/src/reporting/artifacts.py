"""
Run artifacts
metrics.csv, report.json, ledger.csv, generator checkpoint and scatter plot for one run directory
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.autodiff import save_params
from src.gan import GeneratorModel
from src.orchestrator.trainer import METRICS_SCHEMA_VERSION, MetricsReport
from src.reporting.manifest import RunManifest
from src.reporting.scatter import write_scatter

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
REPORT_FILE = "report.json"
LEDGER_FILE = "ledger.csv"
CHECKPOINT_FILE = "generator.adgw"
SCATTER_FILE = "scatter.svg"
FLOAT_FORMAT = "%.10g"


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def write_json(path: Union[str, Path], data: Dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, default=_jsonable) + "\n", encoding="utf-8")
    return path


def write_metrics_csv(path: Union[str, Path], report: MetricsReport) -> Path:
    path = Path(path)
    report.metrics_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_ledger_csv(path: Union[str, Path], report: MetricsReport) -> Path:
    path = Path(path)
    report.ledger.frame().to_csv(path, index=False, lineterminator="\n")
    return path


def write_theory_report(out_dir: Union[str, Path], theory: Dict[str, Any],
                        manifest: Optional[RunManifest] = None) -> Path:
    """report.json for a theory-only run"""
    path = write_json(Path(out_dir) / REPORT_FILE, {"schema_version": METRICS_SCHEMA_VERSION, "theory": theory})
    if manifest is not None:
        manifest.add(path)
    return path


def write_run_artifacts(out_dir: Union[str, Path], generator: GeneratorModel, report: MetricsReport,
                        manifest: RunManifest) -> Dict[str, Path]:
    """Write every artifact of a finished run, registering each in the manifest as it lands"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    def keep(name: str, path: Path) -> None:
        written[name] = path
        manifest.add(path)

    keep("metrics", write_metrics_csv(out / METRICS_FILE, report))
    keep("ledger", write_ledger_csv(out / LEDGER_FILE, report))
    keep("checkpoint", save_params(generator.params, out / CHECKPOINT_FILE))
    keep("scatter", write_scatter(out / SCATTER_FILE, report.samples,
                                  title=f"{report.config.name} ({report.config.setting.value})"))
    keep("report", write_json(out / REPORT_FILE, report.to_dict()))
    logger.info(f"Wrote {len(written)} artifacts to {out}")
    return written
