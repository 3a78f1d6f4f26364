"""
Reporting package for asyndgan-desk
Run artifacts, scatter plots, manifests and cross-run comparison
"""

from src.reporting.artifacts import (
    CHECKPOINT_FILE, LEDGER_FILE, METRICS_FILE, REPORT_FILE, SCATTER_FILE, write_json,
    write_run_artifacts, write_theory_report,
)
from src.reporting.compare import COMPARISON_FILE, compare_runs, format_comparison, write_comparison
from src.reporting.manifest import MANIFEST_NAME, ArtifactRecord, RunManifest, RunStatus
from src.reporting.scatter import render_scatter, write_scatter

__all__ = [
    'CHECKPOINT_FILE', 'LEDGER_FILE', 'METRICS_FILE', 'REPORT_FILE', 'SCATTER_FILE', 'write_json',
    'write_run_artifacts', 'write_theory_report',
    'COMPARISON_FILE', 'compare_runs', 'format_comparison', 'write_comparison',
    'MANIFEST_NAME', 'ArtifactRecord', 'RunManifest', 'RunStatus',
    'render_scatter', 'write_scatter',
]
