#!/usr/bin/env python3
"""
asyndgan-desk main entry point

Usage:

    python main.py run                                  # bundled toy_asyndgan experiment
    python main.py run config/experiments/toy_syn_all.toml --out runs/syn_all --seed 3
    python main.py run toy_missing_modality --transport tcp
    python main.py run --check-theory                   # theory verification only, no training
    python main.py compare runs/asyndgan runs/syn_all runs/syn_subset1 --out comparison.csv
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from config.settings import DEFAULT_EXPERIMENT, THEORY_DEFAULTS
from src.exceptions import AsynDGANError, ConfigError
from src.metrics import check_theory
from src.orchestrator import ExperimentConfig, MetricsReport, list_bundled_experiments, load_experiment_config, run_training
from src.reporting import RunManifest, format_comparison, write_comparison, write_run_artifacts, write_theory_report
from src.utils import format_bytes, format_percentage, setup_logging

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ExperimentRunner:
    """Runs one experiment end to end and lays its artifacts out in a run directory"""

    def __init__(self, config: ExperimentConfig, out_dir: Path, transport: Optional[str] = None,
                 check_theory: bool = False):
        self.config = config
        self.out_dir = out_dir
        self.transport = transport or config.protocol.transport
        self.check_theory = check_theory or config.theory.enabled
        self.manifest = RunManifest(config.name, config.hash, config.seed, self.transport)

    def run(self) -> MetricsReport:
        try:
            generator, report = run_training(self.config, self.transport, progress=True)
            if self.check_theory:
                report.theory = check_theory(self.config.seed, self.config.theory.trials,
                                             self.config.theory.perturbations)
            write_run_artifacts(self.out_dir, generator, report, self.manifest)
        except Exception as e:
            logger.error(f"❌ Run '{self.config.name}' failed: {e}")
            self.manifest.fail(e)
            raise
        finally:
            self.manifest.add(self.out_dir / "run.log")
            self.manifest.write(self.out_dir)
        return report

    def display_results(self, report: MetricsReport) -> None:
        print("\n" + "=" * 80)
        print(f"ASYNDGAN-DESK RUN REPORT: {self.config.name} ({self.config.setting.value})")
        print("=" * 80)
        print(f"Rounds: {len(report.rounds)}   Transport: {self.transport}   Seed: {self.config.seed}")

        coverage = report.evaluation.get("coverage")
        if coverage:
            print("\nMode coverage:")
            for key, value in coverage.items():
                print(f"   • {key}: {format_percentage(value)}")
        augmentation = report.evaluation.get("augmentation")
        if augmentation:
            print(f"\nAugmented with {augmentation['node']}'s real data:")
            for key, value in augmentation["synthetic_plus_real"].items():
                print(f"   • {key}: {format_percentage(value)} "
                      f"(real only {format_percentage(augmentation['real_only'][key])})")
            downstream = augmentation["downstream"]
            print("   Mixture fit on the augmented set:")
            for key, value in downstream["synthetic_plus_real"].items():
                print(f"   • {key}: {format_percentage(value)} "
                      f"(real only {format_percentage(downstream['real_only'][key])})")
        completion = report.evaluation.get("completion_rmse")
        if completion:
            print("\nMissing-modality completion RMSE:")
            for key, value in completion.items():
                print(f"   • {key}: {value:.3f}")

        ledger = report.ledger_summary()
        print(f"\nTraffic: {format_bytes(ledger['total']['framed_bytes'])} framed, "
              f"{format_bytes(ledger['data']['payload_bytes'])} payload")
        print(f"Parameter-sharing baseline: {format_bytes(ledger['baseline']['bytes'])} per node per round")
        if report.theory is not None:
            print(f"Theory check: {'passed' if report.theory['passed'] else 'FAILED'}")
        print(f"\nArtifacts: {self.out_dir}")
        print("=" * 80)


def default_out_dir(name: str) -> Path:
    return Path("runs") / f"{name}-{datetime.now().strftime('%Y%m%d-%H%M%S')}"


def cmd_run(args: argparse.Namespace) -> int:
    theory_only = args.check_theory and args.config is None
    name = "theory" if theory_only else Path(args.config or DEFAULT_EXPERIMENT).stem
    out_dir = Path(args.out) if args.out else default_out_dir(name)
    out_dir.mkdir(parents=True, exist_ok=True)
    setup_logging(log_file=out_dir / "run.log")

    if theory_only:
        manifest = RunManifest("theory", seed=args.seed or 0)
        theory = check_theory(args.seed or 0, THEORY_DEFAULTS['trials'], THEORY_DEFAULTS['perturbations'])
        write_theory_report(out_dir, theory, manifest)
        manifest.add(out_dir / "run.log")
        manifest.write(out_dir)
        print(f"Theory check {'passed' if theory['passed'] else 'FAILED'}: "
              f"optimum {theory['optimal_value']:.6f}, report at {out_dir / 'report.json'}")
        return EXIT_OK if theory["passed"] else EXIT_RUNTIME

    try:
        overrides = {"experiment.seed": args.seed, "protocol.transport": args.transport}
        config = load_experiment_config(args.config, overrides)
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            logger.error(f"config error: {diagnostic}")
        return EXIT_CONFIG

    runner = ExperimentRunner(config, out_dir, args.transport, args.check_theory)
    try:
        report = runner.run()
    except AsynDGANError:
        return EXIT_RUNTIME
    runner.display_results(report)
    if report.theory is not None and not report.theory["passed"]:
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    setup_logging()
    try:
        frame = write_comparison(args.runs, args.out)
    except FileNotFoundError as e:
        logger.error(str(e))
        return EXIT_RUNTIME
    print(format_comparison(frame))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asyndgan-desk",
                                     description="Distributed conditional GAN simulator on toy data")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train one experiment and write its artifacts")
    run.add_argument("config", nargs="?", default=None,
                     help=f"TOML file or bundled experiment ({', '.join(list_bundled_experiments())})")
    run.add_argument("--out", help="run directory (default runs/<name>-<timestamp>)")
    run.add_argument("--transport", choices=["inproc", "tcp"], help="override [protocol].transport")
    run.add_argument("--check-theory", action="store_true",
                     help="verify the optimum value numerically; alone, skips training")
    run.add_argument("--seed", type=int, help="override the master seed (unsigned 64-bit)")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="tabulate several finished runs")
    compare.add_argument("runs", nargs="+", help="run directories")
    compare.add_argument("--out", default="comparison.csv", help="CSV output path")
    compare.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
