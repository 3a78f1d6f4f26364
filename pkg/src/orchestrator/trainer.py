"""
AsynDGAN trainer
Round loop: k discriminator phases then one generator phase, across one worker per node
and the central generator, connected only through a Transport
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.gan import GeneratorModel
from src.metrics import completion_rmse, downstream_coverage, mode_coverage
from src.orchestrator.config import ExperimentConfig, Setting, Task
from src.orchestrator.generator_worker import GeneratorRound, GeneratorWorker
from src.orchestrator.node import LocalDataset, NodeWorker, SeedStream, build_datasets, full_channels
from src.protocol import BandwidthLedger, Transport, ledger_report, make_transport
from src.toytask import GaussianSubset, apply_transform, coarse_label, sample_condition, sample_subset
from src.utils.helpers import derive_seed

logger = logging.getLogger(__name__)

METRICS_SCHEMA_VERSION = 1


@dataclass
class RoundRecord:
    round: int
    disc_losses: Dict[str, float]
    gen_adv: float
    gen_l1: float
    bytes_round: int
    bytes_total: int

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"round": self.round}
        row.update({f"disc_loss_{name}": loss for name, loss in self.disc_losses.items()})
        row.update({"gen_adv": self.gen_adv, "gen_l1": self.gen_l1,
                    "bytes_round": self.bytes_round, "bytes_total": self.bytes_total})
        return row


@dataclass
class MetricsReport:
    """Everything a run produces besides the generator itself"""
    config: ExperimentConfig
    node_names: Tuple[str, ...]
    priors: Tuple[float, ...]
    transport: str
    rounds: List[RoundRecord] = field(default_factory=list)
    evaluation: Dict[str, Any] = field(default_factory=dict)
    ledger: Optional[BandwidthLedger] = None
    theory: Optional[Dict[str, Any]] = None
    # point clouds for the scatter plot: real, condition, generated
    samples: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def columns(self) -> List[str]:
        return (["round"] + [f"disc_loss_{n}" for n in self.node_names]
                + ["gen_adv", "gen_l1", "bytes_round", "bytes_total"])

    def metrics_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_row() for r in self.rounds], columns=self.columns)

    def ledger_summary(self) -> Dict[str, Any]:
        return ledger_report(self.ledger or BandwidthLedger(), self.config.protocol.baseline_parameters)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": METRICS_SCHEMA_VERSION,
            "experiment": self.config.name,
            "setting": self.config.setting.value,
            "task": self.config.task.value,
            "transport": self.transport,
            "config": self.config.resolved(),
            "config_hash": self.config.hash,
            "nodes": list(self.node_names),
            "priors": list(self.priors),
            "rounds_completed": len(self.rounds),
            "evaluation": self.evaluation,
            "ledger": self.ledger_summary(),
            "theory": self.theory,
        }


def complete_modality(g: GeneratorModel, x: np.ndarray, modality: int, seed: int = 0) -> np.ndarray:
    """
    Channel `modality` (1-based) of G(x), as a substitute for a missing modality.

    Raises:
        IndexOutOfRangeError: modality outside 1..c
    """
    k = g.check_modality(modality)
    return g.generate(x, seed)[:, k, :]


class AsynDGANTrainer:
    def __init__(self, config: ExperimentConfig, transport: Optional[str] = None,
                 datasets: Optional[List[LocalDataset]] = None):
        self.config = config
        self.transport_kind = transport or config.protocol.transport
        self.participants = config.participants()
        self.priors = config.resolved_priors()
        self.datasets = datasets if datasets is not None else build_datasets(config)
        self.nodes = [NodeWorker.create(j, p, self.datasets[j], config)
                      for j, p in enumerate(self.participants)]

        rng = np.random.default_rng(derive_seed(config.seed, SeedStream.INIT, 0))
        self.generator = GeneratorModel.create(
            config.condition_dim, config.modality_count, rng, sample_dim=config.sample_dim,
            hidden=config.generator.hidden, activation=config.generator.activation,
            dropout_rate=config.generator.dropout, input_scale=config.condition_scale,
            output_scale=config.sample_scale,
        )
        self.worker = GeneratorWorker(
            self.generator, [p.modalities for p in self.participants], self.priors,
            config.batch_size, config.disc_steps, config.seed, config.optimizer,
        )
        self.ledger = BandwidthLedger()
        self.transport: Optional[Transport] = None
        self.report = MetricsReport(config, tuple(p.name for p in self.participants), self.priors,
                                    self.transport_kind, ledger=self.ledger)

    async def run_discriminator_phase(self, round_: int) -> Dict[str, float]:
        """Start the round and serve every node's k discriminator steps; per-node mean losses"""
        await self.worker.start_round(self.transport, round_)
        await self.worker.serve_discriminator_phase(self.transport, round_)
        return {node.name: node.disc_losses[round_] for node in self.nodes}

    async def run_generator_phase(self, round_: int) -> GeneratorRound:
        return await self.worker.serve_generator_phase(self.transport, round_)

    async def _rounds(self, progress: bool) -> None:
        cfg = self.config
        bytes_total = 0
        with tqdm(total=cfg.rounds, desc=cfg.name, unit="round", disable=not progress, leave=False) as bar:
            for r in range(cfg.rounds):
                disc_losses = await self.run_discriminator_phase(r)
                gen = await self.run_generator_phase(r)
                bytes_round = self.ledger.bytes_in_round(r)
                bytes_total += bytes_round
                record = RoundRecord(r, disc_losses, gen.adv, gen.l1, bytes_round, bytes_total)
                self.report.rounds.append(record)
                bar.update(1)
                if (r + 1) % cfg.log_interval == 0 or r + 1 == cfg.rounds:
                    losses = ", ".join(f"{n}={v:.4f}" for n, v in disc_losses.items())
                    logger.info(f"Round {r + 1}/{cfg.rounds}: D[{losses}] G adv={gen.adv:.4f} "
                                f"l1={gen.l1:.4f} bytes={bytes_total:,}")
        await self.worker.shutdown(self.transport, cfg.rounds)

    async def train(self, progress: bool = False) -> Tuple[GeneratorModel, MetricsReport]:
        self.transport = make_transport(self.transport_kind, len(self.nodes), self.ledger,
                                        self.config.protocol.recv_timeout)
        logger.info(f"Training '{self.config.name}': {self.config.setting.value}, "
                    f"{len(self.nodes)} participant(s), T={self.config.rounds}, transport={self.transport_kind}")
        async with self.transport:
            tasks = [asyncio.create_task(node.run(self.transport), name=f"node-{node.node}")
                     for node in self.nodes]
            tasks.append(asyncio.create_task(self._rounds(progress), name="generator"))
            done, pending = await asyncio.wait(tasks, return_when=asyncio.FIRST_EXCEPTION)
            failed = [t for t in done if t.exception() is not None]
            if failed:
                for t in pending:
                    t.cancel()
                await asyncio.gather(*pending, return_exceptions=True)
                logger.error(f"Task {failed[0].get_name()} failed: {failed[0].exception()}")
                raise failed[0].exception()

        self.report.evaluation = self.evaluate()
        return self.generator, self.report

    # -- evaluation ------------------------------------------------------------

    def evaluate(self) -> Dict[str, Any]:
        if self.config.task is Task.MULTIMODAL:
            return self._evaluate_multimodal()
        return self._evaluate_mixture()

    def _evaluate_mixture(self) -> Dict[str, Any]:
        cfg, ev = self.config, self.config.evaluation
        rng = np.random.default_rng(derive_seed(cfg.seed, SeedStream.EVALUATION, 0))
        x = sample_condition(rng, ev.eval_samples, cfg.condition_variance, cfg.condition_dim)
        y = self.generator.generate(x, derive_seed(cfg.seed, SeedStream.EVALUATION, 1))[:, 0, :]
        centers = [n.center for n in cfg.nodes]
        coverage = mode_coverage(y, centers, ev.coverage_radius)
        result: Dict[str, Any] = {"samples": int(ev.eval_samples), "coverage_radius": ev.coverage_radius,
                                  "coverage": coverage.as_dict()}

        real = np.concatenate([d.points for d in self.datasets], axis=0)
        if cfg.setting is Setting.SYN_PLUS_REAL:
            node = cfg.nodes[cfg.subset - 1]
            own = self.datasets[cfg.subset - 1].points
            augmented = np.concatenate([y, own], axis=0)
            fit_seed = derive_seed(cfg.seed, SeedStream.EVALUATION, 2)
            result["augmentation"] = {
                "node": node.name,
                "real_only": mode_coverage(own, centers, ev.coverage_radius).as_dict(),
                "synthetic_plus_real": mode_coverage(augmented, centers, ev.coverage_radius).as_dict(),
                "downstream": {
                    "real_only": downstream_coverage(own, centers, ev.coverage_radius,
                                                     ev.eval_samples, fit_seed).as_dict(),
                    "synthetic_plus_real": downstream_coverage(augmented, centers, ev.coverage_radius,
                                                               ev.eval_samples, fit_seed).as_dict(),
                },
            }
        self._keep_samples(real, x, y)
        logger.info(f"Mode coverage: {', '.join(f'{k}={v:.3f}' for k, v in coverage.as_dict().items())}")
        return result

    def _evaluate_multimodal(self) -> Dict[str, Any]:
        cfg, ev = self.config, self.config.evaluation
        spec = cfg.multimodal
        result: Dict[str, Any] = {"completion_rmse": {}, "channel_rmse": {}}
        all_points, all_generated, all_x = [], [], []
        per_node = max(1, ev.eval_samples // max(cfg.n_nodes, 1))
        for j, node in enumerate(cfg.nodes):
            rng = np.random.default_rng(derive_seed(cfg.seed, SeedStream.EVALUATION, 0, j))
            base = sample_subset(GaussianSubset(node.center, node.variance, per_node), rng)
            truth = full_channels(base, cfg)
            labels = coarse_label(base, cfg.label_resolution)
            seed = derive_seed(cfg.seed, SeedStream.EVALUATION, 1, j)
            generated = self.generator.generate(labels, seed)
            for k in range(1, cfg.modality_count + 1):
                rmse = completion_rmse(generated[:, k - 1, :], apply_transform(base, spec, k))
                result["channel_rmse"][f"{node.name}/m{k}"] = rmse
                if k not in node.modalities:
                    completed = complete_modality(self.generator, labels, k, seed)
                    result["completion_rmse"][f"{node.name}/m{k}"] = completion_rmse(completed, truth[:, k - 1, :])
            all_points.append(base)
            all_x.append(labels)
            all_generated.append(generated[:, 0, :])
        self._keep_samples(np.concatenate(all_points), np.concatenate(all_x), np.concatenate(all_generated))
        if result["completion_rmse"]:
            worst = max(result["completion_rmse"].values())
            logger.info(f"Missing-modality completion: worst RMSE {worst:.3f}")
        return result

    def _keep_samples(self, real: np.ndarray, x: np.ndarray, y: np.ndarray) -> None:
        limit = self.config.evaluation.scatter_points
        self.report.samples = {"real": real[:limit], "condition": x[:limit, :2], "generated": y[:limit]}


def run_training(config: ExperimentConfig, transport: Optional[str] = None, progress: bool = False,
                 datasets: Optional[List[LocalDataset]] = None) -> Tuple[GeneratorModel, MetricsReport]:
    """Synchronous entry point: builds the workers and drives them on a fresh event loop"""
    trainer = AsynDGANTrainer(config, transport, datasets)
    return asyncio.run(trainer.train(progress))
