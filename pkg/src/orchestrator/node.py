"""
Data node worker
Holds the local dataset and one discriminator per held modality; only conditions,
synthetic samples and error feedback ever leave it
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.autodiff import AdamConfig
from src.exceptions import DimensionError, TransportError
from src.gan import ChannelBatch, DiscriminatorModel, LabeledBatch, LossConfig, discriminator_loss, generator_feedback
from src.orchestrator.config import ExperimentConfig, Participant, Task
from src.protocol import AuxBatch, ControlKind, ErrorFeedback, Message, SynthBatch, Transport, control
from src.toytask import coarse_label, make_multimodal, sample_condition, sample_subset
from src.utils.helpers import derive_seed

logger = logging.getLogger(__name__)


class SeedStream(IntEnum):
    """First element of every derived seed path"""
    DATA = 1
    INIT = 2
    NODE_BATCH = 3
    GENERATOR_DROPOUT = 4
    EVALUATION = 5


class Phase(IntEnum):
    DISCRIMINATOR = 0
    GENERATOR = 1


@dataclass
class LocalDataset:
    """
    A node's private data.

    points are the raw draws from the node's subsets; y holds only the channels in
    modalities, shaped (n, len(modalities), 2). In the mixture task x is fresh noise;
    in the multimodal task it is the coarse label of the drawn point.
    """
    points: np.ndarray
    y: np.ndarray
    modalities: Tuple[int, ...]
    task: Task
    condition_dim: int = 2
    condition_variance: float = 0.5
    label_resolution: float = 0.25

    def __post_init__(self):
        if self.y.ndim != 3 or self.y.shape[1] != len(self.modalities):
            raise DimensionError("dataset.y", f"shape {self.y.shape} does not hold channels {self.modalities}")

    @property
    def size(self) -> int:
        return int(self.y.shape[0])

    @classmethod
    def restrict(cls, points: np.ndarray, full_y: np.ndarray, keep: Sequence[int], task: Task,
                 condition_dim: int = 2, condition_variance: float = 0.5,
                label_resolution: float = 0.25) -> "LocalDataset":
        """Keep only channels keep (1-based) of a full (n, c, 2) array"""
        keep = tuple(sorted(keep))
        y = np.ascontiguousarray(full_y[:, [k - 1 for k in keep], :])
        return cls(points, y, keep, task, condition_dim, condition_variance, label_resolution)

    def sample_batch(self, rng: np.random.Generator, m: int) -> LabeledBatch:
        idx = rng.integers(0, self.size, size=m)
        if self.task is Task.MIXTURE:
            x = sample_condition(rng, m, self.condition_variance, self.condition_dim)
        else:
            x = coarse_label(self.points[idx], self.label_resolution)
        return LabeledBatch(x, self.y[idx], self.modalities)


def full_channels(points: np.ndarray, config: ExperimentConfig) -> np.ndarray:
    """Every modality channel of the given points, (n, c, 2)"""
    if config.task is Task.MIXTURE:
        return points[:, None, :]
    return make_multimodal(points, config.multimodal)


def build_datasets(config: ExperimentConfig) -> List[LocalDataset]:
    """One dataset per participant; all channels are drawn, then restricted to C_j"""
    datasets = []
    for j, participant in enumerate(config.participants()):
        rng = np.random.default_rng(derive_seed(config.seed, SeedStream.DATA, j))
        points = np.concatenate([sample_subset(src.subset, rng) for src in participant.sources], axis=0)
        datasets.append(LocalDataset.restrict(
            points, full_channels(points, config), participant.modalities, config.task,
            config.condition_dim, config.condition_variance, config.label_resolution,
        ))
    return datasets


@dataclass
class NodeWorker:
    node: int
    name: str
    dataset: LocalDataset
    discriminators: Dict[int, DiscriminatorModel]
    batch_size: int
    disc_steps: int
    seed: int
    loss: LossConfig = field(default_factory=LossConfig)
    adam: AdamConfig = field(default_factory=AdamConfig)
    disc_losses: Dict[int, float] = field(default_factory=dict)

    @classmethod
    def create(cls, node: int, participant: Participant, dataset: LocalDataset,
               config: ExperimentConfig) -> "NodeWorker":
        # mixture conditions are noise, so those discriminators judge the sample alone
        condition_dim = 0 if config.task is Task.MIXTURE else config.condition_dim
        discriminators = {}
        for k in participant.modalities:
            rng = np.random.default_rng(derive_seed(config.seed, SeedStream.INIT, node + 1, k))
            discriminators[k] = DiscriminatorModel.create(
                config.sample_dim, condition_dim, rng,
                hidden=config.discriminator.hidden, leaky_slope=config.discriminator.leaky_slope,
                modality=k, owner=node, sample_scale=config.sample_scale,
                condition_scale=config.condition_scale,
            )
        return cls(node, participant.name, dataset, discriminators, config.batch_size,
                   config.disc_steps, config.seed, config.loss, config.optimizer)

    @property
    def modalities(self) -> Tuple[int, ...]:
        return tuple(sorted(self.discriminators))

    def _batch(self, round_: int, phase: Phase, step: int) -> LabeledBatch:
        rng = np.random.default_rng(derive_seed(self.seed, SeedStream.NODE_BATCH, round_, self.node, phase, step))
        return self.dataset.sample_batch(rng, self.batch_size)

    async def _exchange(self, transport: Transport, round_: int, batch: LabeledBatch) -> Tuple[np.ndarray, SynthBatch]:
        """Send the condition batch, wait for the synthetic channels"""
        aux = AuxBatch(self.node, batch.x)
        await transport.send_to_generator(self.node, Message(round_, aux))
        reply = await transport.recv_from_generator(self.node, "synthetic batch")
        if not isinstance(reply.body, SynthBatch) or reply.round != round_:
            raise TransportError(f"node-{self.node}", f"expected SynthBatch for round {round_}, got {reply!r}")
        if reply.body.modalities != self.modalities:
            raise TransportError(f"node-{self.node}", f"received channels {reply.body.modalities}, "
                                                      f"holds {self.modalities}")
        # both sides work from the condition exactly as it crossed the wire
        return aux.x.astype(np.float64), reply.body

    async def discriminator_phase(self, transport: Transport, round_: int) -> float:
        losses = []
        for step in range(self.disc_steps):
            batch = self._batch(round_, Phase.DISCRIMINATOR, step)
            x, synth = await self._exchange(transport, round_, batch)
            for k, d in self.discriminators.items():
                real = ChannelBatch(x, batch.channel(k).y, k)
                fake = ChannelBatch(x, synth.channel(k).astype(np.float64), k)
                loss, grads = discriminator_loss(d, real, fake)
                self.adam.step(d.params, grads)
                losses.append(loss)
        mean_loss = float(np.mean(losses))
        self.disc_losses[round_] = mean_loss
        await transport.send_to_generator(self.node, control(round_, ControlKind.DISC_PHASE_DONE))
        return mean_loss

    async def generator_phase(self, transport: Transport, round_: int) -> None:
        batch = self._batch(round_, Phase.GENERATOR, 0)
        x, synth = await self._exchange(transport, round_, batch)
        for k, d in self.discriminators.items():
            fake = ChannelBatch(x, synth.channel(k).astype(np.float64), k)
            real = ChannelBatch(x, batch.channel(k).y, k)
            scalars, grad = generator_feedback(d, fake, real, self.loss)
            feedback = ErrorFeedback(self.node, k, grad, scalars.adv, scalars.l1)
            await transport.send_to_generator(self.node, Message(round_, feedback))

    async def run(self, transport: Transport) -> None:
        """Serve rounds until the generator sends Shutdown"""
        while True:
            msg = await transport.recv_from_generator(self.node, "round start")
            kind = getattr(msg.body, "kind", None)
            if kind is ControlKind.SHUTDOWN:
                logger.debug(f"{self.name}: shutdown after round {msg.round}")
                return
            if kind is not ControlKind.START:
                raise TransportError(f"node-{self.node}", f"expected Start or Shutdown, got {msg!r}")
            await self.discriminator_phase(transport, msg.round)
            await self.generator_phase(transport, msg.round)
