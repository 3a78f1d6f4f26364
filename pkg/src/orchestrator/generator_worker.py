"""
Central generator worker
Answers condition batches with synthetic channels, gathers error feedback behind a
per-round barrier and applies one update of the generator per round
"""

import asyncio
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.autodiff import AdamConfig
from src.exceptions import TransportError
from src.gan import Feedback, GeneratorModel, generator_step
from src.orchestrator.node import Phase, SeedStream
from src.protocol import AuxBatch, ControlKind, ErrorFeedback, Message, SynthBatch, Transport, control
from src.utils.helpers import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorRound:
    """What the generator learned from one round's feedback"""
    round: int
    adv: float
    l1: float
    feedback_count: int
    version: int


class GeneratorWorker:
    """
    Holds theta_G and nothing else.

    modality_sets[j] is C_j: node j receives only those channels and returns one
    feedback per channel.
    """

    def __init__(self, generator: GeneratorModel, modality_sets: Sequence[Tuple[int, ...]],
                 priors: Sequence[float], batch_size: int, disc_steps: int, seed: int,
                 adam: AdamConfig = AdamConfig()):
        self.generator = generator
        self.modality_sets = [tuple(sorted(c)) for c in modality_sets]
        self.priors = list(priors)
        self.batch_size = batch_size
        self.disc_steps = disc_steps
        self.seed = seed
        self.adam = adam
        self.logger = logging.getLogger(__name__)

    @property
    def n_nodes(self) -> int:
        return len(self.modality_sets)

    def _expect(self, msg: Message, node: int, round_: int, body_type, what: str):
        if not isinstance(msg.body, body_type) or msg.round != round_:
            raise TransportError(f"node-{node}", f"expected {what} for round {round_}, got {msg!r}")
        if getattr(msg.body, "node", node) != node:
            raise TransportError(f"node-{node}", f"message claims to come from node {msg.body.node}")
        return msg.body

    async def _synthesize(self, transport: Transport, node: int, round_: int, phase: Phase, step: int):
        aux = self._expect(await transport.recv_from_node(node, "condition batch"),
                           node, round_, AuxBatch, "AuxBatch")
        seed = derive_seed(self.seed, SeedStream.GENERATOR_DROPOUT, round_, node, phase, step)
        y_hat, tape = self.generator.sample(aux.x.astype(np.float64), seed)
        channels = self.modality_sets[node]
        samples = tuple(y_hat[:, self.generator.check_modality(k), :] for k in channels)
        await transport.send_to_node(node, Message(round_, SynthBatch(node, channels, samples)))
        return tape

    async def start_round(self, transport: Transport, round_: int) -> None:
        for j in range(self.n_nodes):
            await transport.send_to_node(j, control(round_, ControlKind.START))

    async def shutdown(self, transport: Transport, round_: int) -> None:
        for j in range(self.n_nodes):
            await transport.send_to_node(j, control(round_, ControlKind.SHUTDOWN))

    async def _serve_discriminator_phase(self, transport: Transport, node: int, round_: int) -> None:
        for step in range(self.disc_steps):
            await self._synthesize(transport, node, round_, Phase.DISCRIMINATOR, step)
        done = await transport.recv_from_node(node, "end of discriminator phase")
        if getattr(done.body, "kind", None) is not ControlKind.DISC_PHASE_DONE or done.round != round_:
            raise TransportError(f"node-{node}", f"expected DiscPhaseDone for round {round_}, got {done!r}")

    async def serve_discriminator_phase(self, transport: Transport, round_: int) -> None:
        """Answer k condition batches per node; returns once every node reported done"""
        await asyncio.gather(*(self._serve_discriminator_phase(transport, j, round_)
                               for j in range(self.n_nodes)))

    async def _collect_feedback(self, transport: Transport, node: int, round_: int) -> List[Feedback]:
        tape = await self._synthesize(transport, node, round_, Phase.GENERATOR, 0)
        feedbacks = []
        for k in self.modality_sets[node]:
            body = self._expect(await transport.recv_from_node(node, f"feedback for modality {k}"),
                                node, round_, ErrorFeedback, "ErrorFeedback")
            if body.modality != k:
                raise TransportError(f"node-{node}", f"feedback for modality {body.modality}, expected {k}")
            feedbacks.append(Feedback(node, k, tape, body.grad.astype(np.float64), body.adv, body.l1))
        return feedbacks

    async def serve_generator_phase(self, transport: Transport, round_: int) -> GeneratorRound:
        """Barrier on every node's feedback, then a single generator update"""
        per_node = await asyncio.gather(*(self._collect_feedback(transport, j, round_)
                                          for j in range(self.n_nodes)))
        feedbacks = [fb for node_feedback in per_node for fb in node_feedback]
        adv, l1 = self.weighted_scalars(per_node)
        generator_step(self.generator, feedbacks, self.priors, self.n_nodes, self.batch_size, self.adam)
        self.logger.debug(f"Round {round_}: generator v{self.generator.version} from {len(feedbacks)} feedbacks")
        return GeneratorRound(round_, adv, l1, len(feedbacks), self.generator.version)

    def weighted_scalars(self, per_node: Sequence[Sequence[Feedback]]) -> Tuple[float, float]:
        """pi-weighted mean over nodes of each node's mean over its modalities"""
        adv = l1 = 0.0
        for j, items in enumerate(per_node):
            if items:
                adv += self.priors[j] * float(np.mean([fb.adv for fb in items]))
                l1 += self.priors[j] * float(np.mean([fb.l1 for fb in items]))
        return adv, l1
