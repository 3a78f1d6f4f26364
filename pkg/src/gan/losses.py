"""
Discriminator and generator losses for asyndgan-desk

L_D  = (1/m) sum_i [-log D(y_i, x_i) - log(1 - D(y_hat_i, x_i))]
L_G  = (1/(N m)) sum_j pi_j sum_{k in C_j} sum_i [adv(y_hat_i, x_i) + l1_weight * L1(y_i, y_hat_i)]
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.autodiff import AdamConfig, Tape, backward
from src.exceptions import DimensionError, EmptyBatchError, StalenessError
from src.gan.models import (
    SIGMOID_CLAMP, AdversarialForm, ChannelBatch, DiscriminatorModel, GeneratorModel, LossConfig,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeedbackScalars:
    """Batch means of the two generator loss terms for one (node, modality)"""
    adv: float
    l1: float


@dataclass
class Feedback:
    """One error-feedback contribution as seen by the generator"""
    node: int
    modality: int
    tape: Tape
    input_grad: np.ndarray
    adv: float = 0.0
    l1: float = 0.0


def _logged(p: np.ndarray) -> np.ndarray:
    """Clamped copy of sigmoid outputs, used only for the reported loss values"""
    return np.clip(p, SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP)


def _check_pair(a: ChannelBatch, b: ChannelBatch) -> int:
    if a.size == 0 or b.size == 0:
        raise EmptyBatchError("batches must hold at least one sample")
    if a.y.shape != b.y.shape or a.x.shape != b.x.shape:
        raise DimensionError(
            f"modality-{a.modality}", f"batch shapes differ: {a.y.shape}/{a.x.shape} vs {b.y.shape}/{b.x.shape}"
        )
    return a.size


def discriminator_loss(d: DiscriminatorModel, real: ChannelBatch,
                       fake: ChannelBatch) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Real-vs-synthetic loss for one discriminator and its parameter gradients.

    Fake samples are constants here: no gradient flows back to the generator.
    """
    m = _check_pair(real, fake)

    raw_real, tape_real = d.predict(real.y, real.x)
    raw_fake, tape_fake = d.predict(fake.y, fake.x)
    p_real, p_fake = raw_real[:, 0], raw_fake[:, 0]

    loss = float(np.mean(-np.log(_logged(p_real)) - np.log(1.0 - _logged(p_fake))))

    # d(-log sigmoid(z))/dz = -(1 - p), d(-log(1 - sigmoid(z)))/dz = p
    up_real = (-(1.0 - p_real) / m)[:, None]
    up_fake = (p_fake / m)[:, None]
    grads_real, _ = backward(tape_real, up_real, from_logit=True)
    grads_fake, _ = backward(tape_fake, up_fake, from_logit=True)
    grads = {name: grads_real[name] + grads_fake[name] for name in grads_real}
    return loss, grads


def generator_feedback(d: DiscriminatorModel, fake: ChannelBatch, real: ChannelBatch,
                       cfg: LossConfig) -> Tuple[FeedbackScalars, np.ndarray]:
    """
    Per-node, per-modality generator loss and its gradient w.r.t. the fake samples.

    The returned gradient (plus the two scalars) is everything that travels back to
    the generator; discriminator parameters are read but never updated.
    """
    m = _check_pair(fake, real)
    raw, tape = d.predict(fake.y, fake.x)
    p = raw[:, 0]

    if cfg.adversarial is AdversarialForm.MINIMAX:
        adv = float(np.mean(np.log(1.0 - _logged(p))))
        d_adv = -p / m
    else:
        adv = float(np.mean(-np.log(_logged(p))))
        d_adv = -(1.0 - p) / m

    _, input_grad = backward(tape, d_adv[:, None], from_logit=True)
    grad_y = d.sample_gradient(input_grad)

    diff = fake.y - real.y
    l1 = float(np.mean(np.abs(diff))) if diff.size else 0.0
    grad_l1 = np.sign(diff) / diff.size

    input_grad = grad_y + cfg.l1_weight * grad_l1
    return FeedbackScalars(adv=adv, l1=l1), input_grad


def accumulate_generator_gradients(g: GeneratorModel, feedbacks: Sequence[Feedback],
                                   priors: Sequence[float], n_nodes: int,
                                   batch_size: int) -> Dict[str, np.ndarray]:
    """
    pi-weighted sum of the back-propagated feedback gradients w.r.t. theta_G.

    Feedback gradients are batch means; scaling by batch_size recovers the per-sample
    sums that the generator objective weights by pi_j / (N m).
    """
    by_node: "OrderedDict[int, List[Feedback]]" = OrderedDict()
    for fb in sorted(feedbacks, key=lambda f: (f.node, f.modality)):
        if fb.tape.stamp != g.version:
            raise StalenessError(
                f"feedback from node {fb.node} was produced by generator version {fb.tape.stamp}, "
                f"current version is {g.version}"
            )
        by_node.setdefault(fb.node, []).append(fb)

    grads = g.params.zeros_like()
    for node, items in by_node.items():
        tape = items[0].tape
        if any(fb.tape is not tape for fb in items):
            raise StalenessError(f"node {node} sent feedback for more than one synthesis")
        m = tape.input_shapes[0][0]
        weight = priors[node] / (n_nodes * batch_size)
        upstream = np.zeros((m, g.modality_count, g.sample_dim))
        for fb in items:
            k = g.check_modality(fb.modality)
            if fb.input_grad.shape != (m, g.sample_dim):
                raise DimensionError(
                    f"feedback node-{node}/m{fb.modality}",
                    f"gradient shape {fb.input_grad.shape} != {(m, g.sample_dim)}",
                )
            upstream[:, k, :] += weight * batch_size * g.output_scale * fb.input_grad
        node_grads, _ = backward(tape, upstream.reshape(m, -1))
        for name, value in node_grads.items():
            grads[name] += value
    return grads


def generator_step(g: GeneratorModel, feedbacks: Sequence[Feedback], priors: Sequence[float],
                   n_nodes: int, batch_size: int, adam: AdamConfig = AdamConfig()) -> GeneratorModel:
    """One Adam update of theta_G from a round's feedback; bumps the generator version"""
    grads = accumulate_generator_gradients(g, feedbacks, priors, n_nodes, batch_size)
    adam.step(g.params, grads)
    g.version += 1
    logger.debug(f"generator update {g.version} from {len(feedbacks)} feedback messages")
    return g
