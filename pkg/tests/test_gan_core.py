"""
GAN core tests for asyndgan-desk
Loss gradients, feedback aggregation and the single-process oracle
"""

import os
import sys
import unittest
import logging

import numpy as np

# Add repo root to path for testing
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import AdamConfig
from src.exceptions import ConfigError, DimensionError, EmptyBatchError, IndexOutOfRangeError, StalenessError
from src.gan import (
    AdversarialForm, ChannelBatch, DiscriminatorModel, Feedback, GeneratorModel, LabeledBatch,
    LossConfig, accumulate_generator_gradients, discriminator_loss, generator_feedback, generator_step,
)

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

M = 6


def grad_close(a, b, rtol=1e-4, atol=1e-7):
    """Relative error within rtol, with an absolute floor for entries near zero"""
    return bool(np.all(np.abs(a - b) <= rtol * (np.abs(a) + np.abs(b)) + atol))


def random_discriminator(rng, trial):
    """Small discriminator; odd trials judge the sample alone, every third one scales its inputs"""
    hidden = tuple(int(w) for w in rng.integers(2, 7, size=int(rng.integers(1, 3))))
    scale = 10.0 if trial % 3 == 0 else 1.0
    return DiscriminatorModel.create(2, 0 if trial % 2 else 2, rng, hidden=hidden,
                                     sample_scale=scale, condition_scale=scale)


def numeric_param_grads(params, objective, eps=1e-6):
    """Central differences of a scalar objective w.r.t. every entry of every parameter"""
    grads = {}
    for name in params:
        numeric = np.zeros_like(params[name])
        for idx in np.ndindex(*numeric.shape):
            original = params[name][idx]
            params[name][idx] = original + eps
            plus = objective()
            params[name][idx] = original - eps
            minus = objective()
            params[name][idx] = original
            numeric[idx] = (plus - minus) / (2 * eps)
        grads[name] = numeric
    return grads


def generator_objective(g, d, x, y, seed, cfg):
    """adv + l1_weight * l1 on one batch, evaluated directly (no protocol)"""
    y_hat = g.generate(x, seed)[:, 0, :]
    p = d.probabilities(y_hat, x)
    adv = np.mean(np.log(1.0 - p)) if cfg.adversarial is AdversarialForm.MINIMAX else np.mean(-np.log(p))
    return adv + cfg.l1_weight * np.mean(np.abs(y_hat - y))


class TestDiscriminatorLoss(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.d = DiscriminatorModel.create(2, 2, self.rng, hidden=(6, 5))
        x = self.rng.normal(size=(M, 2))
        self.real = ChannelBatch(x, self.rng.normal(10.0, 1.0, size=(M, 2)))
        self.fake = ChannelBatch(x, self.rng.normal(0.0, 1.0, size=(M, 2)))

    def test_gradients_match_finite_differences(self):
        """100 random discriminators, conditional or not, with and without input scaling"""
        for trial in range(100):
            d = random_discriminator(self.rng, trial)
            x = self.rng.normal(size=(M, 2))
            real = ChannelBatch(x, self.rng.normal(1.0, 1.0, size=(M, 2)) * d.sample_scale)
            fake = ChannelBatch(x, self.rng.normal(0.0, 1.0, size=(M, 2)) * d.sample_scale)
            _, grads = discriminator_loss(d, real, fake)
            numeric = numeric_param_grads(d.params, lambda: discriminator_loss(d, real, fake)[0])
            for name in d.params:
                self.assertTrue(grad_close(grads[name], numeric[name]), f"trial {trial} {name}")

    def test_constant_half_gives_two_log_two(self):
        """D == 0.5 everywhere: each of the two terms contributes log 2"""
        self.d.params["disc.m1.2.weight"][:] = 0.0
        self.d.params["disc.m1.2.bias"][:] = 0.0
        loss, _ = discriminator_loss(self.d, self.real, self.fake)
        self.assertAlmostEqual(loss, 2.0 * np.log(2.0), places=12)

    def test_saturated_logit_keeps_gradient(self):
        for bias in (-30.0, 30.0):
            self.d.params["disc.m1.2.bias"][:] = bias
            _, grads = discriminator_loss(self.d, self.real, self.fake)
            self.assertGreater(max(np.max(np.abs(g)) for g in grads.values()), 0.1, bias)

    def test_loss_decreases_on_separable_clouds(self):
        """Frozen fakes far from the real cloud: Adam on L_D drives the loss down"""
        adam = AdamConfig(learning_rate=1e-2)
        losses = []
        for _ in range(50):
            loss, grads = discriminator_loss(self.d, self.real, self.fake)
            adam.step(self.d.params, grads)
            losses.append(loss)
        self.assertLess(losses[-1], losses[0])

    def test_saturated_outputs_stay_finite(self):
        self.d.params["disc.m1.2.bias"][:] = 1e4
        loss, grads = discriminator_loss(self.d, self.real, self.fake)
        self.assertTrue(np.isfinite(loss))
        self.assertTrue(all(np.all(np.isfinite(g)) for g in grads.values()))

    def test_empty_batch_rejected(self):
        empty = ChannelBatch(np.zeros((0, 2)), np.zeros((0, 2)))
        with self.assertRaises(EmptyBatchError):
            discriminator_loss(self.d, empty, empty)

    def test_shape_mismatch_rejected(self):
        short = ChannelBatch(self.fake.x[:3], self.fake.y[:3])
        with self.assertRaises(DimensionError):
            discriminator_loss(self.d, self.real, short)


class TestGeneratorFeedback(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)
        self.x = self.rng.normal(size=(M, 2))
        self.real = ChannelBatch(self.x, self.rng.normal(size=(M, 2)))
        self.fake = ChannelBatch(self.x, self.rng.normal(size=(M, 2)) + 0.3)

    def _numeric_input_grad(self, d, cfg):
        def objective(y_hat):
            p = d.probabilities(y_hat, self.x)
            adv = np.mean(np.log(1.0 - p)) if cfg.adversarial is AdversarialForm.MINIMAX else np.mean(-np.log(p))
            return adv + cfg.l1_weight * np.mean(np.abs(y_hat - self.real.y))

        eps = 1e-6
        numeric = np.zeros_like(self.fake.y)
        for idx in np.ndindex(*numeric.shape):
            bumped = self.fake.y.copy()
            bumped[idx] += eps
            plus = objective(bumped)
            bumped[idx] -= 2 * eps
            numeric[idx] = (plus - objective(bumped)) / (2 * eps)
        return numeric

    def test_input_gradient_matches_finite_differences(self):
        """100 random discriminators per adversarial form"""
        for form in AdversarialForm:
            cfg = LossConfig(l1_weight=10.0, adversarial=form)
            for trial in range(100):
                d = random_discriminator(self.rng, trial)
                _, grad = generator_feedback(d, self.fake, self.real, cfg)
                self.assertTrue(grad_close(grad, self._numeric_input_grad(d, cfg)), f"{form.value} {trial}")

    def test_saturated_logit_keeps_gradient(self):
        d = DiscriminatorModel.create(2, 2, self.rng, hidden=(5,))
        for bias in (-30.0, 30.0):
            d.params["disc.m1.1.bias"][:] = bias
            for form in AdversarialForm:
                _, grad = generator_feedback(d, self.fake, self.real, LossConfig(l1_weight=0.0, adversarial=form))
                self.assertGreater(np.max(np.abs(grad)), 0.0, f"{form.value} {bias}")

    def test_both_forms_raise_discriminator_output(self):
        """Small steps against the feedback gradient increase D on every fake sample"""
        for form in AdversarialForm:
            cfg = LossConfig(l1_weight=0.0, adversarial=form)
            for trial in range(20):
                d = random_discriminator(self.rng, trial)
                y = self.fake.y * d.sample_scale
                before = d.predict(y, self.x)[0][:, 0]
                for _ in range(10):
                    _, grad = generator_feedback(d, ChannelBatch(self.x, y), self.real, cfg)
                    norms = np.linalg.norm(grad, axis=1, keepdims=True)
                    y = y - 1e-3 * d.sample_scale * grad / norms
                after = d.predict(y, self.x)[0][:, 0]
                self.assertTrue(np.all(after > before), f"{form.value} {trial}")

    def test_l1_vanishes_when_fake_equals_real(self):
        d = DiscriminatorModel.create(2, 2, self.rng, hidden=(5,))
        scalars, grad = generator_feedback(d, self.real, self.real, LossConfig(l1_weight=1.0))
        _, adv_only = generator_feedback(d, self.real, self.real, LossConfig(l1_weight=0.0))
        self.assertEqual(scalars.l1, 0.0)
        np.testing.assert_array_equal(grad, adv_only)

    def test_feedback_size_independent_of_discriminator_width(self):
        cfg = LossConfig()
        for hidden in [(4,), (64, 64), (128, 128, 128)]:
            d = DiscriminatorModel.create(2, 2, self.rng, hidden=hidden)
            scalars, grad = generator_feedback(d, self.fake, self.real, cfg)
            self.assertEqual(grad.shape, (M, 2))
            self.assertTrue(np.isfinite(scalars.adv))

    def test_discriminator_untouched(self):
        d = DiscriminatorModel.create(2, 2, self.rng)
        before = d.params.copy()
        generator_feedback(d, self.fake, self.real, LossConfig())
        self.assertTrue(d.params.allclose(before))

    def test_l1_scalar(self):
        d = DiscriminatorModel.create(2, 2, self.rng)
        scalars, _ = generator_feedback(d, self.fake, self.real, LossConfig(l1_weight=0.0))
        self.assertAlmostEqual(scalars.l1, float(np.mean(np.abs(self.fake.y - self.real.y))), places=12)

    def test_perceptual_weight_pinned_to_zero(self):
        with self.assertRaises(ConfigError) as ctx:
            LossConfig(perceptual_weight=1.0)
        self.assertIn("loss.perceptual_weight", ctx.exception.fields())


class TestGeneratorStep(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(17)
        self.g = GeneratorModel.create(2, 1, self.rng, hidden=(8,), dropout_rate=0.5)
        self.x = self.rng.normal(size=(M, 2))
        self.y = self.rng.normal(5.0, 1.0, size=(M, 2))
        self.d = DiscriminatorModel.create(2, 2, self.rng, hidden=(6,))

    def _feedback(self, node, seed, cfg):
        y_hat, tape = self.g.sample(self.x, seed)
        fake = ChannelBatch(self.x, y_hat[:, 0, :])
        scalars, grad = generator_feedback(self.d, fake, ChannelBatch(self.x, self.y), cfg)
        return Feedback(node, 1, tape, grad, scalars.adv, scalars.l1)

    def test_matches_single_process_objective(self):
        """N=1, c=1: the aggregated gradient is the gradient of adv + l1_weight * l1"""
        cfg = LossConfig(l1_weight=10.0)
        fb = self._feedback(0, seed=99, cfg=cfg)
        grads = accumulate_generator_gradients(self.g, [fb], priors=[1.0], n_nodes=1, batch_size=M)

        eps = 1e-6
        for name in self.g.params:
            numeric = np.zeros_like(self.g.params[name])
            for idx in np.ndindex(*numeric.shape):
                original = self.g.params[name][idx]
                self.g.params[name][idx] = original + eps
                plus = generator_objective(self.g, self.d, self.x, self.y, 99, cfg)
                self.g.params[name][idx] = original - eps
                minus = generator_objective(self.g, self.d, self.x, self.y, 99, cfg)
                self.g.params[name][idx] = original
                numeric[idx] = (plus - minus) / (2 * eps)
            self.assertTrue(grad_close(grads[name], numeric), name)

    def test_matches_single_process_objective_random_models(self):
        """Same oracle over 100 random generator/discriminator pairs, scaled and unscaled"""
        for trial in range(100):
            cfg = LossConfig(l1_weight=float(trial % 4) * 5.0, adversarial=list(AdversarialForm)[trial % 2])
            scale = 10.0 if trial % 3 == 0 else 1.0
            g = GeneratorModel.create(2, 1, self.rng, hidden=(int(self.rng.integers(2, 6)),),
                                      dropout_rate=0.5, input_scale=scale, output_scale=scale)
            d = random_discriminator(self.rng, trial)
            y_hat, tape = g.sample(self.x, trial)
            scalars, grad = generator_feedback(d, ChannelBatch(self.x, y_hat[:, 0, :]),
                                               ChannelBatch(self.x, self.y), cfg)
            fb = Feedback(0, 1, tape, grad, scalars.adv, scalars.l1)
            grads = accumulate_generator_gradients(g, [fb], priors=[1.0], n_nodes=1, batch_size=M)
            numeric = numeric_param_grads(g.params, lambda: generator_objective(g, d, self.x, self.y, trial, cfg))
            for name in g.params:
                self.assertTrue(grad_close(grads[name], numeric[name]), f"trial {trial} {name}")

    def test_linear_in_priors(self):
        cfg = LossConfig()
        feedbacks = [self._feedback(0, 1, cfg), self._feedback(1, 2, cfg)]
        only_0 = accumulate_generator_gradients(self.g, feedbacks, [1.0, 0.0], 2, M)
        only_1 = accumulate_generator_gradients(self.g, feedbacks, [0.0, 1.0], 2, M)
        mixed = accumulate_generator_gradients(self.g, feedbacks, [0.3, 0.7], 2, M)
        for name in mixed:
            np.testing.assert_allclose(mixed[name], 0.3 * only_0[name] + 0.7 * only_1[name],
                                       rtol=1e-10, atol=1e-14)

    def test_aggregation_order_irrelevant(self):
        cfg = LossConfig()
        feedbacks = [self._feedback(0, 1, cfg), self._feedback(1, 2, cfg)]
        a = accumulate_generator_gradients(self.g, feedbacks, [0.5, 0.5], 2, M)
        b = accumulate_generator_gradients(self.g, feedbacks[::-1], [0.5, 0.5], 2, M)
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_zero_feedback_leaves_weights(self):
        _, tape = self.g.sample(self.x, 4)
        before = self.g.params.copy()
        generator_step(self.g, [Feedback(0, 1, tape, np.zeros((M, 2)))], [1.0], 1, M)
        self.assertTrue(self.g.params.allclose(before))
        self.assertEqual(self.g.version, 1)

    def test_stale_feedback_rejected(self):
        cfg = LossConfig()
        fb = self._feedback(0, 1, cfg)
        generator_step(self.g, [fb], [1.0], 1, M)
        with self.assertRaises(StalenessError):
            generator_step(self.g, [fb], [1.0], 1, M)

    def test_feedback_shape_checked(self):
        _, tape = self.g.sample(self.x, 4)
        with self.assertRaises(DimensionError):
            accumulate_generator_gradients(self.g, [Feedback(0, 1, tape, np.zeros((M, 3)))], [1.0], 1, M)


class TestModels(unittest.TestCase):
    def test_generator_output_shape_and_dropout_noise(self):
        g = GeneratorModel.create(2, 3, np.random.default_rng(0))
        x = np.random.default_rng(1).normal(size=(4, 2))
        a = g.generate(x, 1)
        self.assertEqual(a.shape, (4, 3, 2))
        self.assertFalse(np.array_equal(a, g.generate(x, 2)))

    def test_modality_index(self):
        g = GeneratorModel.create(2, 3, np.random.default_rng(0))
        self.assertEqual(g.check_modality(3), 2)
        with self.assertRaises(IndexOutOfRangeError):
            g.check_modality(4)

    def test_labeled_batch_channel(self):
        batch = LabeledBatch(np.zeros((2, 2)), np.arange(8.0).reshape(2, 2, 2), (1, 3))
        np.testing.assert_array_equal(batch.channel(3).y, [[2.0, 3.0], [6.0, 7.0]])
        with self.assertRaises(IndexOutOfRangeError):
            batch.channel(2)


if __name__ == '__main__':
    unittest.main()
