"""
Autodiff tests for asyndgan-desk
Finite-difference gradient checks, dropout determinism, Adam and weight files
"""

import os
import sys
import tempfile
import unittest
import logging

import numpy as np

# Add repo root to path for testing
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import (
    Activation, AdamConfig, DropoutSpec, MLPArch, ParamStore, adam_step, backward, forward,
    init_params, load_params, params_from_bytes, params_to_bytes, save_params,
)
from src.exceptions import DecodeError, DimensionError, MagicMismatch, NumericError, Truncated, VersionMismatch

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def numeric_param_grad(params, arch, inputs, upstream, name, eps=1e-6):
    """Central differences of <upstream, f(inputs)> w.r.t. one parameter tensor"""
    grad = np.zeros_like(params[name])
    it = np.nditer(params[name], flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = params[name][idx]
        params[name][idx] = original + eps
        plus = np.sum(upstream * forward(params, arch, inputs)[0])
        params[name][idx] = original - eps
        minus = np.sum(upstream * forward(params, arch, inputs)[0])
        params[name][idx] = original
        grad[idx] = (plus - minus) / (2 * eps)
    return grad


def grad_close(a, b, rtol=1e-4, atol=1e-7):
    """Relative error within rtol, with an absolute floor for entries near zero"""
    return bool(np.all(np.abs(a - b) <= rtol * (np.abs(a) + np.abs(b)) + atol))


class TestForwardBackward(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_parameter_gradients_match_finite_differences(self):
        """Random small MLPs: analytic parameter gradients within 1e-4 relative error"""
        for trial in range(100):
            hidden = [Activation.TANH, Activation.LEAKY_RELU][trial % 2]
            output = [Activation.SIGMOID, Activation.LINEAR][trial % 2]
            widths = [3, int(self.rng.integers(2, 6)), int(self.rng.integers(2, 6)), 2]
            arch = MLPArch.build("net", widths, hidden=hidden, output=output)
            params = init_params(arch, self.rng)
            x = self.rng.normal(size=(4, 3))
            upstream = self.rng.normal(size=(4, 2))

            _, tape = forward(params, arch, x)
            grads, _ = backward(tape, upstream)
            for name in params:
                numeric = numeric_param_grad(params, arch, x, upstream, name)
                self.assertTrue(grad_close(grads[name], numeric), f"trial {trial} {name}")

    def test_input_gradients_split_per_concatenated_input(self):
        """Gradient w.r.t. a concatenated (y, x) input comes back as one array per input"""
        arch = MLPArch.build("disc", [5, 4, 1], hidden=Activation.LEAKY_RELU, output=Activation.SIGMOID,
                             input_splits=(2, 3))
        params = init_params(arch, self.rng)
        y, x = self.rng.normal(size=(3, 2)), self.rng.normal(size=(3, 3))
        upstream = self.rng.normal(size=(3, 1))

        _, tape = forward(params, arch, (y, x))
        _, (grad_y, grad_x) = backward(tape, upstream)
        self.assertEqual(grad_y.shape, (3, 2))
        self.assertEqual(grad_x.shape, (3, 3))

        eps = 1e-6
        numeric = np.zeros_like(y)
        for idx in np.ndindex(*y.shape):
            bumped = y.copy()
            bumped[idx] += eps
            plus = np.sum(upstream * forward(params, arch, (bumped, x))[0])
            bumped[idx] -= 2 * eps
            minus = np.sum(upstream * forward(params, arch, (bumped, x))[0])
            numeric[idx] = (plus - minus) / (2 * eps)
        self.assertTrue(grad_close(grad_y, numeric))

    def test_rank_one_input_keeps_rank(self):
        arch = MLPArch.build("net", [2, 3, 2], hidden=Activation.TANH, output=Activation.LINEAR)
        params = init_params(arch, self.rng)
        out, tape = forward(params, arch, np.array([0.5, -0.5]))
        self.assertEqual(out.shape, (2,))
        _, grad = backward(tape, np.ones(2))
        self.assertEqual(grad.shape, (2,))

    def test_replay_is_bit_identical(self):
        arch = MLPArch.build("net", [2, 8, 2], hidden=Activation.TANH, output=Activation.LINEAR,
                             dropout_hidden=True)
        params = init_params(arch, self.rng)
        _, tape = forward(params, arch, self.rng.normal(size=(5, 2)), DropoutSpec(0.5, seed=3))
        self.assertTrue(tape.replay())

    def test_width_mismatch_names_the_layer(self):
        arch = MLPArch.build("net", [3, 4, 1], hidden=Activation.TANH, output=Activation.LINEAR)
        params = init_params(arch, self.rng)
        with self.assertRaises(DimensionError) as ctx:
            forward(params, arch, np.zeros((2, 5)))
        self.assertEqual(ctx.exception.name, "net.0")

    def test_inconsistent_layer_stack_rejected(self):
        from src.autodiff.layers import LayerSpec
        with self.assertRaises(DimensionError):
            MLPArch((LayerSpec("a", 2, 3), LayerSpec("b", 4, 1)))

    def test_non_finite_input_rejected(self):
        arch = MLPArch.build("net", [2, 2], hidden=Activation.TANH, output=Activation.LINEAR)
        params = init_params(arch, self.rng)
        with self.assertRaises(NumericError):
            forward(params, arch, np.array([[np.nan, 0.0]]))

    def test_from_logit_matches_linear_head(self):
        """Skipping the final sigmoid equals differentiating the same net with a linear head"""
        sig = MLPArch.build("disc", [3, 5, 1], hidden=Activation.LEAKY_RELU, output=Activation.SIGMOID)
        lin = MLPArch.build("disc", [3, 5, 1], hidden=Activation.LEAKY_RELU, output=Activation.LINEAR)
        params = init_params(sig, self.rng)
        params["disc.1.bias"][:] = -40.0
        x = self.rng.normal(size=(4, 3))
        upstream = self.rng.normal(size=(4, 1))

        _, tape = forward(params, sig, x)
        grads, grad_x = backward(tape, upstream, from_logit=True)
        _, lin_tape = forward(params, lin, x)
        lin_grads, lin_grad_x = backward(lin_tape, upstream)

        np.testing.assert_allclose(grad_x, lin_grad_x)
        for name in params:
            np.testing.assert_allclose(grads[name], lin_grads[name])
        self.assertGreater(np.max(np.abs(grads["disc.0.weight"])), 0.0)

    def test_from_logit_needs_sigmoid_head(self):
        arch = MLPArch.build("net", [2, 3], hidden=Activation.TANH, output=Activation.LINEAR)
        params = init_params(arch, self.rng)
        _, tape = forward(params, arch, np.zeros((2, 2)))
        with self.assertRaises(ValueError):
            backward(tape, np.ones((2, 3)), from_logit=True)

    def test_upstream_shape_checked(self):
        arch = MLPArch.build("net", [2, 3], hidden=Activation.TANH, output=Activation.LINEAR)
        params = init_params(arch, self.rng)
        _, tape = forward(params, arch, np.zeros((4, 2)))
        with self.assertRaises(DimensionError):
            backward(tape, np.zeros((4, 2)))


class TestDropout(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(11)
        self.arch = MLPArch.build("gen", [2, 32, 2], hidden=Activation.TANH, output=Activation.LINEAR,
                                  dropout_hidden=True)
        self.params = init_params(self.arch, rng)
        self.x = rng.normal(size=(6, 2))

    def test_same_seed_same_output(self):
        a, _ = forward(self.params, self.arch, self.x, DropoutSpec(0.5, seed=42))
        b, _ = forward(self.params, self.arch, self.x, DropoutSpec(0.5, seed=42))
        np.testing.assert_array_equal(a, b)

    def test_different_seed_different_output(self):
        a, _ = forward(self.params, self.arch, self.x, DropoutSpec(0.5, seed=1))
        b, _ = forward(self.params, self.arch, self.x, DropoutSpec(0.5, seed=2))
        self.assertFalse(np.array_equal(a, b))

    def test_zero_rate_records_no_mask(self):
        _, tape = forward(self.params, self.arch, self.x, DropoutSpec(0.0, seed=1))
        self.assertNotIn("dropout", [n.op for n in tape.nodes])

    def test_gradient_flows_only_through_survivors(self):
        _, tape = forward(self.params, self.arch, self.x, DropoutSpec(0.5, seed=9))
        mask = next(n.operand for n in tape.nodes if n.op == "dropout")
        grads, _ = backward(tape, np.ones((6, 2)))
        dropped = np.all(mask == 0, axis=0)
        np.testing.assert_array_equal(grads["gen.1.weight"][dropped], 0.0)

    def test_matches_hand_rolled_forward(self):
        """Fixed seed: tanh(x W0 + b0) * mask / (1 - rate), then the linear head"""
        rate, seed = 0.5, 42
        out, _ = forward(self.params, self.arch, self.x, DropoutSpec(rate, seed=seed))

        hidden = np.tanh(self.x @ self.params["gen.0.weight"] + self.params["gen.0.bias"])
        mask = (np.random.default_rng(seed).random(hidden.shape) >= rate) / (1.0 - rate)
        expected = (hidden * mask) @ self.params["gen.1.weight"] + self.params["gen.1.bias"]
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)

    def test_expectation_matches_no_dropout(self):
        """Averaged over 2e4 independent masks the output is within 2% of the deterministic one"""
        params = self.params.copy()
        params["gen.1.bias"][:] = [1.0, -1.0]
        x = np.repeat(self.x[:1], 20000, axis=0)
        noisy, _ = forward(params, self.arch, x, DropoutSpec(0.5, seed=5))
        exact, _ = forward(params, self.arch, self.x[:1])
        error = np.linalg.norm(noisy.mean(axis=0) - exact[0])
        self.assertLess(error, 0.02 * np.linalg.norm(exact[0]))

    def test_rate_must_be_below_one(self):
        with self.assertRaises(ValueError):
            DropoutSpec(1.0)


class TestAdam(unittest.TestCase):
    def test_first_step_moves_by_learning_rate(self):
        """With zero moments the first bias-corrected step is lr * g / (|g| + eps)"""
        params = ParamStore({"w": np.array([1.0, -2.0, 0.5])})
        grad = np.array([0.3, -0.1, 2.0])
        adam_step(params, {"w": grad}, lr=0.01)
        expected = np.array([1.0, -2.0, 0.5]) - 0.01 * grad / (np.abs(grad) + 1e-8)
        np.testing.assert_allclose(params["w"], expected, rtol=0, atol=1e-15)
        self.assertEqual(params.moments["w"].step, 1)

    def test_two_scalar_steps(self):
        """Gradients 0.5 then 1.0 with lr 0.1, betas (0.5, 0.999), unrolled by hand"""
        params = ParamStore({"w": np.array([1.0])})
        lr, b1, b2, eps = 0.1, 0.5, 0.999, 1e-8
        adam_step(params, {"w": np.array([0.5])}, lr, b1, b2, eps)
        adam_step(params, {"w": np.array([1.0])}, lr, b1, b2, eps)

        m1, v1 = (1 - b1) * 0.5, (1 - b2) * 0.25
        w1 = 1.0 - lr * (m1 / (1 - b1)) / (np.sqrt(v1 / (1 - b2)) + eps)
        m2, v2 = b1 * m1 + (1 - b1) * 1.0, b2 * v1 + (1 - b2) * 1.0
        w2 = w1 - lr * (m2 / (1 - b1 ** 2)) / (np.sqrt(v2 / (1 - b2 ** 2)) + eps)

        self.assertAlmostEqual(float(params["w"][0]), w2, places=14)
        self.assertAlmostEqual(float(params["w"][0]), 0.7946066, places=5)
        self.assertEqual(params.moments["w"].step, 2)

    def test_config_defaults(self):
        cfg = AdamConfig()
        self.assertEqual((cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps), (1e-4, 0.5, 0.999, 1e-8))

    def test_missing_gradient_counts_as_zero(self):
        params = ParamStore({"a": np.ones(2), "b": np.ones(2)})
        AdamConfig().step(params, {"a": np.ones(2)})
        np.testing.assert_array_equal(params["b"], np.ones(2))
        self.assertEqual(params.moments["b"].step, 1)

    def test_non_finite_gradient_leaves_params_untouched(self):
        params = ParamStore({"a": np.ones(2), "b": np.ones(2)})
        with self.assertRaises(NumericError) as ctx:
            adam_step(params, {"a": np.ones(2), "b": np.array([np.inf, 0.0])})
        self.assertEqual(ctx.exception.name, "b")
        np.testing.assert_array_equal(params["a"], np.ones(2))
        self.assertEqual(params.moments["a"].step, 0)

    def test_gradient_shape_checked(self):
        params = ParamStore({"a": np.ones(2)})
        with self.assertRaises(DimensionError):
            adam_step(params, {"a": np.ones(3)})

    def test_copy_is_independent(self):
        params = ParamStore({"a": np.ones(2)})
        clone = params.copy()
        adam_step(params, {"a": np.ones(2)}, lr=0.1)
        np.testing.assert_array_equal(clone["a"], np.ones(2))
        self.assertEqual(clone.moments["a"].step, 0)


class TestWeightFiles(unittest.TestCase):
    def setUp(self):
        arch = MLPArch.build("gen", [2, 4, 6], hidden=Activation.TANH, output=Activation.LINEAR)
        self.params = init_params(arch, np.random.default_rng(0))

    def test_save_and_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_params(self.params, os.path.join(tmp, "generator.adgw"))
            loaded = load_params(path)
        self.assertEqual(loaded.names(), self.params.names())
        self.assertTrue(loaded.allclose(self.params))
        self.assertEqual(loaded.num_parameters(), 2 * 4 + 4 + 4 * 6 + 6)

    def test_bad_magic(self):
        data = b"XXXX" + params_to_bytes(self.params)[4:]
        with self.assertRaises(MagicMismatch):
            params_from_bytes(data)

    def test_bad_version(self):
        data = bytearray(params_to_bytes(self.params))
        data[4] = 9
        with self.assertRaises(VersionMismatch):
            params_from_bytes(bytes(data))

    def test_truncated(self):
        with self.assertRaises(Truncated):
            params_from_bytes(params_to_bytes(self.params)[:-3])

    def test_name_not_utf8(self):
        data = bytearray(params_to_bytes(self.params))
        # first entry name starts after magic, version, count and its length field
        data[16:18] = b"\xff\xfe"
        with self.assertRaises(DecodeError):
            params_from_bytes(bytes(data))


if __name__ == '__main__':
    unittest.main()
