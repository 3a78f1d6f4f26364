"""
Toy task tests for asyndgan-desk
Gaussian subsets, conditions and the multimodal construction
"""

import os
import sys
import tempfile
import unittest
import logging

import numpy as np
import pandas as pd

# Add repo root to path for testing
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.exceptions import ConfigError, IndexOutOfRangeError
from src.toytask import (
    DEFAULT_CENTERS, AffineTransform, GaussianSubset, MultimodalSpec, apply_transform, cross_mode_mass,
    coarse_label, default_multimodal_spec, default_subsets, export_csv, heterogeneous_subsets, invert_channel,
    make_multimodal, sample_condition, sample_subset,
)

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class TestGaussianSubsets(unittest.TestCase):
    def test_default_layout(self):
        subsets = default_subsets()
        self.assertEqual(len(subsets), 4)
        self.assertEqual({s.center for s in subsets}, {(10.0, 10.0), (10.0, -10.0), (-10.0, 10.0), (-10.0, -10.0)})
        self.assertTrue(all(s.covariance == (0.5, 0.5) and s.count == 1000 for s in subsets))

    def test_sample_moments(self):
        points = sample_subset(GaussianSubset((10.0, -10.0), count=20000), np.random.default_rng(1))
        self.assertEqual(points.shape, (20000, 2))
        np.testing.assert_allclose(points.mean(axis=0), [10.0, -10.0], atol=0.05)
        np.testing.assert_allclose(points.var(axis=0), [0.5, 0.5], atol=0.03)

    def test_same_seed_same_points(self):
        spec = GaussianSubset((0.0, 0.0), count=5)
        np.testing.assert_array_equal(sample_subset(spec, np.random.default_rng(3)),
                                      sample_subset(spec, np.random.default_rng(3)))

    def test_invalid_covariance(self):
        with self.assertRaises(ConfigError):
            GaussianSubset((0.0, 0.0), covariance=(0.5, 0.0))

    def test_heterogeneous_sizes(self):
        self.assertEqual([s.count for s in heterogeneous_subsets()], [880, 1020, 200])

    def test_modes_are_practically_disjoint(self):
        """Radius-3 discs: another mode's mass inside is below 1e-12"""
        self.assertLess(cross_mode_mass(default_subsets(), 3.0), 1e-12)
        self.assertEqual(cross_mode_mass(default_subsets(), 25.0), 1.0)

    def test_condition_noise(self):
        x = sample_condition(np.random.default_rng(0), 50000)
        np.testing.assert_allclose(x.mean(axis=0), [0.0, 0.0], atol=0.02)
        np.testing.assert_allclose(x.var(axis=0), [0.5, 0.5], atol=0.02)
        self.assertEqual(sample_condition(np.random.default_rng(0), 0).shape, (0, 2))


class TestMultimodal(unittest.TestCase):
    def setUp(self):
        self.spec = default_multimodal_spec()
        self.base = sample_subset(GaussianSubset(DEFAULT_CENTERS[0], count=100), np.random.default_rng(2))

    def test_channels(self):
        channels = make_multimodal(self.base, self.spec)
        self.assertEqual(channels.shape, (100, 3, 2))
        np.testing.assert_array_equal(channels[:, 0, :], self.base)
        np.testing.assert_allclose(channels[:, 1, :], 2.0 * self.base + 1.0)
        np.testing.assert_allclose(channels[:, 2, :], apply_transform(self.base, self.spec, 3))

    def test_inverse_recovers_base(self):
        for k in (1, 2, 3):
            channel = apply_transform(self.base, self.spec, k)
            np.testing.assert_allclose(invert_channel(channel, self.spec, k), self.base, atol=1e-12)

    def test_modality_range(self):
        with self.assertRaises(IndexOutOfRangeError):
            apply_transform(self.base, self.spec, 4)

    def test_singular_transform_rejected(self):
        with self.assertRaises(ConfigError):
            MultimodalSpec((AffineTransform(((1.0, 2.0), (2.0, 4.0))),))

    def test_from_dicts(self):
        spec = MultimodalSpec.from_dicts([{"matrix": [[0.0, 1.0], [1.0, 0.0]], "offset": [3.0, 0.0]}])
        np.testing.assert_allclose(apply_transform([[1.0, 2.0]], spec, 1), [[5.0, 1.0]])

    def test_coarse_label(self):
        labels = coarse_label(self.base, 0.25)
        np.testing.assert_allclose(labels / 0.25, np.round(labels / 0.25), atol=1e-9)
        self.assertLessEqual(np.max(np.abs(labels - self.base)), 0.125 + 1e-12)
        np.testing.assert_array_equal(coarse_label([[1.1, -0.4]], 0.5), [[1.0, -0.5]])
        with self.assertRaises(ConfigError):
            coarse_label(self.base, 0.0)


class TestExport(unittest.TestCase):
    def test_csv_columns(self):
        x = np.zeros((3, 2))
        y = np.ones((3, 2, 2))
        with tempfile.TemporaryDirectory() as tmp:
            path = export_csv(os.path.join(tmp, "toy.csv"), x, y, modalities=[1, 3])
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["x0", "x1", "y1_0", "y1_1", "y3_0", "y3_1"])
        self.assertEqual(len(frame), 3)


if __name__ == '__main__':
    unittest.main()
