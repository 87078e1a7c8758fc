import unittest
from unittest import mock

import numpy as np
import numpy.testing as npt
from hypothesis import given, settings, strategies as st

from hustab.private.sampling import random_matrix, random_shape
from hustab.stability import (Infeasible, approximate_kernel_solve, epsilon_approximate_solve, reduced_min_modulus,
                              reduced_min_modulus_sampled, stability_constant, stability_witness)
from hustab.subspace import contains, null_space, random_generator


class TestStabilityConstant(unittest.TestCase):
    """Test gamma(T) and K_T"""
    def test_diagonal(self):
        t = np.diag([3.0, 2.0, 0.0])
        self.assertAlmostEqual(reduced_min_modulus(t), 2.0)
        report = stability_constant(t)
        self.assertAlmostEqual(report.gamma, 2.0)
        self.assertAlmostEqual(report.k_t, 0.5)
        self.assertAlmostEqual(report.product, 1.0)
        self.assertTrue(report.range_checked)
        self.assertFalse(report.witness_checked)

    def test_identity(self):
        report = stability_constant(np.eye(3))
        self.assertAlmostEqual(report.gamma, 1.0)
        self.assertAlmostEqual(report.k_t, 1.0)

    def test_zero_operator(self):
        report = stability_constant(np.zeros((2, 3)))
        self.assertEqual(report.gamma, float("inf"))
        self.assertEqual(report.k_t, 0.0)
        self.assertIsNone(report.product)
        self.assertTrue(report.range_checked)

    def test_appended_zero_row(self):
        # the codomain grows, N(T) and gamma do not change
        t = np.array([[1.0, 2.0], [0.0, 1.0]])
        padded = np.vstack([t, np.zeros((1, 2))])
        self.assertAlmostEqual(reduced_min_modulus(padded), reduced_min_modulus(t))
        self.assertAlmostEqual(stability_constant(padded).k_t, stability_constant(t).k_t)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_zero_rows_keep_gamma(self, seed):
        rng = random_generator(seed)
        m, n, rank = random_shape(rng)
        t = random_matrix(rng, m, n, max(rank, 1))
        padded = np.vstack([t, np.zeros((int(rng.integers(1, 4)), n))])
        self.assertAlmostEqual(reduced_min_modulus(padded) / reduced_min_modulus(t), 1.0, places=10)

    def test_product_drift_raises(self):
        with mock.patch("hustab.stability.reduced_min_modulus", return_value=3.0):
            with self.assertRaises(ArithmeticError):
                stability_constant(np.diag([3.0, 2.0, 0.0]))

    def test_sampled_modulus(self):
        t = np.diag([3.0, 2.0, 0.0])
        estimate = reduced_min_modulus_sampled(t, samples=10000, seed=1)
        self.assertGreaterEqual(estimate, 2.0 - 1e-12)
        self.assertLess(estimate, 2.1)
        self.assertEqual(reduced_min_modulus_sampled(np.zeros((2, 2))), float("inf"))

    def test_witness_sampling(self):
        report = stability_constant(np.diag([3.0, 2.0, 0.0]), samples=500, seed=3)
        self.assertTrue(report.witness_checked)
        self.assertLessEqual(report.max_witness_ratio, 0.5 + 1e-8)
        self.assertAlmostEqual(report.max_witness_ratio, 0.5, places=5)

    def test_uniform_share(self):
        t = np.diag([3.0, 2.0, 0.0])
        report = stability_constant(t, samples=501, seed=4)
        self.assertGreater(report.max_uniform_ratio, 0.0)
        self.assertLessEqual(report.max_uniform_ratio, report.max_witness_ratio)
        self.assertLessEqual(report.max_witness_ratio, report.k_t + 1e-8)
        self.assertEqual(stability_constant(t).max_uniform_ratio, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_product_is_one(self, seed):
        rng = random_generator(seed)
        m, n, rank = random_shape(rng)
        report = stability_constant(random_matrix(rng, m, n, rank), samples=50, seed=seed)
        if rank == 0:
            self.assertIsNone(report.product)
        else:
            self.assertLess(abs(report.product - 1.0), 1e-8)
            self.assertLessEqual(report.max_witness_ratio, report.k_t * (1 + 1e-8))
        self.assertTrue(report.range_checked)


class TestWitness(unittest.TestCase):
    """Test the constructive witness x0 = (I - T-dagger T) x"""
    def test_attains_constant(self):
        x0, ratio = stability_witness(np.diag([2.0, 0.0]), [1.0, 1.0])
        npt.assert_allclose(x0, [0.0, 1.0], atol=1e-14)
        self.assertAlmostEqual(ratio, 0.5)

    def test_kernel_vector(self):
        x0, ratio = stability_witness(np.diag([2.0, 0.0]), [0.0, 3.0])
        npt.assert_allclose(x0, [0.0, 3.0])
        self.assertEqual(ratio, 0.0)

    def test_identity(self):
        x0, ratio = stability_witness(np.eye(3), [1.0, -2.0, 0.5j])
        npt.assert_allclose(x0, np.zeros(3), atol=1e-14)
        self.assertAlmostEqual(ratio, 1.0)

    def test_domain_mismatch(self):
        with self.assertRaises(ValueError):
            stability_witness(np.eye(3), [1.0, 0.0])


class TestApproximateSolutions(unittest.TestCase):
    """Test exact solutions recovered from approximate ones"""
    def setUp(self):
        self.t = np.diag([2.0, 0.0])

    def test_hand_example(self):
        x0 = epsilon_approximate_solve(self.t, [2.0, 0.0], [1.4, 0.0], 0.8)
        npt.assert_allclose(x0, [1.0, 0.0], atol=1e-14)
        self.assertLessEqual(np.linalg.norm(np.array([1.4, 0.0]) - x0), 0.5 * 0.8)

    def test_exact_solution_unchanged(self):
        x0 = epsilon_approximate_solve(self.t, [2.0, 0.0], [1.0, 5.0], 1e-3)
        npt.assert_allclose(x0, [1.0, 5.0], atol=1e-14)

    def test_infeasible(self):
        with self.assertRaises(Infeasible):
            epsilon_approximate_solve(self.t, [0.0, 1.0], [0.0, 0.0], 1.0)
        with self.assertRaises(Infeasible):
            epsilon_approximate_solve(self.t, [2.0, 0.0], [3.0, 0.0], 0.5)
        with self.assertRaises(ValueError):
            epsilon_approximate_solve(self.t, [2.0, 0.0], [1.0, 0.0], 0.0)

    def test_kernel_solve(self):
        x0 = approximate_kernel_solve(self.t, [0.1, 1.0], 0.5)
        npt.assert_allclose(x0, [0.0, 1.0], atol=1e-14)
        self.assertTrue(contains(null_space(self.t), x0))


if __name__ == "__main__":
    unittest.main()
