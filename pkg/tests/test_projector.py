import unittest

import numpy as np
import numpy.testing as npt
from hypothesis import given, settings, strategies as st

from hustab.private.sampling import subspace_of
from hustab.projector import (NotComplementary, oblique_projector, orthogonal_projector, orthogonalization_gaps,
                              orthogonalize)
from hustab.subspace import Subspace, random_complement, random_generator


class TestProjectors(unittest.TestCase):
    """Test oblique and orthogonal projectors"""
    def setUp(self):
        self.x_axis = Subspace(2, [[1.0], [0.0]])
        self.diagonal = Subspace.span(np.array([[1.0], [1.0]]))

    def test_oblique(self):
        p = oblique_projector(self.x_axis, self.diagonal)
        # (a, b) = (a - b) e1 + b (1, 1)
        npt.assert_allclose(p.matrix, [[1.0, -1.0], [0.0, 0.0]], atol=1e-14)
        self.assertAlmostEqual(p.norm, np.sqrt(2))
        self.assertLess(p.idempotence_residual(), 1e-14)
        self.assertFalse(p.is_orthogonal())

    def test_orthogonal(self):
        p = orthogonal_projector(self.x_axis)
        npt.assert_allclose(p.matrix, [[1.0, 0.0], [0.0, 0.0]])
        self.assertTrue(p.is_orthogonal())
        self.assertAlmostEqual(p.norm, 1.0)

    def test_not_complementary(self):
        with self.assertRaises(NotComplementary):
            oblique_projector(self.x_axis, self.x_axis)
        with self.assertRaises(NotComplementary):
            oblique_projector(Subspace.trivial(2), self.x_axis)
        self.assertTrue(issubclass(NotComplementary, ValueError))

    def test_extreme_dims(self):
        zero = oblique_projector(Subspace.trivial(3), Subspace.full(3))
        npt.assert_array_equal(zero.matrix, np.zeros((3, 3)))
        full = oblique_projector(Subspace.full(3), Subspace.trivial(3))
        npt.assert_array_equal(full.matrix, np.eye(3))

    def test_orthogonalize(self):
        p = orthogonalize(oblique_projector(self.x_axis, self.diagonal))
        npt.assert_allclose(p.matrix, [[1.0, 0.0], [0.0, 0.0]], atol=1e-14)
        self.assertTrue(p.is_orthogonal())

    def test_orthogonalize_orthogonal_is_identity_map(self):
        p = orthogonal_projector(self.diagonal)
        npt.assert_allclose(orthogonalize(p).matrix, p.matrix, atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_orthogonalize_random(self, seed):
        rng = random_generator(seed)
        n = int(rng.integers(1, 10))
        s = subspace_of(rng, n, int(rng.integers(0, n + 1)))
        p = oblique_projector(s, random_complement(s, seed))
        self.assertLess(p.idempotence_residual(), 1e-10)
        npt.assert_allclose(orthogonalize(p).matrix, orthogonal_projector(s).matrix, atol=1e-8)
        form_gap, commutation_gap = orthogonalization_gaps(p)
        self.assertLess(form_gap, 1e-10)
        self.assertLess(commutation_gap, 1e-10)


if __name__ == "__main__":
    unittest.main()
