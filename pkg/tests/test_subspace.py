import unittest

import numpy as np
import numpy.testing as npt
from hypothesis import given, settings, strategies as st

from hustab.private.sampling import complex_gaussian, random_matrix, random_shape, subspace_of
from hustab.subspace import (Subspace, contains, contains_subspace, image, intersection_is_trivial, is_complement,
                             null_space, orthogonal_complement, random_complement, random_generator, range_space,
                             subspace_equal)


def e(n, *indices):
    """Span of the given standard basis vectors of C^n."""
    return Subspace(n, np.eye(n, dtype=complex)[:, list(indices)])


class TestSubspaces(unittest.TestCase):
    """Test kernels, ranges and complements"""
    def test_null_and_range(self):
        t = np.diag([3.0, 2.0, 0.0])
        self.assertTrue(subspace_equal(null_space(t), e(3, 2)))
        self.assertTrue(subspace_equal(range_space(t), e(3, 0, 1)))
        self.assertEqual(null_space(np.eye(4)).dim, 0)
        self.assertEqual(range_space(np.zeros((2, 3))).dim, 0)
        self.assertEqual(null_space(np.zeros((2, 3))).dim, 3)

    def test_orthogonal_complement(self):
        self.assertTrue(subspace_equal(orthogonal_complement(e(3, 0)), e(3, 1, 2)))
        self.assertEqual(orthogonal_complement(Subspace.full(3)).dim, 0)
        self.assertEqual(orthogonal_complement(Subspace.trivial(3)).dim, 3)

    def test_basis_validation(self):
        with self.assertRaises(ValueError):
            Subspace(3, np.eye(2))
        s = Subspace(2, [[1.0], [0.0]])
        self.assertFalse(s.basis.flags.writeable)

    def test_span(self):
        s = Subspace.span(np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]))
        self.assertEqual(s.dim, 1)
        self.assertTrue(contains(s, [1.0, 1.0, 0.0]))

    def test_intersection(self):
        self.assertTrue(intersection_is_trivial(e(3, 0), e(3, 1)))
        self.assertFalse(intersection_is_trivial(e(3, 0, 1), Subspace.span(np.array([[1.0], [1.0], [0.0]]))))
        self.assertFalse(intersection_is_trivial(e(2, 0, 1), e(2, 1)))
        self.assertTrue(intersection_is_trivial(Subspace.trivial(2), e(2, 0, 1)))

    def test_is_complement(self):
        oblique = Subspace.span(np.array([[1.0], [1.0]]))
        self.assertTrue(is_complement(e(2, 0), oblique))
        self.assertFalse(is_complement(e(2, 0), e(2, 0)))
        self.assertFalse(is_complement(e(3, 0), e(3, 1)))

    def test_contains(self):
        s = e(3, 0, 1)
        self.assertTrue(contains(s, [1.0, 2j, 0.0]))
        self.assertFalse(contains(s, [0.0, 0.0, 1e-3]))
        self.assertTrue(contains(Subspace.trivial(2), [0.0, 0.0]))
        self.assertTrue(contains_subspace(s, e(3, 1)))
        self.assertFalse(contains_subspace(e(3, 1), s))
        with self.assertRaises(ValueError):
            contains(s, [1.0, 0.0])

    def test_different_ambient(self):
        with self.assertRaises(ValueError):
            subspace_equal(e(2, 0), e(3, 0))

    def test_image(self):
        t = np.array([[0.0, 1.0], [0.0, 0.0]])
        self.assertTrue(subspace_equal(image(t, e(2, 1)), e(2, 0)))
        self.assertEqual(image(t, e(2, 0)).dim, 0)
        with self.assertRaises(ValueError):
            image(t, e(3, 0))


class TestRandomComplement(unittest.TestCase):
    """Test seeded oblique complements"""
    def test_deterministic(self):
        s = e(4, 0, 1)
        first, second = random_complement(s, 7), random_complement(s, 7)
        npt.assert_array_equal(first.basis, second.basis)
        self.assertFalse(subspace_equal(first, random_complement(s, 8)))

    def test_edge_dims(self):
        self.assertEqual(random_complement(Subspace.trivial(3), 0).dim, 3)
        self.assertEqual(random_complement(Subspace.full(3), 0).dim, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_always_complementary(self, seed):
        rng = random_generator(seed)
        n = int(rng.integers(1, 10))
        s = subspace_of(rng, n, int(rng.integers(0, n + 1)))
        c = random_complement(s, seed)
        self.assertTrue(is_complement(s, c))
        self.assertLess(np.abs(c.basis.conj().T @ c.basis - np.eye(c.dim)).max(initial=0.0), 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_rank_nullity(self, seed):
        rng = random_generator(seed)
        m, n, rank = random_shape(rng)
        t = random_matrix(rng, m, n, rank)
        self.assertEqual(null_space(t).dim + range_space(t).dim, n)
        self.assertLess(np.abs(t @ null_space(t).basis).max(initial=0.0), 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_double_complement(self, seed):
        rng = random_generator(seed)
        n = int(rng.integers(1, 10))
        s = subspace_of(rng, n, int(rng.integers(0, n + 1)))
        self.assertTrue(subspace_equal(orthogonal_complement(orthogonal_complement(s)), s))
        self.assertTrue(is_complement(s, orthogonal_complement(s)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_image_in_range(self, seed):
        rng = random_generator(seed)
        m, n, rank = random_shape(rng)
        t = random_matrix(rng, m, n, rank)
        x = complex_gaussian(rng, n)
        self.assertTrue(contains(range_space(t), t @ x))


if __name__ == "__main__":
    unittest.main()
