#!/usr/bin/env python

"""Subspaces of C^n stored as orthonormal bases: kernels, ranges, complements and membership."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as scla

from hustab.numcore import (DEFAULT_TOLERANCES, Mat, Tolerances, as_mat, as_vec, frozen,
                            identity, rank_tol, svd, svd_rank)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^ambient_dim. ``basis`` has orthonormal columns (possibly none).

    Oblique decompositions are still stored with orthonormal bases; the obliqueness
    lives in the projector built from a pair of subspaces, not here.
    """
    ambient_dim: int
    basis: Mat

    def __post_init__(self):
        if not isinstance(self.basis, np.ndarray) or self.basis.flags.writeable:
            object.__setattr__(self, "basis", as_mat(self.basis))
        if self.basis.shape[0] != self.ambient_dim:
            raise ValueError(f"Basis has {self.basis.shape[0]} rows for ambient dimension {self.ambient_dim}")
        if self.basis.shape[1] > self.ambient_dim:
            raise ValueError("A subspace cannot have more basis vectors than its ambient dimension")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def trivial(cls, n: int) -> 'Subspace':
        """The zero subspace {0} of C^n."""
        return cls(n, frozen(np.zeros((n, 0), dtype=complex)))

    @classmethod
    def full(cls, n: int) -> 'Subspace':
        """All of C^n."""
        return cls(n, identity(n))

    @classmethod
    def span(cls, vectors, tol: Tolerances = DEFAULT_TOLERANCES) -> 'Subspace':
        """The span of the columns of ``vectors`` (dependent columns are fine)."""
        return range_space(vectors, tol)

    def projector_matrix(self) -> Mat:
        """Orthogonal projector ``basis @ basis*`` onto this subspace."""
        return frozen(self.basis @ self.basis.conj().T)

    def __str__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _orthonormalize(vectors: np.ndarray) -> Mat:
    """Orthonormal basis for the columns of a full-column-rank matrix."""
    if vectors.shape[1] == 0:
        return frozen(np.zeros((vectors.shape[0], 0), dtype=complex))
    q, _ = scla.qr(vectors, mode="economic")
    return frozen(q)


def null_space(t, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """N(T): right singular vectors of the singular values at or below the rank cutoff."""
    factors, r = svd_rank(t, tol)
    n = factors.vstar.shape[0]
    return Subspace(n, frozen(factors.vstar[r:, :].conj().T.copy()))


def range_space(t, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """R(T): left singular vectors of the retained singular values."""
    factors, r = svd_rank(t, tol)
    m = factors.u.shape[0]
    return Subspace(m, frozen(factors.u[:, :r].copy()))


def orthogonal_complement(s: Subspace) -> Subspace:
    """S^perp, computed from the trailing left singular vectors of the basis."""
    if s.dim == s.ambient_dim:
        return Subspace.trivial(s.ambient_dim)
    if s.dim == 0:
        return Subspace.full(s.ambient_dim)
    factors = svd(s.basis)
    return Subspace(s.ambient_dim, frozen(factors.u[:, s.dim:].copy()))


def random_generator(seed) -> np.random.Generator:
    """PCG64 stream derived from ``seed`` through a SeedSequence (spawnable)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def unit_disc(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex samples uniform in the closed unit disc."""
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=shape))
    angle = rng.uniform(0.0, 2 * np.pi, size=shape)
    return radius * np.exp(1j * angle)


def random_complement(s: Subspace, seed) -> Subspace:
    """A generically oblique complement of ``s``, deterministic per seed.

    Each vector of the orthogonal complement is tilted by a random combination of
    basis vectors of ``s`` (coefficients uniform in the unit disc, scaled by 0.5) and the
    tilted family is re-orthonormalized. Tilting by vectors of ``s`` never leaves the
    sum direct, so the result is always a complement.
    """
    perp = orthogonal_complement(s)
    if perp.dim == 0 or s.dim == 0:
        return perp
    rng = random_generator(seed)
    tilt = 0.5 * unit_disc(rng, (s.dim, perp.dim))
    return Subspace(s.ambient_dim, _orthonormalize(perp.basis + s.basis @ tilt))


def _check_same_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"Subspaces live in different spaces (C^{a.ambient_dim} vs C^{b.ambient_dim})")


def intersection_is_trivial(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff a ∩ b = {0}, i.e. the concatenated bases have full column rank."""
    _check_same_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return True
    if a.dim + b.dim > a.ambient_dim:
        return False
    return rank_tol(np.hstack([a.basis, b.basis]), tol) == a.dim + b.dim


def is_complement(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff C^n = a ⊕ b (direct sum filling the ambient space)."""
    return a.dim + b.dim == a.ambient_dim and intersection_is_trivial(a, b, tol)


def _residual_after_projection(s: Subspace, vectors: np.ndarray) -> np.ndarray:
    """Column norms of the part of ``vectors`` outside ``s``."""
    rest = vectors - s.basis @ (s.basis.conj().T @ vectors)
    return np.linalg.norm(rest, axis=0)


def subspace_equal(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff the dimensions agree and each basis lies in the other subspace."""
    _check_same_ambient(a, b)
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    return bool(np.all(_residual_after_projection(b, a.basis) <= tol.eq_abs)
                and np.all(_residual_after_projection(a, b.basis) <= tol.eq_abs))


def contains(s: Subspace, v, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff ``v`` lies in ``s`` up to ``eq_abs * max(1, ||v||)``."""
    vec = as_vec(v)
    if vec.shape[0] != s.ambient_dim:
        raise ValueError(f"Vector of length {vec.shape[0]} is not in C^{s.ambient_dim}")
    rest = vec - s.basis @ (s.basis.conj().T @ vec)
    return bool(np.linalg.norm(rest) <= tol.eq(np.linalg.norm(vec)))


def contains_subspace(outer: Subspace, inner: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff every basis vector of ``inner`` lies in ``outer``."""
    _check_same_ambient(outer, inner)
    return all(contains(outer, inner.basis[:, j], tol) for j in range(inner.dim))


def image(t, s: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """T(s), the image of a subspace under a matrix."""
    t = as_mat(t)
    if t.shape[1] != s.ambient_dim:
        raise ValueError(f"A {t.shape[0]}x{t.shape[1]} matrix cannot act on C^{s.ambient_dim}")
    if s.dim == 0:
        return Subspace.trivial(t.shape[0])
    return range_space(t @ s.basis, tol)
