#!/usr/bin/env python

"""Seeded generators for random test instances: matrices of prescribed rank and
perturbation directions with a prescribed effect on the rank."""

import numpy as np
import scipy.linalg as scla

from hustab.numcore import Mat, frozen, spectral_norm
from hustab.subspace import Subspace, null_space, orthogonal_complement, range_space


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_isometry(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """n x k matrix with orthonormal columns (Haar-like via QR of a Gaussian)."""
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    q, r = scla.qr(complex_gaussian(rng, (n, k)), mode="economic")
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = complex_gaussian(rng, n)
    return v / np.linalg.norm(v)


def random_matrix(rng: np.random.Generator, m: int, n: int, rank: int, spread: float = 10.0,
                  scale: float = 1.0) -> Mat:
    """m x n complex matrix of exactly ``rank`` with singular values log-uniform in
    [scale / spread, scale]."""
    rank = min(rank, m, n)
    sigma = scale * np.exp(-rng.uniform(0.0, np.log(spread), size=rank)) if rank else np.zeros(0)
    u = random_isometry(rng, m, rank)
    v = random_isometry(rng, n, rank)
    return frozen((u * sigma) @ v.conj().T)


def random_shape(rng: np.random.Generator, max_rows: int = 16, max_cols: int = 12):
    """(m, n, rank) with the rank drawn over full, deficient and zero profiles."""
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(1, max_cols + 1))
    profile = rng.uniform()
    if profile < 0.1:
        rank = 0
    elif profile < 0.4:
        rank = min(m, n)
    else:
        rank = int(rng.integers(1, min(m, n) + 1))
    return m, n, rank


def _scaled_to(delta: np.ndarray, norm: float) -> Mat:
    current = spectral_norm(delta)
    return frozen(delta * (norm / current)) if current > 0 else frozen(np.asarray(delta, dtype=complex))


def rank_preserving_direction(rng: np.random.Generator, t: Mat, size: float) -> Mat:
    """delta T = E1 T + T E2 + E1 T E2, so that T + delta T = (I + E1) T (I + E2).

    ``size`` bounds ||E1|| and ||E2||; both factors stay invertible while size < 1.
    """
    m, n = t.shape
    e1 = size * _scaled_to(complex_gaussian(rng, (m, m)), 1.0)
    e2 = size * _scaled_to(complex_gaussian(rng, (n, n)), 1.0)
    return frozen(e1 @ t + t @ e2 + e1 @ t @ e2)


def range_preserving_direction(rng: np.random.Generator, t: Mat, norm: float) -> Mat:
    """A direction with R(delta T) contained in R(T)."""
    rng_basis = range_space(t).basis
    delta = rng_basis @ complex_gaussian(rng, (rng_basis.shape[1], t.shape[1]))
    return _scaled_to(delta, norm)


def null_preserving_direction(rng: np.random.Generator, t: Mat, norm: float) -> Mat:
    """A direction with N(T) contained in N(delta T)."""
    support = orthogonal_complement(null_space(t)).basis
    delta = complex_gaussian(rng, (t.shape[0], support.shape[1])) @ support.conj().T
    return _scaled_to(delta, norm)


def rank_jumping_direction(rng: np.random.Generator, t: Mat, norm: float) -> Mat:
    """A direction mapping N(T) into R(T)^perp, so the rank of T + s delta T exceeds
    rank(T) for every s > 0. Zero when T has no room to gain rank."""
    kernel = null_space(t).basis
    cokernel = orthogonal_complement(range_space(t)).basis
    k = min(kernel.shape[1], cokernel.shape[1])
    if k == 0:
        return frozen(np.zeros(t.shape, dtype=complex))
    inner = random_isometry(rng, cokernel.shape[1], k) @ random_isometry(rng, kernel.shape[1], k).conj().T
    return _scaled_to(cokernel @ inner @ kernel.conj().T, norm)


def can_jump_rank(t: Mat) -> bool:
    """True when rank(T) < min(rows, cols)."""
    return null_space(t).dim > 0 and orthogonal_complement(range_space(t)).dim > 0


def concentrated_samples(rng: np.random.Generator, direction: np.ndarray, count: int,
                         widest: float = 1e3, narrowest: float = 1e-6) -> np.ndarray:
    """``count`` unit vectors (as columns): Gaussian noise around ``direction`` with
    log-spaced spread. At the widest spread the samples are close to uniform on the sphere."""
    n = direction.shape[0]
    widths = np.logspace(np.log10(widest), np.log10(narrowest), count)
    noise = complex_gaussian(rng, (n, count)) / np.sqrt(n)
    samples = direction[:, None] + noise * widths
    return samples / np.linalg.norm(samples, axis=0)


def subspace_of(rng: np.random.Generator, n: int, k: int) -> Subspace:
    """A random k-dimensional subspace of C^n."""
    return Subspace(n, frozen(random_isometry(rng, n, k)))
