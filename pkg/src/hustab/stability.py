#!/usr/bin/env python

"""Reduced minimum modulus, Hyers-Ulam stability constant and constructive stability witnesses.

For a linear operator T the stability property reads: every x has some x0 in N(T) with
||x - x0|| <= K ||Tx||. The smallest such K is K_T = ||T-dagger|| = 1 / gamma(T), and
x0 = (I - T-dagger T) x attains it.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from hustab.numcore import DEFAULT_TOLERANCES, Mat, Tolerances, as_mat, as_vec, frozen, spectral_norm, svd_rank
from hustab.pinv import pinv_oracle
from hustab.private.sampling import complex_gaussian, concentrated_samples
from hustab.subspace import (contains, null_space, orthogonal_complement, random_generator, range_space,
                             subspace_equal)

logger = logging.getLogger(__name__)


class Infeasible(ValueError):
    """The hypotheses of the approximate-solution property are not met."""


class Witness(NamedTuple):
    x0: np.ndarray
    ratio: float


@dataclass(frozen=True)
class StabilityReport:
    """gamma(T), K_T and T-dagger, with an optional sampled witness check.

    ``max_witness_ratio`` is the largest ||x - x0|| / ||Tx|| seen over the sampled x;
    it never exceeds ``k_t`` and approaches it near the minimal singular direction.
    ``max_uniform_ratio`` is the same maximum over the uniformly drawn share alone.
    """
    gamma: float
    k_t: float
    t_dagger: Mat
    witness_checked: bool
    max_witness_ratio: float
    range_checked: bool
    max_uniform_ratio: float = 0.0

    @property
    def product(self):
        """K_T * gamma(T), or None for the zero operator where it is undefined."""
        if np.isinf(self.gamma) or self.k_t == 0:
            return None
        return self.k_t * self.gamma


def reduced_min_modulus(t, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Smallest singular value above the rank cutoff; +inf for the zero operator."""
    factors, r = svd_rank(t, tol)
    if r == 0:
        return float("inf")
    return float(factors.singular_values[r - 1])


def reduced_min_modulus_sampled(t, samples: int = 10000, seed=0, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Upper estimate of gamma(T) = inf ||Tx|| / d(x, N(T)) over random x.

    d(x, N(T)) is the norm of the component of x orthogonal to N(T). Converges to
    :func:`reduced_min_modulus` from above as the sample grows.
    """
    t = as_mat(t)
    support = orthogonal_complement(null_space(t, tol))
    if support.dim == 0:
        return float("inf")
    rng = random_generator(seed)
    x = support.basis @ complex_gaussian(rng, (support.dim, samples))
    ratios = np.linalg.norm(t @ x, axis=0) / np.linalg.norm(x, axis=0)
    return float(ratios.min())


def stability_witness(t, x, tol: Tolerances = DEFAULT_TOLERANCES, t_dagger=None) -> Witness:
    """x0 = (I - T-dagger T) x, a point of N(T), and the ratio ||x - x0|| / ||Tx||.

    The ratio is 0 when Tx vanishes (up to the rank cutoff).
    """
    t, vec = as_mat(t), as_vec(x)
    if vec.shape[0] != t.shape[1]:
        raise ValueError(f"Vector of length {vec.shape[0]} is not in the domain C^{t.shape[1]}")
    if t_dagger is None:
        t_dagger = pinv_oracle(t, tol).t_dagger
    tx = t @ vec
    x0 = frozen(vec - t_dagger @ tx)
    image_norm = np.linalg.norm(tx)
    if image_norm <= tol.rank_rel * spectral_norm(t) * np.linalg.norm(vec):
        return Witness(x0, 0.0)
    return Witness(x0, float(np.linalg.norm(vec - x0) / image_norm))


def _witness_samples(t: Mat, count: int, seed, tol: Tolerances) -> Tuple[np.ndarray, np.ndarray]:
    """Unit columns in two shares: uniform on the sphere, and concentrated around the
    right singular vector of the smallest retained singular value."""
    factors, r = svd_rank(t, tol)
    rng = random_generator(seed)
    n = t.shape[1]
    uniform = complex_gaussian(rng, (n, count - count // 2))
    uniform = uniform / np.linalg.norm(uniform, axis=0)
    if r == 0:
        return uniform, complex_gaussian(rng, (n, count // 2))
    return uniform, concentrated_samples(rng, factors.vstar[r - 1, :].conj(), count // 2)


def stability_constant(t, tol: Tolerances = DEFAULT_TOLERANCES, samples: int = 0, seed=0) -> StabilityReport:
    """K_T = ||T-dagger|| = 1 / gamma(T).

    With ``samples > 0``, also runs :func:`stability_witness` over that many sampled x,
    half of them uniform and half concentrated near the extremal direction, checking
    every x0 lies in N(T) and recording the largest ratio of each share.

    :raises ArithmeticError: K_T * gamma(T) is not 1 within ``eq_abs``, or a witness leaves N(T)
    """
    t = as_mat(t)
    oracle = pinv_oracle(t, tol)
    gamma = reduced_min_modulus(t, tol)
    k_t = spectral_norm(oracle.t_dagger)
    if np.isfinite(gamma) and abs(k_t * gamma - 1) > tol.eq_abs:
        raise ArithmeticError(f"K_T * gamma(T) = {k_t * gamma:.17g} drifts from 1")

    kernel, rng = null_space(t, tol), range_space(t, tol)
    range_checked = (subspace_equal(null_space(oracle.t_dagger, tol), orthogonal_complement(rng), tol)
                     and subspace_equal(range_space(oracle.t_dagger, tol), orthogonal_complement(kernel), tol))

    def largest_ratio(columns: np.ndarray) -> float:
        largest = 0.0
        for x in columns.T:
            witness = stability_witness(t, x, tol, t_dagger=oracle.t_dagger)
            if not contains(kernel, witness.x0, tol):
                raise ArithmeticError("Witness does not lie in N(T)")
            largest = max(largest, witness.ratio)
        return largest

    uniform_ratio = concentrated_ratio = 0.0
    if samples > 0:
        uniform, concentrated = _witness_samples(t, samples, seed, tol)
        uniform_ratio, concentrated_ratio = largest_ratio(uniform), largest_ratio(concentrated)
    max_ratio = max(uniform_ratio, concentrated_ratio)
    logger.debug("gamma = %.6e, K_T = %.6e, max witness ratio = %.6e (uniform %.6e)",
                 gamma, k_t, max_ratio, uniform_ratio)
    return StabilityReport(gamma, k_t, oracle.t_dagger, samples > 0, max_ratio, range_checked, uniform_ratio)


def epsilon_approximate_solve(t, y, x, eps: float, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Exact solution x0 of Tx0 = y within K_T * eps of an eps-approximate solution x.

    x0 = x - T-dagger (Tx - y).

    :raises Infeasible: y is not in R(T) or ||Tx - y|| > eps
    """
    t, target, vec = as_mat(t), as_vec(y), as_vec(x)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not contains(range_space(t, tol), target, tol):
        raise Infeasible("y is not in the range of T")
    defect = t @ vec - target
    if np.linalg.norm(defect) > eps + tol.eq_abs * eps:
        raise Infeasible(f"||Tx - y|| = {np.linalg.norm(defect):.6e} exceeds eps = {eps:.6e}")
    return frozen(vec - pinv_oracle(t, tol).t_dagger @ defect)


def approximate_kernel_solve(t, x, eps: float, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """The homogeneous case y = 0: x0 in N(T) with ||x - x0|| <= K_T * eps whenever ||Tx|| <= eps."""
    t = as_mat(t)
    return epsilon_approximate_solve(t, np.zeros(t.shape[0]), x, eps, tol)
