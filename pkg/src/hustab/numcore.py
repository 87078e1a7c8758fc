#!/usr/bin/env python

"""Dense complex matrix substrate: adjoint, SVD, spectral norm, tolerant rank and guarded inversion."""

import functools
import logging
from dataclasses import dataclass, asdict
from typing import Tuple

import numpy as np
import scipy.linalg as scla

logger = logging.getLogger(__name__)

Mat = np.ndarray
"""Every operator is a 2-D complex128 array. Real input is embedded with zero imaginary parts."""


class NonConvergence(np.linalg.LinAlgError):
    """The SVD did not converge with either LAPACK driver."""


class Singular(np.linalg.LinAlgError):
    """An inversion was refused because the condition estimate exceeds ``cond_max``."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every decision in the package.

    :param rank_rel: relative singular-value cutoff, scaled by sigma_max * max(rows, cols)
    :param eq_abs: absolute tolerance for matrix equality, scaled by operand norms via :meth:`eq`
    :param cond_max: largest condition number accepted by :func:`solve_inverse`
    """
    rank_rel: float = 1e-10
    eq_abs: float = 1e-8
    cond_max: float = 1e12

    def __post_init__(self):
        for name in ("rank_rel", "eq_abs", "cond_max"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"Tolerance {name} must be a positive finite number, got {value!r}")
        if self.rank_rel >= 1:
            raise ValueError(f"Tolerance rank_rel must be below 1, got {self.rank_rel!r}")

    def eq(self, *norms: float) -> float:
        """Equality threshold for quantities built from operands of the given norms."""
        return self.eq_abs * max(1.0, *norms) if norms else self.eq_abs

    def todict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Svd:
    """Full singular value decomposition ``a = u @ diag(singular_values) @ vstar``."""
    u: Mat
    singular_values: np.ndarray
    vstar: Mat

    @property
    def shape(self) -> Tuple[int, int]:
        return self.u.shape[0], self.vstar.shape[1]

    def reconstruct(self) -> Mat:
        m, n = self.shape
        sigma = np.zeros((m, n), dtype=complex)
        k = len(self.singular_values)
        sigma[:k, :k] = np.diag(self.singular_values)
        return self.u @ sigma @ self.vstar


# region Function Wrappers
def as_mat(a) -> Mat:
    """Copy ``a`` into a read-only 2-D complex128 array, rejecting NaN and Inf."""
    mat = np.array(a, dtype=complex, copy=True)
    if mat.ndim != 2:
        raise ValueError(f"Expected a 2-D matrix, got an array with {mat.ndim} dimension(s)")
    if not np.all(np.isfinite(mat)):
        raise ValueError("Matrix entries must be finite")
    mat.setflags(write=False)
    return mat


def as_vec(v) -> np.ndarray:
    """Copy ``v`` into a read-only 1-D complex128 array, rejecting NaN and Inf."""
    vec = np.array(v, dtype=complex, copy=True).reshape(-1)
    if not np.all(np.isfinite(vec)):
        raise ValueError("Vector entries must be finite")
    vec.setflags(write=False)
    return vec


def frozen(a: np.ndarray) -> np.ndarray:
    """Mark a freshly computed array read-only so that stored values stay immutable."""
    a.setflags(write=False)
    return a


def _matrix_param(func):
    """Coerce the first argument into a complex :data:`Mat` before calling ``func``."""
    @functools.wraps(func)
    def wrapper_decorator(a, *args, **kwargs):
        return func(as_mat(a), *args, **kwargs)

    return wrapper_decorator

# endregion


def identity(n: int) -> Mat:
    return frozen(np.eye(n, dtype=complex))


def zeros(m: int, n: int) -> Mat:
    return frozen(np.zeros((m, n), dtype=complex))


@_matrix_param
def adjoint(a: Mat) -> Mat:
    """Conjugate transpose."""
    return frozen(a.conj().T.copy())


@_matrix_param
def svd(a: Mat) -> Svd:
    """Full SVD with unitary factors. Tries the divide-and-conquer driver first and
    falls back to the QR-iteration driver, which converges on harder inputs."""
    m, n = a.shape
    if a.size == 0:
        return Svd(identity(m), frozen(np.zeros(0)), identity(n))
    try:
        u, s, vh = scla.svd(a, full_matrices=True, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.debug("gesdd did not converge on a %dx%d matrix, retrying with gesvd", m, n)
        try:
            u, s, vh = scla.svd(a, full_matrices=True, lapack_driver="gesvd")
        except np.linalg.LinAlgError as err:
            raise NonConvergence(f"SVD of a {m}x{n} matrix did not converge") from err
    return Svd(frozen(u), frozen(np.clip(s, 0.0, None)), frozen(vh))


def rank_cutoff(factors: Svd, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Singular values at or below this value count as exact zeros."""
    s = factors.singular_values
    if s.size == 0:
        return 0.0
    return tol.rank_rel * s[0] * max(factors.shape)


def svd_rank(a, tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[Svd, int]:
    """SVD together with the one rank decision every caller must share."""
    factors = svd(a)
    s = factors.singular_values
    if s.size == 0 or s[0] == 0.0:
        return factors, 0
    return factors, int(np.count_nonzero(s > rank_cutoff(factors, tol)))


def rank_tol(a, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Count of singular values above ``rank_rel * sigma_max * max(rows, cols)``."""
    return svd_rank(a, tol)[1]


def spectral_norm(a) -> float:
    """Largest singular value (operator 2-norm)."""
    s = svd(a).singular_values
    return float(s[0]) if s.size else 0.0


def residual(a, b) -> float:
    """Spectral norm of ``a - b``."""
    return spectral_norm(as_mat(a) - as_mat(b))


def is_close(a, b, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Matrix equality within ``eq_abs`` scaled by the operand norms."""
    return residual(a, b) <= tol.eq(spectral_norm(a), spectral_norm(b))


@_matrix_param
def condition_number(a: Mat) -> float:
    """sigma_max / sigma_min of a square matrix (inf when singular)."""
    s = svd(a).singular_values
    if s.size == 0:
        return 1.0
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


@_matrix_param
def solve_inverse(a: Mat, tol: Tolerances = DEFAULT_TOLERANCES) -> Mat:
    """Inverse of a square matrix, refused when its condition number exceeds ``cond_max``.

    :raises Singular: the invertibility hypothesis is numerically violated
    """
    m, n = a.shape
    if m != n:
        raise ValueError(f"solve_inverse needs a square matrix, got {m}x{n}")
    if n == 0:
        return zeros(0, 0)
    cond = condition_number(a)
    if cond > tol.cond_max:
        logger.debug("Refusing inversion: condition %.3e exceeds %.3e", cond, tol.cond_max)
        raise Singular(f"Matrix is numerically singular (condition number {cond:.3e})", cond)
    return frozen(scla.solve(a, np.eye(n, dtype=complex)))
