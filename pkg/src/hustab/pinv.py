#!/usr/bin/env python

"""Moore-Penrose inverses from an arbitrary generalized inverse, checked against an SVD oracle."""

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from hustab.geninv import GenInverse
from hustab.numcore import (DEFAULT_TOLERANCES, Mat, Tolerances, adjoint, as_mat, frozen, identity,
                            residual, solve_inverse, spectral_norm, svd_rank)
from hustab.projector import orthogonalize

logger = logging.getLogger(__name__)


class Method(enum.Enum):
    FORMULA21 = "formula21"
    """(I - P_N^perp) T+ P_R^perp with both projectors orthogonalized."""
    FORMULA23 = "formula23"
    """The closed form in T+T and TT+ with the two bracket inverses."""
    SVD_ORACLE = "svd"
    """V Sigma^+ U*, independent of any generalized inverse."""


def penrose_residuals(t, s) -> Tuple[float, float, float, float]:
    """||TST - T||, ||STS - S||, ||(TS)* - TS||, ||(ST)* - ST||."""
    t, s = as_mat(t), as_mat(s)
    ts, st = t @ s, s @ t
    return (residual(ts @ t, t),
            residual(st @ s, s),
            residual(adjoint(ts), ts),
            residual(adjoint(st), st))


@dataclass(frozen=True)
class MoorePenrose:
    t: Mat
    t_dagger: Mat
    method: Method
    residuals: Tuple[float, float, float, float]

    def is_valid(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """All four Penrose residuals within tolerance."""
        nt, nd = spectral_norm(self.t), spectral_norm(self.t_dagger)
        bound = tol.eq(nt * nd * max(nt, nd))
        return all(r <= bound for r in self.residuals)

    def distance(self, other: 'MoorePenrose') -> float:
        return residual(self.t_dagger, other.t_dagger)


def _certified(t: Mat, t_dagger: Mat, method: Method) -> MoorePenrose:
    t_dagger = frozen(np.asarray(t_dagger))
    return MoorePenrose(t, t_dagger, method, penrose_residuals(t, t_dagger))


def pinv_oracle(t, tol: Tolerances = DEFAULT_TOLERANCES) -> MoorePenrose:
    """V Sigma^+ U*, reciprocating only the singular values above the rank cutoff."""
    t = as_mat(t)
    factors, r = svd_rank(t, tol)
    v = factors.vstar[:r, :].conj().T
    u = factors.u[:, :r]
    t_dagger = (v / factors.singular_values[:r]) @ u.conj().T
    return _certified(t, t_dagger, Method.SVD_ORACLE)


def pinv_from_geninv_21(g: GenInverse, tol: Tolerances = DEFAULT_TOLERANCES) -> MoorePenrose:
    """T-dagger = [I - P_N^perp] T+ P_R^perp, where both orthogonal projectors come from
    orthogonalizing the oblique projectors carried by ``g``."""
    p_null = orthogonalize(g.p, tol).matrix
    p_range = orthogonalize(g.q, tol).matrix
    n = g.t.shape[1]
    return _certified(g.t, (identity(n) - p_null) @ g.t_plus @ p_range, Method.FORMULA21)


def _bracket_inverse(e: Mat, tol: Tolerances) -> Mat:
    """{I - [E - E*]^2}^-1 for an idempotent E."""
    skew = e - adjoint(e)
    return solve_inverse(identity(e.shape[0]) - skew @ skew, tol)


def three_factor(e: Mat, s: Mat, f: Mat, tol: Tolerances = DEFAULT_TOLERANCES) -> Mat:
    """{I - [E - E*]^2}^-1 E* S F* {I - [F - F*]^2}^-1.

    With E = ST and F = TS for a generalized inverse S of T this is the Moore-Penrose
    inverse of T. The double adjoint E** of the infinite-dimensional statement is E
    itself here.

    :raises Singular: a bracket inversion exceeds ``cond_max``
    """
    return frozen(_bracket_inverse(e, tol) @ adjoint(e) @ s @ adjoint(f) @ _bracket_inverse(f, tol))


def moore_penrose_from(t, s, tol: Tolerances = DEFAULT_TOLERANCES) -> Mat:
    """Moore-Penrose inverse of ``t`` from any generalized inverse ``s`` of it."""
    t, s = as_mat(t), as_mat(s)
    return three_factor(s @ t, s, t @ s, tol)


def pinv_from_geninv_23(g: GenInverse, tol: Tolerances = DEFAULT_TOLERANCES) -> MoorePenrose:
    """T-dagger = {I-[T+T - (T+T)*]^2}^-1 (T+T)* T+ (TT+)* {I-[TT+ - (TT+)*]^2}^-1."""
    return _certified(g.t, moore_penrose_from(g.t, g.t_plus, tol), Method.FORMULA23)


def null_projector_from_geninv(g: GenInverse, tol: Tolerances = DEFAULT_TOLERANCES) -> Mat:
    """I - P_N^perp = {I-[T+T - (T+T)*]^2}^-1 (T+T)* (I - P), where P = I - T+T projects onto N(T).

    Equals T-dagger T.
    """
    e = g.t_plus @ g.t
    return frozen(_bracket_inverse(e, tol) @ adjoint(e) @ (identity(e.shape[0]) - g.p.matrix))


def pinv(t, method: Method = Method.SVD_ORACLE, g: Optional[GenInverse] = None,
         tol: Tolerances = DEFAULT_TOLERANCES) -> MoorePenrose:
    """Dispatch on ``method``; the formula methods need a generalized inverse ``g`` of ``t``."""
    method = Method(method)
    if method is Method.SVD_ORACLE:
        return pinv_oracle(t, tol)
    if g is None:
        raise ValueError(f"Method {method.value} needs a generalized inverse")
    if method is Method.FORMULA21:
        return pinv_from_geninv_21(g, tol)
    return pinv_from_geninv_23(g, tol)
