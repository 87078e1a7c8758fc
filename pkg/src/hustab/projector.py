#!/usr/bin/env python

"""Oblique and orthogonal projectors, and orthogonalization of an oblique projector."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hustab.numcore import (DEFAULT_TOLERANCES, Mat, Singular, Tolerances, adjoint, frozen,
                            identity, residual, solve_inverse, spectral_norm)
from hustab.subspace import Subspace, _check_same_ambient, is_complement, orthogonal_complement

logger = logging.getLogger(__name__)


class NotComplementary(ValueError):
    """The two subspaces do not decompose the ambient space as a direct sum."""


@dataclass(frozen=True)
class Projector:
    """Idempotent ``matrix`` with range ``onto`` and null space ``along``."""
    matrix: Mat
    onto: Subspace
    along: Subspace

    @property
    def norm(self) -> float:
        """Spectral norm; equals 1 exactly for orthogonal projectors and grows with obliqueness."""
        return spectral_norm(self.matrix)

    def idempotence_residual(self) -> float:
        return residual(self.matrix @ self.matrix, self.matrix)

    def selfadjoint_residual(self) -> float:
        return residual(self.matrix, adjoint(self.matrix))

    def is_orthogonal(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return self.selfadjoint_residual() <= tol.eq(self.norm)


def oblique_projector(onto: Subspace, along: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """Projector onto ``onto`` along ``along``.

    Solves ``[onto.basis | along.basis] @ coeffs = I`` once; the first ``dim(onto)``
    coefficient rows rebuilt on ``onto.basis`` give the projector.

    :raises NotComplementary: the pair is not a direct-sum decomposition
    """
    _check_same_ambient(onto, along)
    if not is_complement(onto, along, tol):
        raise NotComplementary(f"{onto} and {along} are not complementary")
    n, k = onto.ambient_dim, onto.dim
    if k == 0:
        return Projector(frozen(np.zeros((n, n), dtype=complex)), onto, along)
    if k == n:
        return Projector(identity(n), onto, along)
    try:
        coeffs = solve_inverse(np.hstack([onto.basis, along.basis]), tol)
    except Singular as err:
        raise NotComplementary(f"{onto} and {along} are numerically dependent") from err
    return Projector(frozen(onto.basis @ coeffs[:k, :]), onto, along)


def orthogonal_projector(s: Subspace) -> Projector:
    """``basis @ basis*``, the self-adjoint projector onto ``s``."""
    return Projector(s.projector_matrix(), s, orthogonal_complement(s))


def _bracket(p: Mat) -> Mat:
    """I - (P - P*)^2, positive definite for any projector P."""
    skew = p - adjoint(p)
    return identity(p.shape[0]) - skew @ skew


def orthogonalize(p: Projector, tol: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    """Orthogonal projector onto ``p.onto`` from the oblique one: P P* [I - (P - P*)^2]^-1.

    :raises Singular: the bracket is too ill-conditioned (extreme obliqueness)
    """
    mat = p.matrix
    inverse = solve_inverse(_bracket(mat), tol)
    return Projector(frozen(mat @ adjoint(mat) @ inverse), p.onto, orthogonal_complement(p.onto))


def orthogonalization_gaps(p: Projector, tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[float, float]:
    """Returns ``(form_gap, commutation_gap)``:

    * ``form_gap`` = ||P P* [I-(P-P*)^2]^-1 - [I-(P-P*)^2]^-1 P P*||
    * ``commutation_gap`` = ||P P* [I-(P-P*)^2] - [I-(P-P*)^2] P P*||
    """
    mat = p.matrix
    bracket = _bracket(mat)
    inverse = solve_inverse(bracket, tol)
    ppstar = mat @ adjoint(mat)
    return (residual(ppstar @ inverse, inverse @ ppstar),
            residual(ppstar @ bracket, bracket @ ppstar))
