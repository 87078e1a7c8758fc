#!/usr/bin/env python

"""Generalized inverses built from a choice of complements to N(T) and R(T), and their axiom checks."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from hustab.numcore import (DEFAULT_TOLERANCES, Mat, Tolerances, as_mat, frozen, identity,
                            residual, solve_inverse, spectral_norm)
from hustab.projector import NotComplementary, Projector, oblique_projector
from hustab.subspace import (Subspace, is_complement, null_space, orthogonal_complement,
                             random_complement, range_space, subspace_equal)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AxiomCheck:
    """Residuals ||TST - T||, ||STS - S||, ||(ST)^2 - ST|| and whether all are within tolerance."""
    residuals: Tuple[float, float, float]
    verdict: bool

    def __bool__(self):
        return self.verdict


def check_axioms(t, s, tol: Tolerances = DEFAULT_TOLERANCES,
                 reproduce_cutoff: Optional[float] = None) -> AxiomCheck:
    """Check that ``s`` is a generalized inverse of ``t``.

    Each residual is compared against ``eq_abs`` scaled by the norms of the product it
    comes from, so the verdict does not depend on the scale of the operands.

    :param reproduce_cutoff: bound for ||tst - t|| replacing the scaled ``eq_abs``, e.g.
        the rank cutoff of ``t``
    """
    t, s = as_mat(t), as_mat(s)
    if t.shape != s.shape[::-1]:
        raise ValueError(f"Shapes {t.shape} and {s.shape} are not compatible")
    st = s @ t
    residuals = (residual(t @ s @ t, t),
                 residual(st @ s, s),
                 residual(st @ st, st))
    nt, ns = spectral_norm(t), spectral_norm(s)
    scales = (nt * ns * nt, ns * nt * ns, (ns * nt) ** 2)
    bounds = [tol.eq(scale) for scale in scales]
    if reproduce_cutoff is not None:
        bounds[0] = reproduce_cutoff
    verdict = all(r <= bound for r, bound in zip(residuals, bounds))
    return AxiomCheck(residuals, verdict)


@dataclass(frozen=True)
class GenInverse:
    """A certified generalized inverse ``t_plus`` of ``t``.

    ``p`` projects onto N(T) along ``n_c``; ``q`` projects onto R(T) along ``r_c``.
    ``projector_residuals`` holds ||T+T - (I - P)|| and ||TT+ - Q||.
    """
    t: Mat
    t_plus: Mat
    p: Projector
    q: Projector
    axiom_residuals: Tuple[float, float, float]
    projector_residuals: Tuple[float, float]

    @property
    def n_c(self) -> Subspace:
        return self.p.along

    @property
    def r_c(self) -> Subspace:
        return self.q.along

    @property
    def max_projector_norm(self) -> float:
        return max(self.p.norm, self.q.norm)

    def matches_complements(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """R(T+) = N(T)^c and N(T+) = R(T)^c."""
        return (subspace_equal(range_space(self.t_plus, tol), self.n_c, tol)
                and subspace_equal(null_space(self.t_plus, tol), self.r_c, tol))


def geninv_from_complements(t, n_c: Subspace, r_c: Subspace,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> GenInverse:
    """The unique S with TST = T, STS = S, ST = I - P and TS = Q.

    T+ is built one codomain basis vector at a time: project with Q, express the result
    in the range basis, and pull it back through T restricted to ``n_c``.

    :raises NotComplementary: ``n_c`` or ``r_c`` is not a complement
    :raises Singular: T restricted to ``n_c`` is numerically non-invertible
    """
    t = as_mat(t)
    m, n = t.shape
    kernel, rng = null_space(t, tol), range_space(t, tol)
    if n_c.ambient_dim != n or not is_complement(kernel, n_c, tol):
        raise NotComplementary(f"{n_c} does not complement N(T) (dim {kernel.dim}) in C^{n}")
    if r_c.ambient_dim != m or not is_complement(rng, r_c, tol):
        raise NotComplementary(f"{r_c} does not complement R(T) (dim {rng.dim}) in C^{m}")
    p = oblique_projector(kernel, n_c, tol)
    q = oblique_projector(rng, r_c, tol)

    # T|_{n_c} in coordinates: n_c basis -> R(T) basis, square of size rank(T)
    restricted = rng.basis.conj().T @ t @ n_c.basis
    pullback = n_c.basis @ solve_inverse(restricted, tol)
    t_plus = np.zeros((n, m), dtype=complex)
    for j in range(m):
        coords = rng.basis.conj().T @ q.matrix[:, j]
        t_plus[:, j] = pullback @ coords
    t_plus = frozen(t_plus)

    axioms = check_axioms(t, t_plus, tol)
    projector_residuals = (residual(t_plus @ t, identity(n) - p.matrix),
                           residual(t @ t_plus, q.matrix))
    if not axioms.verdict:
        logger.warning("Generalized inverse fails its axioms: residuals %s", axioms.residuals)
    logger.debug("Built T+ with ||P|| = %.3e, ||Q|| = %.3e", p.norm, q.norm)
    return GenInverse(t, t_plus, p, q, axioms.residuals, projector_residuals)


def orthogonal_geninv(t, tol: Tolerances = DEFAULT_TOLERANCES) -> GenInverse:
    """Generalized inverse from the orthogonal complements (this is T-dagger)."""
    t = as_mat(t)
    return geninv_from_complements(t, orthogonal_complement(null_space(t, tol)),
                                   orthogonal_complement(range_space(t, tol)), tol)


def random_geninv(t, seed, tol: Tolerances = DEFAULT_TOLERANCES, max_projector_norm: float = 1e3,
                  attempts: int = 64) -> GenInverse:
    """Generalized inverse from seeded oblique complements.

    Complement pairs whose projectors have norm above ``max_projector_norm`` are
    rejected and redrawn from the next child seed.
    """
    t = as_mat(t)
    kernel, rng = null_space(t, tol), range_space(t, tol)
    children = np.random.SeedSequence(seed).spawn(2 * attempts)
    for attempt in range(attempts):
        n_c = random_complement(kernel, children[2 * attempt])
        r_c = random_complement(rng, children[2 * attempt + 1])
        g = geninv_from_complements(t, n_c, r_c, tol)
        if g.max_projector_norm <= max_projector_norm:
            return g
        logger.debug("Rejected complement pair %d: projector norm %.3e", attempt, g.max_projector_norm)
    raise NotComplementary(f"No complement pair with projector norm <= {max_projector_norm} "
                           f"in {attempts} attempts")
