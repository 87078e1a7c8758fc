#!/usr/bin/env python

"""Perturbation of a generalized inverse T+ of T by a T-bounded delta T.

Given T-bar = T + delta T and the smallness gate a||T+|| + b||TT+|| < 1, the operator
B = T+ (I + delta T T+)^-1 is well defined. The conditions collected in :class:`Condition`
are then all equivalent, and when they hold the Moore-Penrose inverse of T-bar has a
closed form in B and T-bar.
"""

import enum
import logging
import subprocess
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from hustab.geninv import GenInverse, check_axioms
from hustab.numcore import (DEFAULT_TOLERANCES, Mat, Tolerances, as_mat, frozen, identity, rank_cutoff,
                            rank_tol, residual, solve_inverse, spectral_norm, svd)
from hustab.pinv import pinv_from_geninv_23, pinv_oracle, three_factor
from hustab.private.sampling import complex_gaussian
from hustab.subspace import (contains_subspace, image, intersection_is_trivial, null_space,
                             orthogonal_complement, random_generator, range_space, subspace_equal)

logger = logging.getLogger(__name__)


class GateFailed(ValueError):
    """a||T+|| + b||TT+|| >= 1: the perturbation is too large for the theory to apply."""

    def __init__(self, message, gate):
        super().__init__(message)
        self.gate = gate


class ConditionFailed(ValueError):
    """The closed form for the perturbed Moore-Penrose inverse needs the conditions to hold."""

    def __init__(self, message, verdicts):
        super().__init__(message)
        self.verdicts = verdicts


class EquivalenceViolation(ArithmeticError):
    """Conditions that must agree under the gate evaluated differently."""

    def __init__(self, message, verdicts):
        super().__init__(message)
        self.verdicts = verdicts


class Condition(enum.Enum):
    C1_B_is_geninv = "C1_B_is_geninv"
    """B is a generalized inverse of T-bar."""
    C2_range_pullback = "C2_range_pullback"
    """(I + delta T T+)^-1 R(T-bar) = R(T)."""
    C3_nullspace_mapped = "C3_nullspace_mapped"
    """(I + delta T T+)^-1 T-bar maps N(T) into R(T)."""
    C4_trivial_intersection = "C4_trivial_intersection"
    """R(T-bar) and N(T+) meet only in 0."""
    C4p_nullspace_pullback = "C4p_nullspace_pullback"
    """(I + T-dagger delta T)^-1 N(T) = N(T-bar)."""
    RankEqual = "RankEqual"
    DimNullEqual = "DimNullEqual"
    CodimRangeEqual = "CodimRangeEqual"


class CorollaryKind(enum.Enum):
    NullPreserving = "NullPreserving"
    RangePreserving = "RangePreserving"
    Neither = "Neither"


class SweepVerdict(enum.Enum):
    Continuous = "Continuous"
    Divergent = "Divergent"
    Mixed = "Mixed"


@dataclass(frozen=True)
class Perturbation:
    """T, delta T and T-bar together with the T-bound constants (a, b) and the gate value.

    ``sampled_only`` is set when (a, b) were supplied by the caller and the T-bound
    ||delta T x|| <= a||x|| + b||Tx|| was only checked on random samples.
    """
    t: Mat
    delta_t: Mat
    t_bar: Mat
    a: float
    b: float
    g: GenInverse
    gate: float
    sampled_only: bool = False


def _verify_t_bound(t: Mat, delta_t: Mat, a: float, b: float, samples: int, seed, tol: Tolerances):
    x = complex_gaussian(random_generator(seed), (t.shape[1], samples))
    lhs = np.linalg.norm(delta_t @ x, axis=0)
    rhs = a * np.linalg.norm(x, axis=0) + b * np.linalg.norm(t @ x, axis=0)
    worst = int(np.argmax(lhs - rhs))
    if lhs[worst] > rhs[worst] + tol.eq(rhs[worst]):
        raise ValueError(f"delta T is not T-bounded with a = {a!r}, b = {b!r}: "
                         f"||delta T x|| = {lhs[worst]:.6e} > {rhs[worst]:.6e} on sample {worst}")


def make_perturbation(t, delta_t, g: GenInverse, tol: Tolerances = DEFAULT_TOLERANCES,
                      a: Optional[float] = None, b: Optional[float] = None,
                      samples: int = 1000, seed=0) -> Perturbation:
    """Wrap T + delta T and evaluate the smallness gate.

    Without ``a`` and ``b`` the bounded pair (||delta T||, 0) is used, which is always
    a valid T-bound. A caller-supplied pair is checked on ``samples`` random vectors.

    :raises GateFailed: a||T+|| + b||TT+|| >= 1
    :raises ValueError: mismatched shapes, ``g`` not built for ``t``, or a sampled T-bound violation
    """
    t, delta_t = as_mat(t), as_mat(delta_t)
    if t.shape != delta_t.shape:
        raise ValueError(f"delta T has shape {delta_t.shape}, T has shape {t.shape}")
    if g.t.shape != t.shape or residual(g.t, t) > tol.eq(spectral_norm(t)):
        raise ValueError("The generalized inverse was built for a different operator")
    sampled_only = a is not None or b is not None
    if sampled_only:
        a, b = float(a or 0.0), float(b or 0.0)
        if a < 0 or b < 0:
            raise ValueError(f"T-bound constants must be non-negative, got a = {a!r}, b = {b!r}")
        _verify_t_bound(t, delta_t, a, b, samples, seed, tol)
    else:
        a, b = spectral_norm(delta_t), 0.0
    gate = a * spectral_norm(g.t_plus) + b * spectral_norm(t @ g.t_plus)
    logger.debug("Gate a||T+|| + b||TT+|| = %.6e", gate)
    if not gate < 1:
        raise GateFailed(f"Smallness gate fails: a||T+|| + b||TT+|| = {gate:.6e} >= 1", gate)
    return Perturbation(t, delta_t, frozen(t + delta_t), a, b, g, gate, sampled_only)


def _roundoff(dim: int, *norms: float) -> float:
    """Floating point error of a product with the given factor norms."""
    return float(np.finfo(float).eps * dim * np.prod(norms))


def _pullback(p: Perturbation, tol: Tolerances) -> Mat:
    """(I + delta T T+)^-1."""
    return solve_inverse(identity(p.t.shape[0]) + p.delta_t @ p.g.t_plus, tol)


def build_b(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES) -> Mat:
    """B = T+ (I + delta T T+)^-1. Always satisfies B T-bar B = B with R(B) = R(T+) and N(B) = N(T+)."""
    return frozen(p.g.t_plus @ _pullback(p, tol))


class BChecks(NamedTuple):
    idempotence_residual: float
    range_equal: bool
    null_equal: bool

    def passed(self, tol: Tolerances = DEFAULT_TOLERANCES, scale: float = 1.0) -> bool:
        return self.idempotence_residual <= tol.eq(scale) and self.range_equal and self.null_equal


def check_b(p: Perturbation, b_matrix: Mat, tol: Tolerances = DEFAULT_TOLERANCES) -> BChecks:
    """||B T-bar B - B||, R(B) = R(T+) and N(B) = N(T+)."""
    return BChecks(residual(b_matrix @ p.t_bar @ b_matrix, b_matrix),
                   subspace_equal(range_space(b_matrix, tol), range_space(p.g.t_plus, tol), tol),
                   subspace_equal(null_space(b_matrix, tol), null_space(p.g.t_plus, tol), tol))


def _t_dagger(p: Perturbation, tol: Tolerances) -> Mat:
    return pinv_from_geninv_23(p.g, tol).t_dagger


def check_conditions(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES,
                     b_matrix: Optional[Mat] = None) -> Dict[Condition, bool]:
    """Evaluate every :class:`Condition` from its own definition.

    Under the gate the rank of T-bar cannot fall below the rank of T, so all eight
    verdicts coincide.

    :raises EquivalenceViolation: the verdicts disagree
    """
    if b_matrix is None:
        b_matrix = build_b(p, tol)
    m, n = p.t.shape
    kernel, rng = null_space(p.t, tol), range_space(p.t, tol)
    kernel_bar, rng_bar = null_space(p.t_bar, tol), range_space(p.t_bar, tol)
    pullback = _pullback(p, tol)
    mapped = pullback @ p.t_bar

    # ||T-dagger|| <= ||T+||, so the bounded gate keeps I + T-dagger delta T invertible
    null_pullback = solve_inverse(identity(n) + _t_dagger(p, tol) @ p.delta_t, tol)

    # A rank jump leaves ||T-bar B T-bar - T-bar|| at least the first dropped singular
    # value of T-bar, and the part of (I + delta T T+)^-1 T-bar N(T) outside R(T) at least
    # that value over ||I + delta T T+|| ||P||; both are decided on T-bar's rank cutoff.
    cutoff = rank_cutoff(svd(p.t_bar), tol)
    norm_bar = spectral_norm(p.t_bar)
    reproduce_bound = max(cutoff, _roundoff(max(m, n), norm_bar, spectral_norm(b_matrix), norm_bar))
    off_range = mapped @ kernel.basis
    off_range = off_range - rng.basis @ (rng.basis.conj().T @ off_range)
    off_range_bound = max(
        cutoff / (spectral_norm(identity(m) + p.delta_t @ p.g.t_plus) * max(p.g.p.norm, 1.0)),
        _roundoff(max(m, n), spectral_norm(pullback), norm_bar))

    verdicts = {
        Condition.C1_B_is_geninv: check_axioms(p.t_bar, b_matrix, tol, reproduce_cutoff=reproduce_bound).verdict,
        Condition.C2_range_pullback: subspace_equal(image(pullback, rng_bar, tol), rng, tol),
        Condition.C3_nullspace_mapped: spectral_norm(off_range) <= off_range_bound,
        Condition.C4_trivial_intersection: intersection_is_trivial(rng_bar, null_space(p.g.t_plus, tol), tol),
        Condition.C4p_nullspace_pullback: subspace_equal(image(null_pullback, kernel, tol), kernel_bar, tol),
        Condition.RankEqual: rank_tol(p.t_bar, tol) == rank_tol(p.t, tol),
        Condition.DimNullEqual: kernel_bar.dim == kernel.dim,
        Condition.CodimRangeEqual: (m - rng_bar.dim) == orthogonal_complement(rng).dim,
    }
    logger.debug("Condition verdicts: %s", {c.value: v for c, v in verdicts.items()})
    if len(set(verdicts.values())) > 1:
        raise EquivalenceViolation("Conditions disagree: " + ", ".join(
            f"{c.value}={v}" for c, v in verdicts.items()), verdicts)
    return verdicts


def perturbed_pinv(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES,
                   verdicts: Optional[Dict[Condition, bool]] = None) -> Mat:
    """Moore-Penrose inverse of T-bar from the bracket formula with E = B T-bar, F = T-bar B.

    :raises ConditionFailed: R(T-bar) meets N(T+) nontrivially
    :raises Singular: a bracket inversion exceeds ``cond_max``
    """
    b_matrix = build_b(p, tol)
    if verdicts is None:
        verdicts = check_conditions(p, tol, b_matrix)
    if not verdicts[Condition.C4_trivial_intersection]:
        raise ConditionFailed("R(T-bar) meets N(T+) nontrivially; the closed form does not apply", verdicts)
    return three_factor(b_matrix @ p.t_bar, b_matrix, p.t_bar @ b_matrix, tol)


@dataclass(frozen=True)
class CorollaryResult:
    """Which containment the perturbation satisfies, and the specialized closed forms.

    ``null_formula`` uses E = T+T (valid when N(T) is contained in N(delta T)) and
    ``range_formula`` uses F = TT+ (valid when R(delta T) is contained in R(T)).
    """
    kind: CorollaryKind
    null_preserving: bool
    range_preserving: bool
    null_formula: Optional[Mat] = None
    range_formula: Optional[Mat] = None


def corollary_special_cases(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES) -> CorollaryResult:
    """Classify by subspace containment and evaluate the matching specialized formula(s).

    When both containments hold the kind is NullPreserving and both formulas are evaluated.

    :raises EquivalenceViolation: N(T-bar) != N(T) on a null-preserving perturbation, or
        R(T-bar) != R(T) on a range-preserving one
    """
    kernel, rng = null_space(p.t, tol), range_space(p.t, tol)
    null_preserving = contains_subspace(null_space(p.delta_t, tol), kernel, tol)
    range_preserving = contains_subspace(rng, range_space(p.delta_t, tol), tol)
    b_matrix = build_b(p, tol)
    null_formula = range_formula = None
    facts_hold = True
    if null_preserving:
        facts_hold &= subspace_equal(null_space(p.t_bar, tol), kernel, tol)
        null_formula = three_factor(p.g.t_plus @ p.t, b_matrix, p.t_bar @ b_matrix, tol)
    if range_preserving:
        facts_hold &= subspace_equal(range_space(p.t_bar, tol), rng, tol)
        range_formula = three_factor(b_matrix @ p.t_bar, b_matrix, p.t @ p.g.t_plus, tol)
    if null_preserving:
        kind = CorollaryKind.NullPreserving
    elif range_preserving:
        kind = CorollaryKind.RangePreserving
    else:
        kind = CorollaryKind.Neither
    logger.debug("Corollary classification %s (facts hold: %s)", kind.value, facts_hold)
    if not facts_hold:
        raise EquivalenceViolation(f"{kind.value} perturbation changed the preserved subspace",
                                   {Condition.RankEqual: rank_tol(p.t_bar, tol) == rank_tol(p.t, tol)})
    return CorollaryResult(kind, null_preserving, range_preserving, null_formula, range_formula)


class LipschitzCheck(NamedTuple):
    bound: float
    difference: float
    holds: bool


def lipschitz_bound(t_bar_dagger_norm: float, t_dagger_norm: float, delta_norm: float) -> float:
    """(||T-bar-dagger||^2 + ||T-bar-dagger|| ||T-dagger|| + ||T-dagger||^2) ||delta T||"""
    return (t_bar_dagger_norm ** 2 + t_bar_dagger_norm * t_dagger_norm + t_dagger_norm ** 2) * delta_norm


def lipschitz_check(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES,
                    t_bar_dagger: Optional[Mat] = None) -> LipschitzCheck:
    """Compare ||T-bar-dagger - T-dagger|| with :func:`lipschitz_bound`."""
    if t_bar_dagger is None:
        t_bar_dagger = perturbed_pinv(p, tol)
    t_dagger = _t_dagger(p, tol)
    bound = lipschitz_bound(spectral_norm(t_bar_dagger), spectral_norm(t_dagger), spectral_norm(p.delta_t))
    difference = residual(t_bar_dagger, t_dagger)
    return LipschitzCheck(bound, difference, difference <= bound + tol.eq_abs)


@dataclass(frozen=True)
class SweepRow:
    scale: float
    rank_equal: bool
    closed_form: bool
    """T-bar-dagger came from the closed form (otherwise from the SVD oracle)."""
    k_t_bar: float
    k_gap: float
    k_times_scale: float
    pinv_delta: float
    lipschitz_bound: float
    projector_gaps: tuple
    """||B T-bar - T+T|| and ||T-bar B - TT+||."""


@dataclass(frozen=True)
class Sweep:
    k_t: float
    rows: List[SweepRow]
    verdict: SweepVerdict


def _sweep_row(t: Mat, direction: Mat, scale: float, g: GenInverse, t_dagger: Mat, k_t: float,
               tol: Tolerances) -> SweepRow:
    p = make_perturbation(t, scale * direction, g, tol)
    b_matrix = build_b(p, tol)
    verdicts = check_conditions(p, tol, b_matrix)
    rank_equal = verdicts[Condition.RankEqual]
    if verdicts[Condition.C4_trivial_intersection]:
        t_bar_dagger = perturbed_pinv(p, tol, verdicts)
    else:
        t_bar_dagger = pinv_oracle(p.t_bar, tol).t_dagger
    k_t_bar = spectral_norm(t_bar_dagger)
    gaps = (residual(b_matrix @ p.t_bar, g.t_plus @ t), residual(p.t_bar @ b_matrix, t @ g.t_plus))
    return SweepRow(scale, rank_equal, verdicts[Condition.C4_trivial_intersection], k_t_bar,
                    abs(k_t_bar - k_t), k_t_bar * scale, residual(t_bar_dagger, t_dagger),
                    lipschitz_bound(k_t_bar, k_t, spectral_norm(p.delta_t)), gaps)


def continuity_sweep(t, direction, scales: Sequence[float], g: GenInverse,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> Sweep:
    """K_T-bar along T + s * direction for decreasing scales s.

    The verdict is Continuous when the rank is preserved at every scale, Divergent when it
    jumps at every scale (K_T-bar then grows like 1/s), and Mixed otherwise. Rows depend only
    on their own scale.

    :raises GateFailed: the gate fails at the largest scale
    """
    t, direction = as_mat(t), as_mat(direction)
    scales = [float(s) for s in scales]
    if not scales:
        raise ValueError("A sweep needs at least one scale")
    if any(s <= 0 for s in scales) or any(a <= b for a, b in zip(scales, scales[1:])):
        raise ValueError(f"Scales must be positive and strictly decreasing, got {scales}")
    if g.t.shape != t.shape or residual(g.t, t) > tol.eq(spectral_norm(t)):
        raise ValueError("The generalized inverse was built for a different operator")
    t_dagger = pinv_from_geninv_23(g, tol).t_dagger
    k_t = spectral_norm(t_dagger)
    rows = [_sweep_row(t, direction, s, g, t_dagger, k_t, tol) for s in scales]
    if all(row.rank_equal for row in rows):
        verdict = SweepVerdict.Continuous
    elif not any(row.rank_equal for row in rows):
        verdict = SweepVerdict.Divergent
    else:
        verdict = SweepVerdict.Mixed
    logger.info("Sweep over %d scales: %s", len(rows), verdict.value)
    return Sweep(k_t, rows, verdict)


# Equivalences drawn by PerturbReport.view
_EDGES = [
    (Condition.C1_B_is_geninv, Condition.C2_range_pullback, "gate"),
    (Condition.C2_range_pullback, Condition.C3_nullspace_mapped, "gate"),
    (Condition.C3_nullspace_mapped, Condition.C4_trivial_intersection, "gate"),
    (Condition.C4_trivial_intersection, Condition.C1_B_is_geninv, "gate"),
    (Condition.C4_trivial_intersection, Condition.C4p_nullspace_pullback, "gate"),
    (Condition.C4_trivial_intersection, Condition.RankEqual, "finite rank"),
    (Condition.RankEqual, Condition.DimNullEqual, "rank-nullity"),
    (Condition.RankEqual, Condition.CodimRangeEqual, "rank-nullity"),
]


def _graphviz_installed():
    try:
        subprocess.run(["dot", "-V"], check=True, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        return True
    except (subprocess.CalledProcessError, FileNotFoundError):
        return False


@dataclass(frozen=True)
class PerturbReport:
    """Everything :func:`analyze` learns about one perturbation.

    ``t_bar_dagger`` is None when the closed form does not apply; ``k_t_bar`` then comes
    from the SVD oracle and the Lipschitz fields are None.
    """
    gate: float
    conditions: Dict[Condition, bool]
    b_matrix: Mat
    b_checks: BChecks
    t_bar_dagger: Optional[Mat]
    k_t: float
    k_t_bar: float
    oracle_delta: Optional[float]
    lipschitz: Optional[LipschitzCheck]
    corollary: CorollaryResult
    sampled_only: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def lipschitz_bound(self) -> Optional[float]:
        return None if self.lipschitz is None else self.lipschitz.bound

    @property
    def lipschitz_holds(self) -> Optional[bool]:
        return None if self.lipschitz is None else self.lipschitz.holds

    def view(self) -> 'graphviz.Digraph':
        """Creates a 'graphviz.Digraph' of the conditions, filled green when they hold and red
        when they fail, joined by the equivalences that link them. Will automatically display in Jupyter.

        If you would like to display the diagram from a non-Jupyter environment, please use :code:`PerturbReport.render`
        """
        import graphviz
        g = graphviz.Digraph('Conditions', graph_attr={"label": f"gate = {self.gate:.4g}", "rankdir": "LR"})
        g.attr('node', shape='box', style='filled')
        for condition, verdict in self.conditions.items():
            g.node(condition.value, fillcolor='palegreen' if verdict else 'lightpink')
        for source, target, label in _EDGES:
            g.edge(source.value, target.value, label=label, dir='both')
        return g

    def render(self, view=True, filename: str = 'conditions', format='pdf'):
        """
        Renders the condition diagram to a file and optionally opens the file.
        :param view: If True, the rendered file will be opened.
        :param format: The file format for the Digraph. Typically 'pdf', 'png', or 'svg'.
        """
        if not _graphviz_installed():
            raise EnvironmentError("Graphviz executable not found. Please install [Graphviz](https://www.graphviz.org/download/).")
        digraph = self.view()
        digraph.format = format
        digraph.render(view=view, filename=filename, cleanup=True)


def analyze(p: Perturbation, tol: Tolerances = DEFAULT_TOLERANCES) -> PerturbReport:
    """Run every check on ``p``: conditions, properties of B, the closed form against the
    oracle, the Lipschitz bound and the corollary classification."""
    b_matrix = build_b(p, tol)
    verdicts = check_conditions(p, tol, b_matrix)
    k_t = spectral_norm(_t_dagger(p, tol))
    oracle = pinv_oracle(p.t_bar, tol).t_dagger
    notes = []
    if verdicts[Condition.C4_trivial_intersection]:
        t_bar_dagger = perturbed_pinv(p, tol, verdicts)
        oracle_delta = residual(t_bar_dagger, oracle)
        lipschitz = lipschitz_check(p, tol, t_bar_dagger)
        k_t_bar = spectral_norm(t_bar_dagger)
        if not lipschitz.holds:
            raise EquivalenceViolation(f"Lipschitz bound {lipschitz.bound:.6e} exceeded by "
                                       f"{lipschitz.difference:.6e}", verdicts)
    else:
        t_bar_dagger = oracle_delta = lipschitz = None
        k_t_bar = spectral_norm(oracle)
        notes.append("perturbed pseudoinverse not produced by formula")
    if p.sampled_only:
        notes.append("T-bound verified on samples only")
    return PerturbReport(p.gate, verdicts, b_matrix, check_b(p, b_matrix, tol), t_bar_dagger, k_t, k_t_bar,
                         oracle_delta, lipschitz, corollary_special_cases(p, tol), p.sampled_only, notes)
