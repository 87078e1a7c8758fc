#!/usr/bin/env python

"""Randomized property suite run by ``hu-stab selftest``.

Each property draws its instances from its own child of the run seed, so results
depend on the seed alone and one property can be rerun without the others.
"""

import logging
from dataclasses import dataclass
from tempfile import TemporaryDirectory
from pathlib import Path
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from hustab.geninv import check_axioms, orthogonal_geninv, random_geninv
from hustab.matrixfile import MatrixFormat, read_matrix, write_matrix
from hustab.numcore import DEFAULT_TOLERANCES, Tolerances, residual, spectral_norm
from hustab.perturb import (Condition, CorollaryKind, SweepVerdict, build_b, check_b, check_conditions,
                            continuity_sweep, corollary_special_cases, lipschitz_check, make_perturbation,
                            perturbed_pinv)
from hustab.pinv import pinv_from_geninv_21, pinv_from_geninv_23, pinv_oracle
from hustab.projector import oblique_projector, orthogonal_projector, orthogonalization_gaps, orthogonalize
from hustab.private import sampling
from hustab.stability import stability_constant
from hustab.subspace import random_complement, random_generator

logger = logging.getLogger(__name__)

Check = Callable[[], Tuple[bool, float]]
"""One instance of a property: returns (passed, residual)."""


class Property(NamedTuple):
    name: str
    checks: Callable[[np.random.SeedSequence, Tolerances], Iterable[Check]]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: int
    failed: int
    max_residual: float

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def todict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "failed": self.failed,
                "max_residual": self.max_residual}


def _split(child: np.random.SeedSequence) -> Tuple[np.random.Generator, int]:
    """A generator for building the instance and an independent integer seed for the routines it calls."""
    first, second = child.spawn(2)
    return random_generator(first), int(second.generate_state(1)[0])


def _random_operator(rng: np.random.Generator, min_rank: int = 0, deficient: bool = False):
    """A random matrix from :func:`sampling.random_shape`, redrawn until the rank profile fits."""
    while True:
        m, n, rank = sampling.random_shape(rng)
        if deficient:
            if min(m, n) < 2:
                continue
            rank = int(rng.integers(min_rank, min(m, n)))
        if rank >= min_rank:
            return sampling.random_matrix(rng, m, n, rank)


def stability_identity(seed, tol: Tolerances, count: int = 500) -> Iterable[Check]:
    """K_T * gamma(T) = 1, or the zero-operator convention."""
    rng = random_generator(seed)
    for _ in range(count):
        t = _random_operator(rng)

        def check(t=t):
            report = stability_constant(t, tol)
            if report.product is None:
                return np.isinf(report.gamma) and report.k_t == 0, 0.0
            err = abs(report.product - 1)
            return err <= 1e-8, err
        yield check


def pinv_formulas_agree(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """Both formulas from a generalized inverse agree with the SVD oracle."""
    children = seed.spawn(count)
    for child in children:
        rng, sub = _split(child)
        t = _random_operator(rng)

        def check(t=t, sub=sub):
            g = random_geninv(t, sub, tol, max_projector_norm=1e3)
            oracle = pinv_oracle(t, tol)
            d21 = pinv_from_geninv_21(g, tol).t_dagger
            d23 = pinv_from_geninv_23(g, tol).t_dagger
            err = max(residual(d21, oracle.t_dagger), residual(d23, oracle.t_dagger), residual(d21, d23))
            err /= 1 + spectral_norm(oracle.t_dagger)
            return err <= 1e-8, err
        yield check


def orthogonalization(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """Orthogonalizing an oblique projector gives the orthogonal projector onto its range."""
    children = seed.spawn(count)
    for child in children:
        rng, sub = _split(child)
        n = int(rng.integers(1, 13))
        s = sampling.subspace_of(rng, n, int(rng.integers(0, n + 1)))

        def check(s=s, sub=sub):
            p = oblique_projector(s, random_complement(s, sub), tol)
            err = residual(orthogonalize(p, tol).matrix, orthogonal_projector(s).matrix)
            gaps = orthogonalization_gaps(p, tol)
            return err <= 1e-8 and max(gaps) <= 1e-10, max(err, *gaps)
        yield check


def geninv_axioms(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """Constructed generalized inverses satisfy their axioms and match their complements."""
    children = seed.spawn(count)
    for child in children:
        rng, sub = _split(child)
        t = _random_operator(rng)

        def check(t=t, sub=sub):
            g = random_geninv(t, sub, tol, max_projector_norm=1e3)
            err = max(g.axiom_residuals)
            return err <= 1e-8 and check_axioms(t, g.t_plus, tol).verdict and g.matches_complements(tol), err
        yield check

    def regression():
        t = sampling.random_matrix(random_generator(2024), 5, 4, 2)
        first, second = random_geninv(t, 1, tol), random_geninv(t, 2, tol)
        spread = residual(first.t_plus, second.t_plus)
        err = residual(pinv_from_geninv_23(first, tol).t_dagger, pinv_from_geninv_23(second, tol).t_dagger)
        return spread > 1e-4 and err <= 1e-8, err
    yield regression


def _gated_instance(child: np.random.SeedSequence, tol: Tolerances, jump: bool):
    """A random perturbation passing the gate, rank-preserving or rank-jumping."""
    rng, sub = _split(child)
    t = _random_operator(rng, min_rank=0 if jump else 1, deficient=jump)
    g = random_geninv(t, sub, tol, max_projector_norm=1e2)
    t_plus_norm = spectral_norm(g.t_plus)
    u = rng.uniform(0.1, 1.0)
    if jump:
        norm = 0.5 * u / t_plus_norm if t_plus_norm > 0 else 0.5 * u
        delta_t = sampling.rank_jumping_direction(rng, t, norm)
    else:
        size = 0.25 * u / (spectral_norm(t) * t_plus_norm)
        delta_t = sampling.rank_preserving_direction(rng, t, size)
    return make_perturbation(t, delta_t, g, tol)


def _perturbation_checks(seed, count: int, tol: Tolerances, body) -> Iterable[Check]:
    children = seed.spawn(count)
    for k, child in enumerate(children):
        jump = k % 2 == 1
        yield lambda child=child, jump=jump: body(_gated_instance(child, tol, jump), jump)


def condition_equivalence(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """All conditions agree per instance: true when the rank is kept, false when it jumps."""
    def body(p, jump):
        verdicts = check_conditions(p, tol)
        return all(v is not jump for v in verdicts.values()), 0.0
    return _perturbation_checks(seed, count, tol, body)


def closed_form(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """The closed-form perturbed inverse matches the oracle, and B has its expected properties."""
    def body(p, jump):
        b_matrix = build_b(p, tol)
        b_checks = check_b(p, b_matrix, tol)
        b_ok = b_checks.passed(tol, spectral_norm(b_matrix) ** 2 * spectral_norm(p.t_bar))
        verdicts = check_conditions(p, tol, b_matrix)
        if not verdicts[Condition.C4_trivial_intersection]:
            return b_ok, b_checks.idempotence_residual
        oracle = pinv_oracle(p.t_bar, tol).t_dagger
        err = residual(perturbed_pinv(p, tol, verdicts), oracle) / (1 + spectral_norm(oracle))
        return b_ok and err <= 1e-7, max(err, b_checks.idempotence_residual)
    return _perturbation_checks(seed, count, tol, body)


def lipschitz(seed, tol: Tolerances, count: int = 300) -> Iterable[Check]:
    """||T-bar-dagger - T-dagger|| stays under the Lipschitz bound wherever the closed form applies."""
    def body(p, jump):
        verdicts = check_conditions(p, tol)
        if not verdicts[Condition.C4_trivial_intersection]:
            return True, 0.0
        result = lipschitz_check(p, tol, perturbed_pinv(p, tol, verdicts))
        return result.holds, max(0.0, result.difference - result.bound)
    return _perturbation_checks(seed, count, tol, body)


def continuity_dichotomy(seed, tol: Tolerances) -> Iterable[Check]:
    """K_T-bar converges along a rank-preserving direction and blows up like 1/s along a rank-jumping one."""
    t = np.diag([1.0, 0.0])
    scales = [2.0 ** -k for k in range(1, 11)]

    def preserving():
        sweep = continuity_sweep(t, np.diag([1.0, 0.0]), scales, orthogonal_geninv(t, tol), tol)
        err = max(row.k_gap / row.scale for row in sweep.rows)
        return sweep.verdict is SweepVerdict.Continuous and err <= 1.1, err

    def jumping():
        sweep = continuity_sweep(t, np.diag([0.0, 1.0]), scales, orthogonal_geninv(t, tol), tol)
        err = max(abs(row.k_times_scale - 1) for row in sweep.rows)
        return sweep.verdict is SweepVerdict.Divergent and err <= 1e-8, err
    return [preserving, jumping]


def corollaries(seed, tol: Tolerances, count: int = 100) -> Iterable[Check]:
    """Specialized formulas for null- and range-preserving perturbations match the general one."""
    for kind, children in ((CorollaryKind.NullPreserving, seed.spawn(count)),
                           (CorollaryKind.RangePreserving, seed.spawn(count))):
        for child in children:
            def check(kind=kind, child=child):
                rng, sub = _split(child)
                t = _random_operator(rng, min_rank=1)
                g = random_geninv(t, sub, tol, max_projector_norm=1e2)
                norm = 0.5 * rng.uniform(0.1, 1.0) / spectral_norm(g.t_plus)
                if kind is CorollaryKind.NullPreserving:
                    delta_t = sampling.null_preserving_direction(rng, t, norm)
                else:
                    delta_t = sampling.range_preserving_direction(rng, t, norm)
                p = make_perturbation(t, delta_t, g, tol)
                result = corollary_special_cases(p, tol)
                special = result.null_formula if kind is CorollaryKind.NullPreserving else result.range_formula
                if special is None:
                    return False, float("inf")
                general = perturbed_pinv(p, tol)
                oracle = pinv_oracle(p.t_bar, tol).t_dagger
                err = max(residual(special, general), residual(special, oracle)) / (1 + spectral_norm(oracle))
                return err <= 1e-7, err
            yield check


def witness_attainment(seed, tol: Tolerances, count: int = 200, samples: int = 1000) -> Iterable[Check]:
    """The largest sampled witness ratio reaches K_T from below."""
    children = seed.spawn(count)
    for child in children:
        def check(child=child):
            rng, sub = _split(child)
            report = stability_constant(_random_operator(rng), tol, samples=samples, seed=sub)
            k = report.k_t
            shortfall = (k - report.max_witness_ratio) / k if k > 0 else 0.0
            ok = k * (1 - 1e-3) <= report.max_witness_ratio <= k + 1e-8
            return ok, abs(shortfall)
        yield check


def codec_roundtrip(seed, tol: Tolerances, count: int = 50) -> Iterable[Check]:
    """Matrices survive CSV and MatrixMarket files exactly."""
    rng = random_generator(seed)
    for _ in range(count):
        m, n, rank = sampling.random_shape(rng)
        mat = sampling.random_matrix(rng, m, n, rank, scale=float(10 ** rng.uniform(-8, 8)))

        def check(mat=mat):
            err = 0.0
            with TemporaryDirectory() as tmpdir:
                for format in MatrixFormat:
                    path = Path(tmpdir) / f"roundtrip.{format.value}"
                    write_matrix(path, mat, format)
                    err = max(err, float(np.max(np.abs(read_matrix(path, format) - mat))))
            return err == 0.0, err
        yield check


PROPERTIES: List[Property] = [
    Property("stability_identity", stability_identity),
    Property("pinv_formulas_agree", pinv_formulas_agree),
    Property("orthogonalization", orthogonalization),
    Property("geninv_axioms", geninv_axioms),
    Property("condition_equivalence", condition_equivalence),
    Property("closed_form", closed_form),
    Property("lipschitz", lipschitz),
    Property("continuity_dichotomy", continuity_dichotomy),
    Property("corollaries", corollaries),
    Property("witness_attainment", witness_attainment),
    Property("codec_roundtrip", codec_roundtrip),
]


def run_property(prop: Property, seed: np.random.SeedSequence, tol: Tolerances) -> PropertyResult:
    """Run every check of ``prop``; a check that raises counts as a failure."""
    passed = failed = 0
    worst = 0.0
    for k, check in enumerate(prop.checks(seed, tol)):
        try:
            ok, err = check()
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            logger.warning("%s instance %d raised %s: %s", prop.name, k, type(exc).__name__, exc)
            ok, err = False, float("inf")
        if ok:
            passed += 1
        else:
            failed += 1
            logger.info("%s instance %d failed (residual %.3e)", prop.name, k, err)
        worst = max(worst, float(err))
    logger.info("%s: %d passed, %d failed", prop.name, passed, failed)
    return PropertyResult(prop.name, passed, failed, worst)


def run_suite(seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES,
              properties: Optional[Sequence[Property]] = None) -> List[PropertyResult]:
    """Run ``properties`` (all of :data:`PROPERTIES` by default) from one seed."""
    properties = PROPERTIES if properties is None else properties
    children = np.random.SeedSequence(seed).spawn(len(properties))
    return [run_property(prop, child, tol) for prop, child in zip(properties, children)]
