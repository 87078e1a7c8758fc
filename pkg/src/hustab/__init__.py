from hustab.numcore import (Tolerances, DEFAULT_TOLERANCES, NonConvergence, Singular, adjoint, svd, rank_tol,
                            spectral_norm, solve_inverse, is_close)
from hustab.subspace import (Subspace, null_space, range_space, orthogonal_complement, random_complement, is_complement,
                             intersection_is_trivial, subspace_equal, contains, image)
from hustab.projector import (Projector, NotComplementary, oblique_projector, orthogonal_projector, orthogonalize,
                              orthogonalization_gaps)
from hustab.geninv import GenInverse, check_axioms, geninv_from_complements, orthogonal_geninv, random_geninv
from hustab.pinv import (Method, MoorePenrose, pinv, pinv_oracle, pinv_from_geninv_21, pinv_from_geninv_23,
                         penrose_residuals, null_projector_from_geninv)
from hustab.stability import (StabilityReport, Infeasible, reduced_min_modulus, reduced_min_modulus_sampled,
                              stability_constant, stability_witness, epsilon_approximate_solve, approximate_kernel_solve)
from hustab.perturb import (Perturbation, PerturbReport, Condition, CorollaryKind, SweepVerdict, GateFailed,
                            ConditionFailed, EquivalenceViolation, make_perturbation, build_b, check_conditions,
                            perturbed_pinv, corollary_special_cases, lipschitz_check, continuity_sweep, analyze)
from hustab.matrixfile import MatrixFile, MatrixFormat, ParseError, read_matrix, write_matrix


__author__     = "The hustab developers"
__copyright__  = "Copyright 2024"
__credits__    = ["The hustab developers"]
__license__    = "Apache"
__version__    = "1.0"
__status__     = "Prototype"


# This project is (partially) documented using the Sphinx docstring convention
