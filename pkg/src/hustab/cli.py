#!/usr/bin/env python

"""``hu-stab``: command-line front end writing versioned JSON reports.

Every report carries the schema tag, tool version, seed, tolerances and the SHA-256 of
each input file, so rerunning a command on the same inputs reproduces the same bytes.
"""

import argparse
import enum
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from hustab import __version__
from hustab.geninv import GenInverse, orthogonal_geninv, random_geninv
from hustab.matrixfile import MatrixFile, MatrixFormat, ParseError, format_entry, write_matrix
from hustab.numcore import Mat, Tolerances, as_vec, residual
from hustab.perturb import GateFailed, analyze, continuity_sweep, make_perturbation
from hustab.pinv import Method, pinv, pinv_oracle
from hustab.selftest import run_suite
from hustab.stability import reduced_min_modulus_sampled, stability_constant, stability_witness
from hustab.subspace import contains, null_space

logger = logging.getLogger(__name__)

SCHEMA = "hu-stab/1"
SEED_VARIABLE = "HU_STAB_SEED"
DEFAULT_SCALES = [2.0 ** -k for k in range(1, 11)]


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command.

    :param seed: from ``--seed``, else ``HU_STAB_SEED``, else 0
    :param output: report destination; None means standard output
    :param format: matrix file format override; None infers it from the file suffix
    """
    tolerances: Tolerances
    seed: int
    output: Optional[Path] = None
    format: Optional[MatrixFormat] = None
    json: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace, environ=os.environ) -> 'RunConfig':
        if args.seed is not None:
            seed = args.seed
        elif environ.get(SEED_VARIABLE):
            try:
                seed = int(environ[SEED_VARIABLE])
            except ValueError:
                raise ValueError(f"{SEED_VARIABLE} must be an integer, got {environ[SEED_VARIABLE]!r}")
        else:
            seed = 0
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        defaults = Tolerances()
        tolerances = Tolerances(rank_rel=defaults.rank_rel if args.tol_rank is None else args.tol_rank,
                                eq_abs=defaults.eq_abs if args.tol_eq is None else args.tol_eq,
                                cond_max=defaults.cond_max if args.tol_cond is None else args.tol_cond)
        return cls(tolerances, seed, args.out, None if args.format is None else MatrixFormat(args.format),
                   args.json)

    def matrix_file(self, path) -> MatrixFile:
        return MatrixFile.of(path, self.format)


# region Report encoding
def _entry(z) -> str:
    # reports print -0 as 0; --save keeps the sign
    return format_entry(complex(z) + 0j)


def _matrix(mat: Mat) -> List[List[str]]:
    return [[_entry(z) for z in row] for row in np.asarray(mat)]


def _jsonable(value: Any) -> Any:
    """Plain JSON values: matrices as rows of entry strings, infinities as strings, enums by value."""
    if isinstance(value, dict):
        return {(k.value if isinstance(k, enum.Enum) else str(k)): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _matrix(value) if value.ndim == 2 else [_entry(z) for z in value]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return "nan"
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return _entry(value)
    return value


def dumps(report: Dict[str, Any]) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _text(report: Dict[str, Any], prefix: str = "") -> List[str]:
    lines = []
    for key, value in sorted(_jsonable(report).items()):
        if isinstance(value, dict):
            lines.extend(_text(value, f"{prefix}{key}."))
        elif isinstance(value, list) and value and isinstance(value[0], list):
            lines.append(f"{prefix}{key}:")
            lines.extend("  " + "  ".join(row) for row in value)
        else:
            lines.append(f"{prefix}{key}: {value}")
    return lines

# endregion


def _report(command: str, cfg: RunConfig, inputs: Dict[str, MatrixFile]) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "tolerances": cfg.tolerances.todict(),
        "inputs": {name: {"path": str(f.path), "sha256": f.digest()} for name, f in inputs.items()},
    }


def _geninv(t: Mat, cfg: RunConfig, oblique: bool) -> GenInverse:
    return random_geninv(t, cfg.seed, cfg.tolerances) if oblique else orthogonal_geninv(t, cfg.tolerances)


def cmd_pinv(args, cfg: RunConfig) -> Dict[str, Any]:
    source = cfg.matrix_file(args.input)
    t = source.read()
    method = Method(args.method)
    g = None if method is Method.SVD_ORACLE else random_geninv(t, cfg.seed, cfg.tolerances)
    result = pinv(t, method, g, cfg.tolerances)
    if args.save:
        write_matrix(args.save, result.t_dagger, cfg.format)
    report = _report("pinv", cfg, {"t": source})
    report.update({
        "method": method,
        "t_dagger": result.t_dagger,
        "penrose_residuals": result.residuals,
        "valid": result.is_valid(cfg.tolerances),
        "oracle_delta": result.distance(pinv_oracle(t, cfg.tolerances)),
    })
    return report


def cmd_stability(args, cfg: RunConfig) -> Dict[str, Any]:
    source = cfg.matrix_file(args.input)
    t = source.read()
    result = stability_constant(t, cfg.tolerances, samples=args.samples, seed=cfg.seed)
    report = _report("stability", cfg, {"t": source})
    report.update({
        "gamma": result.gamma,
        "gamma_sampled": reduced_min_modulus_sampled(t, max(args.samples, 1), cfg.seed, cfg.tolerances),
        "k_t": result.k_t,
        "product": "undefined" if result.product is None else result.product,
        "range_checked": result.range_checked,
        "t_dagger": result.t_dagger,
        "witness": {"checked": result.witness_checked, "samples": args.samples,
                    "max_ratio": result.max_witness_ratio, "max_uniform_ratio": result.max_uniform_ratio},
    })
    return report


def cmd_witness(args, cfg: RunConfig) -> Dict[str, Any]:
    source, vector = cfg.matrix_file(args.input), cfg.matrix_file(args.vector)
    t = source.read()
    x = as_vec(vector.read())
    result = stability_witness(t, x, cfg.tolerances)
    report = _report("witness", cfg, {"t": source, "x": vector})
    report.update({
        "x0": result.x0,
        "ratio": result.ratio,
        "k_t": stability_constant(t, cfg.tolerances).k_t,
        "in_null_space": contains(null_space(t, cfg.tolerances), result.x0, cfg.tolerances),
    })
    return report


def cmd_geninv(args, cfg: RunConfig) -> Dict[str, Any]:
    source = cfg.matrix_file(args.input)
    t = source.read()
    g = random_geninv(t, cfg.seed, cfg.tolerances, max_projector_norm=args.max_projector_norm)
    if args.save:
        write_matrix(args.save, g.t_plus, cfg.format)
    report = _report("geninv", cfg, {"t": source})
    report.update({
        "t_plus": g.t_plus,
        "axiom_residuals": g.axiom_residuals,
        "projector_residuals": g.projector_residuals,
        "projector_norms": {"p": g.p.norm, "q": g.q.norm},
        "matches_complements": g.matches_complements(cfg.tolerances),
        "dims": {"null_space": g.p.onto.dim, "range": g.q.onto.dim},
    })
    return report


def cmd_perturb(args, cfg: RunConfig) -> Dict[str, Any]:
    source, delta = cfg.matrix_file(args.t), cfg.matrix_file(args.delta_t)
    t, delta_t = source.read(), delta.read()
    report = _report("perturb", cfg, {"t": source, "delta_t": delta})
    g = _geninv(t, cfg, args.oblique)
    try:
        p = make_perturbation(t, delta_t, g, cfg.tolerances, a=args.a, b=args.b, seed=cfg.seed)
    except GateFailed as err:
        report["gate"] = {"passed": False, "value": err.gate}
        return report
    result = analyze(p, cfg.tolerances)
    report.update({
        "gate": {"passed": True, "value": result.gate, "a": p.a, "b": p.b, "sampled_only": p.sampled_only},
        "conditions": result.conditions,
        "k_t": result.k_t,
        "k_t_bar": result.k_t_bar,
        "pinv_delta": residual(pinv_oracle(p.t_bar, cfg.tolerances).t_dagger,
                               pinv_oracle(t, cfg.tolerances).t_dagger),
        "oracle_delta": result.oracle_delta,
        "lipschitz": {"bound": result.lipschitz_bound, "holds": result.lipschitz_holds},
        "b": {"idempotence_residual": result.b_checks.idempotence_residual,
              "range_equal": result.b_checks.range_equal, "null_equal": result.b_checks.null_equal},
        "corollary": result.corollary.kind,
        "notes": result.notes,
    })
    if result.t_bar_dagger is not None:
        report["t_bar_dagger"] = result.t_bar_dagger
    return report


def cmd_sweep(args, cfg: RunConfig) -> Dict[str, Any]:
    source, direction = cfg.matrix_file(args.t), cfg.matrix_file(args.direction)
    t = source.read()
    report = _report("sweep", cfg, {"t": source, "direction": direction})
    scales = DEFAULT_SCALES if args.scales is None else [float(s) for s in args.scales.split(",")]
    try:
        sweep = continuity_sweep(t, direction.read(), scales, _geninv(t, cfg, args.oblique), cfg.tolerances)
    except GateFailed as err:
        report["gate"] = {"passed": False, "value": err.gate}
        return report
    report.update({
        "gate": {"passed": True},
        "k_t": sweep.k_t,
        "rows": [{"scale": row.scale, "rank_equal": row.rank_equal, "closed_form": row.closed_form,
                  "k_t_bar": row.k_t_bar, "k_gap": row.k_gap, "k_times_scale": row.k_times_scale,
                  "pinv_delta": row.pinv_delta, "lipschitz_bound": row.lipschitz_bound,
                  "projector_gaps": row.projector_gaps} for row in sweep.rows],
        "verdict": sweep.verdict,
    })
    return report


def cmd_selftest(args, cfg: RunConfig) -> Dict[str, Any]:
    results = run_suite(cfg.seed, cfg.tolerances)
    report = _report("selftest", cfg, {})
    report.update({
        "properties": [r.todict() for r in results],
        "all_passed": all(r.ok for r in results),
    })
    return report


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, help="relative singular-value cutoff (default 1e-10)")
    common.add_argument("--tol-eq", type=float, help="matrix equality tolerance (default 1e-8)")
    common.add_argument("--tol-cond", type=float, help="largest accepted condition number (default 1e12)")
    common.add_argument("--seed", type=int, help=f"random seed (default ${SEED_VARIABLE} or 0)")
    common.add_argument("--format", choices=[f.value for f in MatrixFormat],
                        help="matrix file format (default: from the file suffix)")
    common.add_argument("--out", type=Path, help="write the report here instead of standard output")
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")

    parser = argparse.ArgumentParser(prog="hu-stab", description="Hyers-Ulam stability constants and "
                                     "Moore-Penrose inverses of matrices and their perturbations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("pinv", parents=[common], help="Moore-Penrose inverse")
    sub.add_argument("input")
    sub.add_argument("--method", choices=[m.value for m in Method], default=Method.FORMULA23.value)
    sub.add_argument("--save", type=Path, help="also write T-dagger to this matrix file")
    sub.set_defaults(func=cmd_pinv)

    sub = commands.add_parser("stability", parents=[common], help="gamma(T), K_T and sampled witnesses")
    sub.add_argument("input")
    sub.add_argument("--samples", type=int, default=1000)
    sub.set_defaults(func=cmd_stability)

    sub = commands.add_parser("witness", parents=[common], help="nearest null-space point for a vector")
    sub.add_argument("input")
    sub.add_argument("vector", help="matrix file holding one row or one column")
    sub.set_defaults(func=cmd_witness)

    sub = commands.add_parser("geninv", parents=[common], help="generalized inverse from seeded complements")
    sub.add_argument("input")
    sub.add_argument("--max-projector-norm", type=float, default=1e3)
    sub.add_argument("--save", type=Path, help="also write T+ to this matrix file")
    sub.set_defaults(func=cmd_geninv)

    sub = commands.add_parser("perturb", parents=[common], help="conditions and closed form for T + delta T")
    sub.add_argument("t")
    sub.add_argument("delta_t")
    sub.add_argument("--a", type=float, help="T-bound constant a (checked on samples)")
    sub.add_argument("--b", type=float, help="T-bound constant b (checked on samples)")
    sub.add_argument("--oblique", action="store_true", help="use a seeded oblique T+ instead of T-dagger")
    sub.set_defaults(func=cmd_perturb)

    sub = commands.add_parser("sweep", parents=[common], help="K_T-bar along T + s * direction")
    sub.add_argument("t")
    sub.add_argument("direction")
    sub.add_argument("--scales", help="comma-separated decreasing scales (default 2^-1 ... 2^-10)")
    sub.add_argument("--oblique", action="store_true", help="use a seeded oblique T+ instead of T-dagger")
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser("selftest", parents=[common], help="run the randomized property suite")
    sub.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
        report = args.func(args, cfg)
    except (ParseError, OSError, ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"hu-stab: error: {err}", file=sys.stderr)
        return 1
    text = dumps(report) if cfg.json else "\n".join(_text(report)) + "\n"
    if cfg.output is not None:
        with open(cfg.output, "wt") as outfh:
            outfh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.get("all_passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
