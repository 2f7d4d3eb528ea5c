#!/usr/bin/env python3
"""
OpRange Command Line Interface
Unified interface for classifying operator pairs, Lebesgue decompositions,
Radon-Nikodym derivatives, closures, adjoints, towers and validation runs
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

# Add current directory to path for imports
sys.path.append(str(Path(__file__).parent))

from classify import classify
from core_linalg import EXACT, FLOAT, MODES, Subspace, Tolerance
from lebesgue import lebesgue_decompose, lebesgue_type_decompose, rn_derivative, rn_minimality_check
from linrel import adjoint_rel, adjoint_rel_algebraic, from_pair, is_operator, relations_equal
from matrix_io import FORMATS, read_matrix
from oprange_errors import (
    InputFileError,
    InternalConsistencyError,
    ModeMismatch,
    OperatorRangeError,
)
from pairs import (
    OperatorPair,
    adjoint_block_representation,
    adjoint_param_representation,
    canonical_contractions,
    check_polar,
    closure,
    closure_matches,
    closure_operator_part,
    is_normalized,
    is_q_normalized,
)
from report_builder import SCHEMA_PATH, ReportBuilder, error_report, load_schema, render_report, save_report
from towers import load_tower, run_tower
from validate_theorems import BATTERIES, DEFAULT_SEED, run_batteries

logger = logging.getLogger(__name__)

# Configuration
MODE_ENV_VAR = "OPRANGE_MODE"
EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_INTERNAL_ERROR = 3
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(verbose: bool = False, debug: bool = False) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def resolve_mode(requested: Optional[str]) -> str:
    mode = requested or os.environ.get(MODE_ENV_VAR, "exact")
    if mode not in MODES:
        raise ModeMismatch(f"Unknown mode '{mode}' (from {'--mode' if requested else MODE_ENV_VAR})")
    return mode


def tolerance_from_args(args: argparse.Namespace) -> Tolerance:
    try:
        return Tolerance(rank_rtol=args.rank_rtol, eq_atol=args.eq_atol)
    except ValueError as e:
        raise OperatorRangeError(str(e)) from e


def _load(builder: ReportBuilder, name: str, path: str, args: argparse.Namespace) -> np.ndarray:
    matrix = read_matrix(Path(path), builder.mode, args.format)
    builder.add_matrix_input(name, Path(path), matrix)
    return matrix


def _load_pair(builder: ReportBuilder, args: argparse.Namespace,
               names: Tuple[str, str] = ("a", "b")) -> Tuple[np.ndarray, np.ndarray]:
    first = _load(builder, names[0], getattr(args, names[0]), args)
    second = _load(builder, names[1], getattr(args, names[1]), args)
    return first, second


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_classify(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("classify", mode, tol)
    a, b = _load_pair(builder, args)
    return builder.classification_report(classify(a, b, tol))


def cmd_decompose(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("decompose", mode, tol)
    a, b = _load_pair(builder, args)
    if args.l_subspace:
        spanning = _load(builder, "l_subspace", args.l_subspace, args)
        decomposition = lebesgue_type_decompose(a, b, Subspace.span(spanning, tol), tol)
    else:
        decomposition = lebesgue_decompose(a, b, tol)
    return builder.decomposition_report(decomposition)


def cmd_rnderiv(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("rnderiv", mode, tol)
    a, b1 = _load_pair(builder, args, ("a", "b1"))
    derivative = rn_derivative(a, b1, tol)
    # B1 A⁺ already vanishes off ran A, so it is the zero extension
    minimal = rn_minimality_check(derivative, derivative.representative, tol)
    return builder.rn_report(derivative, minimal)


def cmd_closure(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("closure", mode, tol)
    a, b = _load_pair(builder, args)
    pair = OperatorPair(a, b)
    result = closure(pair, tol)
    checks = {"closure_equals_relation": closure_matches(pair, tol)}
    contractions = None
    if mode == FLOAT:
        cp = canonical_contractions(pair, tol)
        checks["canonical_pair_is_polar_factor"] = check_polar(cp, tol)
        checks["operator_part_is_operator"] = is_operator(closure_operator_part(pair, tol), tol)
        contractions = {"c_a": cp.c_a, "c_b": cp.c_b}
    return builder.closure_report(result, is_operator(result, tol), checks, contractions)


def cmd_adjoint(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("adjoint", mode, tol)
    a, b = _load_pair(builder, args)
    pair = OperatorPair(a, b)
    adjoint = adjoint_rel(from_pair(a, b, tol), tol)
    checks = {"algebraic_form_agrees": relations_equal(adjoint, adjoint_rel_algebraic(a, b, tol), tol)}
    if is_q_normalized(pair, tol):
        checks["block_formula_agrees"] = relations_equal(adjoint, adjoint_block_representation(pair, tol), tol)
    if mode == FLOAT and is_normalized(pair, tol):
        parametrized = adjoint_param_representation(pair, tol).relation(tol)
        checks["parametrization_agrees"] = relations_equal(adjoint, parametrized, tol)
    return builder.adjoint_report(adjoint, checks)


def cmd_tower(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    # towers are always exact
    builder = ReportBuilder("tower", EXACT, tol)
    tower = load_tower(Path(args.config))
    if args.max_dim is not None:
        tower = dataclasses.replace(tower, max_dim=args.max_dim)
    builder.add_config_input("config", Path(args.config))
    result = run_tower(tower, tol, cross_validate=not args.no_cross_validate)
    return builder.tower_report(tower, result)


def cmd_validate(args: argparse.Namespace, mode: str, tol: Tolerance) -> Dict[str, Any]:
    builder = ReportBuilder("validate", mode, tol)
    results = run_batteries(args.only, args.scale, args.seed, tol)
    return builder.validation_report([r.to_dict() for r in results])


def cmd_schema(args: argparse.Namespace) -> str:
    return json.dumps(load_schema(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


COMMANDS = {
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "rnderiv": cmd_rnderiv,
    "closure": cmd_closure,
    "adjoint": cmd_adjoint,
    "tower": cmd_tower,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _describe(value: Any) -> Optional[str]:
    if isinstance(value, dict) and "entries" in value:
        return f"{value['rows']}x{value['cols']} {value['mode']} matrix {value['entries']}"
    if isinstance(value, dict) and "basis" in value:
        return f"rank {value['rank']} subspace of R^{value['ambient_dim']}"
    if value is None or isinstance(value, (bool, int, float, str)):
        return str(value)
    return None


def render_pretty(report: Dict[str, Any]) -> str:
    lines = [f"🔬 OpRange {report['command']} ({report['mode']} mode)", "=" * 40]
    for key in sorted(report["results"]):
        described = _describe(report["results"][key])
        if described is not None:
            lines.append(f"   {key}: {described}")
    if report.get("finite_dim_collapse") is not None:
        lines.append(f"   finite_dim_collapse: {report['finite_dim_collapse']}")
    lines.append("")
    lines.append("📋 Verification:")
    for name, ok in sorted(report["verification"].items()):
        lines.append(f"   {'✅' if ok else '❌'} {name}")
    return "\n".join(lines) + "\n"


def emit(report: Dict[str, Any], args: argparse.Namespace) -> None:
    text = render_pretty(report) if args.emit == "pretty" else render_report(report)
    sys.stdout.write(text)
    if args.out:
        save_report(report, Path(args.out))


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--mode', choices=list(MODES),
                        help=f'Arithmetic mode (default: ${MODE_ENV_VAR} or exact)')
    common.add_argument('--rank-rtol', type=float, default=None,
                        help='Relative singular-value cut-off for float rank decisions')
    common.add_argument('--eq-atol', type=float, default=1e-9,
                        help='Absolute equality tolerance, scaled by max(1, norm)')
    common.add_argument('--emit', choices=['json', 'pretty'], default='json', help='Output style')
    common.add_argument('--out', help='Also write the JSON report to this path')
    common.add_argument('--format', choices=list(FORMATS), help='Matrix file format (default: from suffix)')
    common.add_argument('--verbose', action='store_true', help='Log progress (INFO)')
    common.add_argument('--debug', action='store_true', help='Log every numerical decision (DEBUG)')

    parser = argparse.ArgumentParser(
        description='OpRange operator pair toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Classify B relative to A (exact rational mode)
  python oprange_cli.py classify a.csv b.csv

  # Lebesgue decomposition, pretty output
  python oprange_cli.py decompose a.csv b.csv --emit pretty

  # Lebesgue-type decomposition indexed by the span of L's columns
  python oprange_cli.py decompose a.csv b.csv --l-subspace l.csv

  # Radon-Nikodym derivative of an almost dominated B1
  python oprange_cli.py rnderiv a.csv b1.csv

  # Closure through the canonical contractions (float mode)
  python oprange_cli.py closure a.mtx b.mtx --mode float

  # Run the reciprocal/unit tower
  python oprange_cli.py tower ../sources/towers/reciprocal_unit.json

  # Quick validation run with a tenth of the cases
  python oprange_cli.py validate --scale 0.1

  # Print the report schema
  python oprange_cli.py schema
"""
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    for name, help_text in (('classify', 'Dominated / almost dominated / singular verdicts'),
                            ('decompose', 'Lebesgue or Lebesgue-type decomposition of B'),
                            ('closure', 'Closure of L(A,B)'),
                            ('adjoint', 'Adjoint relation L(A,B)*')):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument('a', help='Matrix file for A')
        sub.add_argument('b', help='Matrix file for B')
        if name == 'decompose':
            sub.add_argument('--l-subspace', help='Matrix file whose columns span L')

    rn_parser = subparsers.add_parser('rnderiv', parents=[common], help='Radon-Nikodym derivative R(A, B1)')
    rn_parser.add_argument('a', help='Matrix file for A')
    rn_parser.add_argument('b1', help='Matrix file for B1 (almost dominated by A)')

    tower_parser = subparsers.add_parser('tower', parents=[common], help='Run a diagonal tower')
    tower_parser.add_argument('config', help='Tower JSON definition')
    tower_parser.add_argument('--max-dim', type=int, help='Override max_dim from the config')
    tower_parser.add_argument('--no-cross-validate', action='store_true',
                              help='Skip the per-section domination test')

    val_parser = subparsers.add_parser('validate', parents=[common], help='Run the validation batteries')
    val_parser.add_argument('--scale', type=float, default=1.0, help='Multiply every case count')
    val_parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Base seed')
    val_parser.add_argument('--only', nargs='+', choices=list(BATTERIES), help='Run only these batteries')

    schema_parser = subparsers.add_parser('schema', help='Print the report JSON schema')
    schema_parser.add_argument('--out', help=f'Write the schema here instead of stdout ({SCHEMA_PATH.name})')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI interface; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_OK

    configure_logging(getattr(args, 'verbose', False), getattr(args, 'debug', False))

    try:
        if args.command == 'schema':
            text = cmd_schema(args)
            if args.out:
                Path(args.out).parent.mkdir(parents=True, exist_ok=True)
                Path(args.out).write_text(text, encoding='utf-8')
            else:
                sys.stdout.write(text)
            return EXIT_OK

        mode = resolve_mode(args.mode)
        tol = tolerance_from_args(args)
        logger.info("running %s in %s mode", args.command, mode)
        report = COMMANDS[args.command](args, mode, tol)
        emit(report, args)
        if not all(report["verification"].values()) and args.command == 'validate':
            return EXIT_INTERNAL_ERROR
        return EXIT_OK
    except FileNotFoundError as e:
        sys.stdout.write(render_report(error_report(InputFileError(f"File not found: {e.filename}"))))
        return EXIT_USER_ERROR
    except OperatorRangeError as e:
        logger.debug("user error", exc_info=True)
        sys.stdout.write(render_report(error_report(e)))
        return EXIT_USER_ERROR
    except InternalConsistencyError as e:
        logger.error("internal consistency failure: %s", e)
        sys.stdout.write(render_report(error_report(e)))
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
