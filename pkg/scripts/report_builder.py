#!/usr/bin/env python3
"""
OpRange Report Builder
Turns classification, decomposition, derivative, closure, adjoint, tower and
validation results into JSON reports that validate against the published
schema in schema/report-schema.json
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import numpy as np

from classify import Classification, DominationReport
from core_linalg import Subspace, Tolerance
from lebesgue import LebesgueDecomposition, RadonNikodymDerivative
from linrel import LinearRelation
from matrix_io import matrix_payload
from oprange_errors import VerificationFailed
from towers import DiagonalTower, TowerReport

logger = logging.getLogger(__name__)

# Configuration
BASE_DIR = Path(__file__).parent.parent
SCHEMA_PATH = BASE_DIR / "schema" / "report-schema.json"
SCHEMA_VERSION = "1.0"


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; rationals become "p/q" strings"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return matrix_payload(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def subspace_payload(subspace: Subspace) -> Dict[str, Any]:
    return {
        "ambient_dim": subspace.ambient_dim,
        "rank": subspace.rank,
        "mode": subspace.mode,
        "basis": matrix_payload(subspace.basis),
    }


def relation_payload(relation: LinearRelation) -> Dict[str, Any]:
    return {
        "dim_h": relation.dim_h,
        "dim_k": relation.dim_k,
        "mode": relation.mode,
        "graph": subspace_payload(relation.graph),
        "summary": relation.summary(),
    }


def load_schema(path: Path = SCHEMA_PATH) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def render_report(report: Dict[str, Any]) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def validate_report(report: Dict[str, Any], schema: Optional[Dict[str, Any]] = None) -> None:
    schema = schema if schema is not None else load_schema()
    try:
        jsonschema.validate(instance=report, schema=schema)
    except jsonschema.ValidationError as e:
        location = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise VerificationFailed(f"Report violates the schema at {location}: {e.message}", [location]) from e


def error_report(error: Exception) -> Dict[str, Any]:
    return {"error": to_jsonable(error.to_dict())}


class ReportBuilder:
    """Collects inputs for one command and assembles its report"""

    def __init__(self, command: str, mode: str, tol: Tolerance):
        self.command = command
        self.mode = mode
        self.tol = tol
        self.inputs: Dict[str, Any] = {}

    def add_matrix_input(self, name: str, path: Path, matrix: np.ndarray) -> None:
        self.inputs[name] = {
            "path": str(path),
            "rows": int(matrix.shape[0]),
            "cols": int(matrix.shape[1]),
            "mode": self.mode,
        }

    def add_config_input(self, name: str, path: Path) -> None:
        self.inputs[name] = {"path": str(path)}

    def build_report(self, results: Dict[str, Any], verification: Dict[str, bool],
                     finite_dim_collapse: Optional[bool] = None) -> Dict[str, Any]:
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "mode": self.mode,
            "inputs": self.inputs,
            "tolerances": self.tol.to_dict(),
            "results": results,
            "verification": verification,
            "finite_dim_collapse": finite_dim_collapse,
        }
        report = to_jsonable(report)
        validate_report(report)
        return report

    # -- per-command payloads ------------------------------------------------

    def classification_report(self, result: Classification) -> Dict[str, Any]:
        results = {
            "dominated": result.dominated,
            "domination_constant": result.domination_constant,
            "almost_dominated": result.almost_dominated,
            "singular": result.singular,
            "everywhere_defined": result.everywhere_defined,
            "d_subspace": subspace_payload(result.d_subspace),
            "r_subspace": subspace_payload(result.r_subspace),
            "domination": domination_payload(result.domination),
            "criteria_trace": [entry.to_dict() for entry in result.criteria_trace],
        }
        verification = {
            f"{name}_criteria_agree": len({e.verdict for e in result.criteria_trace if e.property == name}) == 1
            for name in sorted({e.property for e in result.criteria_trace})
        }
        verification["dominated_matches_almost_dominated"] = result.dominated == result.almost_dominated
        return self.build_report(results, verification, result.finite_dim_collapse)

    def decomposition_report(self, result: LebesgueDecomposition) -> Dict[str, Any]:
        results = {
            "b_reg": result.b_reg,
            "b_sing": result.b_sing,
            "projector": result.projector,
            "m_subspace": subspace_payload(result.m_subspace),
            "l_subspace": subspace_payload(result.l_subspace),
            "unique": result.unique,
            "uniqueness": result.uniqueness,
        }
        return self.build_report(results, dict(result.verification), True)

    def rn_report(self, result: RadonNikodymDerivative, minimal: bool) -> Dict[str, Any]:
        results = {
            "representative": result.representative,
            "domain": subspace_payload(result.domain),
            "bounded": result.bounded,
            "bound": result.bound,
            "graph": relation_payload(result.graph),
            "second_route": result.second_route,
            "route_drift": result.route_drift,
        }
        verification = {"routes_agree": result.routes_agree, "canonical_extension_minimal": minimal}
        return self.build_report(results, verification, result.finite_dim_collapse)

    def closure_report(self, closure: LinearRelation, regular: bool, checks: Dict[str, bool],
                       contractions: Optional[Dict[str, np.ndarray]] = None) -> Dict[str, Any]:
        results = {"closure": relation_payload(closure), "regular": regular}
        if contractions:
            results["canonical_contractions"] = contractions
        return self.build_report(results, checks)

    def adjoint_report(self, adjoint: LinearRelation, checks: Dict[str, bool]) -> Dict[str, Any]:
        return self.build_report({"adjoint": relation_payload(adjoint)}, checks)

    def tower_report(self, tower: DiagonalTower, result: TowerReport) -> Dict[str, Any]:
        results = {"tower": tower.to_dict(), **result.to_dict()}
        constants = result.constants
        finite = [c for c in constants if c is not None]
        verification = {
            "cross_validated": result.cross_validated,
            "constants_monotone": all(x <= y for x, y in zip(finite, finite[1:]))
            and all(c is None for c in constants[len(finite):]),
        }
        return self.build_report(results, verification)

    def validation_report(self, batteries: List[Dict[str, Any]]) -> Dict[str, Any]:
        verification = {b["name"]: b["passed"] for b in batteries}
        return self.build_report({"batteries": batteries}, verification)


def domination_payload(report: Optional[DominationReport]) -> Optional[Dict[str, Any]]:
    if report is None:
        return None
    return {
        "dominated": report.dominated,
        "constant": report.constant,
        "exact_constant": report.exact_constant,
        "certified_exact": report.certified_exact,
        "squared_interval": list(report.squared_interval) if report.squared_interval else None,
        "everywhere_defined": report.everywhere_defined,
    }


def save_report(report: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(render_report(report))
    logger.info("report written to %s", path)
    return path
