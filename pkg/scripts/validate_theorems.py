#!/usr/bin/env python3
"""
OpRange Theorem Validation Suite
Seeded batteries over random rational and float pairs that check the
structural identities of the toolkit end to end: domination criteria,
adjoint duality, the closure formula, graph projections, Lebesgue
decompositions, Radon-Nikodym derivatives and the tower distinction.
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

# Add current directory to path for imports
sys.path.append(str(Path(__file__).parent))

from classify import classify, domination_report
from core_linalg import (
    DEFAULT_TOLERANCE,
    EXACT,
    FLOAT,
    Tolerance,
    as_matrix,
    is_zero_matrix,
    mat_mul,
    matrices_equal,
    psd_order_leq,
    range_space,
    spectral_norm,
)
from lebesgue import (
    lebesgue_decompose,
    lebesgue_type_decompose,
    rn_derivative,
    rn_minimality_check,
    rn_representation_invariance,
)
from linrel import adjoint_rel, adjoint_rel_algebraic, from_pair, relations_equal
from oprange_errors import InternalConsistencyError, InvalidL, OperatorRangeError
from pair_corpus import (
    competitor_factorizations,
    normalized_pair,
    random_invertible_rational,
    random_nonzero_subspace,
    random_pair,
)
from pairs import (
    OperatorPair,
    adjoint_graph_projection,
    canonical_contractions,
    check_polar,
    closure_matches,
    column,
    graph_projection,
)
from report_builder import ReportBuilder, render_report
from towers import TOWERS_DIR, load_tower, run_tower

logger = logging.getLogger(__name__)

# Configuration
DEFAULT_SEED = 20240917
CLOSURE_ATOL = 1e-9
PROJECTION_FLOAT_ATOL = 1e-10
COMPETITORS_PER_CASE = 10
MAX_REPORTED_FAILURES = 20
INVALID_L_REASONS = ("outside-adjoint-domain-closure", "meets-adjoint-domain")


@dataclass
class BatteryResult:
    name: str
    cases: int
    failures: int
    budget_seconds: float
    failed_cases: List[int] = field(default_factory=list)
    over_budget: bool = False

    @property
    def passed(self) -> bool:
        return self.failures == 0 and not self.over_budget

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "failures": self.failures,
            "passed": self.passed,
            "budget_seconds": self.budget_seconds,
            "over_budget": self.over_budget,
            "failed_cases": self.failed_cases,
        }


def _run_cases(name: str, count: int, seed: int, budget: float,
               case: Callable[[np.random.Generator], bool]) -> BatteryResult:
    """Every case gets its own generator seeded by (seed, index) so failures replay alone"""
    started = time.perf_counter()
    failed: List[int] = []
    for index in range(count):
        rng = np.random.default_rng([seed, index])
        try:
            ok = case(rng)
        except (OperatorRangeError, InternalConsistencyError) as e:
            logger.warning("%s case %d raised %s: %s", name, index, type(e).__name__, e)
            ok = False
        if not ok:
            failed.append(index)
    elapsed = time.perf_counter() - started
    over_budget = elapsed > budget
    if over_budget:
        logger.error("%s took %.1fs, over its %.1fs budget", name, elapsed, budget)
    logger.info("%s: %d/%d cases passed in %.2fs", name, count - len(failed), count, elapsed)
    return BatteryResult(name, count, len(failed), budget, failed[:MAX_REPORTED_FAILURES], over_budget)


# ---------------------------------------------------------------------------
# Batteries
# ---------------------------------------------------------------------------

def battery_douglas(count: int = 1000, seed: int = DEFAULT_SEED,
                    tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Range inclusion and the PSD order agree; the constant encloses the least c"""
    def case(rng):
        a, b = random_pair(rng, EXACT)
        report = domination_report(a, b, tol)
        if not report.dominated:
            return True
        lo, hi = report.squared_interval
        gram_a, gram_b = mat_mul(a.T, a), mat_mul(b.T, b)
        if not psd_order_leq(gram_b, hi * gram_a, tol):
            return False
        return lo == hi or not psd_order_leq(gram_b, lo * gram_a, tol)
    return _run_cases("douglas_equivalence", count, seed, 60.0, case)


def battery_adjoint_duality(count: int = 1000, seed: int = DEFAULT_SEED,
                            tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    def case(rng):
        a, b = random_pair(rng, EXACT)
        geometric = adjoint_rel(from_pair(a, b, tol), tol)
        return relations_equal(geometric, adjoint_rel_algebraic(a, b, tol), tol)
    return _run_cases("adjoint_duality", count, seed, 60.0, case)


def battery_closure(count: int = 200, seed: int = DEFAULT_SEED,
                    tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """graph(A,B) and graph(C_A,C_B) share a projection; the canonical pair is a partial isometry"""
    def case(rng):
        a, b = random_pair(rng, FLOAT)
        p = OperatorPair(a, b)
        cp = canonical_contractions(p, tol)
        original = range_space(column(a, b), tol).projection()
        canonical = range_space(column(cp.c_a, cp.c_b), tol).projection()
        support = range_space(column(a, b).T, tol).projection()
        identity_gap = spectral_norm(cp.c_a.T @ cp.c_a + cp.c_b.T @ cp.c_b - support)
        return (spectral_norm(original - canonical) <= CLOSURE_ATOL
                and identity_gap <= CLOSURE_ATOL
                and check_polar(cp, tol)
                and closure_matches(p, tol))
    return _run_cases("closure_theorem", count, seed, 60.0, case)


def battery_graph_projections(count: int = 200, seed: int = DEFAULT_SEED,
                              tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Block formulas for the graph projections of L(A,B) and L(A,B)* under A*A + B*B = Q"""
    def case(rng):
        dim_h, dim_k = (int(n) for n in rng.integers(1, 4, size=2))
        dim_e = int(rng.integers(1, dim_h + dim_k + 1))
        q_rank = int(rng.integers(0, dim_e + 1)) if rng.random() < 0.5 else None
        mode = EXACT if rng.random() < 0.5 else FLOAT
        p = OperatorPair(*normalized_pair(rng, dim_e, dim_h, dim_k, mode, q_rank))
        relation = from_pair(p.a, p.b, tol)
        expected = relation.graph.projection()
        expected_adjoint = adjoint_rel(relation, tol).graph.projection()
        got, got_adjoint = graph_projection(p, tol), adjoint_graph_projection(p, tol)
        if mode == EXACT:
            return bool(np.all(got == expected)) and bool(np.all(got_adjoint == expected_adjoint))
        return (spectral_norm(got - expected) <= PROJECTION_FLOAT_ATOL
                and spectral_norm(got_adjoint - expected_adjoint) <= PROJECTION_FLOAT_ATOL)
    return _run_cases("graph_projections", count, seed, 60.0, case)


def battery_lebesgue(count: int = 1000, seed: int = DEFAULT_SEED,
                     tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Decomposition checks plus idempotence: each part decomposes to itself"""
    def case(rng):
        a, b = random_pair(rng, EXACT)
        decomposition = lebesgue_decompose(a, b, tol)
        regular_again = lebesgue_decompose(a, decomposition.b_reg, tol)
        singular_again = lebesgue_decompose(a, decomposition.b_sing, tol)
        return (matrices_equal(decomposition.b_reg + decomposition.b_sing, b)
                and matrices_equal(regular_again.b_reg, decomposition.b_reg)
                and is_zero_matrix(regular_again.b_sing)
                and is_zero_matrix(singular_again.b_reg)
                and matrices_equal(singular_again.b_sing, decomposition.b_sing))
    return _run_cases("lebesgue_decomposition", count, seed, 120.0, case)


def battery_lebesgue_type(count: int = 500, seed: int = DEFAULT_SEED,
                          tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Only L = {0} indexes a decomposition; every nonzero candidate is rejected"""
    def case(rng):
        a, b = random_pair(rng, EXACT)
        candidate = random_nonzero_subspace(rng, b.shape[0], EXACT)
        try:
            lebesgue_type_decompose(a, b, candidate, tol)
        except InvalidL as e:
            return e.reason in INVALID_L_REASONS
        return False
    return _run_cases("lebesgue_type_rejection", count, seed, 60.0, case)


def battery_rn_derivative(count: int = 200, seed: int = DEFAULT_SEED,
                          tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Both routes agree (checked inside rn_derivative), minimality, representation invariance"""
    def case(rng):
        a, b1 = random_pair(rng, FLOAT, style="dominated")
        derivative = rn_derivative(a, b1, tol)
        if not derivative.routes_agree:
            return False
        competitors = competitor_factorizations(derivative.representative, derivative.domain,
                                                COMPETITORS_PER_CASE, rng)
        if not all(rn_minimality_check(derivative, c, tol) for c in competitors):
            return False
        a_exact, b_exact = random_pair(rng, EXACT, style="dominated")
        g = random_invertible_rational(rng, a_exact.shape[1])
        return rn_representation_invariance(a_exact, b_exact, mat_mul(a_exact, g), mat_mul(b_exact, g), tol)
    return _run_cases("rn_derivative", count, seed, 60.0, case)


def _m(rows) -> np.ndarray:
    return as_matrix(rows, EXACT)


def battery_worked_cases(count: int = 1, seed: int = DEFAULT_SEED,
                         tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Hand-derived examples reproduce exactly in rational mode"""
    def case(rng):
        a = _m([[1, 0], [0, 0]])
        mixed = lebesgue_decompose(a, _m([[1, 0], [0, 1]]), tol)
        tilted = lebesgue_decompose(a, _m([[1, 1], [1, 1]]), tol)
        scaled = classify(_m([[1, 0], [0, "1/2"]]), _m([[1, 0], [0, 1]]), tol)
        return all([
            matrices_equal(mixed.b_reg, _m([[1, 0], [0, 0]])),
            matrices_equal(mixed.b_sing, _m([[0, 0], [0, 1]])),
            matrices_equal(rn_derivative(a, mixed.b_reg, tol).representative, _m([[1, 0], [0, 0]])),
            is_zero_matrix(tilted.b_reg),
            classify(a, _m([[1, 1], [1, 1]]), tol).singular,
            scaled.dominated and scaled.domination.exact_constant == Fraction(2),
            matrices_equal(rn_derivative(_m([[1, 0], [0, "1/2"]]), _m([[1, 0], [0, 1]]), tol).representative,
                           _m([[1, 0], [0, 2]])),
        ])
    return _run_cases("worked_cases", count, seed, 5.0, case)


def battery_towers(count: int = 1, seed: int = DEFAULT_SEED,
                   tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """c_n = n for the reciprocal/unit tower at N = 64; c_n = 1 for the unit tower"""
    def case(rng):
        reciprocal = run_tower(load_tower(TOWERS_DIR / "reciprocal_unit.json"), tol)
        unit = run_tower(load_tower(TOWERS_DIR / "unit_unit.json"), tol)
        return (reciprocal.dims[-1] == 64
                and reciprocal.constants == [Fraction(n) for n in reciprocal.dims]
                and all(reciprocal.sections_dominated)
                and all(reciprocal.sections_regular)
                and reciprocal.verdict == "almost-dominated-not-dominated"
                and all(c == 1 for c in unit.constants)
                and unit.verdict == "dominated-limit")
    return _run_cases("tower_distinction", count, seed, 5.0, case)


def battery_report_determinism(count: int = 1, seed: int = DEFAULT_SEED,
                               tol: Tolerance = DEFAULT_TOLERANCE) -> BatteryResult:
    """Two builds of the same classification report render to identical bytes"""
    def case(rng):
        a, b = _m([[1, 0], [0, 0]]), _m([[0, 0], [0, 1]])
        rendered = []
        for _ in range(2):
            builder = ReportBuilder("classify", EXACT, tol)
            builder.add_matrix_input("a", Path("a.csv"), a)
            builder.add_matrix_input("b", Path("b.csv"), b)
            rendered.append(render_report(builder.classification_report(classify(a, b, tol))))
        return rendered[0] == rendered[1]
    return _run_cases("report_determinism", count, seed, 5.0, case)


BATTERIES: Dict[str, Callable[..., BatteryResult]] = {
    "douglas_equivalence": battery_douglas,
    "adjoint_duality": battery_adjoint_duality,
    "closure_theorem": battery_closure,
    "graph_projections": battery_graph_projections,
    "lebesgue_decomposition": battery_lebesgue,
    "lebesgue_type_rejection": battery_lebesgue_type,
    "rn_derivative": battery_rn_derivative,
    "worked_cases": battery_worked_cases,
    "tower_distinction": battery_towers,
    "report_determinism": battery_report_determinism,
}

DEFAULT_COUNTS = {
    "douglas_equivalence": 1000,
    "adjoint_duality": 1000,
    "closure_theorem": 200,
    "graph_projections": 200,
    "lebesgue_decomposition": 1000,
    "lebesgue_type_rejection": 500,
    "rn_derivative": 200,
    "worked_cases": 1,
    "tower_distinction": 1,
    "report_determinism": 1,
}


def run_batteries(names: Optional[List[str]] = None, scale: float = 1.0, seed: int = DEFAULT_SEED,
                  tol: Tolerance = DEFAULT_TOLERANCE) -> List[BatteryResult]:
    """Run the named batteries (all by default) with counts scaled by `scale`"""
    selected = names or list(BATTERIES)
    unknown = [n for n in selected if n not in BATTERIES]
    if unknown:
        raise OperatorRangeError(f"Unknown batteries: {unknown}; choose from {list(BATTERIES)}")
    results = []
    for name in selected:
        count = max(1, int(round(DEFAULT_COUNTS[name] * scale)))
        results.append(BATTERIES[name](count=count, seed=seed, tol=tol))
    return results


def main():
    """Run all validation batteries"""
    parser = argparse.ArgumentParser(description='Run the OpRange validation batteries')
    parser.add_argument('--scale', type=float, default=1.0,
                        help='Multiply every case count (e.g. 0.1 for a quick run)')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Base seed')
    parser.add_argument('--only', nargs='+', choices=list(BATTERIES), help='Run only these batteries')
    args = parser.parse_args()

    print("🧪 OpRange Theorem Validation Suite")
    print("Checking structural identities on seeded random pairs")
    print("=" * 60)

    results = run_batteries(args.only, args.scale, args.seed)

    print("\n🎯 Overall Validation Results:")
    print("=" * 40)
    passed = 0
    for result in results:
        status = "✅ PASS" if result.passed else "❌ FAIL"
        print(f"   {status} {result.name.replace('_', ' ').title()} ({result.cases - result.failures}/{result.cases})")
        if result.failed_cases:
            print(f"      ⚠️  failing case indices: {result.failed_cases}")
        if result.over_budget:
            print(f"      ⏱️  over the {result.budget_seconds:.0f}s budget")
        if result.passed:
            passed += 1

    total = len(results)
    print(f"\n📊 Final Score: {passed}/{total} ({passed/total*100:.1f}%)")
    if passed == total:
        print("🎉 Every battery passed")
    else:
        print("⚠️  Some batteries need attention")
    return passed == total


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
