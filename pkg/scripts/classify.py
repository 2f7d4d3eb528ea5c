#!/usr/bin/env python3
"""
OpRange Classification
Decides how B relates to A: dominated, almost dominated, singular.

Every property is decided by several equivalent criteria that are evaluated
independently and must agree; a disagreement raises CriteriaDisagree.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from core_linalg import (
    DEFAULT_TOLERANCE,
    EXACT,
    Subspace,
    Tolerance,
    common_mode,
    exact_rank,
    is_psd,
    is_zero_matrix,
    kernel,
    mat_mul,
    pinv,
    preimage,
    product,
    psd_order_leq,
    range_space,
    spectral_norm,
    subspace_intersect,
    subspace_sum,
    to_float,
)
from linrel import adjoint_rel, from_pair, is_operator
from oprange_errors import CriteriaDisagree, DimensionMismatch
from pairs import OperatorPair, canonical_contractions, closure

logger = logging.getLogger(__name__)

# Configuration
SEARCH_START_MARGIN = Fraction(1, 2 ** 20)
SEARCH_ATTEMPTS = 40
BISECTION_RELATIVE_WIDTH = Fraction(1, 2 ** 40)
SNAP_MAX_DENOMINATOR = 10 ** 6
FLOAT_SEARCH_MARGIN = 1e-6
# the float PSD floor grows with c², so a long float search would always pass
FLOAT_SEARCH_ATTEMPTS = 2


class CriterionVerdict(NamedTuple):
    property: str
    criterion: str
    verdict: bool

    def to_dict(self) -> dict:
        return {"property": self.property, "criterion": self.criterion, "verdict": self.verdict}


@dataclass(frozen=True)
class DominationReport:
    """Verdict on ‖Bf‖ ≤ c‖Af‖ plus the least constant when it holds.

    In exact mode the constant is either certified as a rational (c² passes
    the PSD test and c²A*A - B*B loses rank against A) or enclosed by
    squared_interval = (lo, hi) with lo failing and hi passing.
    """

    dominated: bool
    constant: Optional[float]
    trace: List[CriterionVerdict]
    exact_constant: Optional[Fraction] = None
    squared_interval: Optional[Tuple[Fraction, Fraction]] = None
    everywhere_defined: bool = False

    @property
    def certified_exact(self) -> bool:
        return self.exact_constant is not None


@dataclass
class Classification:
    d_subspace: Subspace
    r_subspace: Subspace
    dominated: bool
    domination_constant: Optional[float]
    almost_dominated: bool
    singular: bool
    criteria_trace: List[CriterionVerdict] = field(default_factory=list)
    finite_dim_collapse: bool = True
    everywhere_defined: bool = False
    domination: Optional[DominationReport] = None
    mode: str = EXACT


def _check_pair(a: np.ndarray, b: np.ndarray) -> str:
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"A has {a.shape[1]} columns but B has {b.shape[1]}")
    return common_mode(a, b)


def _agree(name: str, trace: List[CriterionVerdict]) -> bool:
    verdicts = {entry.verdict for entry in trace if entry.property == name}
    for entry in trace:
        logger.debug("%s / %s -> %s", entry.property, entry.criterion, entry.verdict)
    if len(verdicts) != 1:
        raise CriteriaDisagree(
            f"Equivalent criteria for '{name}' disagree",
            [entry.to_dict() for entry in trace],
        )
    return verdicts.pop()


def d_subspace(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """D(A,B) = (B*)^{-1}(ran A*) ⊆ K"""
    _check_pair(a, b)
    return preimage(b.T, range_space(a.T, tol), tol)


def r_subspace(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """R(A,B) = (A*)^{-1}(ran B*) ⊆ H"""
    _check_pair(a, b)
    return preimage(a.T, range_space(b.T, tol), tol)


# ---------------------------------------------------------------------------
# Domination
# ---------------------------------------------------------------------------

def _norm_estimate(a: np.ndarray, b: np.ndarray, mode: str, tol: Tolerance) -> float:
    """‖B A⁺‖₂, with the product formed exactly in exact mode"""
    if mode == EXACT:
        return spectral_norm(to_float(mat_mul(b, pinv(a))))
    return spectral_norm(b @ pinv(a, tol))


def _passes(c2, gram_a: np.ndarray, gram_b: np.ndarray, tol: Tolerance) -> bool:
    return psd_order_leq(gram_b, c2 * gram_a, tol)


def _psd_search(gram_a: np.ndarray, gram_b: np.ndarray, estimate: float, mode: str,
                tol: Tolerance) -> Optional[object]:
    """Some c² with B*B ⪯ c²A*A, or None when the search is exhausted"""
    if mode == EXACT:
        c2 = Fraction(estimate) ** 2 * (1 + SEARCH_START_MARGIN) if estimate > 0 else Fraction(1)
    else:
        c2 = estimate ** 2 * (1 + FLOAT_SEARCH_MARGIN) if estimate > 0 else 1.0
    attempts = SEARCH_ATTEMPTS if mode == EXACT else FLOAT_SEARCH_ATTEMPTS
    for _ in range(attempts):
        if _passes(c2, gram_a, gram_b, tol):
            return c2
        c2 = c2 * 4
    return None


def _certify(candidate: Fraction, gram_a: np.ndarray, gram_b: np.ndarray, rank_a: int) -> bool:
    # least c: PSD at c², and c²A*A - B*B is singular on ran A*
    gap = candidate ** 2 * gram_a - gram_b
    return is_psd(gap) and exact_rank(gap) < rank_a


def _bisect(hi: Fraction, gram_a: np.ndarray, gram_b: np.ndarray, tol: Tolerance) -> Tuple[Fraction, Fraction]:
    lo = hi * (1 - SEARCH_START_MARGIN) ** 2
    while _passes(lo, gram_a, gram_b, tol):
        hi = lo
        lo = lo / 2
    while hi - lo > BISECTION_RELATIVE_WIDTH * hi:
        mid = (lo + hi) / 2
        if _passes(mid, gram_a, gram_b, tol):
            hi = mid
        else:
            lo = mid
    logger.debug("bisection bracket for c^2: [%s, %s]", float(lo), float(hi))
    return lo, hi


def domination_report(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> DominationReport:
    mode = _check_pair(a, b)
    gram_a = mat_mul(a.T, a)
    gram_b = mat_mul(b.T, b)
    estimate = _norm_estimate(a, b, mode, tol)

    trace = [
        CriterionVerdict("dominated", "range_inclusion",
                         range_space(a.T, tol).contains(range_space(b.T, tol), tol)),
    ]
    found = _psd_search(gram_a, gram_b, estimate, mode, tol)
    trace.append(CriterionVerdict("dominated", "psd_order", found is not None))
    trace.append(CriterionVerdict("dominated", "bounded_operator_relation",
                                  is_operator(from_pair(a, b, tol), tol)))
    trace.append(CriterionVerdict("dominated", "adjoint_domain_full", d_subspace(a, b, tol).is_full()))
    dominated = _agree("dominated", trace)
    if not dominated:
        return DominationReport(False, None, trace)

    everywhere = range_space(a, tol).is_full()
    if mode != EXACT:
        return DominationReport(True, estimate, trace, everywhere_defined=everywhere)

    if is_zero_matrix(b):
        zero = Fraction(0)
        return DominationReport(True, 0.0, trace, zero, (zero, zero), everywhere)
    rank_a = exact_rank(a)
    candidate = Fraction(estimate).limit_denominator(SNAP_MAX_DENOMINATOR)
    if candidate > 0 and _certify(candidate, gram_a, gram_b, rank_a):
        c2 = candidate ** 2
        return DominationReport(True, float(candidate), trace, candidate, (c2, c2), everywhere)
    lo, hi = _bisect(found, gram_a, gram_b, tol)
    return DominationReport(True, math.sqrt(float(hi)), trace, None, (lo, hi), everywhere)


def is_dominated(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[bool, Optional[float]]:
    report = domination_report(a, b, tol)
    return report.dominated, report.constant


# ---------------------------------------------------------------------------
# Almost domination and singularity
# ---------------------------------------------------------------------------

def _almost_domination_trace(a: np.ndarray, b: np.ndarray, tol: Tolerance) -> List[CriterionVerdict]:
    trace = [
        CriterionVerdict("almost_dominated", "adjoint_domain_dense", d_subspace(a, b, tol).is_full()),
        CriterionVerdict("almost_dominated", "kernel_inclusion",
                         kernel(b, tol).contains(kernel(a, tol), tol)),
        CriterionVerdict("almost_dominated", "relation_is_operator", is_operator(from_pair(a, b, tol), tol)),
    ]
    if common_mode(a, b) != EXACT:
        cp = canonical_contractions(OperatorPair(a, b), tol)
        trace.append(CriterionVerdict("almost_dominated", "canonical_kernel_inclusion",
                                      kernel(cp.c_b, tol).contains(kernel(cp.c_a, tol), tol)))
        trace.append(CriterionVerdict("almost_dominated", "closure_is_operator",
                                      is_operator(from_pair(cp.c_a, cp.c_b, tol), tol)))
    return trace


def _singularity_trace(a: np.ndarray, b: np.ndarray, tol: Tolerance) -> List[CriterionVerdict]:
    relation = from_pair(a, b, tol)
    pair = OperatorPair(a, b)
    trace = [
        CriterionVerdict("singular", "range_intersection_trivial",
                         subspace_intersect(range_space(a.T, tol), range_space(b.T, tol), tol).is_zero()),
        CriterionVerdict("singular", "adjoint_is_product",
                         adjoint_rel(relation, tol).graph.equals(
                             product(kernel(b.T, tol), kernel(a.T, tol), tol), tol)),
        CriterionVerdict("singular", "closure_is_product",
                         closure(pair, tol).graph.equals(
                             product(range_space(a, tol), range_space(b, tol), tol), tol)),
        CriterionVerdict("singular", "adjoint_domain_in_kernel",
                         kernel(b.T, tol).contains(d_subspace(a, b, tol), tol)),
        CriterionVerdict("singular", "r_subspace_in_kernel",
                         kernel(a.T, tol).contains(r_subspace(a, b, tol), tol)),
    ]
    if common_mode(a, b) != EXACT:
        cp = canonical_contractions(pair, tol)
        trace.append(CriterionVerdict("singular", "canonical_kernels_span",
                                      subspace_sum(kernel(cp.c_a, tol), kernel(cp.c_b, tol), tol).is_full()))
    return trace


def is_almost_dominated(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    _check_pair(a, b)
    return _agree("almost_dominated", _almost_domination_trace(a, b, tol))


def is_singular(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    _check_pair(a, b)
    return _agree("singular", _singularity_trace(a, b, tol))


def classify(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Classification:
    mode = _check_pair(a, b)
    domination = domination_report(a, b, tol)
    almost_trace = _almost_domination_trace(a, b, tol)
    singular_trace = _singularity_trace(a, b, tol)
    trace = domination.trace + almost_trace + singular_trace

    almost = _agree("almost_dominated", almost_trace)
    singular = _agree("singular", singular_trace)
    if domination.dominated != almost:
        raise CriteriaDisagree("Dominated and almost dominated differ in finite dimensions",
                               [entry.to_dict() for entry in trace])
    if singular and almost:
        support = range_space(OperatorPair(a, b).gram, tol).projection()
        if not is_zero_matrix(mat_mul(b, support), tol):
            raise CriteriaDisagree("Singular and almost dominated, but B is nonzero on ran(gram)",
                                   [entry.to_dict() for entry in trace])

    logger.info("classified %s pair: dominated=%s almost=%s singular=%s",
                mode, domination.dominated, almost, singular)
    return Classification(
        d_subspace=d_subspace(a, b, tol),
        r_subspace=r_subspace(a, b, tol),
        dominated=domination.dominated,
        domination_constant=domination.constant,
        almost_dominated=almost,
        singular=singular,
        criteria_trace=trace,
        everywhere_defined=domination.everywhere_defined,
        domination=domination,
        mode=mode,
    )
