#!/usr/bin/env python3
"""
OpRange Lebesgue Decompositions
B = B_reg + B_sing relative to A, Lebesgue-type decompositions indexed by a
subspace L, and Radon-Nikodym derivatives R(A, B1) = L(A, B1)**.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from classify import classify, d_subspace, domination_report, is_almost_dominated
from core_linalg import (
    DEFAULT_TOLERANCE,
    EXACT,
    Subspace,
    Tolerance,
    common_mode,
    identity,
    is_zero_matrix,
    mat_mul,
    matrices_equal,
    orthogonal_complement,
    pinv,
    psd_order_leq,
    range_space,
    require_float,
    spectral_norm,
    subspace_intersect,
    subspace_sum,
    to_float,
)
from linrel import (
    LinearRelation,
    apply_left,
    from_pair,
    graph_of,
    is_operator,
    relation_contains,
    relation_sum,
    relations_equal,
)
from oprange_errors import (
    CriteriaDisagree,
    DimensionMismatch,
    IncompatibleL,
    InvalidL,
    NotAFactorization,
    NotAlmostDominated,
    RelationsDiffer,
    RouteDisagreement,
    VerificationFailed,
)
from pairs import OperatorPair, canonical_contractions, closure, reduce, reduction_basis

logger = logging.getLogger(__name__)

# Configuration
RN_ROUTE_ATOL = 1e-8
QUOTIENT_ROUTE = "canonical_quotient"
GRAPH_ROUTE = "graph_basis"


@dataclass
class LebesgueDecomposition:
    """B = b_reg + b_sing with b_sing = P_M B; for a Lebesgue-type decomposition
    b_reg and b_sing hold B1 and B2"""

    b_reg: np.ndarray
    b_sing: np.ndarray
    projector: np.ndarray
    m_subspace: Subspace
    l_subspace: Subspace
    unique: bool
    verification: Dict[str, bool] = field(default_factory=dict)
    uniqueness: Dict[str, bool] = field(default_factory=dict)
    mode: str = EXACT


@dataclass
class RadonNikodymDerivative:
    graph: LinearRelation
    domain: Subspace
    representative: np.ndarray
    bounded: bool
    bound: Optional[float]
    a: np.ndarray = field(repr=False, default=None)
    b1: np.ndarray = field(repr=False, default=None)
    second_route: str = QUOTIENT_ROUTE
    second_representative: Optional[np.ndarray] = field(repr=False, default=None)
    route_drift: float = 0.0
    routes_agree: bool = True
    finite_dim_collapse: bool = True


def _check_pair(a: np.ndarray, b: np.ndarray) -> str:
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"A has {a.shape[1]} columns but B has {b.shape[1]}")
    return common_mode(a, b)


def _verification(a: np.ndarray, b: np.ndarray, b_reg: np.ndarray, b_sing: np.ndarray,
                  projector: np.ndarray, tol: Tolerance) -> Dict[str, bool]:
    relation = from_pair(a, b, tol)
    complement = identity(b.shape[0], common_mode(a, b)) - projector
    regular = from_pair(a, b_reg, tol)
    singular = from_pair(a, b_sing, tol)
    return {
        "sum_identity": matrices_equal(b_reg + b_sing, b, tol),
        "regular_part_almost_dominated": classify(a, b_reg, tol).almost_dominated,
        "singular_part_singular": classify(a, b_sing, tol).singular,
        "ranges_orthogonal": is_zero_matrix(mat_mul(b_reg.T, b_sing), tol),
        "regular_relation_identity": relations_equal(regular, apply_left(complement, relation, tol), tol),
        "singular_relation_identity": relations_equal(singular, apply_left(projector, relation, tol), tol),
        "relation_sum_identity": relations_equal(relation_sum(regular, singular, tol), relation, tol),
    }


def _raise_on_failures(verification: Dict[str, bool]) -> None:
    failed = [name for name, ok in verification.items() if not ok]
    if failed:
        raise VerificationFailed(f"Decomposition checks failed: {', '.join(failed)}", failed)


def uniqueness_certificate(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE,
                           b_reg: Optional[np.ndarray] = None) -> Dict[str, bool]:
    """Equivalent conditions for a unique Lebesgue-type decomposition; all must agree"""
    if b_reg is None:
        b_reg = lebesgue_decompose(a, b, tol).b_reg
    certificate = {
        # subspaces of a finite-dimensional space are closed
        "adjoint_domain_closed": True,
        "regular_part_dominated": domination_report(a, b_reg, tol).dominated,
        "rn_derivative_bounded": rn_derivative(a, b_reg, tol).bounded,
    }
    if len(set(certificate.values())) != 1:
        raise CriteriaDisagree("Uniqueness conditions disagree",
                               [{"property": "unique", "criterion": k, "verdict": v}
                                for k, v in certificate.items()])
    return certificate


def _decompose_along(a: np.ndarray, b: np.ndarray, m_subspace: Subspace, l_subspace: Subspace,
                     tol: Tolerance) -> LebesgueDecomposition:
    mode = common_mode(a, b)
    projector = m_subspace.projection()
    b_reg = mat_mul(identity(b.shape[0], mode) - projector, b)
    b_sing = mat_mul(projector, b)
    verification = _verification(a, b, b_reg, b_sing, projector, tol)
    _raise_on_failures(verification)
    uniqueness = uniqueness_certificate(a, b, tol, b_reg)
    return LebesgueDecomposition(
        b_reg=b_reg,
        b_sing=b_sing,
        projector=projector,
        m_subspace=m_subspace,
        l_subspace=l_subspace,
        unique=all(uniqueness.values()),
        verification=verification,
        uniqueness=uniqueness,
        mode=mode,
    )


def lebesgue_decompose(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> LebesgueDecomposition:
    """B_reg = (I - P)B, B_sing = PB with P the projection onto D(A,B)^⊥"""
    mode = _check_pair(a, b)
    outside = orthogonal_complement(d_subspace(a, b, tol), tol)
    logger.debug("lebesgue_decompose: D(A,B)^⊥ has rank %d", outside.rank)
    return _decompose_along(a, b, outside, Subspace.zero(b.shape[0], mode), tol)


def validate_l_subspace(a: np.ndarray, b: np.ndarray, l_subspace: Subspace,
                        tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """Check L against dom T* for T = L(A,B); returns D(A,B)"""
    _check_pair(a, b)
    if l_subspace.ambient_dim != b.shape[0]:
        raise DimensionMismatch(f"L lives in R^{l_subspace.ambient_dim}, B maps into R^{b.shape[0]}")
    adjoint_domain = d_subspace(a, b, tol)
    # finite dimensions: dom T* is its own closure
    adjoint_closure = adjoint_domain
    if not l_subspace.is_zero():
        if not adjoint_closure.contains(l_subspace, tol):
            raise InvalidL("L is not contained in the closure of dom T*",
                           reason="outside-adjoint-domain-closure")
        if not subspace_intersect(l_subspace, adjoint_domain, tol).is_zero():
            raise InvalidL("L meets dom T* in a nonzero vector",
                           reason="meets-adjoint-domain")
    l_perp = orthogonal_complement(l_subspace, tol)
    lhs = subspace_intersect(l_perp, adjoint_domain, tol)
    rhs = subspace_intersect(l_perp, adjoint_closure, tol)
    if not lhs.equals(rhs, tol):
        raise IncompatibleL("closure of L^⊥ ∩ D(A,B) differs from L^⊥ ∩ closure of D(A,B)")
    return adjoint_domain


def lebesgue_type_decompose(a: np.ndarray, b: np.ndarray, l_subspace: Subspace,
                            tol: Tolerance = DEFAULT_TOLERANCE) -> LebesgueDecomposition:
    """B1 = (I - P_M)B, B2 = P_M B with M = D(A,B)^⊥ ⊕ L"""
    adjoint_domain = validate_l_subspace(a, b, l_subspace, tol)
    m_subspace = subspace_sum(orthogonal_complement(adjoint_domain, tol), l_subspace, tol)
    decomposition = _decompose_along(a, b, m_subspace, l_subspace, tol)
    reference = lebesgue_decompose(a, b, tol)
    decomposition.verification["optimal_below_regular_part"] = psd_order_leq(
        mat_mul(decomposition.b_reg.T, decomposition.b_reg),
        mat_mul(reference.b_reg.T, reference.b_reg),
        tol,
    )
    _raise_on_failures(decomposition.verification)
    return decomposition


# ---------------------------------------------------------------------------
# Radon-Nikodym derivatives
# ---------------------------------------------------------------------------

def _quotient_route(a: np.ndarray, b1: np.ndarray, tol: Tolerance) -> np.ndarray:
    """C_{B0} C_{A0}⁺ on the reduced canonical pair (float)"""
    reduced, _ = reduce(OperatorPair(a, b1), tol)
    cp = canonical_contractions(reduced, tol)
    return cp.c_b @ pinv(cp.c_a, tol)


def _graph_route(graph: LinearRelation, tol: Tolerance) -> np.ndarray:
    """bottom · top⁺ on the canonical graph basis of the closure"""
    top, bottom = graph.blocks()
    return mat_mul(bottom, pinv(top, tol))


def _route_drift(representative: np.ndarray, second: np.ndarray, domain: Subspace) -> float:
    """‖(R1 - R2) P_ran A‖₂; exactly 0.0 when exact routes agree"""
    difference = mat_mul(representative - second, domain.projection())
    if domain.mode == EXACT:
        return 0.0 if is_zero_matrix(difference) else spectral_norm(difference)
    return spectral_norm(difference)


def rn_derivative(a: np.ndarray, b1: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> RadonNikodymDerivative:
    mode = _check_pair(a, b1)
    if not is_almost_dominated(a, b1, tol):
        raise NotAlmostDominated("B1 is not almost dominated by A")
    graph = closure(OperatorPair(a, b1), tol)
    representative = mat_mul(b1, pinv(a, tol))
    domain = range_space(a, tol)
    if mode == EXACT:
        route, second = GRAPH_ROUTE, _graph_route(graph, tol)
        allowed = 0.0
    else:
        route, second = QUOTIENT_ROUTE, _quotient_route(a, b1, tol)
        allowed = RN_ROUTE_ATOL * max(1.0, spectral_norm(representative), spectral_norm(second))

    drift = _route_drift(representative, second, domain)
    logger.debug("rn_derivative: %s route drift %.3e on ran A", route, drift)
    if drift > allowed:
        raise RouteDisagreement(f"B1 A⁺ and the {route} route differ by {drift:.3e} on ran A")

    bound = spectral_norm(representative)
    return RadonNikodymDerivative(
        graph=graph,
        domain=domain,
        representative=representative,
        bounded=is_operator(graph, tol) and np.isfinite(bound),
        bound=bound,
        a=a,
        b1=b1,
        second_route=route,
        second_representative=second,
        route_drift=drift,
        routes_agree=drift <= allowed,
    )


def rn_minimality_check(derivative: RadonNikodymDerivative, competitor: np.ndarray,
                        tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """graph(R) ⊆ graph(C) for a factorization B1 = C A"""
    a, b1 = derivative.a, derivative.b1
    if competitor.shape != (b1.shape[0], a.shape[0]):
        raise DimensionMismatch(f"Competitor must be {b1.shape[0]}x{a.shape[0]}, got {competitor.shape}")
    if not matrices_equal(mat_mul(competitor, a), b1, tol):
        raise NotAFactorization("C A differs from B1")
    return relation_contains(graph_of(competitor, tol), derivative.graph, tol)


def rn_of_gram_components(p: OperatorPair,
                          tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[RadonNikodymDerivative, RadonNikodymDerivative]:
    """R(S, A) and R(S, B) for S = (A*A + B*B)^{1/2}; they are C_A0 and C_B0 on ran S"""
    require_float(p.a, "rn_of_gram_components")
    root = canonical_contractions(p, tol).sqrt_gram
    of_a = rn_derivative(root, p.a, tol)
    of_b = rn_derivative(root, p.b, tol)

    basis = reduction_basis(p, tol)
    reduced, _ = reduce(p, tol)
    reduced_pair = canonical_contractions(reduced, tol)
    for derivative, expected in ((of_a, reduced_pair.c_a), (of_b, reduced_pair.c_b)):
        if not matrices_equal(derivative.representative @ basis, expected, tol):
            raise RouteDisagreement("R(S, .) differs from the reduced canonical contraction")
    return of_a, of_b


def rn_representation_invariance(a: np.ndarray, b: np.ndarray, a2: np.ndarray, b2: np.ndarray,
                                 tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """RN derivatives of two pairs representing the same relation coincide

    The graphs, the domains ran A = ran A' and the representatives B A⁺ and
    B' A'⁺ restricted to that domain must all agree.
    """
    if not relations_equal(from_pair(a, b, tol), from_pair(a2, b2, tol), tol):
        raise RelationsDiffer("The pairs represent different relations")
    first = rn_derivative(a, b, tol)
    second = rn_derivative(a2, b2, tol)
    return derivatives_agree(first, second, tol)


def derivatives_agree(first: RadonNikodymDerivative, second: RadonNikodymDerivative,
                      tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    if not first.domain.equals(second.domain, tol):
        return False
    on_domain = first.domain.projection()
    checks = [
        relations_equal(first.graph, second.graph, tol),
        matrices_equal(mat_mul(first.representative, on_domain), mat_mul(second.representative, on_domain), tol),
    ]
    logger.debug("rn derivatives agree: %s", checks)
    return all(checks)
