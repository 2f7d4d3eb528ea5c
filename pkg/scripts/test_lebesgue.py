#!/usr/bin/env python3
"""
Test Lebesgue Decompositions
Validates B = B_reg + B_sing, Lebesgue-type decompositions, uniqueness
certificates and Radon-Nikodym derivatives
"""

import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from core_linalg import EXACT, FLOAT, Subspace, as_matrix, identity, is_zero_matrix, mat_mul, matrices_equal
from lebesgue import (
    GRAPH_ROUTE,
    QUOTIENT_ROUTE,
    derivatives_agree,
    lebesgue_decompose,
    lebesgue_type_decompose,
    rn_derivative,
    rn_minimality_check,
    rn_of_gram_components,
    rn_representation_invariance,
    uniqueness_certificate,
    validate_l_subspace,
)
from oprange_errors import (
    DimensionMismatch,
    InvalidL,
    NotAFactorization,
    NotAlmostDominated,
    RelationsDiffer,
)
from pair_corpus import random_pair
from pairs import OperatorPair


def exact(rows):
    return as_matrix(rows, EXACT)


E1 = exact([[1], [0]])
E2 = exact([[0], [1]])


def test_dominated_pair_is_all_regular():
    """A = I dominates every B, so B_reg = B"""
    print("🧪 Testing decomposition of a dominated pair...")

    b = exact([[1, 2], [3, 4]])
    result = lebesgue_decompose(identity(2, EXACT), b)
    assert matrices_equal(result.b_reg, b), "B_reg should be B"
    assert is_zero_matrix(result.b_sing), "B_sing should vanish"
    assert result.m_subspace.is_zero(), "D(A,B)^⊥ is trivial"
    assert result.unique, "Finite-dimensional decompositions are unique"

    print("✅ Dominated pair decomposed correctly!")


def test_mixed_pair_splits():
    """diag(1,0) against I splits into diag(1,0) + diag(0,1)"""
    print("🧪 Testing decomposition of a mixed pair...")

    a = exact([[1, 0], [0, 0]])
    result = lebesgue_decompose(a, identity(2, EXACT))
    assert matrices_equal(result.b_reg, exact([[1, 0], [0, 0]])), f"Unexpected B_reg {result.b_reg}"
    assert matrices_equal(result.b_sing, exact([[0, 0], [0, 1]])), f"Unexpected B_sing {result.b_sing}"
    assert matrices_equal(result.projector, exact([[0, 0], [0, 1]])), "P projects onto span(e2)"
    assert all(result.verification.values()), f"Failed checks {result.verification}"
    assert set(result.uniqueness) == {"adjoint_domain_closed", "regular_part_dominated", "rn_derivative_bounded"}

    again = lebesgue_decompose(a, result.b_reg)
    assert matrices_equal(again.b_reg, result.b_reg), "Decomposing B_reg again changes nothing"
    assert is_zero_matrix(again.b_sing), "B_reg has no singular part"

    print("✅ Mixed pair decomposed correctly!")


def test_singular_pair_is_all_singular():
    """(diag(1,0), [[1,1],[1,1]]) keeps all of B in the singular part"""
    print("🧪 Testing decomposition of a singular pair...")

    b = exact([[1, 1], [1, 1]])
    result = lebesgue_decompose(exact([[1, 0], [0, 0]]), b)
    assert is_zero_matrix(result.b_reg), "B_reg should vanish"
    assert matrices_equal(result.b_sing, b), "B_sing should be B"
    assert result.m_subspace.equals(Subspace.span(exact([[1], [1]]))), "D(A,B)^⊥ = span(1,1)"

    print("✅ Singular pair decomposed correctly!")


def test_lebesgue_type_rejects_nonzero_l():
    """Only L = {0} is admissible when dom T* is closed"""
    print("🧪 Testing Lebesgue-type subspace checks...")

    a = exact([[1, 0], [0, 0]])
    b = identity(2, EXACT)

    with pytest.raises(InvalidL) as outside:
        lebesgue_type_decompose(a, b, Subspace.span(E2))
    assert outside.value.reason == "outside-adjoint-domain-closure", outside.value.reason

    with pytest.raises(InvalidL) as meets:
        lebesgue_type_decompose(a, b, Subspace.span(E1))
    assert meets.value.reason == "meets-adjoint-domain", meets.value.reason
    assert meets.value.to_dict()["reason"] == "meets-adjoint-domain", "Reason travels with the error payload"

    with pytest.raises(DimensionMismatch):
        validate_l_subspace(a, b, Subspace.zero(3, EXACT))

    print("✅ Lebesgue-type subspace checks working correctly!")


def test_lebesgue_type_with_zero_l():
    """L = {0} reproduces the Lebesgue decomposition"""
    print("🧪 Testing Lebesgue-type decomposition with L = {0}...")

    a = exact([[1, 0], [0, 0]])
    b = exact([[1, 2], [0, 1]])
    plain = lebesgue_decompose(a, b)
    typed = lebesgue_type_decompose(a, b, Subspace.zero(2, EXACT))
    assert matrices_equal(typed.b_reg, plain.b_reg), "B1 should equal B_reg"
    assert matrices_equal(typed.b_sing, plain.b_sing), "B2 should equal B_sing"
    assert typed.verification["optimal_below_regular_part"], "B1*B1 ⪯ B_reg*B_reg"

    print("✅ Lebesgue-type decomposition working correctly!")


def test_uniqueness_certificate():
    """All uniqueness conditions hold and agree in finite dimensions"""
    print("🧪 Testing uniqueness certificate...")

    certificate = uniqueness_certificate(exact([[1, 0], [0, 0]]), identity(2, EXACT))
    assert all(certificate.values()), f"Expected every condition to hold, got {certificate}"

    print("✅ Uniqueness certificate working correctly!")


def test_rn_derivative():
    """R(diag(1, 1/2), I) is diag(1, 2) with bound 2"""
    print("🧪 Testing Radon-Nikodym derivative...")

    derivative = rn_derivative(exact([[1, 0], [0, "1/2"]]), identity(2, EXACT))
    assert matrices_equal(derivative.representative, exact([[1, 0], [0, 2]])), f"Got {derivative.representative}"
    assert derivative.bounded, "Derivative should be bounded"
    assert abs(derivative.bound - 2.0) < 1e-12, f"Bound {derivative.bound}"
    assert derivative.domain.is_full(), "ran A is everything"
    assert derivative.finite_dim_collapse, "Closure equals the relation in finite dimensions"

    with pytest.raises(NotAlmostDominated):
        rn_derivative(exact([[1, 0], [0, 0]]), identity(2, EXACT))

    print("✅ Radon-Nikodym derivative working correctly!")


def test_rn_minimality():
    """Every factorization B1 = C A extends the derivative"""
    print("🧪 Testing Radon-Nikodym minimality...")

    a = exact([[1, 0], [0, 0]])
    derivative = rn_derivative(a, a)
    assert derivative.domain.equals(Subspace.span(E1)), "Domain is ran A = span(e1)"
    assert matrices_equal(derivative.representative, a), "B1 A⁺ = diag(1, 0)"

    assert rn_minimality_check(derivative, exact([[1, 0], [0, 7]])), "diag(1, 7) extends R"
    with pytest.raises(NotAFactorization):
        rn_minimality_check(derivative, exact([[2, 0], [0, 7]]))
    with pytest.raises(DimensionMismatch):
        rn_minimality_check(derivative, identity(3, EXACT))

    print("✅ Radon-Nikodym minimality working correctly!")


def test_rn_representation_invariance():
    """Pairs with the same relation have the same derivative"""
    print("🧪 Testing representation invariance...")

    a = exact([[1, 0], [0, "1/2"]])
    b = identity(2, EXACT)
    mixer = exact([[1, 1], [0, 1]])
    assert rn_representation_invariance(a, b, mat_mul(a, mixer), mat_mul(b, mixer)), "R depends on L(A,B) only"

    with pytest.raises(RelationsDiffer):
        rn_representation_invariance(a, b, exact([[1, 0], [0, 0]]), b)

    print("✅ Representation invariance working correctly!")


def test_rn_second_routes():
    """Exact derivatives are checked on the graph basis, float ones on the canonical quotient"""
    print("🧪 Testing Radon-Nikodym second routes...")

    exact_derivative = rn_derivative(exact([[1, 0], [0, "1/2"]]), identity(2, EXACT))
    assert exact_derivative.second_route == GRAPH_ROUTE, f"Unexpected route {exact_derivative.second_route}"
    assert exact_derivative.routes_agree and exact_derivative.route_drift == 0.0, "Exact routes agree exactly"
    assert matrices_equal(exact_derivative.second_representative, exact([[1, 0], [0, 2]])), "bottom · top⁺ = diag(1, 2)"

    float_derivative = rn_derivative(np.diag([1.0, 0.5]), np.eye(2))
    assert float_derivative.second_route == QUOTIENT_ROUTE, f"Unexpected route {float_derivative.second_route}"
    assert float_derivative.routes_agree and float_derivative.route_drift < 1e-8, "Float routes agree"

    print("✅ Radon-Nikodym second routes working correctly!")


def test_derivatives_agree_compares_representatives():
    """Equal relations are not enough: representatives must match on ran A"""
    print("🧪 Testing derivative comparison...")

    derivative = rn_derivative(exact([[1, 0], [0, 0]]), exact([[1, 0], [0, 0]]))
    scaled = replace(derivative, representative=derivative.representative * 2)
    assert not derivatives_agree(derivative, scaled), "diag(2, 0) differs from diag(1, 0) on span(e1)"

    off_domain = replace(derivative, representative=exact([[1, 0], [0, 7]]))
    assert derivatives_agree(derivative, off_domain), "Values off ran A are ignored"

    shifted = rn_derivative(exact([[0, 0], [0, 1]]), exact([[0, 0], [0, 1]]))
    assert not derivatives_agree(derivative, shifted), "Different domains never agree"

    print("✅ Derivative comparison working correctly!")


def test_float_decomposition_of_invertible_a():
    """An invertible float A leaves all of B regular"""
    print("🧪 Testing float decomposition with invertible A...")

    b = np.array([[0.3, 0.7], [0.1, 0.9]])
    result = lebesgue_decompose(np.eye(2), b)
    assert np.allclose(result.b_reg, b), f"B_reg should be B, got {result.b_reg}"
    assert np.allclose(result.b_sing, 0.0), "B_sing should vanish"

    scaled = lebesgue_decompose(exact([[1, 0], [0, Fraction(1, 10 ** 20)]]), identity(2, EXACT))
    assert is_zero_matrix(scaled.b_sing) and scaled.unique, "diag(1, 10^-20) still dominates I"

    print("✅ Float decomposition with invertible A working correctly!")


@seed(31)
@settings(max_examples=40, deadline=None)
@given(pair_seed=st.integers(min_value=0, max_value=2**32 - 1),
       style=st.sampled_from(["generic", "dominated", "singular"]))
def test_float_random_decompositions(pair_seed, style):
    """Float decompositions of random pairs pass their own verification"""
    rng = np.random.default_rng(pair_seed)
    a, b = random_pair(rng, FLOAT, max_dim=4, style=style)
    result = lebesgue_decompose(a, b)
    assert all(result.verification.values())
    assert np.allclose(result.b_reg + result.b_sing, b)


def test_rn_of_gram_components():
    """R(S, A) and R(S, B) are the canonical contractions"""
    print("🧪 Testing derivatives against the Gram root...")

    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    b = np.array([[1.0, 0.0]])
    of_a, of_b = rn_of_gram_components(OperatorPair(a, b))
    gram = a.T @ a + b.T @ b
    eigenvalues, vectors = np.linalg.eigh(gram)
    root = (vectors * np.sqrt(eigenvalues)) @ vectors.T
    assert np.allclose(of_a.representative @ root, a), "R(S, A) S = A"
    assert np.allclose(of_b.representative @ root, b), "R(S, B) S = B"
    stacked = np.vstack([of_a.representative, of_b.representative])
    assert np.allclose(stacked.T @ stacked, np.eye(2)), "The contractions form an isometry"

    print("✅ Gram root derivatives working correctly!")


def main():
    """Run all Lebesgue decomposition tests"""
    print("🧪 Lebesgue Decomposition Test Suite")
    print("=" * 60)

    try:
        test_dominated_pair_is_all_regular()
        test_mixed_pair_splits()
        test_singular_pair_is_all_singular()
        test_lebesgue_type_rejects_nonzero_l()
        test_lebesgue_type_with_zero_l()
        test_uniqueness_certificate()
        test_rn_derivative()
        test_rn_minimality()
        test_rn_representation_invariance()
        test_rn_second_routes()
        test_derivatives_agree_compares_representatives()
        test_float_decomposition_of_invertible_a()
        test_float_random_decompositions()
        test_rn_of_gram_components()

        print("\n🎉 All tests passed! Lebesgue decompositions are working correctly.")

    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        sys.exit(1)
    except Exception as e:
        print(f"\n💥 Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
