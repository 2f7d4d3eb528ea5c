#!/usr/bin/env python3
"""
Test Pair Classification
Validates domination, almost domination and singularity verdicts, the exact
domination constant and the agreement of equivalent criteria
"""

import math
import sys
from fractions import Fraction
from pathlib import Path
sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from classify import (
    CriterionVerdict,
    _agree,
    classify,
    d_subspace,
    domination_report,
    is_almost_dominated,
    is_dominated,
    is_singular,
    r_subspace,
)
from core_linalg import EXACT, FLOAT, Subspace, as_matrix, identity, zeros
from oprange_errors import CriteriaDisagree, DimensionMismatch, ModeMismatch
from pair_corpus import random_pair


def exact(rows):
    return as_matrix(rows, EXACT)


@st.composite
def small_exact_pairs(draw):
    dim_e = draw(st.integers(min_value=1, max_value=3))
    dim_h = draw(st.integers(min_value=1, max_value=3))
    dim_k = draw(st.integers(min_value=1, max_value=3))
    entry = st.integers(min_value=-2, max_value=2)

    def block(rows):
        return exact(draw(st.lists(st.lists(entry, min_size=dim_e, max_size=dim_e), min_size=rows, max_size=rows)))

    return block(dim_h), block(dim_k)


def test_identity_pair_is_dominated():
    """(I, I) is dominated with constant 1"""
    print("🧪 Testing (I, I)...")

    result = classify(identity(2, EXACT), identity(2, EXACT))
    assert result.dominated and result.almost_dominated, "(I, I) should be dominated"
    assert not result.singular, "(I, I) is not singular"
    assert result.domination.exact_constant == 1, f"Expected c = 1, got {result.domination.exact_constant}"
    assert result.everywhere_defined, "A = I has full range"
    assert result.finite_dim_collapse, "Finite dimensions collapse almost domination onto domination"

    print("✅ (I, I) classified correctly!")


def test_exact_domination_constant():
    """diag(1, 1/2) dominates I with certified constant 2"""
    print("🧪 Testing certified domination constant...")

    report = domination_report(exact([[1, 0], [0, "1/2"]]), identity(2, EXACT))
    assert report.dominated, "I should be dominated by diag(1, 1/2)"
    assert report.exact_constant == Fraction(2), f"Expected 2, got {report.exact_constant}"
    assert report.certified_exact, "Constant 2 should be certified"
    assert report.squared_interval == (Fraction(4), Fraction(4)), f"Unexpected interval {report.squared_interval}"

    dominated, constant = is_dominated(exact([[1, 0], [0, 0]]), exact([[1, 0], [0, 0]]))
    assert dominated and constant == 1.0, f"diag(1,0) dominates itself with c = 1, got {constant}"

    print("✅ Certified domination constant working correctly!")


def test_irrational_constant_is_bracketed():
    """‖[[1,1],[0,1]]‖ is the golden ratio, so c² is only bracketed"""
    print("🧪 Testing bracketed domination constant...")

    report = domination_report(identity(2, EXACT), exact([[1, 1], [0, 1]]))
    golden_squared = (3 + math.sqrt(5)) / 2
    lo, hi = report.squared_interval
    assert report.dominated and not report.certified_exact, "An irrational constant cannot be certified"
    assert report.exact_constant is None, "No rational constant should be reported"
    assert lo < hi, "Bracket should be proper"
    assert float(lo) <= golden_squared + 1e-12 and float(hi) >= golden_squared - 1e-12, f"[{lo}, {hi}] misses c²"
    assert (hi - lo) / hi <= Fraction(1, 2 ** 40), "Bracket should be tight"
    assert abs(report.constant - math.sqrt(golden_squared)) < 1e-9, f"Constant {report.constant}"

    print("✅ Bracketed domination constant working correctly!")


def test_singular_pair():
    """diag(1,0) and diag(0,1) have trivially intersecting adjoint ranges"""
    print("🧪 Testing singular pair...")

    result = classify(exact([[1, 0], [0, 0]]), exact([[0, 0], [0, 1]]))
    assert result.singular, "Pair should be singular"
    assert not result.dominated and not result.almost_dominated, "Pair should not be dominated"
    assert result.domination_constant is None, "No constant for an undominated pair"

    tilted = classify(exact([[1, 0], [0, 0]]), exact([[1, 1], [1, 1]]))
    assert tilted.singular and not tilted.almost_dominated, "(diag(1,0), [[1,1],[1,1]]) is singular"

    print("✅ Singular pair classified correctly!")


def test_mixed_pair():
    """diag(1,0) against I is neither dominated nor singular"""
    print("🧪 Testing mixed pair...")

    a = exact([[1, 0], [0, 0]])
    b = identity(2, EXACT)
    result = classify(a, b)
    assert not result.dominated and not result.singular, "Pair should be mixed"
    assert result.d_subspace.equals(Subspace.span(exact([[1], [0]]))), "D(A,B) = span(e1)"
    assert r_subspace(a, b).is_full(), "R(A,B) = H since ran B* = K"

    properties = {entry.property for entry in result.criteria_trace}
    assert properties == {"dominated", "almost_dominated", "singular"}, f"Unexpected trace {properties}"

    print("✅ Mixed pair classified correctly!")


def test_degenerate_pairs():
    """Zero operators on either side"""
    print("🧪 Testing degenerate pairs...")

    zero_b = classify(identity(2, EXACT), zeros(2, 2, EXACT))
    assert zero_b.dominated and zero_b.singular, "B = 0 is both dominated and singular"
    assert zero_b.domination.exact_constant == 0, "B = 0 has constant 0"

    zero_a = classify(zeros(2, 2, EXACT), identity(2, EXACT))
    assert zero_a.singular and not zero_a.almost_dominated, "A = 0 with B = I is purely singular"

    partial = classify(exact([[1, 0], [0, 0]]), exact([[1, 0], [0, 0]]))
    assert partial.dominated and not partial.everywhere_defined, "diag(1,0) has a proper range"

    print("✅ Degenerate pairs classified correctly!")


def test_float_mode_criteria():
    """Float classification adds the canonical-contraction criteria"""
    print("🧪 Testing float mode criteria...")

    result = classify(np.diag([1.0, 0.5]), np.eye(2))
    assert result.mode == FLOAT, "Float input should classify in float mode"
    assert result.dominated and not result.singular, "I is dominated by diag(1, 1/2)"
    assert abs(result.domination_constant - 2.0) < 1e-9, f"Constant {result.domination_constant}"
    criteria = {entry.criterion for entry in result.criteria_trace}
    assert "canonical_kernel_inclusion" in criteria and "canonical_kernels_span" in criteria, criteria

    singular = classify(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert singular.singular and not singular.dominated, "Float singular pair"

    print("✅ Float mode criteria working correctly!")


def test_disagreement_raises():
    """Contradicting verdicts for one property raise with the full trace"""
    print("🧪 Testing criteria disagreement...")

    trace = [CriterionVerdict("singular", "first", True), CriterionVerdict("singular", "second", False)]
    with pytest.raises(CriteriaDisagree) as excinfo:
        _agree("singular", trace)
    assert len(excinfo.value.trace) == 2, "Trace should list every criterion"
    assert excinfo.value.to_dict()["kind"] == "internal", "Disagreement is an internal error"

    print("✅ Criteria disagreement working correctly!")


def test_input_checks():
    """Mismatched domains or modes are rejected"""
    print("🧪 Testing input checks...")

    with pytest.raises(DimensionMismatch):
        classify(identity(2, EXACT), identity(3, EXACT))
    with pytest.raises(ModeMismatch):
        classify(identity(2, EXACT), np.eye(2))
    with pytest.raises(DimensionMismatch):
        d_subspace(identity(2, EXACT), identity(3, EXACT))

    print("✅ Input checks working correctly!")


@seed(21)
@settings(max_examples=40, deadline=None)
@given(pair=small_exact_pairs())
def test_singularity_is_symmetric(pair):
    """(A, B) singular iff (B, A) singular"""
    a, b = pair
    assert is_singular(a, b) == is_singular(b, a)


@seed(22)
@settings(max_examples=40, deadline=None)
@given(pair=small_exact_pairs())
def test_domination_matches_almost_domination(pair):
    """Dominated and almost dominated coincide in finite dimensions"""
    a, b = pair
    assert domination_report(a, b).dominated == is_almost_dominated(a, b)


def test_widely_scaled_exact_domination():
    """diag(1, 10^-20) dominates I with the exact constant 10^20"""
    print("🧪 Testing widely scaled exact domination...")

    a = exact([[1, 0], [0, Fraction(1, 10 ** 20)]])
    report = domination_report(a, identity(2, EXACT))
    assert report.dominated, "I is dominated by an invertible diagonal"
    assert report.exact_constant == 10 ** 20, f"Expected 10^20, got {report.exact_constant}"
    assert all(entry.verdict for entry in report.trace), f"Criteria should agree: {report.trace}"

    print("✅ Widely scaled exact domination working correctly!")


def test_float_subspaces_of_full_ranges():
    """R(A,B) and D(A,B) are full when the opposite adjoint range is everything"""
    print("🧪 Testing float subspaces of full ranges...")

    b = np.array([[0.3, 0.7], [0.1, 0.9]])
    assert r_subspace(np.eye(2), b).is_full(), "ran B* = R^2 makes R(A,B) = H"
    assert d_subspace(b, np.eye(2)).is_full(), "ran A* = R^2 makes D(A,B) = K"
    result = classify(np.eye(2), b)
    assert result.dominated and not result.singular, "Invertible A dominates every B"

    print("✅ Float subspaces of full ranges working correctly!")


@seed(23)
@settings(max_examples=60, deadline=None)
@given(pair_seed=st.integers(min_value=0, max_value=2**32 - 1),
       style=st.sampled_from(["generic", "dominated", "singular"]))
def test_float_random_pairs_classify(pair_seed, style):
    """Float criteria agree on random pairs at the default tolerance"""
    rng = np.random.default_rng(pair_seed)
    a, b = random_pair(rng, FLOAT, max_dim=5, style=style)
    result = classify(a, b)
    assert result.dominated == result.almost_dominated
    if style == "dominated":
        assert result.dominated
    if style == "singular":
        assert result.singular


def main():
    """Run all classification tests"""
    print("🧪 Pair Classification Test Suite")
    print("=" * 60)

    try:
        test_identity_pair_is_dominated()
        test_exact_domination_constant()
        test_irrational_constant_is_bracketed()
        test_singular_pair()
        test_mixed_pair()
        test_degenerate_pairs()
        test_float_mode_criteria()
        test_disagreement_raises()
        test_input_checks()
        test_singularity_is_symmetric()
        test_domination_matches_almost_domination()
        test_widely_scaled_exact_domination()
        test_float_subspaces_of_full_ranges()
        test_float_random_pairs_classify()

        print("\n🎉 All tests passed! Pair classification is working correctly.")

    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        sys.exit(1)
    except Exception as e:
        print(f"\n💥 Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
