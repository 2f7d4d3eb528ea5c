#!/usr/bin/env python3
"""
Test Linear Relations
Validates relation construction, adjoints, operator parts and operator ranges
"""

import sys
from fractions import Fraction
from pathlib import Path
sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from core_linalg import EXACT, Subspace, as_matrix, identity, kernel, mat_mul, matrices_equal
from linrel import (
    OperatorRange,
    adjoint_rel,
    adjoint_rel_algebraic,
    apply_left,
    dom,
    flip_operator,
    from_operator_range,
    from_pair,
    graph_of,
    inverse_rel,
    is_operator,
    ker,
    mul,
    operator_part,
    partial_isometry_representative,
    plus_inner,
    ran,
    relation_contains,
    relation_sum,
    relations_equal,
    representation_equivalence,
    to_pair,
)
from oprange_errors import DimensionMismatch, NotInRange, RangesDiffer


def exact(rows):
    return as_matrix(rows, EXACT)


@st.composite
def rational_pairs(draw, max_dim=3):
    dim_e = draw(st.integers(min_value=1, max_value=max_dim))
    dim_h = draw(st.integers(min_value=1, max_value=max_dim))
    dim_k = draw(st.integers(min_value=1, max_value=max_dim))
    entry = st.integers(min_value=-2, max_value=2)

    def block(rows):
        return exact(draw(st.lists(st.lists(entry, min_size=dim_e, max_size=dim_e), min_size=rows, max_size=rows)))

    return block(dim_h), block(dim_k)


def test_relation_subspaces():
    """dom, ran, ker and mul of L(diag(1,0), I)"""
    print("🧪 Testing relation subspaces...")

    relation = from_pair(exact([[1, 0], [0, 0]]), identity(2, EXACT))
    assert dom(relation).equals(Subspace.span(exact([[1], [0]]))), "dom should be span(e1)"
    assert ran(relation).is_full(), "ran should be R^2"
    assert ker(relation).is_zero(), "ker should be trivial"
    assert mul(relation).equals(Subspace.span(exact([[0], [1]]))), "mul should be span(e2)"
    assert not is_operator(relation), "A relation with a multivalued part is not an operator"

    summary = relation.summary()
    assert summary["mul_rank"] == 1 and summary["graph_rank"] == 2, f"Unexpected summary {summary}"

    with pytest.raises(DimensionMismatch):
        from_pair(identity(2, EXACT), identity(3, EXACT))

    print("✅ Relation subspaces working correctly!")


def test_flip_operator_is_orthogonal():
    """J(f, g) = (g, -f) is an orthogonal map"""
    print("🧪 Testing the flip operator...")

    flip = flip_operator(2, 3, EXACT)
    assert flip.shape == (5, 5), f"Unexpected shape {flip.shape}"
    assert matrices_equal(mat_mul(flip, flip.T), identity(5, EXACT)), "J J* should be I"

    print("✅ Flip operator working correctly!")


@seed(11)
@settings(max_examples=50, deadline=None)
@given(pair=rational_pairs())
def test_adjoint_routes_agree(pair):
    """The orthogonal-complement adjoint equals {(k, h) : B*k = A*h}"""
    a, b = pair
    relation = from_pair(a, b)
    assert relations_equal(adjoint_rel(relation), adjoint_rel_algebraic(a, b))


@seed(14)
@settings(max_examples=40, deadline=None)
@given(pair=rational_pairs())
def test_to_pair_round_trip(pair):
    """to_pair returns a representative with the same graph"""
    relation = from_pair(*pair)
    a, b = to_pair(relation)
    assert relations_equal(from_pair(a, b), relation)


@seed(12)
@settings(max_examples=50, deadline=None)
@given(pair=rational_pairs())
def test_double_adjoint_and_inverse(pair):
    """T** = T for subspaces of finite-dimensional spaces, and (T^-1)^-1 = T"""
    a, b = pair
    relation = from_pair(a, b)
    assert relations_equal(adjoint_rel(adjoint_rel(relation)), relation)
    assert relations_equal(inverse_rel(inverse_rel(relation)), relation)


@seed(13)
@settings(max_examples=40, deadline=None)
@given(pair=rational_pairs())
def test_operator_part_is_operator(pair):
    """T_op has no multivalued part and keeps the domain of T"""
    a, b = pair
    relation = from_pair(a, b)
    part = operator_part(relation)
    assert is_operator(part)
    assert dom(part).equals(dom(relation))


def test_operator_graphs():
    """Graphs, left products and sums of everywhere-defined operators"""
    print("🧪 Testing operator graphs...")

    m1 = exact([[1, 2], [0, 1]])
    m2 = exact([["1/2", 0], [3, -1]])
    graph = graph_of(m1)
    assert is_operator(graph) and dom(graph).is_full(), "Graph of a matrix is an everywhere-defined operator"

    total = relation_sum(graph_of(m1), graph_of(m2))
    assert relations_equal(total, graph_of(m1 + m2)), "Sum of graphs is the graph of the sum"

    projector = exact([[1, 0], [0, 0]])
    assert relations_equal(apply_left(projector, graph), graph_of(mat_mul(projector, m1))), "P G(M) = G(PM)"
    assert relation_contains(from_pair(identity(2, EXACT), identity(2, EXACT)), graph_of(identity(2, EXACT)))

    phi = exact([[1, 0], [0, 1], [1, 1]])
    assert relations_equal(from_operator_range(phi, 2), from_pair(phi[:2, :], phi[2:, :])), "Split of ran Φ"

    with pytest.raises(DimensionMismatch):
        apply_left(identity(3, EXACT), graph)

    print("✅ Operator graphs working correctly!")


def test_operator_range_inner_product():
    """ran diag(2, 0) with ⟨u, v⟩₊ = ⟨Z⁺u, Z⁺v⟩"""
    print("🧪 Testing operator range inner product...")

    z = exact([[2, 0], [0, 0]])
    op_range = OperatorRange.of(z)
    u = exact([[2], [0]])
    assert list(op_range.coordinates(u).flat) == [1, 0], "Minimal preimage of (2,0) is (1,0)"
    assert op_range.plus_norm(u) == 1.0, "‖(2,0)‖₊ = 1"
    assert plus_inner(z, u, u) == Fraction(1), "plus_inner helper should agree"
    assert op_range.plus_gram()[0, 0] == Fraction(1, 4), "Gram of e1 is 1/4"
    assert op_range.lower_bound() == 0.5, "‖u‖₊ ≥ ‖u‖ / ‖Z‖"

    with pytest.raises(NotInRange):
        op_range.coordinates(exact([[0], [1]]))

    print("✅ Operator range inner product working correctly!")


def test_representation_equivalence():
    """Z1 = Z W for representatives with a common range"""
    print("🧪 Testing representation equivalence...")

    z = exact([[1, 1], [0, 1], [1, 0]])
    g = exact([[2, 1], [1, 1]])
    z1 = mat_mul(z, g)
    w = representation_equivalence(z, z1)
    assert matrices_equal(mat_mul(z, w), z1), "Z W should reproduce Z1"
    assert kernel(w).equals(kernel(z1)), "ker W = ker Z1"

    with pytest.raises(RangesDiffer):
        representation_equivalence(z, exact([[1], [0], [0]]))

    isometry = partial_isometry_representative(np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]))
    assert isometry.shape == (3, 1), f"Rank-one range gives one column, got {isometry.shape}"
    assert np.allclose(isometry.T @ isometry, np.eye(1)), "Columns should be orthonormal"

    print("✅ Representation equivalence working correctly!")


def main():
    """Run all linear relation tests"""
    print("🧪 Linear Relation Test Suite")
    print("=" * 60)

    try:
        test_relation_subspaces()
        test_flip_operator_is_orthogonal()
        test_adjoint_routes_agree()
        test_to_pair_round_trip()
        test_double_adjoint_and_inverse()
        test_operator_part_is_operator()
        test_operator_graphs()
        test_operator_range_inner_product()
        test_representation_equivalence()

        print("\n🎉 All tests passed! Linear relations are working correctly.")

    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        sys.exit(1)
    except Exception as e:
        print(f"\n💥 Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
