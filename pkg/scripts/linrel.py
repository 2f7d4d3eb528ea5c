#!/usr/bin/env python3
"""
OpRange Linear Relations
Closed linear relations T ⊆ H × K stored by their graph, and operator ranges
ran Z with the induced "plus" inner product.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from core_linalg import (
    DEFAULT_TOLERANCE,
    Subspace,
    Tolerance,
    block_column,
    block_diag,
    block_row,
    common_mode,
    identity,
    image,
    kernel,
    mat_mul,
    mode_of,
    orthogonal_complement,
    pinv,
    range_space,
    require_float,
    spectral_norm,
    svd_truncated,
    zeros,
)
from oprange_errors import DimensionMismatch, NotInRange, RangesDiffer

logger = logging.getLogger(__name__)

Scalar = Union[float, Fraction]


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """A subspace of H × K, with H = R^dim_h first"""

    dim_h: int
    dim_k: int
    graph: Subspace

    def __post_init__(self):
        if self.graph.ambient_dim != self.dim_h + self.dim_k:
            raise DimensionMismatch(
                f"Graph lives in R^{self.graph.ambient_dim}, expected R^{self.dim_h + self.dim_k}"
            )

    @property
    def mode(self) -> str:
        return self.graph.mode

    def blocks(self) -> Tuple[np.ndarray, np.ndarray]:
        """(H rows, K rows) of the canonical graph basis"""
        basis = self.graph.basis
        return basis[:self.dim_h, :], basis[self.dim_h:, :]

    def summary(self) -> dict:
        return {
            "dim_h": self.dim_h,
            "dim_k": self.dim_k,
            "graph_rank": self.graph.rank,
            "dom_rank": dom(self).rank,
            "ran_rank": ran(self).rank,
            "ker_rank": ker(self).rank,
            "mul_rank": mul(self).rank,
        }


def from_pair(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """L(A,B) = {(Aφ, Bφ) : φ ∈ E}"""
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"A has {a.shape[1]} columns but B has {b.shape[1]}")
    return LinearRelation(a.shape[0], b.shape[0], range_space(block_column(a, b), tol))


def to_pair(relation: LinearRelation) -> Tuple[np.ndarray, np.ndarray]:
    """(A, B) with from_pair(A, B) == relation; E is the graph coordinate space"""
    top, bottom = relation.blocks()
    return top.copy(), bottom.copy()


def from_operator_range(phi: np.ndarray, dim_h: int, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """Relation whose graph is ran Φ, split as Φ = [ι₁P₁Φ; ι₂P₂Φ]"""
    if not 0 <= dim_h <= phi.shape[0]:
        raise DimensionMismatch(f"Cannot split {phi.shape[0]} rows at {dim_h}")
    return from_pair(phi[:dim_h, :], phi[dim_h:, :], tol)


def graph_of(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """Graph of an everywhere-defined operator"""
    return from_pair(identity(matrix.shape[1], mode_of(matrix)), matrix, tol)


def dom(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    top, _ = relation.blocks()
    return Subspace.span(top, tol)


def ran(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    _, bottom = relation.blocks()
    return Subspace.span(bottom, tol)


def ker(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """{f : (f, 0) ∈ T}"""
    top, bottom = relation.blocks()
    return Subspace.span(mat_mul(top, kernel(bottom, tol).basis), tol)


def mul(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """{g : (0, g) ∈ T}"""
    top, bottom = relation.blocks()
    return Subspace.span(mat_mul(bottom, kernel(top, tol).basis), tol)


def is_operator(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    return mul(relation, tol).is_zero()


def flip_operator(dim_h: int, dim_k: int, mode: str) -> np.ndarray:
    """J(f, g) = (g, -f) from H × K onto K × H"""
    return block_row(
        block_column(zeros(dim_k, dim_h, mode), -identity(dim_h, mode)),
        block_column(identity(dim_k, mode), zeros(dim_h, dim_k, mode)),
    )


def adjoint_rel(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """T* = (J T)^⊥ inside K × H"""
    flip = flip_operator(relation.dim_h, relation.dim_k, relation.mode)
    rotated = image(flip, relation.graph, tol)
    return LinearRelation(relation.dim_k, relation.dim_h, orthogonal_complement(rotated, tol))


def adjoint_rel_algebraic(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """L(A,B)* = {(k, h) : B*k = A*h}"""
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"A has {a.shape[1]} columns but B has {b.shape[1]}")
    solutions = kernel(block_row(b.T, -a.T), tol)
    return LinearRelation(b.shape[0], a.shape[0], solutions)


def operator_part(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """T_op = {(f, (I - P_mul) g) : (f, g) ∈ T}"""
    multivalued = mul(relation, tol)
    squeeze = identity(relation.dim_k, relation.mode) - multivalued.projection()
    mixer = block_diag(identity(relation.dim_h, relation.mode), squeeze)
    return LinearRelation(relation.dim_h, relation.dim_k, image(mixer, relation.graph, tol))


def inverse_rel(relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    top, bottom = relation.blocks()
    return from_pair(bottom, top, tol)


def apply_left(matrix: np.ndarray, relation: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """P T = {(f, P g) : (f, g) ∈ T}"""
    if matrix.shape[1] != relation.dim_k:
        raise DimensionMismatch(f"Cannot apply {matrix.shape} to values in R^{relation.dim_k}")
    top, bottom = relation.blocks()
    return from_pair(top, mat_mul(matrix, bottom), tol)


def relation_sum(first: LinearRelation, second: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """T1 + T2 = {(f, g1 + g2) : (f, g1) ∈ T1, (f, g2) ∈ T2}"""
    if (first.dim_h, first.dim_k) != (second.dim_h, second.dim_k):
        raise DimensionMismatch("Relations act between different spaces")
    top1, bottom1 = first.blocks()
    top2, bottom2 = second.blocks()
    common = kernel(block_row(top1, -top2), tol).basis
    left = common[:first.graph.rank, :]
    right = common[first.graph.rank:, :]
    return from_pair(mat_mul(top1, left), mat_mul(bottom1, left) + mat_mul(bottom2, right), tol)


def relations_equal(first: LinearRelation, second: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    if (first.dim_h, first.dim_k) != (second.dim_h, second.dim_k):
        return False
    return first.graph.equals(second.graph, tol)


def relation_contains(outer: LinearRelation, inner: LinearRelation, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    if (outer.dim_h, outer.dim_k) != (inner.dim_h, inner.dim_k):
        raise DimensionMismatch("Relations act between different spaces")
    return outer.graph.contains(inner.graph, tol)


# ---------------------------------------------------------------------------
# Operator ranges
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorRange:
    """ran Z with ⟨u, v⟩₊ = ⟨Z⁺u, Z⁺v⟩"""

    representative: np.ndarray
    range: Subspace
    pseudo_inverse: np.ndarray = field(repr=False)
    tol: Tolerance = DEFAULT_TOLERANCE

    @classmethod
    def of(cls, representative: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> "OperatorRange":
        return cls(representative, range_space(representative, tol), pinv(representative, tol), tol)

    @property
    def ambient_dim(self) -> int:
        return self.representative.shape[0]

    def coordinates(self, vector: np.ndarray) -> np.ndarray:
        """Minimal-norm preimage Z⁺u of a range element"""
        vector = vector.reshape(-1, 1)
        common_mode(vector, self.representative)
        if not self.range.contains_vector(vector, self.tol):
            raise NotInRange("Vector is not in the operator range")
        return mat_mul(self.pseudo_inverse, vector)

    def plus_inner(self, first: np.ndarray, second: np.ndarray) -> Scalar:
        left = self.coordinates(first)
        right = self.coordinates(second)
        return mat_mul(left.T, right)[0, 0]

    def plus_norm(self, vector: np.ndarray) -> float:
        return math.sqrt(float(self.plus_inner(vector, vector)))

    def plus_gram(self) -> np.ndarray:
        """Gram matrix of ⟨·,·⟩₊ on the canonical basis of the range"""
        coords = mat_mul(self.pseudo_inverse, self.range.basis)
        return mat_mul(coords.T, coords)

    def lower_bound(self) -> Optional[float]:
        """c with ‖u‖₊ ≥ c‖u‖ on the range (None for the zero range)"""
        norm = spectral_norm(self.representative)
        return None if norm == 0 else 1.0 / norm


def plus_inner(representative: np.ndarray, first: np.ndarray, second: np.ndarray,
               tol: Tolerance = DEFAULT_TOLERANCE) -> Scalar:
    return OperatorRange.of(representative, tol).plus_inner(first, second)


def representation_equivalence(z: np.ndarray, z1: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """W with Z1 = Z W, ker W = ker Z1 and ran W ⊆ ran Z*, for ran Z == ran Z1"""
    if z.shape[0] != z1.shape[0]:
        raise DimensionMismatch(f"Representatives map into R^{z.shape[0]} and R^{z1.shape[0]}")
    if not range_space(z, tol).equals(range_space(z1, tol), tol):
        raise RangesDiffer("Representatives have different ranges")
    return mat_mul(pinv(z, tol), z1)


def partial_isometry_representative(z: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """Orthonormal-column operator with the same range as Z"""
    require_float(z, "partial_isometry_representative")
    u, _, _ = svd_truncated(z, tol)
    logger.debug("partial isometry representative of rank %d", u.shape[1])
    return u
