#!/usr/bin/env python3
"""
OpRange Operator Pairs
Column/row calculus for pairs (A, B) with a shared domain E, reduction,
normalization, canonical contractions and the closure L(A,B)** = L(C_A, C_B).
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core_linalg import (
    DEFAULT_TOLERANCE,
    EXACT,
    FLOAT,
    Subspace,
    Tolerance,
    block_column,
    block_row,
    common_mode,
    gram_root,
    identity,
    kernel,
    mat_mul,
    matrices_equal,
    pinv,
    psd_sqrt,
    range_space,
    require_float,
    spectral_norm,
    svd_truncated,
    zeros,
)
from linrel import LinearRelation, from_pair, relations_equal
from oprange_errors import DimensionMismatch, NotNormalized, NotQNormalized

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """A: E -> H and B: E -> K; gram = A*A + B*B is fixed at construction"""

    a: np.ndarray
    b: np.ndarray
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.a.shape[1] != self.b.shape[1]:
            raise DimensionMismatch(
                f"A has {self.a.shape[1]} columns but B has {self.b.shape[1]}"
            )
        common_mode(self.a, self.b)
        object.__setattr__(self, "gram", mat_mul(self.a.T, self.a) + mat_mul(self.b.T, self.b))

    @property
    def mode(self) -> str:
        return common_mode(self.a, self.b)

    @property
    def dim_e(self) -> int:
        return self.a.shape[1]

    @property
    def dim_h(self) -> int:
        return self.a.shape[0]

    @property
    def dim_k(self) -> int:
        return self.b.shape[0]

    def relation(self, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
        return from_pair(self.a, self.b, tol)


@dataclass(frozen=True, eq=False)
class CanonicalPair:
    """C_A, C_B with A = C_A S, B = C_B S, S = (A*A + B*B)^{1/2}, both vanishing on ker S"""

    c_a: np.ndarray
    c_b: np.ndarray
    parent: OperatorPair = field(repr=False)
    sqrt_gram: np.ndarray = field(repr=False)
    sqrt_gram_pinv: np.ndarray = field(repr=False)
    rank: int = 0
    mode: str = FLOAT


@dataclass(frozen=True, eq=False)
class AdjointParametrization:
    """L(A,B)* = {(first k, second k + P h)} with P the projection onto `kernel`"""

    first: np.ndarray
    second: np.ndarray
    kernel: Subspace

    def as_tuple(self) -> Tuple[np.ndarray, np.ndarray, Subspace]:
        return self.first, self.second, self.kernel

    def relation(self, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
        dim_k = self.first.shape[1]
        dim_h = self.second.shape[0]
        spanning = block_row(
            block_column(self.first, self.second),
            block_column(zeros(self.first.shape[0], self.kernel.rank, FLOAT), self.kernel.basis),
        )
        return LinearRelation(dim_k, dim_h, Subspace.span(spanning, tol))

    def summands_orthogonal(self, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        overlap = self.second.T @ self.kernel.basis
        return overlap.size == 0 or spectral_norm(overlap) <= tol.atol_for()


def column(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c(A,B): E -> H x K, f -> (Af, Bf)"""
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"column needs equal column counts, got {a.shape} and {b.shape}")
    return block_column(a, b)


def row(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """r(A,B): (f, g) -> Af + Bg"""
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"row needs equal row counts, got {a.shape} and {b.shape}")
    return block_row(a, b)


def reduction_basis(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """Basis E0 of ran(gram); the identity when gram is injective"""
    support = range_space(column(p.a, p.b).T, tol)
    if support.is_full():
        return identity(p.dim_e, p.mode)
    return support.basis


def reduce(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[OperatorPair, Subspace]:
    """(A0, B0) on ran(gram), and the discarded ker A ∩ ker B"""
    basis = reduction_basis(p, tol)
    redundant = kernel(column(p.a, p.b), tol)
    logger.debug("reduce: dim E %d -> %d, redundant rank %d", p.dim_e, basis.shape[1], redundant.rank)
    return OperatorPair(mat_mul(p.a, basis), mat_mul(p.b, basis)), redundant


def normalize(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> OperatorPair:
    """Reduced pair rescaled by S0^{-1/2} so that A'*A' + B'*B' = I"""
    require_float(p.a, "normalize")
    reduced, _ = reduce(p, tol)
    if reduced.dim_e == 0:
        return reduced
    inverse_root = np.linalg.inv(psd_sqrt(reduced.gram, tol))
    return OperatorPair(reduced.a @ inverse_root, reduced.b @ inverse_root)


def is_normalized(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    return matrices_equal(p.gram, identity(p.dim_e, p.mode), tol)


def is_q_normalized(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """gram is an orthogonal projection"""
    return matrices_equal(p.gram, p.gram.T, tol) and matrices_equal(mat_mul(p.gram, p.gram), p.gram, tol)


def graph_projection(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """[[AA*, AB*], [BA*, BB*]], the projection of H x K onto L(A,B)"""
    if not is_q_normalized(p, tol):
        raise NotQNormalized("A*A + B*B is not an orthogonal projection")
    c = column(p.a, p.b)
    return mat_mul(c, c.T)


def adjoint_graph_projection(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """[[I - BB*, BA*], [AB*, I - AA*]], the projection of K x H onto L(A,B)*"""
    if not is_q_normalized(p, tol):
        raise NotQNormalized("A*A + B*B is not an orthogonal projection")
    a, b = p.a, p.b
    return block_column(
        block_row(identity(p.dim_k, p.mode) - mat_mul(b, b.T), mat_mul(b, a.T)),
        block_row(mat_mul(a, b.T), identity(p.dim_h, p.mode) - mat_mul(a, a.T)),
    )


def adjoint_block_representation(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """L(A,B)* spanned by ((I-BB*)φ + BA*ψ, AB*φ + (I-AA*)ψ) over all φ, ψ"""
    return LinearRelation(p.dim_k, p.dim_h, range_space(adjoint_graph_projection(p, tol), tol))


def polar_factor(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """Partial isometry V with M = V (M*M)^{1/2}"""
    u, _, vt = svd_truncated(matrix, tol)
    return u @ vt


def canonical_contractions(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> CanonicalPair:
    require_float(p.a, "canonical_contractions")
    # one rank decision, taken on the singular values of c(A,B)
    root, root_pinv, rank = gram_root(column(p.a, p.b), tol)
    c_a = p.a @ root_pinv
    c_b = p.b @ root_pinv
    logger.debug("canonical contractions: rank %d, |C_A| %.6f, |C_B| %.6f",
                 rank, spectral_norm(c_a), spectral_norm(c_b))
    return CanonicalPair(c_a, c_b, p, root, root_pinv, rank)


def check_polar(cp: CanonicalPair, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """column(C_A, C_B) is a partial isometry from ran(gram) onto ran c(A,B)"""
    parent = cp.parent
    isometry = column(cp.c_a, cp.c_b)
    original = column(parent.a, parent.b)
    initial = range_space(original.T, tol).projection()
    checks = [
        matrices_equal(isometry.T @ isometry, initial, tol),
        range_space(isometry, tol).equals(range_space(original, tol), tol),
        matrices_equal(isometry @ cp.sqrt_gram, original, tol),
    ]
    logger.debug("check_polar: %s", checks)
    return all(checks)


def closure(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """L(A,B)**: L(C_A, C_B) in float mode, L(A,B) itself in exact mode"""
    if p.mode == EXACT:
        return from_pair(p.a, p.b, tol)
    cp = canonical_contractions(p, tol)
    return from_pair(cp.c_a, cp.c_b, tol)


def closure_operator_part(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> LinearRelation:
    """{(C_A φ, C_B C_A⁺ C_A φ)}: the graph of C_B C_A^(-1) on ran C_A"""
    cp = canonical_contractions(p, tol)
    return from_pair(cp.c_a, cp.c_b @ pinv(cp.c_a, tol) @ cp.c_a, tol)


def adjoint_param_representation(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> AdjointParametrization:
    """((I - BB*)^{1/2}, V_A B*, ker A*) for a normalized pair"""
    require_float(p.a, "adjoint_param_representation")
    if not is_normalized(p, tol):
        raise NotNormalized("A*A + B*B is not the identity")
    # eigenvalues of I - BB* within the equality tolerance of 0 are exact zeros
    first = psd_sqrt(np.eye(p.dim_k) - p.b @ p.b.T, tol, truncate=tol.atol_for())
    second = polar_factor(p.a, tol) @ p.b.T
    return AdjointParametrization(first, second, kernel(p.a.T, tol))


def canonical_adjoint_param_representation(p: OperatorPair,
                                           tol: Tolerance = DEFAULT_TOLERANCE) -> AdjointParametrization:
    """Parametrization of L(C_A, C_B)* through the canonical pair of the reduced pair"""
    reduced, _ = reduce(p, tol)
    cp = canonical_contractions(reduced, tol)
    return adjoint_param_representation(OperatorPair(cp.c_a, cp.c_b), tol)


def closure_matches(p: OperatorPair, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """L(A,B) and its computed closure coincide as subspaces"""
    return relations_equal(from_pair(p.a, p.b, tol), closure(p, tol), tol)
