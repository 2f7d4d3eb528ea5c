#!/usr/bin/env python3
"""
OpRange Pair Corpus
Seeded generators of random rational and float operator pairs for the
validation battery and the test-suite
"""

from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from core_linalg import (
    EXACT,
    Subspace,
    identity,
    inverse_exact,
    kernel,
    mat_mul,
    orthogonal_complement,
    zeros,
)

# Configuration
NUMERATOR_RANGE = (-3, 3)
MAX_DENOMINATOR = 3
RATIONAL_MAX_DIM = 6
FLOAT_MAX_DIM = 8
PAIR_STYLES = ("generic", "low_rank_a", "low_rank_b", "dominated", "singular")


def random_rational_matrix(rng: np.random.Generator, rows: int, cols: int,
                           numerators: Tuple[int, int] = NUMERATOR_RANGE,
                           max_denominator: int = MAX_DENOMINATOR) -> np.ndarray:
    """Entries p/q with p in the numerator range and q in 1..max_denominator"""
    nums = rng.integers(numerators[0], numerators[1] + 1, size=(rows, cols))
    dens = rng.integers(1, max_denominator + 1, size=(rows, cols))
    out = np.empty((rows, cols), dtype=object)
    for idx in np.ndindex(rows, cols):
        out[idx] = Fraction(int(nums[idx]), int(dens[idx]))
    return out


def _random_matrix(rng: np.random.Generator, rows: int, cols: int, mode: str) -> np.ndarray:
    if mode == EXACT:
        return random_rational_matrix(rng, rows, cols)
    return rng.standard_normal((rows, cols))


def random_low_rank(rng: np.random.Generator, rows: int, cols: int, rank: int, mode: str) -> np.ndarray:
    return mat_mul(_random_matrix(rng, rows, rank, mode), _random_matrix(rng, rank, cols, mode))


def random_pair(rng: np.random.Generator, mode: str = EXACT,
                max_dim: Optional[int] = None, style: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
    """A random (A, B) sharing a domain; the style steers the relationship of B to A"""
    if max_dim is None:
        max_dim = RATIONAL_MAX_DIM if mode == EXACT else FLOAT_MAX_DIM
    dim_e, dim_h, dim_k = (int(n) for n in rng.integers(1, max_dim + 1, size=3))
    if style is None:
        style = PAIR_STYLES[int(rng.integers(len(PAIR_STYLES)))]

    if style in ("low_rank_a", "dominated", "singular"):
        a = random_low_rank(rng, dim_h, dim_e, int(rng.integers(0, min(dim_h, dim_e) + 1)), mode)
    else:
        a = _random_matrix(rng, dim_h, dim_e, mode)

    if style == "low_rank_b":
        b = random_low_rank(rng, dim_k, dim_e, int(rng.integers(0, min(dim_k, dim_e) + 1)), mode)
    elif style == "dominated":
        b = mat_mul(_random_matrix(rng, dim_k, dim_h, mode), a)
    elif style == "singular":
        # rows of B inside ker A, so ran B* ∩ ran A* = {0}
        null = kernel(a).basis
        b = mat_mul(_random_matrix(rng, dim_k, null.shape[1], mode), null.T)
    else:
        b = _random_matrix(rng, dim_k, dim_e, mode)
    return a, b


def random_invertible_rational(rng: np.random.Generator, n: int) -> np.ndarray:
    """Unit lower times unit upper triangular: determinant 1"""
    lower = identity(n, EXACT)
    upper = identity(n, EXACT)
    noise = random_rational_matrix(rng, n, n)
    for i in range(n):
        for j in range(n):
            if i > j:
                lower[i, j] = noise[i, j]
            elif i < j:
                upper[i, j] = noise[i, j]
    return mat_mul(lower, upper)


def rational_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Cayley transform (I - S)(I + S)^{-1} of a random rational skew matrix"""
    noise = random_rational_matrix(rng, n, n)
    skew = noise - noise.T
    eye = identity(n, EXACT)
    return mat_mul(eye - skew, inverse_exact(eye + skew))


def normalized_pair(rng: np.random.Generator, dim_e: int, dim_h: int, dim_k: int,
                    mode: str = EXACT, q_rank: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(A, B) with A*A + B*B = I, or the coordinate projection onto the first q_rank axes"""
    if dim_h + dim_k < dim_e:
        raise ValueError(f"Need dim_h + dim_k >= dim_e, got {dim_h} + {dim_k} < {dim_e}")
    if mode == EXACT:
        frame = rational_orthogonal(rng, dim_h + dim_k)[:, :dim_e]
    else:
        frame, _ = np.linalg.qr(rng.standard_normal((dim_h + dim_k, dim_e)))
    if q_rank is not None:
        mask = zeros(dim_e, dim_e, mode)
        for i in range(q_rank):
            mask[i, i] = Fraction(1) if mode == EXACT else 1.0
        frame = mat_mul(frame, mask)
    return frame[:dim_h, :].copy(), frame[dim_h:, :].copy()


def random_subspace(rng: np.random.Generator, ambient_dim: int, rank: int, mode: str = EXACT) -> Subspace:
    return Subspace.span(_random_matrix(rng, ambient_dim, rank, mode))


def random_nonzero_subspace(rng: np.random.Generator, ambient_dim: int, mode: str = EXACT) -> Subspace:
    while True:
        candidate = random_subspace(rng, ambient_dim, int(rng.integers(1, ambient_dim + 1)), mode)
        if not candidate.is_zero():
            return candidate


def competitor_factorizations(representative: np.ndarray, domain: Subspace, count: int,
                              rng: np.random.Generator) -> List[np.ndarray]:
    """Matrices that agree with the representative on the domain and are random off it"""
    mode = domain.mode
    off_domain = orthogonal_complement(domain).projection()
    rows, cols = representative.shape
    return [representative + mat_mul(_random_matrix(rng, rows, cols, mode), off_domain)
            for _ in range(count)]

