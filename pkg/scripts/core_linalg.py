#!/usr/bin/env python3
"""
OpRange Core Linear Algebra
Dual-mode (exact rational / float64) matrices and canonical subspaces.

Exact mode stores numpy object arrays of fractions.Fraction and never rounds.
Float mode stores float64 arrays and makes every rank decision through a
single Tolerance object, so two calls with the same inputs and tolerance
always agree on ranks.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from oprange_errors import (
    DimensionMismatch,
    ExactModeUnsupported,
    MatrixParseError,
    ModeMismatch,
    NotInvertible,
    NotPSD,
    NotSymmetric,
)

logger = logging.getLogger(__name__)

# Configuration
EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)
EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Tolerance:
    """Numeric policy for float mode (ignored by exact arithmetic)

    Args:
        rank_rtol: relative singular-value cut-off; None means eps * max(rows, cols)
        eq_atol: absolute equality tolerance, scaled by max(1, norm)
    """

    rank_rtol: Optional[float] = None
    eq_atol: float = 1e-9

    def __post_init__(self):
        if self.rank_rtol is not None and not self.rank_rtol > 0:
            raise ValueError(f"rank_rtol must be positive, got {self.rank_rtol}")
        if not self.eq_atol > 0:
            raise ValueError(f"eq_atol must be positive, got {self.eq_atol}")

    def rtol_for(self, shape: Sequence[int]) -> float:
        if self.rank_rtol is not None:
            return self.rank_rtol
        return EPS * max(max(shape, default=1), 1)

    def atol_for(self, scale: float = 1.0) -> float:
        return self.eq_atol * max(1.0, float(scale))

    def rank_cutoff(self, shape: Sequence[int], largest: float) -> float:
        """Singular values at or below this count as zero.

        The relative cut-off is floored at unit scale, so a matrix made of
        rounding noise alone has rank 0.
        """
        return self.rtol_for(shape) * max(1.0, float(largest))

    def to_dict(self) -> dict:
        return {"rank_rtol": self.rank_rtol, "eq_atol": self.eq_atol}


DEFAULT_TOLERANCE = Tolerance()


# ---------------------------------------------------------------------------
# Construction and mode handling
# ---------------------------------------------------------------------------

def to_fraction(value: Any) -> Fraction:
    """Convert a scalar (int, float, Fraction or "p/q" string) to an exact rational"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise MatrixParseError(f"Boolean is not a matrix entry: {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(float(value)):
            raise MatrixParseError(f"Non-finite entry: {value!r}")
        return Fraction(float(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MatrixParseError(f"Cannot parse rational entry: {value!r}") from exc
    raise MatrixParseError(f"Unsupported matrix entry type: {type(value).__name__}")


def _to_float_scalar(value: Any) -> float:
    if isinstance(value, str):
        value = to_fraction(value)
    if isinstance(value, (bool, np.bool_)):
        raise MatrixParseError(f"Boolean is not a matrix entry: {value!r}")
    try:
        result = float(value)
    except (TypeError, ValueError) as exc:
        raise MatrixParseError(f"Cannot parse float entry: {value!r}") from exc
    if not math.isfinite(result):
        raise MatrixParseError(f"Non-finite entry: {value!r}")
    return result


def _infer_mode(data: Any) -> str:
    if isinstance(data, np.ndarray):
        if data.dtype == object:
            flat = list(data.flat)
        elif np.issubdtype(data.dtype, np.integer):
            return EXACT
        else:
            return FLOAT
    else:
        flat = list(np.array(data, dtype=object).flat)
    if any(isinstance(x, (float, np.floating)) for x in flat):
        return FLOAT
    return EXACT


def as_matrix(data: Any, mode: Optional[str] = None) -> np.ndarray:
    """Build a 2-D matrix in the requested mode (inferred from the entries if None)"""
    if mode is None:
        mode = _infer_mode(data)
    if mode not in MODES:
        raise ModeMismatch(f"Unknown mode: {mode}")
    raw = np.array(data, dtype=object)
    if raw.ndim != 2:
        raise DimensionMismatch(f"Matrix data must be 2-D, got {raw.ndim}-D")
    if mode == EXACT:
        out = np.empty(raw.shape, dtype=object)
        for idx, value in np.ndenumerate(raw):
            out[idx] = to_fraction(value)
        return out
    out = np.empty(raw.shape, dtype=float)
    for idx, value in np.ndenumerate(raw):
        out[idx] = _to_float_scalar(value)
    return out


def mode_of(matrix: np.ndarray) -> str:
    return EXACT if matrix.dtype == object else FLOAT


def common_mode(*matrices: np.ndarray) -> str:
    modes = {mode_of(m) for m in matrices}
    if len(modes) > 1:
        raise ModeMismatch("Cannot mix exact and float matrices")
    return modes.pop() if modes else FLOAT


def require_float(matrix: np.ndarray, operation: str) -> None:
    if mode_of(matrix) == EXACT:
        raise ExactModeUnsupported(f"{operation} needs square roots; use float mode")


def zeros(rows: int, cols: int, mode: str) -> np.ndarray:
    if mode == EXACT:
        return np.full((rows, cols), Fraction(0), dtype=object)
    return np.zeros((rows, cols))


def identity(n: int, mode: str) -> np.ndarray:
    if mode == EXACT:
        out = zeros(n, n, EXACT)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def to_float(matrix: np.ndarray) -> np.ndarray:
    return np.array(matrix, dtype=float)


def to_exact(matrix: np.ndarray) -> np.ndarray:
    return as_matrix(matrix, EXACT)


def adjoint(matrix: np.ndarray) -> np.ndarray:
    """Transpose (all scalars are real)"""
    return matrix.T.copy()


def _matmul2(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    mode = common_mode(left, right)
    if left.shape[1] != right.shape[0]:
        raise DimensionMismatch(f"Cannot multiply {left.shape} by {right.shape}")
    if mode == EXACT:
        # only nonzero entries of the left factor contribute; sections and
        # projections are mostly zeros
        out = zeros(left.shape[0], right.shape[1], EXACT)
        for i, k in zip(*np.nonzero(left)):
            out[i, :] = out[i, :] + left[i, k] * right[k, :]
        return out
    return left @ right


def mat_mul(*matrices: np.ndarray) -> np.ndarray:
    """Left-to-right product with mode and shape checks"""
    return reduce(_matmul2, matrices)


def block_column(*matrices: np.ndarray) -> np.ndarray:
    """Stack vertically: [M1; M2; ...]"""
    mode = common_mode(*matrices)
    cols = {m.shape[1] for m in matrices}
    if len(cols) != 1:
        raise DimensionMismatch(f"Column counts differ: {sorted(cols)}")
    return np.vstack(matrices).astype(object if mode == EXACT else float)


def block_row(*matrices: np.ndarray) -> np.ndarray:
    """Stack horizontally: [M1, M2, ...]"""
    mode = common_mode(*matrices)
    rows = {m.shape[0] for m in matrices}
    if len(rows) != 1:
        raise DimensionMismatch(f"Row counts differ: {sorted(rows)}")
    return np.hstack(matrices).astype(object if mode == EXACT else float)


def block_diag(*matrices: np.ndarray) -> np.ndarray:
    mode = common_mode(*matrices)
    rows = sum(m.shape[0] for m in matrices)
    cols = sum(m.shape[1] for m in matrices)
    out = zeros(rows, cols, mode)
    r = c = 0
    for m in matrices:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def matrices_equal(left: np.ndarray, right: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    if left.shape != right.shape:
        return False
    if common_mode(left, right) == EXACT:
        return bool(np.all(left == right))
    if left.size == 0:
        return True
    scale = max(spectral_norm(left), spectral_norm(right))
    return float(np.max(np.abs(left - right))) <= tol.atol_for(scale)


def is_zero_matrix(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    return matrices_equal(matrix, zeros(*matrix.shape, mode_of(matrix)), tol)


def spectral_norm(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(to_float(matrix), 2))


def is_symmetric(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    if matrix.shape[0] != matrix.shape[1]:
        return False
    return matrices_equal(matrix, matrix.T, tol)


def _require_symmetric(matrix: np.ndarray, tol: Tolerance) -> None:
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got {matrix.shape}")
    if not is_symmetric(matrix, tol):
        raise NotSymmetric("Matrix is not symmetric")


# ---------------------------------------------------------------------------
# Exact elimination
# ---------------------------------------------------------------------------

def rref(matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over the rationals; returns (R, pivot columns)"""
    if mode_of(matrix) != EXACT:
        raise ModeMismatch("rref is exact-only")
    reduced = matrix.copy()
    rows, cols = reduced.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if reduced[i, c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            reduced[[r, pivot]] = reduced[[pivot, r]]
        lead = reduced[r, c]
        if lead != 1:
            reduced[r, :] = reduced[r, :] / lead
        for i in range(rows):
            if i != r and reduced[i, c] != 0:
                reduced[i, :] = reduced[i, :] - reduced[i, c] * reduced[r, :]
        pivots.append(c)
        r += 1
    return reduced, pivots


def exact_rank(matrix: np.ndarray) -> int:
    return len(rref(matrix)[1])


def inverse_exact(matrix: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over the rationals"""
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise DimensionMismatch(f"Cannot invert a {matrix.shape} matrix")
    reduced, pivots = rref(block_row(matrix, identity(n, EXACT)))
    if pivots[:n] != list(range(n)):
        raise NotInvertible("Matrix is singular")
    return reduced[:, n:].copy()


def ldlt(matrix: np.ndarray) -> Optional[Tuple[List[int], np.ndarray, np.ndarray]]:
    """Symmetric-pivoted LDL^T of a rational symmetric matrix.

    Returns (order, L, d) with M[order][:, order] == L diag(d) L^T, or None as
    soon as a negative pivot, or a nonzero entry left over a zero pivot, shows
    the matrix is not positive semidefinite.
    """
    work = matrix.copy()
    active = list(range(work.shape[0]))
    order: List[int] = []
    pivots: List[Fraction] = []
    columns = {}
    while active:
        k = max(active, key=lambda i: work[i, i])
        d = work[k, k]
        if d < 0:
            return None
        if d == 0:
            if any(work[i, j] != 0 for i in active for j in active):
                return None
            for i in active:
                order.append(i)
                pivots.append(Fraction(0))
                columns[i] = {}
            break
        active.remove(k)
        column = {i: work[i, k] / d for i in active if work[i, k] != 0}
        row = [j for j in active if work[k, j] != 0]
        for i, factor in column.items():
            for j in row:
                work[i, j] -= factor * work[k, j]
        order.append(k)
        pivots.append(d)
        columns[k] = column
    position = {index: p for p, index in enumerate(order)}
    lower = identity(len(order), EXACT)
    for k, column in columns.items():
        for i, factor in column.items():
            lower[position[i], position[k]] = factor
    return order, lower, np.array(pivots, dtype=object)


def is_psd(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    _require_symmetric(matrix, tol)
    if matrix.size == 0:
        return True
    if mode_of(matrix) == EXACT:
        return ldlt(matrix) is not None
    eigenvalues = scipy.linalg.eigvalsh(matrix)
    floor = tol.atol_for(float(np.max(np.abs(eigenvalues))))
    return bool(eigenvalues.min() >= -floor)


def psd_order_leq(lower: np.ndarray, upper: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """lower <= upper in the PSD (Loewner) order"""
    if lower.shape != upper.shape:
        raise DimensionMismatch(f"Cannot compare {lower.shape} with {upper.shape}")
    common_mode(lower, upper)
    _require_symmetric(lower, tol)
    _require_symmetric(upper, tol)
    return is_psd(upper - lower, tol)


# ---------------------------------------------------------------------------
# Float spectral helpers
# ---------------------------------------------------------------------------

def svd_truncated(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD cut at the float rank: (U_r, s_r, Vt_r)"""
    require_float(matrix, "svd_truncated")
    rows, cols = matrix.shape
    if matrix.size == 0:
        return np.zeros((rows, 0)), np.zeros(0), np.zeros((0, cols))
    u, s, vt = scipy.linalg.svd(matrix, full_matrices=False)
    rank = _float_rank(s, matrix.shape, tol)
    logger.debug("svd rank %d of %s", rank, matrix.shape)
    return u[:, :rank], s[:rank], vt[:rank, :]


def _float_rank(singular_values: np.ndarray, shape: Sequence[int], tol: Tolerance) -> int:
    if singular_values.size == 0:
        return 0
    cutoff = tol.rank_cutoff(shape, singular_values[0])
    return int(np.sum(singular_values > cutoff))


def psd_sqrt(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE, truncate: float = 0.0) -> np.ndarray:
    """Symmetric PSD square root.

    Raises NotPSD when an eigenvalue lies below -(rank_rtol * ||M||).
    Negative eigenvalues above that threshold are clamped to 0. Eigenvalues
    with |λ| <= ``truncate`` are treated as zero on both sides.
    """
    require_float(matrix, "psd_sqrt")
    _require_symmetric(matrix, tol)
    if matrix.size == 0:
        return matrix.copy()
    eigenvalues, vectors = scipy.linalg.eigh(matrix)
    threshold = max(tol.rtol_for(matrix.shape) * float(np.max(np.abs(eigenvalues))), truncate)
    if eigenvalues.min() < -threshold:
        raise NotPSD(f"Eigenvalue {eigenvalues.min():.3e} below -{threshold:.3e}")
    kept = np.where(eigenvalues > max(truncate, 0.0), eigenvalues, 0.0)
    dropped = int(np.sum(kept != eigenvalues))
    if dropped:
        logger.debug("psd_sqrt zeroed %d eigenvalues", dropped)
    root = (vectors * np.sqrt(kept)) @ vectors.T
    return (root + root.T) / 2


def gram_root(factor: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Tuple[np.ndarray, np.ndarray, int]:
    """(S, S^+, rank) for S = (F^T F)^{1/2}, with the rank read off F's singular values"""
    _, s, vt = svd_truncated(factor, tol)
    root = (vt.T * s) @ vt
    root_pinv = (vt.T / s) @ vt if s.size else np.zeros((factor.shape[1], factor.shape[1]))
    return (root + root.T) / 2, (root_pinv + root_pinv.T) / 2, int(s.size)


def pinv(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> np.ndarray:
    """Moore-Penrose pseudo-inverse (exact via a full-rank factorisation)"""
    rows, cols = matrix.shape
    mode = mode_of(matrix)
    if matrix.size == 0:
        return zeros(cols, rows, mode)
    if mode == FLOAT:
        u, s, vt = svd_truncated(matrix, tol)
        return (vt.T / s) @ u.T
    reduced, pivots = rref(matrix)
    if not pivots:
        return zeros(cols, rows, EXACT)
    left = matrix[:, pivots]
    right = reduced[:len(pivots), :]
    return mat_mul(
        right.T,
        inverse_exact(mat_mul(right, right.T)),
        inverse_exact(mat_mul(left.T, left)),
        left.T,
    )


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------

def _exact_column_basis(vectors: np.ndarray) -> np.ndarray:
    # reduced column echelon form: unique for a given subspace
    reduced, pivots = rref(vectors.T)
    return reduced[:len(pivots), :].T.copy()


def _float_column_basis(vectors: np.ndarray, tol: Tolerance) -> np.ndarray:
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0))
    u, s, _ = scipy.linalg.svd(vectors, full_matrices=False)
    basis = u[:, :_float_rank(s, vectors.shape, tol)]
    logger.debug("float span rank %d of %s", basis.shape[1], vectors.shape)
    return basis


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^ambient_dim given by a canonical basis.

    Exact mode keeps the reduced column echelon basis, so equal subspaces
    have identical bases. Float mode keeps an orthonormal basis and compares
    through projections.
    """

    ambient_dim: int
    basis: np.ndarray
    mode: str

    @classmethod
    def span(cls, vectors: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> "Subspace":
        mode = mode_of(vectors)
        if mode == EXACT:
            basis = _exact_column_basis(vectors)
        else:
            basis = _float_column_basis(vectors, tol)
        return cls(vectors.shape[0], basis, mode)

    @classmethod
    def zero(cls, ambient_dim: int, mode: str) -> "Subspace":
        return cls(ambient_dim, zeros(ambient_dim, 0, mode), mode)

    @classmethod
    def full(cls, ambient_dim: int, mode: str) -> "Subspace":
        return cls(ambient_dim, identity(ambient_dim, mode), mode)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def is_zero(self) -> bool:
        return self.rank == 0

    def is_full(self) -> bool:
        return self.rank == self.ambient_dim

    def projection(self) -> np.ndarray:
        """Orthogonal projection onto the subspace"""
        if self.rank == 0:
            return zeros(self.ambient_dim, self.ambient_dim, self.mode)
        if self.mode == EXACT:
            b = self.basis
            return mat_mul(b, inverse_exact(mat_mul(b.T, b)), b.T)
        return self.basis @ self.basis.T

    def _check_compatible(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch(
                f"Subspaces live in R^{self.ambient_dim} and R^{other.ambient_dim}"
            )
        if self.mode != other.mode:
            raise ModeMismatch("Cannot compare exact and float subspaces")

    def contains(self, other: "Subspace", tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        """other is a subspace of self"""
        self._check_compatible(other)
        if other.rank == 0:
            return True
        if other.rank > self.rank:
            return False
        if self.mode == EXACT:
            return exact_rank(block_row(self.basis, other.basis)) == self.rank
        residual = other.basis - self.basis @ (self.basis.T @ other.basis)
        return spectral_norm(residual) <= tol.atol_for()

    def equals(self, other: "Subspace", tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        self._check_compatible(other)
        if self.rank != other.rank:
            return False
        if self.mode == EXACT:
            return bool(np.all(self.basis == other.basis))
        return spectral_norm(self.projection() - other.projection()) <= tol.atol_for()

    def contains_vector(self, vector: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        vector = vector.reshape(-1, 1)
        if vector.shape[0] != self.ambient_dim:
            raise DimensionMismatch(f"Vector of length {vector.shape[0]} not in R^{self.ambient_dim}")
        common_mode(vector, self.basis)
        if self.mode == EXACT:
            if all(x == 0 for x in vector.flat):
                return True
            return exact_rank(block_row(self.basis, vector)) == self.rank
        residual = vector - self.basis @ (self.basis.T @ vector)
        return float(np.linalg.norm(residual)) <= tol.atol_for(float(np.linalg.norm(vector)))


def range_space(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """Column space of M"""
    return Subspace.span(matrix, tol)


def kernel(matrix: np.ndarray, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """Null space of M"""
    rows, cols = matrix.shape
    mode = mode_of(matrix)
    if mode == FLOAT:
        if cols == 0:
            return Subspace.zero(0, FLOAT)
        if rows == 0 or not np.any(matrix):
            return Subspace.full(cols, FLOAT)
        _, s, vt = scipy.linalg.svd(matrix, full_matrices=True)
        rank = _float_rank(s, matrix.shape, tol)
        return Subspace(cols, vt[rank:, :].T.copy(), FLOAT)
    reduced, pivots = rref(matrix)
    free = [c for c in range(cols) if c not in pivots]
    vectors = zeros(cols, len(free), EXACT)
    for j, f in enumerate(free):
        vectors[f, j] = Fraction(1)
        for i, p in enumerate(pivots):
            vectors[p, j] = -reduced[i, f]
    return Subspace.span(vectors)


def projection(subspace: Subspace) -> np.ndarray:
    return subspace.projection()


def image(matrix: np.ndarray, subspace: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """M(U)"""
    return Subspace.span(mat_mul(matrix, subspace.basis), tol)


def product(first: Subspace, second: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """Cartesian product U x V inside R^(m+n)"""
    if first.mode != second.mode:
        raise ModeMismatch("Cannot combine exact and float subspaces")
    return Subspace.span(block_diag(first.basis, second.basis), tol)


def subspace_sum(first: Subspace, second: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    first._check_compatible(second)
    return Subspace.span(block_row(first.basis, second.basis), tol)


def subspace_intersect(first: Subspace, second: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    first._check_compatible(second)
    if first.rank == 0 or second.rank == 0:
        return Subspace.zero(first.ambient_dim, first.mode)
    coefficients = kernel(block_row(first.basis, -second.basis), tol).basis
    return Subspace.span(mat_mul(first.basis, coefficients[:first.rank, :]), tol)


def orthogonal_complement(subspace: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    if subspace.rank == 0:
        return Subspace.full(subspace.ambient_dim, subspace.mode)
    return kernel(subspace.basis.T, tol)


def preimage(matrix: np.ndarray, target: Subspace, tol: Tolerance = DEFAULT_TOLERANCE) -> Subspace:
    """{x : Mx in W}"""
    if target.ambient_dim != matrix.shape[0]:
        raise DimensionMismatch(
            f"Subspace of R^{target.ambient_dim} cannot hold the range of a {matrix.shape} matrix"
        )
    common_mode(matrix, target.basis)
    if target.is_full():
        return Subspace.full(matrix.shape[1], target.mode)
    # solve M x = W y, keep the x block
    solutions = kernel(block_row(matrix, -target.basis), tol).basis
    return Subspace.span(solutions[:matrix.shape[1], :], tol)
