#!/usr/bin/env python3
"""
OpRange Towers
Growing diagonal sections (A_n, B_n) of an operator pair that only exists in
infinite dimensions, used to watch domination constants blow up while every
section stays dominated, and witness sequences B_n for almost domination.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from classify import domination_report
from core_linalg import (
    DEFAULT_TOLERANCE,
    EXACT,
    Tolerance,
    common_mode,
    is_zero_matrix,
    mat_mul,
    psd_order_leq,
    range_space,
    spectral_norm,
    subspace_intersect,
    to_fraction,
    zeros,
)
from linrel import from_pair, is_operator
from oprange_errors import CriteriaDisagree, DimensionMismatch, OperatorRangeError, TowerConfigError

logger = logging.getLogger(__name__)

# Configuration
TOWERS_DIR = Path(__file__).parent.parent / "sources" / "towers"
BOUNDED_SLOPE_THRESHOLD = 0.05
GROWTH_MODELS = ("constant", "logarithmic", "polynomial", "exponential")
FAMILIES = ("reciprocal", "geometric", "constant", "list")
VERDICTS = ("dominated-limit", "almost-dominated-not-dominated", "singular-trend", "undetermined")
INFINITE = "inf"


@dataclass(frozen=True)
class SequenceGenerator:
    """Exact diagonal entries x_1, x_2, ... of a named family

    reciprocal: 1/k^power, geometric: ratio^k, constant: value, list: values[k-1]
    """

    family: str
    power: int = 1
    ratio: Fraction = Fraction(1, 2)
    value: Fraction = Fraction(1)
    values: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise TowerConfigError(f"Unknown generator family '{self.family}', expected one of {FAMILIES}")
        if self.family == "reciprocal" and self.power < 0:
            raise TowerConfigError(f"reciprocal power must be >= 0, got {self.power}")

    def term(self, k: int) -> Fraction:
        if k < 1:
            raise TowerConfigError(f"Sequence index starts at 1, got {k}")
        if self.family == "reciprocal":
            return Fraction(1, k ** self.power)
        if self.family == "geometric":
            return self.ratio ** k
        if self.family == "constant":
            return self.value
        if k > len(self.values):
            raise TowerConfigError(f"List generator has {len(self.values)} values, index {k} requested")
        return self.values[k - 1]

    def terms(self, n: int) -> List[Fraction]:
        return [self.term(k) for k in range(1, n + 1)]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SequenceGenerator":
        if not isinstance(data, dict) or "family" not in data:
            raise TowerConfigError(f"Generator must be an object with a 'family', got {data!r}")
        try:
            return cls(
                family=data["family"],
                power=int(data.get("power", 1)),
                ratio=to_fraction(data.get("ratio", "1/2")),
                value=to_fraction(data.get("value", 1)),
                values=tuple(to_fraction(v) for v in data.get("values", [])),
            )
        except (TypeError, ValueError) as e:
            raise TowerConfigError(f"Invalid generator {data!r}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"family": self.family}
        if self.family == "reciprocal":
            payload["power"] = self.power
        elif self.family == "geometric":
            payload["ratio"] = str(self.ratio)
        elif self.family == "constant":
            payload["value"] = str(self.value)
        else:
            payload["values"] = [str(v) for v in self.values]
        return payload


@dataclass(frozen=True)
class DiagonalTower:
    """A_n = diag(alpha_1..alpha_n), B_n = diag(beta_1..beta_n) for n <= max_dim"""

    alpha: SequenceGenerator
    beta: SequenceGenerator
    max_dim: int
    name: str = "tower"

    def __post_init__(self):
        if self.max_dim < 2:
            raise OperatorRangeError(f"max_dim must be at least 2, got {self.max_dim}")
        for label, generator in (("alpha", self.alpha), ("beta", self.beta)):
            if generator.family == "list" and len(generator.values) < self.max_dim:
                raise TowerConfigError(
                    f"{label} lists {len(generator.values)} values but max_dim is {self.max_dim}"
                )

    def section(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        a = zeros(n, n, EXACT)
        b = zeros(n, n, EXACT)
        for k, (x, y) in enumerate(zip(self.alpha.terms(n), self.beta.terms(n))):
            a[k, k] = x
            b[k, k] = y
        return a, b

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "alpha": self.alpha.to_dict(),
            "beta": self.beta.to_dict(),
            "max_dim": self.max_dim,
        }


class GrowthFit(NamedTuple):
    model: str
    parameter: float
    slope: float

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.model, "parameter": self.parameter, "slope": self.slope}


@dataclass
class TowerReport:
    dims: List[int]
    constants: List[Optional[Fraction]]
    verdict: str
    growth_fit: GrowthFit
    sections_dominated: List[bool] = field(default_factory=list)
    sections_regular: List[bool] = field(default_factory=list)
    sections_singular: List[bool] = field(default_factory=list)
    cross_validated: bool = False
    validated_sections: List[int] = field(default_factory=list)
    thresholds: Dict[str, Any] = field(default_factory=dict)

    def constants_as_strings(self) -> List[str]:
        return [INFINITE if c is None else str(c) for c in self.constants]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dims": self.dims,
            "constants": self.constants_as_strings(),
            "verdict": self.verdict,
            "growth_fit": self.growth_fit.to_dict(),
            "sections_dominated": self.sections_dominated,
            "sections_regular": self.sections_regular,
            "sections_singular": self.sections_singular,
            "cross_validated": self.cross_validated,
            "validated_sections": self.validated_sections,
            "thresholds": self.thresholds,
        }


def load_tower(path: Path) -> DiagonalTower:
    """Read a tower definition such as sources/towers/reciprocal_unit.json"""
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        try:
            config = json.load(f)
        except json.JSONDecodeError as e:
            raise TowerConfigError(f"{path.name}: invalid JSON: {e}") from e
    missing = [key for key in ("alpha", "beta", "max_dim") if key not in config]
    if missing:
        raise TowerConfigError(f"{path.name}: missing keys {missing}")
    try:
        max_dim = int(config["max_dim"])
    except (TypeError, ValueError) as e:
        raise TowerConfigError(f"{path.name}: max_dim must be an integer") from e
    return DiagonalTower(
        alpha=SequenceGenerator.from_dict(config["alpha"]),
        beta=SequenceGenerator.from_dict(config["beta"]),
        max_dim=max_dim,
        name=config.get("name", path.stem),
    )


# ---------------------------------------------------------------------------
# Growth fitting
# ---------------------------------------------------------------------------

def _sse(x: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    coefficients = np.polyfit(x, y, 1)
    residual = y - np.polyval(coefficients, x)
    return float(residual @ residual), coefficients


def fit_growth(dims: Sequence[int], constants: Sequence[Optional[Fraction]]) -> GrowthFit:
    """Least-squares model of log c_n; slope is d log c / d log n over the tail n >= N/2"""
    points = [(n, float(c)) for n, c in zip(dims, constants) if c is not None and c > 0 and n >= 2]
    if len(points) < 2:
        last = next((float(c) for c in reversed(constants) if c is not None), 0.0)
        return GrowthFit("constant", last, 0.0)

    n = np.array([p[0] for p in points], dtype=float)
    log_c = np.log(np.array([p[1] for p in points]))
    log_n = np.log(n)

    constant_residual = log_c - log_c.mean()
    candidates = {"constant": (float(constant_residual @ constant_residual), math.exp(log_c.mean()))}
    log_sse, log_coef = _sse(np.log(log_n), log_c)
    candidates["logarithmic"] = (log_sse, math.exp(log_coef[1]))
    poly_sse, poly_coef = _sse(log_n, log_c)
    candidates["polynomial"] = (poly_sse, float(poly_coef[0]))
    exp_sse, exp_coef = _sse(n, log_c)
    candidates["exponential"] = (exp_sse, math.exp(exp_coef[0]))

    # earlier (simpler) models win ties
    model = min(GROWTH_MODELS, key=lambda name: (round(candidates[name][0], 12), GROWTH_MODELS.index(name)))

    tail = n >= n.max() / 2
    slope = float(np.polyfit(log_n[tail], log_c[tail], 1)[0]) if np.count_nonzero(tail) >= 2 else 0.0
    logger.debug("growth fit: %s", {name: round(v[0], 6) for name, v in candidates.items()})
    return GrowthFit(model, float(candidates[model][1]), slope)


# ---------------------------------------------------------------------------
# Running a tower
# ---------------------------------------------------------------------------

def _ratio(alpha: Fraction, beta: Fraction) -> Optional[Fraction]:
    if alpha == 0:
        return Fraction(0) if beta == 0 else None
    return abs(beta) / abs(alpha)


def validated_sections(max_dim: int) -> List[int]:
    """Sections re-checked by the general pair machinery: powers of two and the last one"""
    sections = []
    n = 1
    while n < max_dim:
        sections.append(n)
        n *= 2
    sections.append(max_dim)
    return sections


def _cross_validate(n: int, a: np.ndarray, b: np.ndarray, constant: Optional[Fraction],
                    regular: bool, singular: bool, tol: Tolerance) -> bool:
    report = domination_report(a, b, tol)
    if report.dominated != (constant is not None):
        raise CriteriaDisagree(f"Section {n}: ratio formula and domination test disagree on domination")
    if is_operator(from_pair(a, b, tol), tol) != regular:
        raise CriteriaDisagree(f"Section {n}: diagonal formula and relation test disagree on regularity")
    trivial = subspace_intersect(range_space(a.T, tol), range_space(b.T, tol), tol).is_zero()
    if trivial != singular:
        raise CriteriaDisagree(f"Section {n}: diagonal formula and range test disagree on singularity")
    if constant is None:
        return True
    lo, hi = report.squared_interval
    if not lo <= constant ** 2 <= hi:
        raise CriteriaDisagree(
            f"Section {n}: c_n^2 = {constant ** 2} outside the certified interval [{lo}, {hi}]"
        )
    return True


def run_tower(tower: DiagonalTower, tol: Tolerance = DEFAULT_TOLERANCE,
              cross_validate: bool = True) -> TowerReport:
    """Least domination constants c_n of every section n = 1..max_dim and a trend verdict

    Constants, regularity and singularity come from the diagonal entries. With
    cross_validate, the sections listed by validated_sections() are rebuilt as
    matrices and checked against the general domination and relation tests.
    """
    alphas = tower.alpha.terms(tower.max_dim)
    betas = tower.beta.terms(tower.max_dim)
    checked = validated_sections(tower.max_dim) if cross_validate else []

    dims: List[int] = []
    constants: List[Optional[Fraction]] = []
    dominated: List[bool] = []
    regular: List[bool] = []
    singular: List[bool] = []
    running: Optional[Fraction] = Fraction(0)
    # B_n leaves the operator relation once some beta_k != 0 sits on alpha_k == 0
    multivalued = False
    overlapping = False

    for n in range(1, tower.max_dim + 1):
        alpha, beta = alphas[n - 1], betas[n - 1]
        ratio = _ratio(alpha, beta)
        # nested sections: once unbounded, always unbounded
        running = None if running is None or ratio is None else max(running, ratio)
        multivalued = multivalued or (alpha == 0 and beta != 0)
        overlapping = overlapping or (alpha != 0 and beta != 0)
        if n in checked:
            a, b = tower.section(n)
            _cross_validate(n, a, b, running, not multivalued, not overlapping, tol)
        dims.append(n)
        constants.append(running)
        dominated.append(running is not None)
        regular.append(not multivalued)
        singular.append(not overlapping)

    growth = fit_growth(dims, constants)
    if all(c is not None for c in constants):
        verdict = "dominated-limit" if growth.slope < BOUNDED_SLOPE_THRESHOLD else "almost-dominated-not-dominated"
    elif all(singular):
        verdict = "singular-trend"
    else:
        verdict = "undetermined"

    logger.info("tower %s: N=%d verdict=%s fit=%s", tower.name, tower.max_dim, verdict, growth.model)
    return TowerReport(
        dims=dims,
        constants=constants,
        verdict=verdict,
        growth_fit=growth,
        sections_dominated=dominated,
        sections_regular=regular,
        sections_singular=singular,
        cross_validated=cross_validate,
        validated_sections=checked,
        thresholds={"bounded_slope": BOUNDED_SLOPE_THRESHOLD, "tail_start": (tower.max_dim + 1) // 2},
    )


# ---------------------------------------------------------------------------
# Almost-domination witnesses
# ---------------------------------------------------------------------------

@dataclass
class WitnessReport:
    dominated: List[bool]
    constants: List[Optional[float]]
    monotone: bool
    first_violation: Optional[int]
    terminal_ok: bool
    gap: float
    exact_zero_gap: bool
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dominated": self.dominated,
            "constants": self.constants,
            "monotone": self.monotone,
            "first_violation": self.first_violation,
            "terminal_ok": self.terminal_ok,
            "gap": self.gap,
            "exact_zero_gap": self.exact_zero_gap,
            "passed": self.passed,
        }


def validate_ad_witness(a: np.ndarray, b: np.ndarray, witnesses: Sequence[np.ndarray],
                        tol: Tolerance = DEFAULT_TOLERANCE) -> WitnessReport:
    """Check B_1, B_2, ... as an increasing approximation of B by operators dominated by A

    first_violation is the index i of the first witness with B_{i-1}*B_{i-1} not below B_i*B_i.
    """
    if not witnesses:
        raise OperatorRangeError("At least one witness is required")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"A has {a.shape[1]} columns but B has {b.shape[1]}")
    for i, w in enumerate(witnesses):
        if w.shape != b.shape:
            raise DimensionMismatch(f"Witness {i} has shape {w.shape}, expected {b.shape}")
    mode = common_mode(a, b, *witnesses)

    reports = [domination_report(a, w, tol) for w in witnesses]
    grams = [mat_mul(w.T, w) for w in witnesses]

    first_violation = None
    for i in range(1, len(grams)):
        if not psd_order_leq(grams[i - 1], grams[i], tol):
            first_violation = i
            break

    target = mat_mul(b.T, b)
    difference = target - grams[-1]
    terminal_ok = psd_order_leq(grams[-1], target, tol)
    exact_zero_gap = mode == EXACT and is_zero_matrix(difference)
    monotone = first_violation is None
    dominated = [r.dominated for r in reports]

    logger.debug("witness check: dominated=%s monotone=%s terminal=%s", dominated, monotone, terminal_ok)
    return WitnessReport(
        dominated=dominated,
        constants=[r.constant for r in reports],
        monotone=monotone,
        first_violation=first_violation,
        terminal_ok=terminal_ok,
        gap=spectral_norm(difference),
        exact_zero_gap=exact_zero_gap,
        passed=all(dominated) and monotone and terminal_ok,
    )


def projection_flag_witnesses(b: np.ndarray) -> List[np.ndarray]:
    """P_n B for the coordinate projections P_1 <= P_2 <= ... <= P_k = I on the codomain"""
    mode = common_mode(b)
    witnesses = []
    for n in range(1, b.shape[0] + 1):
        truncated = zeros(*b.shape, mode)
        truncated[:n, :] = b[:n, :]
        witnesses.append(truncated)
    return witnesses
