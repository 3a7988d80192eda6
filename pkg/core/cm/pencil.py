# core/cm/pencil.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from core.errors import DegenerateInput
from core.forms.binary_forms import BinaryForm, RatLike, RationalPoint, as_rat, gcd_all
from core.forms.divisor import divisor_from
from core.quasimap.quasimap import Quasimap, invariants, make_quasimap
from core.quasimap.stability import classify

logger = logging.getLogger(__name__)


# =============================================================================
# Intersection kernel on P1 x P1
# =============================================================================

@dataclass(frozen=True, slots=True)
class DivClass:
    """
    Divisor class on P1 x P1.

    a is the degree in the fiber coordinates (x, y), b the degree in the base
    coordinates (s, t); a curve of bidegree (a, b) has class (a, b).
    """

    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", as_rat(self.a))
        object.__setattr__(self, "b", as_rat(self.b))

    def __add__(self, other: "DivClass") -> "DivClass":
        return DivClass(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "DivClass") -> "DivClass":
        return DivClass(self.a - other.a, self.b - other.b)

    def __mul__(self, c: RatLike) -> "DivClass":
        c = as_rat(c)
        return DivClass(c * self.a, c * self.b)

    __rmul__ = __mul__

    def dot(self, other: "DivClass") -> Fraction:
        return self.a * other.b + other.a * self.b

    def self_intersection(self) -> Fraction:
        return self.dot(self)


def canonical_class() -> DivClass:
    """Relative canonical class of P1 x C over C."""
    return DivClass(-2, 0)


def line_class(m: int, k: int) -> DivClass:
    return DivClass(m, k)


# =============================================================================
# Bihomogeneous forms and pencils
# =============================================================================

@dataclass(frozen=True, slots=True)
class BiForm:
    """coeffs[i][j] is the coefficient of x^i y^(m-i) s^j t^(k-j)."""

    fiber_degree: int
    base_degree: int
    coeffs: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if self.fiber_degree < 0 or self.base_degree < 0:
            raise DegenerateInput(f"BiForm: negative bidegree ({self.fiber_degree}, {self.base_degree})")
        rows = tuple(tuple(as_rat(c) for c in row) for row in self.coeffs)
        if len(rows) != self.fiber_degree + 1 or any(len(r) != self.base_degree + 1 for r in rows):
            raise DegenerateInput(
                f"BiForm: coefficient matrix must be {self.fiber_degree + 1}x{self.base_degree + 1}"
            )
        object.__setattr__(self, "coeffs", rows)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[RatLike]]) -> "BiForm":
        if not matrix or not matrix[0]:
            raise DegenerateInput("BiForm.from_matrix: empty matrix")
        return cls(len(matrix) - 1, len(matrix[0]) - 1, tuple(tuple(r) for r in matrix))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for row in self.coeffs for c in row)

    @property
    def bidegree(self) -> Tuple[int, int]:
        return self.fiber_degree, self.base_degree

    def restrict(self, p: RationalPoint) -> BinaryForm:
        """The fiber over [s0:t0]."""
        s0, t0 = p.a, p.b
        k = self.base_degree
        return BinaryForm(
            self.fiber_degree,
            tuple(sum((c * s0**j * t0 ** (k - j) for j, c in enumerate(row)), Fraction(0)) for row in self.coeffs),
        )

    def base_columns(self) -> List[BinaryForm]:
        """For each x-power, the coefficient as a form in (s, t)."""
        return [BinaryForm(self.base_degree, row) for row in self.coeffs]

    def divisor_class(self) -> DivClass:
        return DivClass(self.fiber_degree, self.base_degree)


@dataclass(frozen=True, slots=True)
class PencilFamily:
    fiber_degree: int
    base_degree: int
    weight: Fraction
    sections: Tuple[BiForm, ...]
    boundary: Tuple[Tuple[BiForm, Fraction], ...] = ()


def make_pencil(
    m: int,
    k: int,
    u: RatLike,
    sections: Sequence[BiForm],
    boundary: Iterable[Tuple[BiForm, RatLike]] = (),
) -> PencilFamily:
    u = as_rat(u)
    if m < 1 or k < 0 or u <= 0:
        raise DegenerateInput(f"make_pencil: need m >= 1, k >= 0, u > 0, got m={m}, k={k}, u={u}")
    sections = tuple(sections)
    if not sections or any(f.bidegree != (m, k) for f in sections):
        raise DegenerateInput(f"make_pencil: sections must all have bidegree ({m}, {k})")

    columns = [col for f in sections for col in f.base_columns() if not col.is_zero]
    if not columns:
        raise DegenerateInput("make_pencil: all sections are zero")
    common = gcd_all(columns)
    if common.degree > 0:
        raise DegenerateInput(f"make_pencil: all sections vanish on the fibers cut out by {common} in (s, t)")

    pairs = []
    for h, c in boundary:
        c = as_rat(c)
        if c <= 0 or h.is_zero:
            raise DegenerateInput("make_pencil: boundary entries need a nonzero form and a positive coefficient")
        pairs.append((h, c))
    return PencilFamily(m, k, u, sections, tuple(pairs))


def boundary_class(P: PencilFamily) -> DivClass:
    total = DivClass(0, 0)
    for h, c in P.boundary:
        total = total + h.divisor_class() * c
    return total


def cm_degree(P: PencilFamily) -> Fraction:
    """-(K + B + uL)^2 with K = (-2, 0) and L = (m, k)."""
    cls = canonical_class() + boundary_class(P) + line_class(P.fiber_degree, P.base_degree) * P.weight
    return -cls.self_intersection()


def fiber_at(P: PencilFamily, p: RationalPoint) -> Quasimap:
    """Restriction to the fiber over p; boundary components containing that fiber are dropped."""
    sections = [f.restrict(p) for f in P.sections]
    if all(f.is_zero for f in sections):
        raise DegenerateInput(f"fiber_at: all sections vanish on the fiber over {p}")
    pairs = []
    for h, c in P.boundary:
        restricted = h.restrict(p)
        if restricted.is_zero or restricted.degree == 0:
            continue
        pairs.append((restricted, c))
    return make_quasimap(P.fiber_degree, P.weight, sections, divisor_from(pairs))


def default_sample_points(n: int = 8) -> List[RationalPoint]:
    """[0:1], [1:0], then affine points 1, -1, 2, -2, 1/2, -1/2, 3, ..."""
    out = [RationalPoint.affine(0), RationalPoint.infinity()]
    step = 1
    while len(out) < n:
        for a in (Fraction(step), Fraction(-step), Fraction(1, step + 1), Fraction(-1, step + 1)):
            if len(out) >= n:
                break
            p = RationalPoint.affine(a)
            if p not in out:
                out.append(p)
        step += 1
    return out[:n]


@dataclass(frozen=True, slots=True)
class NefnessReport:
    hypothesis_met: bool
    degree: Fraction
    verdict: str
    fibers: pd.DataFrame

    @property
    def consistent(self) -> bool:
        return self.verdict != "violated"


def nefness_probe(P: PencilFamily, points: Optional[Sequence[RationalPoint]] = None) -> NefnessReport:
    """
    Classify sampled fibers and test deg >= 0 when every sampled fiber is
    semistable with 0 < u < mu/2.
    """
    points = list(points) if points is not None else default_sample_points()
    rows = []
    met = bool(points)
    for p in points:
        try:
            q = fiber_at(P, p)
        except DegenerateInput:
            rows.append({"point": str(p), "class": "Degenerate", "mu": None, "weight_ok": False})
            met = False
            continue
        mu = invariants(q).mu
        cls = classify(q)
        weight_ok = P.weight < mu / 2
        met = met and cls.is_semistable and weight_ok
        rows.append({"point": str(p), "class": cls.kind.value, "mu": mu, "weight_ok": weight_ok})

    degree = cm_degree(P)
    if not met:
        verdict = "hypothesis-not-met"
    elif degree >= 0:
        verdict = "consistent"
    else:
        verdict = "violated"
        logger.warning("nefness_probe: negative degree %s with every sampled fiber semistable", degree)
    logger.info("nefness_probe: %d fibers, hypothesis=%s, degree=%s -> %s", len(points), met, degree, verdict)
    frame = pd.DataFrame(rows, columns=["point", "class", "mu", "weight_ok"])
    return NefnessReport(hypothesis_met=met, degree=degree, verdict=verdict, fibers=frame)


__all__ = [
    "DivClass",
    "canonical_class",
    "line_class",
    "boundary_class",
    "BiForm",
    "PencilFamily",
    "make_pencil",
    "cm_degree",
    "fiber_at",
    "default_sample_points",
    "NefnessReport",
    "nefness_probe",
]
