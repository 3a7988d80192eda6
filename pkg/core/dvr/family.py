# core/dvr/family.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Iterable, List, Optional, Sequence, Tuple

import sympy
from sympy import QQ, Poly

from core.errors import DegenerateInput
from core.forms.binary_forms import (
    BinaryForm,
    MobiusMatrix,
    RatLike,
    X,
    as_rat,
    factor_multiplicity,
    gcd_free_basis,
    substitute,
    to_sympy,
)
from core.forms.divisor import divisor_from
from core.quasimap.quasimap import Quasimap, make_quasimap
from core.quasimap.stability import StabilityClass, classify_profile

logger = logging.getLogger(__name__)

T = sympy.Symbol("t")
GENERIC_FIELD = QQ.frac_field(T)


def _trim(row: Iterable[RatLike]) -> Tuple[Fraction, ...]:
    out = [as_rat(c) for c in row]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _t_order(row: Sequence[Fraction]) -> Optional[int]:
    return next((j for j, c in enumerate(row) if c != 0), None)


@dataclass(frozen=True, slots=True)
class TForm:
    """
    Binary form of degree m with coefficients in Q[t].

    rows[i] holds the t-coefficients (lowest power first) of x^i y^(m-i).
    """

    degree: int
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.degree + 1:
            raise DegenerateInput(f"TForm: degree {self.degree} needs {self.degree + 1} rows, got {len(self.rows)}")
        object.__setattr__(self, "rows", tuple(_trim(r) for r in self.rows))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[RatLike]]) -> "TForm":
        if not matrix:
            raise DegenerateInput("TForm.from_matrix: empty matrix")
        return cls(len(matrix) - 1, tuple(tuple(r) for r in matrix))

    @classmethod
    def from_binary_form(cls, f: BinaryForm) -> "TForm":
        return cls(f.degree, tuple((c,) for c in f.coeffs))

    @classmethod
    def from_expr(cls, expr: sympy.Expr | str, degree: Optional[int] = None) -> "TForm":
        """Build from an expression in x, y, t homogeneous in (x, y)."""
        x, y = sympy.symbols("x y")
        poly = Poly(sympy.sympify(expr, locals={"x": x, "y": y, "t": T}), x, y, T, domain=QQ)
        if poly.is_zero and degree is None:
            raise DegenerateInput("TForm.from_expr: zero expression needs an explicit degree")
        terms = [] if poly.is_zero else poly.terms()
        xy_degrees = {a + b for (a, b, _), _ in terms}
        if len(xy_degrees) > 1:
            raise DegenerateInput(f"TForm.from_expr: {expr} is not homogeneous in x, y")
        m = degree if degree is not None else xy_degrees.pop()
        rows = [[Fraction(0)] * (poly.degree(T) + 1 if not poly.is_zero else 1) for _ in range(m + 1)]
        for (a, b, j), c in terms:
            if a + b != m:
                raise DegenerateInput(f"TForm.from_expr: {expr} does not have degree {m}")
            rows[a][j] = as_rat(c)
        return cls(m, tuple(tuple(r) for r in rows))

    @property
    def is_zero(self) -> bool:
        return all(not r for r in self.rows)

    @property
    def t_order(self) -> Optional[int]:
        orders = [o for o in (_t_order(r) for r in self.rows) if o is not None]
        return min(orders) if orders else None

    def newton_points(self) -> List[Tuple[int, int]]:
        """(x-power, t-order) of every nonzero coefficient."""
        return [(i, _t_order(r)) for i, r in enumerate(self.rows) if r]

    def at(self, t0: RatLike) -> BinaryForm:
        t0 = as_rat(t0)
        return BinaryForm(
            self.degree,
            tuple(sum((c * t0**j for j, c in enumerate(r)), Fraction(0)) for r in self.rows),
        )

    def at_zero(self) -> BinaryForm:
        return BinaryForm(self.degree, tuple(r[0] if r else Fraction(0) for r in self.rows))

    def divide_t(self, k: int) -> "TForm":
        order = self.t_order
        if k and (order is None or order < k):
            raise DegenerateInput(f"TForm.divide_t: t^{k} does not divide the form")
        return TForm(self.degree, tuple(r[k:] for r in self.rows))

    def shift_x(self, a: int) -> "TForm":
        """Substitute x -> t^a x."""
        return TForm(self.degree, tuple((Fraction(0),) * (a * i) + r if r else r for i, r in enumerate(self.rows)))

    def base_change(self, e: int) -> "TForm":
        """Substitute t -> t^e."""
        rows = []
        for r in self.rows:
            out = [Fraction(0)] * (e * (len(r) - 1) + 1) if r else []
            for j, c in enumerate(r):
                out[e * j] = c
            rows.append(tuple(out))
        return TForm(self.degree, tuple(rows))

    def substitute(self, M: MobiusMatrix) -> "TForm":
        """(x, y) -> M(x, y) for a constant rational matrix."""
        depth = max((len(r) for r in self.rows), default=0)
        slices = []
        for j in range(depth):
            layer = BinaryForm(self.degree, tuple(r[j] if j < len(r) else Fraction(0) for r in self.rows))
            slices.append(substitute(layer, M))
        rows = [[s.coeffs[i] for s in slices] for i in range(self.degree + 1)]
        return TForm(self.degree, tuple(tuple(r) for r in rows))

    def generic(self) -> Tuple[Poly, int]:
        """Dehomogenized polynomial over Q(t) and its order at infinity."""
        nonzero = [i for i, r in enumerate(self.rows) if r]
        if not nonzero:
            raise DegenerateInput("TForm.generic: zero form")
        top = max(nonzero)
        expr = sum(
            (sum((to_sympy(c) * T**j for j, c in enumerate(r)), sympy.Integer(0)) * X**i for i, r in enumerate(self.rows)),
            sympy.Integer(0),
        )
        return Poly(expr, X, domain=GENERIC_FIELD), self.degree - top

    def to_expr(self) -> sympy.Expr:
        x, y = sympy.symbols("x y")
        return sum(
            (to_sympy(c) * T**j * x**i * y ** (self.degree - i) for i, r in enumerate(self.rows) for j, c in enumerate(r)),
            sympy.Integer(0),
        )


@dataclass(frozen=True, slots=True)
class DvrQuasimapFamily:
    """Quasimap over Q[t] localized at t; sections carry no common power of t."""

    degree: int
    weight: Fraction
    sections: Tuple[TForm, ...]
    boundary: Tuple[Tuple[TForm, Fraction], ...] = ()
    r: int = 1

    @property
    def boundary_degree(self) -> Fraction:
        return sum((c * h.degree for h, c in self.boundary), Fraction(0))

    @property
    def mu(self) -> Fraction:
        return self.boundary_degree + self.weight * self.degree


# =============================================================================
# Construction and fibers
# =============================================================================

def make_family(
    m: int,
    u: RatLike,
    sections: Sequence[TForm],
    boundary: Sequence[Tuple[TForm, RatLike]] = (),
    r: Optional[int] = None,
) -> DvrQuasimapFamily:
    """Validate and normalize: the common t-power of the sections is divided out. r defaults to the lcm of the boundary denominators."""
    u = as_rat(u)
    if m < 1 or u <= 0:
        raise DegenerateInput(f"make_family: need m >= 1 and u > 0, got m={m}, u={u}")
    sections = tuple(sections)
    if not sections or any(s.degree != m for s in sections):
        raise DegenerateInput(f"make_family: sections must all have degree {m}")
    if all(s.is_zero for s in sections):
        raise DegenerateInput("make_family: all sections are zero")
    content = min(s.t_order for s in sections if not s.is_zero)
    if content:
        logger.info("make_family: dividing sections by t^%d", content)
        sections = tuple(s.divide_t(content) for s in sections)

    boundary = [(h, as_rat(c)) for h, c in boundary]
    if r is None:
        r = lcm(1, *(c.denominator for _, c in boundary))
    pairs = []
    for h, c in boundary:
        if c <= 0:
            raise DegenerateInput(f"make_family: boundary coefficient {c} is not positive")
        if h.is_zero:
            raise DegenerateInput("make_family: zero boundary form")
        if (c * r).denominator != 1:
            raise DegenerateInput(f"make_family: r={r} does not clear boundary coefficient {c}")
        pairs.append((h, c))
    return DvrQuasimapFamily(m, u, sections, tuple(pairs), r)


def special_fiber(F: DvrQuasimapFamily) -> Quasimap:
    pairs = []
    for h, c in F.boundary:
        h0 = h.at_zero()
        if h0.is_zero:
            raise DegenerateInput("special_fiber: a boundary form vanishes identically at t=0 (not flat)")
        pairs.append((h0, c))
    return make_quasimap(F.degree, F.weight, [s.at_zero() for s in F.sections], divisor_from(pairs), F.r)


def family_fiber(F: DvrQuasimapFamily, t0: RatLike) -> Quasimap:
    t0 = as_rat(t0)
    if t0 == 0:
        return special_fiber(F)
    pairs = []
    for h, c in F.boundary:
        ht = h.at(t0)
        if ht.is_zero:
            raise DegenerateInput(f"family_fiber: a boundary form vanishes identically at t={t0}")
        pairs.append((ht, c))
    return make_quasimap(F.degree, F.weight, [s.at(t0) for s in F.sections], divisor_from(pairs), F.r)


def generic_classify(F: DvrQuasimapFamily) -> StabilityClass:
    """Classification of the generic fiber, with gcds and squarefree bases taken over Q(t)."""
    parts = [s.generic() for s in F.sections if not s.is_zero]
    g = reduce(lambda a, b: a.gcd(b), (p for p, _ in parts))
    g_inf = min(a for _, a in parts)
    fixed_degree = g.degree() + g_inf

    pieces: List[Tuple[Poly, int, Fraction]] = [(*h.generic(), c) for h, c in F.boundary]
    pieces.append((g, g_inf, F.weight))

    basis = gcd_free_basis(p for p, _, _ in pieces)
    terms = []
    for b in basis:
        coeff = sum((c * factor_multiplicity(p, b) for p, _, c in pieces), Fraction(0))
        if coeff:
            terms.append((b.degree(), coeff, None))
    at_infinity = sum((c * a for _, a, c in pieces), Fraction(0))
    if at_infinity:
        terms.append((1, at_infinity, None))

    result = classify_profile(mu=F.mu, terms=terms, constant=fixed_degree == F.degree)
    logger.info("generic_classify: mu=%s fixed=%d -> %s", F.mu, fixed_degree, result.kind.value)
    return result


# =============================================================================
# Transformations used by the reduction loop
# =============================================================================

def transform_family(F: DvrQuasimapFamily, M: MobiusMatrix) -> DvrQuasimapFamily:
    return DvrQuasimapFamily(
        F.degree,
        F.weight,
        tuple(s.substitute(M) for s in F.sections),
        tuple((h.substitute(M), c) for h, c in F.boundary),
        F.r,
    )


def base_change_family(F: DvrQuasimapFamily, e: int) -> DvrQuasimapFamily:
    if e == 1:
        return F
    return DvrQuasimapFamily(
        F.degree,
        F.weight,
        tuple(s.base_change(e) for s in F.sections),
        tuple((h.base_change(e), c) for h, c in F.boundary),
        F.r,
    )


def shift_family(F: DvrQuasimapFamily, a: int) -> Tuple[DvrQuasimapFamily, int]:
    """x -> t^a x, then strip t-content from the sections and from each boundary form."""
    sections = [s.shift_x(a) for s in F.sections]
    content = min(s.t_order for s in sections if not s.is_zero)
    extracted = content
    sections = [s.divide_t(content) for s in sections]
    boundary = []
    for h, c in F.boundary:
        shifted = h.shift_x(a)
        k = shifted.t_order
        extracted += k
        boundary.append((shifted.divide_t(k), c))
    return DvrQuasimapFamily(F.degree, F.weight, tuple(sections), tuple(boundary), F.r), extracted


__all__ = [
    "T",
    "TForm",
    "DvrQuasimapFamily",
    "make_family",
    "special_fiber",
    "family_fiber",
    "generic_classify",
    "transform_family",
    "base_change_family",
    "shift_family",
]
