# core/quasimap/quasimap.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple, Union

import sympy

from core.errors import DegenerateInput, TargetViolation
from core.forms.binary_forms import (
    BinaryForm,
    MobiusMatrix,
    RatLike,
    apply_mobius,
    as_rat,
    divide_exact,
    evaluate_ideal,
    gcd_all,
    parse_generator,
    substitute,
    to_sympy,
)
from core.forms.divisor import QDivisor, combine, divisor_from, transport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class TargetCone:
    """Homogeneous ideal of Cone(X) inside A^{N+1}, generators in z0..zN."""

    ambient_dim: int
    generators: Tuple[str, ...] = ()

    def polys(self) -> list:
        return [parse_generator(g, self.ambient_dim + 1) for g in self.generators]


@dataclass(frozen=True, slots=True)
class Quasimap:
    degree: int
    weight: Fraction
    sections: Tuple[BinaryForm, ...]
    boundary: QDivisor
    r: int = 1
    target: Optional[TargetCone] = None

    @property
    def ambient_dim(self) -> int:
        return len(self.sections) - 1


@dataclass(frozen=True, slots=True)
class NumericInvariants:
    mu: Fraction
    v: Fraction
    fixed_degree: int
    movable_degree: int


# =============================================================================
# Construction
# =============================================================================

def make_quasimap(
    m: int,
    u: RatLike,
    sections: Sequence[BinaryForm],
    boundary: Union[QDivisor, Iterable[Tuple[BinaryForm, RatLike]], None] = None,
    r: Optional[int] = None,
    target: Optional[TargetCone] = None,
) -> Quasimap:
    """Validated constructor; every other module builds quasimaps through here. r defaults to minimal_r(B)."""
    u = as_rat(u)
    if m < 1:
        raise DegenerateInput(f"make_quasimap: degree must be >= 1, got {m}")
    if u <= 0:
        raise DegenerateInput(f"make_quasimap: weight must be positive, got {u}")
    sections = tuple(sections)
    if not sections:
        raise DegenerateInput("make_quasimap: no sections")
    bad = [f.degree for f in sections if f.degree != m]
    if bad:
        raise DegenerateInput(f"make_quasimap: sections must have degree {m}, got {bad}")
    if all(f.is_zero for f in sections):
        raise DegenerateInput("make_quasimap: all sections are zero")

    if boundary is None:
        B = QDivisor.zero()
    elif isinstance(boundary, QDivisor):
        B = boundary
    else:
        B = divisor_from(boundary)
    if not B.is_effective:
        raise DegenerateInput(f"make_quasimap: boundary {B} is not effective")
    if r is None:
        r = minimal_r(B)
    if r < 1:
        raise DegenerateInput(f"make_quasimap: r must be >= 1, got {r}")
    for cl, c in B:
        if (c * r).denominator != 1:
            raise DegenerateInput(f"make_quasimap: r={r} does not clear coefficient {c} of {cl}")

    if target is not None:
        if target.ambient_dim + 1 != len(sections):
            raise DegenerateInput(
                f"make_quasimap: target lives in P^{target.ambient_dim} but {len(sections)} sections were given"
            )
        if not evaluate_ideal(target.polys(), sections):
            raise TargetViolation("make_quasimap: sections do not factor through the target cone")

    return Quasimap(degree=m, weight=u, sections=sections, boundary=B, r=r, target=target)


def minimal_r(boundary: QDivisor) -> int:
    r = 1
    for _, c in boundary:
        r = sympy.ilcm(r, c.denominator)
    return int(r)


# =============================================================================
# Fixed / movable parts
# =============================================================================

@lru_cache(maxsize=4096)
def section_gcd(q: Quasimap) -> BinaryForm:
    return gcd_all(q.sections)


def fixed_movable(q: Quasimap) -> Tuple[QDivisor, int]:
    g = section_gcd(q)
    fixed = divisor_from([(g, 1)])
    return fixed, q.degree - g.degree


def log_twisted_boundary(q: Quasimap) -> QDivisor:
    """B + u*B' where B' is the fixed part."""
    fixed, _ = fixed_movable(q)
    return combine(q.boundary, fixed, 1, q.weight)


def is_constant(q: Quasimap) -> Tuple[bool, Optional[Tuple[Fraction, ...]]]:
    g = section_gcd(q)
    reduced = [divide_exact(f, g) for f in q.sections]
    matrix = sympy.Matrix([[to_sympy(c) for c in h.coeffs] for h in reduced])
    if matrix.rank() != 1:
        return False, None
    ref = next(h for h in reduced if not h.is_zero)
    k = next(i for i, c in enumerate(ref.coeffs) if c != 0)
    value = [h.coeffs[k] / ref.coeffs[k] for h in reduced]
    lead = next(c for c in value if c != 0)
    return True, tuple(c / lead for c in value)


def invariants(q: Quasimap) -> NumericInvariants:
    fixed_degree = section_gcd(q).degree
    mu = q.boundary.degree + q.weight * q.degree
    return NumericInvariants(
        mu=mu,
        v=2 - mu,
        fixed_degree=fixed_degree,
        movable_degree=q.degree - fixed_degree,
    )


# =============================================================================
# Coordinate changes
# =============================================================================

def apply_mobius_quasimap(q: Quasimap, M: MobiusMatrix) -> Quasimap:
    """Pull q back along M: sections keep their relative scalars, boundary clusters move."""
    sections = tuple(substitute(f, M) for f in q.sections)
    boundary = transport(q.boundary, [apply_mobius(cl.form, M) for cl, _ in q.boundary])
    return Quasimap(q.degree, q.weight, sections, boundary, q.r, q.target)


def scale_sections(q: Quasimap, factor: RatLike) -> Quasimap:
    factor = as_rat(factor)
    if factor == 0:
        raise DegenerateInput("scale_sections: zero factor")
    return Quasimap(q.degree, q.weight, tuple(f.scale(factor) for f in q.sections), q.boundary, q.r, q.target)


def sections_proportional(first: Sequence[BinaryForm], second: Sequence[BinaryForm]) -> bool:
    """True iff second = lambda * first for one nonzero rational lambda."""
    if len(first) != len(second):
        return False
    ratio: Optional[Fraction] = None
    for f, g in zip(first, second):
        if f.degree != g.degree:
            return False
        for a, b in zip(f.coeffs, g.coeffs):
            if (a == 0) != (b == 0):
                return False
            if a == 0:
                continue
            if ratio is None:
                ratio = b / a
            elif b != ratio * a:
                return False
    return ratio is not None


__all__ = [
    "TargetCone",
    "Quasimap",
    "NumericInvariants",
    "make_quasimap",
    "minimal_r",
    "section_gcd",
    "fixed_movable",
    "log_twisted_boundary",
    "is_constant",
    "invariants",
    "apply_mobius_quasimap",
    "scale_sections",
    "sections_proportional",
]
