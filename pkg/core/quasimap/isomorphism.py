# core/quasimap/isomorphism.py
from __future__ import annotations

import logging
from collections import defaultdict
from fractions import Fraction
from itertools import permutations
from math import isqrt
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import sympy

from core.errors import Unsupported
from core.forms.binary_forms import (
    BinaryForm,
    MobiusMatrix,
    RationalPoint,
    X,
    Y,
    as_rat,
    divide_exact,
    ord_at,
    rational_roots,
    to_sympy,
)
from core.forms.divisor import Cluster, divisor_from, divisors_equal, multiplicity_at
from core.quasimap.quasimap import (
    Quasimap,
    apply_mobius_quasimap,
    invariants,
    is_constant,
    section_gcd,
    sections_proportional,
)

logger = logging.getLogger(__name__)

# members f_base + c*f_j of the linear system used as extra markings
_PENCIL_SCALARS = tuple(Fraction(c) for c in (1, -1, 2, -2, "1/2", "-1/2", 3, -3))
# members forced to vanish at these points mark them on every non-constant quasimap
_SAMPLE_POINTS = (
    RationalPoint.affine(0),
    RationalPoint.infinity(),
    RationalPoint.affine(1),
    RationalPoint.affine(-1),
)

Signature = Tuple
Member = Tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# markings
# ---------------------------------------------------------------------------

def _scaled(vector: Sequence[Fraction]) -> Member:
    lead = next(c for c in vector if c != 0)
    return tuple(c / lead for c in vector)


def _combine(q: Quasimap, member: Member) -> BinaryForm:
    out = BinaryForm.zero(q.degree)
    for c, f in zip(member, q.sections):
        if c != 0:
            out = out + f.scale(c)
    return out


def _member_vectors(q: Quasimap) -> List[Member]:
    """
    Coefficient vectors of the linear-system members used as markings.

    Besides f_base + c*f_j, for each sample point p and each pair of movable
    parts (g_k, g_i) with g_k(p) != 0 the member g_k(p)*f_i - g_i(p)*f_k
    vanishes at p. Both quasimaps of a comparison use the vectors of the
    first one, so the members correspond under any isomorphism.
    """
    n = len(q.sections)
    base = next(i for i, f in enumerate(q.sections) if not f.is_zero)
    vectors: List[Member] = []
    for j in range(n):
        if j == base:
            continue
        for c in _PENCIL_SCALARS:
            v = [Fraction(0)] * n
            v[base], v[j] = Fraction(1), c
            vectors.append(tuple(v))

    g = section_gcd(q)
    movable = [BinaryForm.zero(q.degree - g.degree) if f.is_zero else divide_exact(f, g) for f in q.sections]
    for p in _SAMPLE_POINTS:
        values = [h.evaluate(p) for h in movable]
        k = next(i for i, v in enumerate(values) if v != 0)
        for i in range(n):
            if i == k:
                continue
            v = [Fraction(0)] * n
            v[i], v[k] = values[k], -values[i]
            vectors.append(_scaled(v))

    unique = list(dict.fromkeys(vectors))
    return [v for v in unique if not _combine(q, v).is_zero]


def _marked_points(q: Quasimap, vectors: Sequence[Member]) -> Dict[RationalPoint, Signature]:
    members = [_combine(q, v) for v in vectors]
    forms = [cl.form for cl, _ in q.boundary] + [f for f in q.sections if not f.is_zero]
    forms += [h for h in members if not h.is_zero]
    points = {p for f in forms if f.degree > 0 for p, _ in rational_roots(f)}

    def signature(p: RationalPoint) -> Signature:
        return (
            multiplicity_at(q.boundary, p),
            tuple(-1 if f.is_zero else ord_at(f, p) for f in q.sections),
            tuple(-1 if h.is_zero else ord_at(h, p) for h in members),
        )

    return {p: signature(p) for p in sorted(points, key=lambda p: (p.is_infinity, p.a))}


def _coarse_invariants(q: Quasimap) -> Tuple:
    inv = invariants(q)
    constant, value = is_constant(q)
    return (
        q.degree,
        q.weight,
        len(q.sections),
        tuple(f.is_zero for f in q.sections),
        q.boundary.degree,
        inv.fixed_degree,
        constant,
        value,
    )


def _support(q: Quasimap) -> List[Cluster]:
    """Clusters of the boundary and of the fixed part."""
    forms = [cl.form for cl, _ in q.boundary] + [section_gcd(q)]
    return divisor_from([(f, 1) for f in forms if f.degree > 0]).clusters()


def matches_via(q1: Quasimap, q2: Quasimap, M: MobiusMatrix) -> bool:
    """q1 pulled back along M equals q2, sections up to one scalar."""
    moved = apply_mobius_quasimap(q1, M)
    return divisors_equal(moved.boundary, q2.boundary) and sections_proportional(moved.sections, q2.sections)


# ---------------------------------------------------------------------------
# polynomial conditions on the matrix entries
# ---------------------------------------------------------------------------

def _symbolic_coeffs(f: BinaryForm, entries: Sequence[sympy.Expr]) -> List[sympy.Expr]:
    a, b, c, d = entries
    expr = sympy.expand(f.to_expr().subs({X: a * X + b * Y, Y: c * X + d * Y}, simultaneous=True))
    poly = sympy.Poly(expr, X, Y)
    return [sympy.expand(poly.coeff_monomial((k, f.degree - k))) for k in range(f.degree + 1)]


def _proportionality_equations(
    moved: Sequence[List[sympy.Expr]],
    target: Sequence[BinaryForm],
) -> List[sympy.Expr]:
    ref = next(
        ((i, k) for i, g in enumerate(target) for k, c in enumerate(g.coeffs) if c != 0),
        None,
    )
    if ref is None:
        return []
    i0, k0 = ref
    pivot = to_sympy(target[i0].coeffs[k0])
    eqs = []
    for i, g in enumerate(target):
        for k, c in enumerate(g.coeffs):
            e = sympy.expand(moved[i][k] * pivot - to_sympy(c) * moved[i0][k0])
            if e != 0:
                eqs.append(e)
    return eqs


def _boundary_groups(q: Quasimap) -> Dict[Fraction, BinaryForm]:
    groups: Dict[Fraction, BinaryForm] = defaultdict(lambda: BinaryForm.constant(1))
    for cl, c in q.boundary:
        groups[c] = groups[c] * cl.form
    return dict(groups)


def _matching_equations(q1: Quasimap, q2: Quasimap, entries: Sequence[sympy.Expr]) -> Optional[List[sympy.Expr]]:
    """Polynomial conditions for q1 o M ~ q2 in the symbolic entries of M; None if the boundaries cannot match."""
    eqs = _proportionality_equations([_symbolic_coeffs(f, entries) for f in q1.sections], q2.sections)
    groups1, groups2 = _boundary_groups(q1), _boundary_groups(q2)
    if set(groups1) != set(groups2):
        return None
    for c, h1 in groups1.items():
        h2 = groups2[c]
        if h2.degree != h1.degree:
            return None
        eqs += _proportionality_equations([_symbolic_coeffs(h1, entries)], [h2])
    return eqs


# ---------------------------------------------------------------------------
# two marked points: one scaling parameter
# ---------------------------------------------------------------------------

def _columns(p: RationalPoint, r: RationalPoint) -> MobiusMatrix:
    return MobiusMatrix(p.a, r.a, p.b, r.b)


def _two_point_search(
    q1: Quasimap,
    q2: Quasimap,
    marks1: Dict[RationalPoint, Signature],
    marks2: Dict[RationalPoint, Signature],
) -> Optional[MobiusMatrix]:
    d = sympy.Symbol("d")
    p1 = list(marks1)
    for order in permutations(list(marks2), 2):
        if [marks2[p] for p in order] != [marks1[p] for p in p1]:
            continue
        T1, T2inv = _columns(*p1), _columns(*order).inverse()
        # M(d) = T1 * diag(d, 1) * T2^-1
        entries = [
            to_sympy(T1.a) * d * to_sympy(T2inv.a) + to_sympy(T1.b) * to_sympy(T2inv.c),
            to_sympy(T1.a) * d * to_sympy(T2inv.b) + to_sympy(T1.b) * to_sympy(T2inv.d),
            to_sympy(T1.c) * d * to_sympy(T2inv.a) + to_sympy(T1.d) * to_sympy(T2inv.c),
            to_sympy(T1.c) * d * to_sympy(T2inv.b) + to_sympy(T1.d) * to_sympy(T2inv.d),
        ]
        eqs = _matching_equations(q1, q2, entries)
        if eqs is None:
            continue

        if eqs:
            common = sympy.Poly(sympy.gcd_list(eqs), d)
            if common.degree() <= 0:
                continue
            candidates = [as_rat(r) for r in common.ground_roots() if r != 0]
        else:
            candidates = [Fraction(1)]
        for d0 in candidates:
            M = T1 @ MobiusMatrix(d0, 0, 0, 1) @ T2inv
            if matches_via(q1, q2, M):
                return M
    return None


# ---------------------------------------------------------------------------
# no rational anchor
# ---------------------------------------------------------------------------

def _rational_square_root(value: Fraction) -> Optional[Fraction]:
    if value <= 0:
        return None
    num, den = isqrt(value.numerator), isqrt(value.denominator)
    if num * num != value.numerator or den * den != value.denominator:
        return None
    return Fraction(num, den)


def _diagonalizing(Q: BinaryForm) -> Tuple[MobiusMatrix, Fraction]:
    """(N, disc) with Q o N = a*(x^2 - disc*y^2), a the x^2 coefficient of Q."""
    c, b, a = Q.coeffs
    shift = MobiusMatrix(1, -b / (2 * a), 0, 1)
    stretch = MobiusMatrix(1, 0, 0, 2 * a)
    return shift @ stretch, b * b - 4 * a * c


def _quadratic_search(q1: Quasimap, q2: Quasimap, Q1: BinaryForm, Q2: BinaryForm) -> Optional[MobiusMatrix]:
    """Irreducible quadratic supports are Q-equivalent iff their discriminants share a square class."""
    N1, d1 = _diagonalizing(Q1)
    N2, d2 = _diagonalizing(Q2)
    r = _rational_square_root(d2 / d1)
    if r is None:
        return None
    M = N1 @ MobiusMatrix(1, 0, 0, r) @ N2.inverse()
    return M if matches_via(q1, q2, M) else None


def _rational_solutions(polys: List[sympy.Expr], gens: Sequence[sympy.Symbol]) -> Iterator[Dict[sympy.Symbol, sympy.Rational]]:
    """Rational points of a zero-dimensional system, by lex Groebner basis and back-substitution."""
    if not gens:
        if all(p == 0 for p in polys):
            yield {}
        return
    polys = [p for p in polys if p != 0]
    if not polys:
        raise Unsupported("are_isomorphic: the matching conditions leave a positive-dimensional family")
    G = sympy.groebner(polys, *gens, order="lex", domain=sympy.QQ)
    if G.exprs == [1]:
        return
    if not G.is_zero_dimensional:
        raise Unsupported("are_isomorphic: the matching conditions leave a positive-dimensional family")
    last = gens[-1]
    univariate = next(g for g in G.exprs if g.free_symbols <= {last})
    for root in sympy.Poly(univariate, last).ground_roots():
        reduced = [sympy.expand(g.subs(last, root)) for g in G.exprs]
        for partial in _rational_solutions(reduced, gens[:-1]):
            yield {**partial, last: root}


def _groebner_search(q1: Quasimap, q2: Quasimap) -> Optional[MobiusMatrix]:
    """Solve q1 o M ~ q2 in the charts a = 1 and (a, b) = (0, 1)."""
    w, b, c, d = sympy.symbols("w b c d")
    charts = (
        ((sympy.Integer(1), b, c, d), (w, b, c, d)),
        ((sympy.Integer(0), sympy.Integer(1), c, d), (w, c, d)),
    )
    for entries, gens in charts:
        eqs = _matching_equations(q1, q2, entries)
        if eqs is None:
            return None
        det = entries[0] * entries[3] - entries[1] * entries[2]
        eqs = eqs + [sympy.expand(w * det - 1)]
        for sol in _rational_solutions(eqs, gens):
            values = [as_rat(e.subs(sol)) for e in entries]
            M = MobiusMatrix(*values)
            if matches_via(q1, q2, M):
                return M
    return None


# ---------------------------------------------------------------------------
# public
# ---------------------------------------------------------------------------

def find_isomorphism(q1: Quasimap, q2: Quasimap) -> Optional[MobiusMatrix]:
    """
    A rational Mobius matrix M with q2 = lambda * (q1 o M) and matching
    boundaries, or None.

    Rational markings (support points of the boundary, the sections and a set
    of linear-system members) pin M down. Every non-constant quasimap carries
    at least four of them and the search over marked triples is exhaustive.
    Constant quasimaps with fewer than three marks are settled by a scaling
    parameter (two marks), a translation (everything at one point), the
    discriminant square class (one conjugate pair) or a Groebner basis of
    the matching conditions.
    """
    if _coarse_invariants(q1) != _coarse_invariants(q2):
        return None
    identity = MobiusMatrix.identity()
    if matches_via(q1, q2, identity):
        return identity

    vectors = _member_vectors(q1)
    marks1, marks2 = _marked_points(q1, vectors), _marked_points(q2, vectors)
    if sorted(marks1.values()) != sorted(marks2.values()):
        return None

    if len(marks1) >= 3:
        anchors = list(marks1)[:3]
        wanted = [marks1[p] for p in anchors]
        for triple in permutations(list(marks2), 3):
            if [marks2[p] for p in triple] != wanted:
                continue
            M = MobiusMatrix.from_three_points(triple, anchors)
            if matches_via(q1, q2, M):
                return M
        return None

    if len(marks1) == 2:
        return _two_point_search(q1, q2, marks1, marks2)

    support1, support2 = _support(q1), _support(q2)
    if sorted(cl.degree for cl in support1) != sorted(cl.degree for cl in support2):
        return None

    if len(marks1) == 1 and all(cl.degree == 1 for cl in support1):
        # the whole configuration sits at one rational point
        (p1,), (p2,) = list(marks1), list(marks2)
        M = MobiusMatrix.moving_to_origin(p1) @ MobiusMatrix.moving_to_origin(p2).inverse()
        return M if matches_via(q1, q2, M) else None

    if len(support1) == 1 and support1[0].degree == 2:
        return _quadratic_search(q1, q2, support1[0].form, support2[0].form)

    logger.debug("find_isomorphism: %d rational marks, solving the matching conditions", len(marks1))
    return _groebner_search(q1, q2)


def are_isomorphic(q1: Quasimap, q2: Quasimap) -> bool:
    return find_isomorphism(q1, q2) is not None


__all__ = ["matches_via", "find_isomorphism", "are_isomorphic"]
