# core/quasimap/veronese.py
from __future__ import annotations

import logging
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Optional, Tuple

import sympy

from core.errors import DegenerateInput
from core.forms.binary_forms import BinaryForm, divide_exact, lth_root
from core.quasimap.quasimap import Quasimap, TargetCone, make_quasimap, sections_proportional

logger = logging.getLogger(__name__)


@lru_cache(maxsize=256)
def veronese_monomials(n_vars: int, l: int) -> Tuple[Tuple[int, ...], ...]:
    """Degree-l monomials in n_vars variables as sorted index tuples, lexicographic order."""
    return tuple(combinations_with_replacement(range(n_vars), l))


def veronese_relations(n_vars: int, l: int) -> List[str]:
    """Quadratic relations w_a w_b - w_c w_d of the l-th Veronese embedding of P^{n_vars-1}."""
    monomials = veronese_monomials(n_vars, l)
    ws = sympy.symbols(f"z0:{len(monomials)}")
    by_product: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for i, a in enumerate(monomials):
        for j in range(i, len(monomials)):
            key = tuple(sorted(a + monomials[j]))
            by_product.setdefault(key, []).append((i, j))
    relations: List[str] = []
    for splits in by_product.values():
        i0, j0 = splits[0]
        for i, j in splits[1:]:
            relations.append(str(ws[i0] * ws[j0] - ws[i] * ws[j]))
    return relations


def _rewrite_in_veronese(poly: sympy.Poly, n_vars: int, l: int) -> sympy.Expr:
    """Rewrite a form of degree l*k in z as a degree-k form in the Veronese coordinates."""
    monomials = veronese_monomials(n_vars, l)
    index = {mono: i for i, mono in enumerate(monomials)}
    ws = sympy.symbols(f"z0:{len(monomials)}")
    out = sympy.Integer(0)
    for exps, coeff in poly.terms():
        flat = [var for var, e in enumerate(exps) for _ in range(e)]
        term = coeff
        for start in range(0, len(flat), l):
            term *= ws[index[tuple(flat[start:start + l])]]
        out += term
    return out


def veronese_target(target: TargetCone, l: int) -> TargetCone:
    """Ideal of the l-th Veronese image of the target, in the rescaled coordinates."""
    n_vars = target.ambient_dim + 1
    zs = sympy.symbols(f"z0:{n_vars}")
    generators = list(veronese_relations(n_vars, l))
    for poly in target.polys():
        if poly.is_zero:
            continue
        pad = (-poly.total_degree()) % l
        for mono in combinations_with_replacement(range(n_vars), pad):
            factor = sympy.Mul(*[zs[i] for i in mono]) if mono else sympy.Integer(1)
            padded = sympy.Poly(poly.as_expr() * factor, *zs)
            generators.append(str(_rewrite_in_veronese(padded, n_vars, l)))
    return TargetCone(ambient_dim=len(veronese_monomials(n_vars, l)) - 1, generators=tuple(generators))


def rescale(q: Quasimap, l: int) -> Quasimap:
    if l < 1:
        raise DegenerateInput(f"rescale: level must be >= 1, got {l}")
    if l == 1:
        return q
    sections = []
    for mono in veronese_monomials(len(q.sections), l):
        f = BinaryForm.constant(1)
        for i in mono:
            f = f * q.sections[i]
        sections.append(f)
    target = veronese_target(q.target, l) if q.target is not None else None
    logger.debug("rescale: l=%d, %d -> %d sections", l, len(q.sections), len(sections))
    return make_quasimap(q.degree * l, q.weight / l, sections, q.boundary, q.r, target)


def _source_dimension(n_sections: int, l: int) -> int:
    n_vars = 1
    while comb(n_vars - 1 + l, l) < n_sections:
        n_vars += 1
    if comb(n_vars - 1 + l, l) != n_sections:
        raise DegenerateInput(f"unrescale: {n_sections} sections is not a Veronese dimension for l={l}")
    return n_vars


def unrescale(q: Quasimap, l: int) -> Optional[Quasimap]:
    """
    Invert rescale up to a global scalar: the l-th root of a nonzero pure power
    gives one coordinate, the mixed monomials z_ref^(l-1) z_j give the others.
    The target ideal is not recovered.
    """
    if l < 1 or q.degree % l != 0:
        raise DegenerateInput(f"unrescale: level {l} does not divide degree {q.degree}")
    if l == 1:
        return q
    n_vars = _source_dimension(len(q.sections), l)
    monomials = veronese_monomials(n_vars, l)
    index = {mono: i for i, mono in enumerate(monomials)}

    ref = next((i for i in range(n_vars) if not q.sections[index[(i,) * l]].is_zero), None)
    if ref is None:
        return None
    power = q.sections[index[(ref,) * l]]
    root = lth_root(power, l)
    if root is None:
        return None
    # fix the global scalar so that the reference power is exactly root^l
    k = next(i for i, c in enumerate(power.coeffs) if c != 0)
    scalar = (root**l).coeffs[k] / power.coeffs[k]
    scaled = [f.scale(scalar) for f in q.sections]

    base = root ** (l - 1)
    coords = []
    for j in range(n_vars):
        mono = tuple(sorted((ref,) * (l - 1) + (j,)))
        try:
            coords.append(divide_exact(scaled[index[mono]], base))
        except DegenerateInput:
            return None

    candidate = make_quasimap(q.degree // l, q.weight * l, coords, q.boundary, q.r)
    if not sections_proportional(rescale(candidate, l).sections, q.sections):
        logger.debug("unrescale: reconstruction fails the Veronese relations")
        return None
    return candidate


__all__ = [
    "veronese_monomials",
    "veronese_relations",
    "veronese_target",
    "rescale",
    "unrescale",
]
