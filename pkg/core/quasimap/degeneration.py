# core/quasimap/degeneration.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from core.errors import NotFanoError
from core.forms.binary_forms import BinaryForm, MobiusMatrix, RationalPoint, X_FORM, Y_FORM
from core.forms.divisor import divisor_from, multiplicity_at
from core.quasimap.isomorphism import are_isomorphic
from core.quasimap.quasimap import Quasimap, apply_mobius_quasimap, make_quasimap
from core.quasimap.stability import beta_at, is_log_fano

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class DegenerationReport:
    center: RationalPoint
    central_fiber: Quasimap
    beta: Fraction
    is_product_type: bool
    moved_source: Quasimap
    mobius: MobiusMatrix


def degenerate_at(q: Quasimap, p: RationalPoint) -> DegenerationReport:
    """
    The G_m-degeneration x -> t*x after moving p to [0:1].

    The central fiber keeps, for every section, only its lowest x-order term
    of the common minimal order mu_min = mult_p(fixed part): a constant
    quasimap with fixed part mu_min*[0] + (m - mu_min)*[inf]. Boundary mass
    at p stays at [0:1], the rest of the boundary flows to [1:0].
    """
    if not is_log_fano(q):
        raise NotFanoError(f"degenerate_at: quasimap is not log Fano (center {p})")

    M = MobiusMatrix.moving_to_origin(p)
    moved = apply_mobius_quasimap(q, M)
    m = q.degree
    mu_min = min(f.low_x_order for f in moved.sections if not f.is_zero)
    central_sections = [
        BinaryForm.zero(m) if f.is_zero else BinaryForm.monomial(m, mu_min, f.coeffs[mu_min])
        for f in moved.sections
    ]

    at_center = multiplicity_at(moved.boundary, RationalPoint.affine(0))
    central_boundary = divisor_from([(X_FORM, at_center), (Y_FORM, q.boundary.degree - at_center)])
    central = make_quasimap(m, q.weight, central_sections, central_boundary, q.r, q.target)

    product = are_isomorphic(central, moved)

    beta = beta_at(q, p)
    logger.info("degenerate_at: p=%s mu_min=%d beta=%s product=%s", p, mu_min, beta, product)
    return DegenerationReport(
        center=p,
        central_fiber=central,
        beta=beta,
        is_product_type=product,
        moved_source=moved,
        mobius=M,
    )


__all__ = ["DegenerationReport", "degenerate_at"]
