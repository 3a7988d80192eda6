# core/elliptic/weierstrass.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from core.errors import DegenerateInput, DegenerateModel, PreconditionViolated, Unsupported
from core.elliptic.kodaira import KodairaEntry, KodairaProfile, fiber_type, fixed_contribution
from core.forms.binary_forms import BinaryForm, coprime_squarefree_basis, divide_exact
from core.forms.divisor import Cluster, QDivisor, combine, divisor_from, divisors_equal, max_multiplicity
from core.quasimap.quasimap import Quasimap, fixed_movable, make_quasimap

logger = logging.getLogger(__name__)

J_LEVEL = 12


@dataclass(frozen=True, slots=True)
class WeierstrassModel:
    """y^2 z = x^3 + A x z^2 + B z^3 over P1 with deg A = 4k, deg B = 6k."""

    k: int
    a4: BinaryForm
    a6: BinaryForm

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DegenerateModel(f"WeierstrassModel: k must be >= 1, got {self.k}")
        if self.a4.degree != 4 * self.k or self.a6.degree != 6 * self.k:
            raise DegenerateInput(
                f"WeierstrassModel: need deg A = {4 * self.k}, deg B = {6 * self.k}, "
                f"got {self.a4.degree}, {self.a6.degree}"
            )


class AdiabaticVerdict(str, Enum):
    STRICTLY_STABLE = "StrictlyStable"
    STRICTLY_SEMISTABLE_ONLY = "StrictlySemistableOnly"
    UNSTABLE = "Unstable"


@dataclass(frozen=True, slots=True)
class EllipticReport:
    model: WeierstrassModel
    profile: KodairaProfile
    disc_divisor: QDivisor
    moduli_degree: Fraction
    adiabatic: Optional[AdiabaticVerdict]
    associated: Quasimap


# =============================================================================
# Discriminant and minimal models
# =============================================================================

def discriminant(W: WeierstrassModel) -> BinaryForm:
    delta = (W.a4**3).scale(4) + (W.a6**2).scale(27)
    if delta.is_zero:
        raise DegenerateModel("discriminant: 4A^3 + 27B^2 vanishes identically")
    return delta


def _basis_orders(
    W: WeierstrassModel, extra: Tuple[BinaryForm, ...] = ()
) -> List[Tuple[BinaryForm, Optional[int], Optional[int], List[int]]]:
    """(basis form, ord A, ord B, orders in extra) over a common squarefree basis; None for a zero form."""
    forms = [f for f in (W.a4, W.a6) if not f.is_zero] + list(extra)
    basis, exps = coprime_squarefree_basis(forms)
    out = []
    for j, b in enumerate(basis):
        rows = iter(exps)
        ord_a = None if W.a4.is_zero else next(rows)[j]
        ord_b = None if W.a6.is_zero else next(rows)[j]
        out.append((b, ord_a, ord_b, [next(rows)[j] for _ in extra]))
    return out


def is_minimal(W: WeierstrassModel) -> bool:
    for _, ord_a, ord_b, _ in _basis_orders(W):
        if (ord_a is None or ord_a >= 4) and (ord_b is None or ord_b >= 6):
            return False
    return True


def minimalize(W: WeierstrassModel) -> WeierstrassModel:
    """Divide (A, B) by (g^4, g^6) for the largest such g."""
    discriminant(W)
    g = BinaryForm.constant(1)
    for b, ord_a, ord_b, _ in _basis_orders(W):
        n = min(
            ord_a // 4 if ord_a is not None else ord_b // 6,
            ord_b // 6 if ord_b is not None else ord_a // 4,
        )
        if n > 0:
            g = g * b**n
    if g.degree == 0:
        return W
    k = W.k - g.degree
    if k <= 0:
        raise DegenerateModel(f"minimalize: the minimal model has k={k}")
    a4 = BinaryForm.zero(4 * k) if W.a4.is_zero else divide_exact(W.a4, g**4)
    a6 = BinaryForm.zero(6 * k) if W.a6.is_zero else divide_exact(W.a6, g**6)
    logger.info("minimalize: removed g of degree %d, k %d -> %d", g.degree, W.k, k)
    return WeierstrassModel(k, a4, a6)


# =============================================================================
# Fiber profile and canonical bundle formula
# =============================================================================

def kodaira_profile(W: WeierstrassModel) -> KodairaProfile:
    if not is_minimal(W):
        raise PreconditionViolated("kodaira_profile: the model is not minimal")
    delta = discriminant(W)
    entries = []
    for b, ord_a, ord_b, (ord_d,) in _basis_orders(W, (delta,)):
        if ord_d == 0:
            continue
        t = fiber_type(ord_a, ord_b, ord_d)
        entries.append(KodairaEntry(Cluster(b), ord_a, ord_b, ord_d, t, t.lct))
    profile = KodairaProfile(tuple(entries))
    if profile.total_delta_degree != 12 * W.k:
        raise PreconditionViolated(
            f"kodaira_profile: discriminant degrees sum to {profile.total_delta_degree}, not {12 * W.k}"
        )
    return profile


def discriminant_divisor(W: WeierstrassModel) -> Tuple[QDivisor, Fraction]:
    """(sum (1 - lct) * cluster, moduli degree)."""
    profile = kodaira_profile(W)
    fixed = 0
    pairs = []
    for e in profile.entries:
        contribution = fixed_contribution(e.ord_a, e.ord_delta)
        if contribution != 12 * (1 - e.lct):
            raise PreconditionViolated(f"discriminant_divisor: fixed-part order {contribution} does not match {e.fiber}")
        fixed += e.cluster.degree * contribution
        pairs.append((e.cluster.form, 1 - e.lct))
    D = divisor_from(pairs)
    moduli = Fraction(12 * W.k - fixed, 12)
    if D.degree + moduli != W.k:
        raise PreconditionViolated(f"discriminant_divisor: deg D + deg M = {D.degree + moduli}, expected {W.k}")
    return D, moduli


def adiabatic_kstable(W: WeierstrassModel) -> AdiabaticVerdict:
    """Compare the largest discriminant multiplicity with (deg B + deg M)/2."""
    if W.k != 1:
        raise Unsupported(f"adiabatic_kstable: only k = 1 is covered, got k={W.k}")
    D, moduli = discriminant_divisor(W)
    top, _ = max_multiplicity(D)
    half = (D.degree + moduli) / 2
    if top < half:
        return AdiabaticVerdict.STRICTLY_STABLE
    if top == half:
        return AdiabaticVerdict.STRICTLY_SEMISTABLE_ONLY
    return AdiabaticVerdict.UNSTABLE


# =============================================================================
# The j-quasimap
# =============================================================================

def associated_quasimap(W: WeierstrassModel) -> Quasimap:
    """[A^3 : 4A^3 + 27B^2] at weight 1/12, with no boundary."""
    delta = discriminant(W)
    q = make_quasimap(12 * W.k, Fraction(1, J_LEVEL), [W.a4**3, delta])
    if is_minimal(W):
        D, moduli = discriminant_divisor(W)
        fixed, movable = fixed_movable(q)
        if not divisors_equal(combine(fixed, fixed, q.weight, 0), D):
            raise PreconditionViolated("associated_quasimap: u times the fixed part differs from the discriminant divisor")
        if moduli != Fraction(movable, J_LEVEL):
            raise PreconditionViolated(f"associated_quasimap: moduli degree {moduli} != movable degree {movable}/12")
    return q


def j_invariant_degree(W: WeierstrassModel) -> int:
    """Degree of the j-map: the movable degree of the associated quasimap."""
    _, movable = fixed_movable(associated_quasimap(W))
    return movable


def analyze(W: WeierstrassModel) -> EllipticReport:
    minimal = minimalize(W)
    D, moduli = discriminant_divisor(minimal)
    try:
        verdict: Optional[AdiabaticVerdict] = adiabatic_kstable(minimal)
    except Unsupported:
        logger.info("analyze: k=%d, adiabatic verdict skipped", minimal.k)
        verdict = None
    return EllipticReport(
        model=minimal,
        profile=kodaira_profile(minimal),
        disc_divisor=D,
        moduli_degree=moduli,
        adiabatic=verdict,
        associated=associated_quasimap(minimal),
    )


__all__ = [
    "WeierstrassModel",
    "AdiabaticVerdict",
    "EllipticReport",
    "discriminant",
    "is_minimal",
    "minimalize",
    "kodaira_profile",
    "discriminant_divisor",
    "adiabatic_kstable",
    "associated_quasimap",
    "j_invariant_degree",
    "analyze",
]
