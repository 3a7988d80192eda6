# core/quasimap/stability.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from core.errors import NotFanoError
from core.forms.binary_forms import RationalPoint
from core.forms.divisor import Cluster, QDivisor, max_multiplicity, multiplicity_at, rational_support
from core.quasimap.quasimap import Quasimap, invariants, is_constant, log_twisted_boundary
from core.quasimap.veronese import rescale

logger = logging.getLogger(__name__)


class StabilityKind(str, Enum):
    NOT_FANO = "NotFano"
    UNSTABLE = "Unstable"
    SEMISTABLE = "Semistable"
    POLYSTABLE = "Polystable"
    STABLE = "Stable"


@dataclass(frozen=True, slots=True)
class StabilityClass:
    kind: StabilityKind
    witness: Optional[Cluster] = None
    multiplicity: Optional[Fraction] = None
    witness_degree: Optional[int] = None

    @property
    def is_semistable(self) -> bool:
        return self.kind in (StabilityKind.SEMISTABLE, StabilityKind.POLYSTABLE, StabilityKind.STABLE)

    @property
    def is_polystable(self) -> bool:
        return self.kind in (StabilityKind.POLYSTABLE, StabilityKind.STABLE)

    @property
    def is_stable(self) -> bool:
        return self.kind is StabilityKind.STABLE


# =============================================================================
# Classification core (shared with the generic-fiber path of the DVR module)
# =============================================================================

def classify_profile(
    *,
    mu: Fraction,
    terms: Sequence[Tuple[int, Fraction, Optional[Cluster]]],
    constant: bool,
) -> StabilityClass:
    """
    Decide the class from the log-twisted boundary B + uB'.

    terms holds (cluster degree, coefficient, cluster or None) for every
    cluster of B + uB'. The inequality max mult vs mu/2 is weight-uniform:
    rescaling to weight u/l leaves both sides unchanged.
    """
    half = mu / 2
    top: Tuple[Fraction, Optional[int], Optional[Cluster]] = (Fraction(0), None, None)
    for degree, coeff, cluster in terms:
        if coeff > top[0]:
            top = (coeff, degree, cluster)
    m_star, w_degree, witness = top

    if mu >= 2 or m_star >= 1:
        return StabilityClass(StabilityKind.NOT_FANO, witness, m_star, w_degree)
    if m_star > half:
        return StabilityClass(StabilityKind.UNSTABLE, witness, m_star, w_degree)
    if m_star < half:
        return StabilityClass(StabilityKind.STABLE)

    balanced = all(coeff == half for _, coeff, _ in terms) and sum(d for d, _, _ in terms) == 2
    if constant and balanced:
        return StabilityClass(StabilityKind.POLYSTABLE, witness, m_star, w_degree)
    return StabilityClass(StabilityKind.SEMISTABLE, witness, m_star, w_degree)


def _terms(D: QDivisor) -> List[Tuple[int, Fraction, Optional[Cluster]]]:
    return [(cl.degree, c, cl) for cl, c in D]


# =============================================================================
# Public operations
# =============================================================================

def is_log_fano(q: Quasimap) -> bool:
    """mu < 2 and every point of B + uB' has multiplicity < 1."""
    inv = invariants(q)
    m_star, _ = max_multiplicity(log_twisted_boundary(q))
    return inv.mu < 2 and m_star < 1


def delta(q: Quasimap) -> Fraction:
    """Literal delta; 0 when q is not log Fano at its own weight."""
    inv = invariants(q)
    D = log_twisted_boundary(q)
    m_star, _ = max_multiplicity(D)
    if inv.mu >= 2 or m_star >= 1 or (inv.movable_degree > 0 and q.weight >= 1):
        return Fraction(0)
    # points outside every support carry multiplicity 0
    candidates = [1 - max(m_star, Fraction(0))]
    if inv.movable_degree > 0:
        candidates.append(1 - q.weight)
    return 2 * min(candidates) / inv.v


def small_weight_level(q: Quasimap) -> int:
    """Least l with u/l < 1 - v/2, where the delta criterion applies to rescale(q, l)."""
    mu = invariants(q).mu
    return floor(2 * q.weight / mu) + 1


def is_semistable_by_delta(q: Quasimap, l: Optional[int] = None) -> bool:
    """delta(rescale(q, l)) >= 1, with l defaulting to small_weight_level(q)."""
    level = small_weight_level(q) if l is None else l
    return delta(rescale(q, level)) >= 1


def beta_at(q: Quasimap, p: RationalPoint) -> Fraction:
    if not is_log_fano(q):
        raise NotFanoError("beta_at: quasimap is not log Fano")
    mu = invariants(q).mu
    return mu / 2 - multiplicity_at(log_twisted_boundary(q), p)


def classify(q: Quasimap) -> StabilityClass:
    inv = invariants(q)
    result = classify_profile(
        mu=inv.mu,
        terms=_terms(log_twisted_boundary(q)),
        constant=inv.movable_degree == 0 and is_constant(q)[0],
    )
    logger.debug("classify: mu=%s -> %s", inv.mu, result.kind.value)
    return result


def beta_profile(q: Quasimap) -> pd.DataFrame:
    """beta at every rational support point of B + uB', plus one row for a general point."""
    D = log_twisted_boundary(q)
    half = invariants(q).mu / 2
    rows = [
        {"point": str(p), "multiplicity": multiplicity_at(D, p), "beta": half - multiplicity_at(D, p)}
        for p in rational_support(D)
    ]
    rows.append({"point": "general", "multiplicity": Fraction(0), "beta": half})
    df = pd.DataFrame(rows, columns=["point", "multiplicity", "beta"])
    return df.reset_index(drop=True)


def classification_table(quasimaps: Iterable[Tuple[str, Quasimap]]) -> pd.DataFrame:
    rows = []
    for label, q in quasimaps:
        inv = invariants(q)
        cls = classify(q)
        rows.append(
            {
                "label": label,
                "class": cls.kind.value,
                "delta": delta(q),
                "mu": inv.mu,
                "v": inv.v,
                "fixed_degree": inv.fixed_degree,
                "movable_degree": inv.movable_degree,
                "level": small_weight_level(q),
            }
        )
    df = pd.DataFrame(
        rows,
        columns=["label", "class", "delta", "mu", "v", "fixed_degree", "movable_degree", "level"],
    )
    return df.sort_values("label", kind="stable").reset_index(drop=True)


__all__ = [
    "StabilityKind",
    "StabilityClass",
    "classify_profile",
    "is_log_fano",
    "delta",
    "small_weight_level",
    "is_semistable_by_delta",
    "beta_at",
    "classify",
    "beta_profile",
    "classification_table",
]
