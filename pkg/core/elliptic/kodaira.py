# core/elliptic/kodaira.py
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import pandas as pd

from core.errors import PreconditionViolated
from core.forms.divisor import Cluster

# None stands for an infinite order (A or B identically zero)
Order = Optional[int]

# ordDelta -> symbol for the additive types other than I_n*
_ADDITIVE = {2: "II", 3: "III", 4: "IV", 6: "I0*", 8: "IV*", 9: "III*", 10: "II*"}

_LCT = {
    "II": Fraction(5, 6),
    "III": Fraction(3, 4),
    "IV": Fraction(2, 3),
    "I0*": Fraction(1, 2),
    "IV*": Fraction(1, 3),
    "III*": Fraction(1, 4),
    "II*": Fraction(1, 6),
}


@dataclass(frozen=True, slots=True)
class FiberType:
    """Kodaira symbol; family is "I" or "I*" when index carries the n of I_n / I_n*."""

    family: str
    index: Optional[int] = None

    def __str__(self) -> str:
        if self.family == "I":
            return f"I_{self.index}"
        if self.family == "I*":
            return f"I_{self.index}*"
        return self.family

    @property
    def lct(self) -> Fraction:
        return log_canonical_threshold(self)


def _times(k: int, order: Order) -> float:
    return float("inf") if order is None else k * order


def fiber_type(ord_a: Order, ord_b: Order, ord_delta: int) -> FiberType:
    """
    Kodaira type from the orders of A, B and 4A^3 + 27B^2 at a point of a
    minimal model in characteristic 0.
    """
    if ord_delta <= 0:
        raise PreconditionViolated(f"fiber_type: ordDelta={ord_delta}, the fiber is smooth")
    if ord_a == 0 and ord_b == 0:
        return FiberType("I", ord_delta)
    if _times(1, ord_a) >= 4 and _times(1, ord_b) >= 6:
        raise PreconditionViolated(f"fiber_type: orders ({ord_a}, {ord_b}) are not minimal")
    if ord_a == 2 and ord_b == 3 and ord_delta > 6:
        return FiberType("I*", ord_delta - 6)
    expected = min(_times(3, ord_a), _times(2, ord_b))
    if expected != ord_delta or ord_delta not in _ADDITIVE:
        raise PreconditionViolated(f"fiber_type: inconsistent orders (A={ord_a}, B={ord_b}, Delta={ord_delta})")
    return FiberType(_ADDITIVE[ord_delta])


def log_canonical_threshold(t: FiberType) -> Fraction:
    if t.family == "I":
        return Fraction(1)
    if t.family == "I*":
        return Fraction(1, 2)
    return _LCT[t.family]


def fixed_contribution(ord_a: Order, ord_delta: int) -> int:
    """min(3 ordA, ordDelta): the order of the fixed part of [A^3 : Delta] at the point."""
    return ord_delta if ord_a is None else min(3 * ord_a, ord_delta)


@dataclass(frozen=True, slots=True)
class KodairaEntry:
    cluster: Cluster
    ord_a: Order
    ord_b: Order
    ord_delta: int
    fiber: FiberType
    lct: Fraction


@dataclass(frozen=True, slots=True)
class KodairaProfile:
    entries: Tuple[KodairaEntry, ...]

    @property
    def total_delta_degree(self) -> int:
        return sum(e.cluster.degree * e.ord_delta for e in self.entries)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "cluster": str(e.cluster),
                "degree": e.cluster.degree,
                "ord_A": "inf" if e.ord_a is None else e.ord_a,
                "ord_B": "inf" if e.ord_b is None else e.ord_b,
                "ord_Delta": e.ord_delta,
                "type": str(e.fiber),
                "lct": e.lct,
            }
            for e in self.entries
        ]
        return pd.DataFrame(rows, columns=["cluster", "degree", "ord_A", "ord_B", "ord_Delta", "type", "lct"])


__all__ = [
    "FiberType",
    "fiber_type",
    "log_canonical_threshold",
    "fixed_contribution",
    "KodairaEntry",
    "KodairaProfile",
]
