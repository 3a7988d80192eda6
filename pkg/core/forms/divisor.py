# core/forms/divisor.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from core.errors import DegenerateInput
from core.forms.binary_forms import (
    BinaryForm,
    RationalPoint,
    RatLike,
    Y_FORM,
    as_rat,
    coprime_squarefree_basis,
    ord_at,
    rational_roots,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Cluster:
    """A squarefree normalized form standing for all of its geometric roots at once."""

    form: BinaryForm

    @property
    def degree(self) -> int:
        return self.form.degree

    @property
    def is_infinity(self) -> bool:
        return self.form == Y_FORM

    @property
    def point(self) -> Optional[RationalPoint]:
        """The rational point of a degree-1 cluster."""
        if self.degree != 1:
            return None
        c0, c1 = self.form.coeffs
        return RationalPoint(-c0, c1) if c1 != 0 else RationalPoint.infinity()

    def __str__(self) -> str:
        return "inf" if self.is_infinity else str(self.form)


INFINITY = Cluster(Y_FORM)


@dataclass(frozen=True, slots=True)
class QDivisor:
    """
    Formal Q-divisor on P^1 over a coprime squarefree basis.

    Build through divisor_from / combine; terms have nonzero coefficients and
    clusters ordered by degree then coefficients. Clusters depend on the
    input forms (x^2 - y^2 stays one cluster unless x - y is also present),
    so compare divisors with divisors_equal.
    """

    terms: Tuple[Tuple[Cluster, Fraction], ...] = ()

    @classmethod
    def zero(cls) -> "QDivisor":
        return cls(())

    def __iter__(self) -> Iterator[Tuple[Cluster, Fraction]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> Fraction:
        return sum((c * cl.degree for cl, c in self.terms), Fraction(0))

    @property
    def is_effective(self) -> bool:
        return all(c > 0 for _, c in self.terms)

    def coefficient(self, cluster: Cluster) -> Fraction:
        for cl, c in self.terms:
            if cl == cluster:
                return c
        return Fraction(0)

    def clusters(self) -> List[Cluster]:
        return [cl for cl, _ in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*({cl})" for cl, c in self.terms)


def divisor_from(pairs: Iterable[Tuple[BinaryForm, RatLike]]) -> QDivisor:
    pairs = [(f, as_rat(c)) for f, c in pairs]
    if any(f.is_zero for f, _ in pairs):
        raise DegenerateInput("divisor_from: zero form")
    pairs = [(f, c) for f, c in pairs if c != 0 and f.degree > 0]
    if not pairs:
        return QDivisor.zero()
    basis, exps = coprime_squarefree_basis([f for f, _ in pairs])
    terms = []
    for j, b in enumerate(basis):
        coeff = sum((c * exps[i][j] for i, (_, c) in enumerate(pairs)), Fraction(0))
        if coeff != 0:
            terms.append((Cluster(b), coeff))
    return QDivisor(tuple(terms))


def combine(a: QDivisor, b: QDivisor, s: RatLike, t: RatLike) -> QDivisor:
    """s*a + t*b on a common basis."""
    s, t = as_rat(s), as_rat(t)
    return divisor_from(
        [(cl.form, c * s) for cl, c in a.terms] + [(cl.form, c * t) for cl, c in b.terms]
    )


def divisors_equal(a: QDivisor, b: QDivisor) -> bool:
    return combine(a, b, 1, -1).is_zero


def max_multiplicity(D: QDivisor) -> Tuple[Fraction, Optional[Cluster]]:
    best: Tuple[Fraction, Optional[Cluster]] = (Fraction(0), None)
    for cl, c in D.terms:
        if c > best[0]:
            best = (c, cl)
    return best


def multiplicity_at(D: QDivisor, p: RationalPoint) -> Fraction:
    return sum((c * ord_at(cl.form, p) for cl, c in D.terms), Fraction(0))


def rational_support(D: QDivisor) -> List[RationalPoint]:
    """Rational points in the support, in canonical order."""
    points: List[RationalPoint] = []
    for cl, _ in D.terms:
        points.extend(p for p, _ in rational_roots(cl.form))
    return sorted(set(points), key=lambda p: (p.is_infinity, p.a))


def transport(D: QDivisor, forms: Sequence[BinaryForm]) -> QDivisor:
    """Re-base D after its cluster forms were replaced one-for-one (e.g. by a coordinate change)."""
    if len(forms) != len(D.terms):
        raise DegenerateInput("transport: form count does not match the divisor")
    return divisor_from((f, c) for f, (_, c) in zip(forms, D.terms))


__all__ = [
    "Cluster",
    "INFINITY",
    "QDivisor",
    "divisor_from",
    "combine",
    "divisors_equal",
    "max_multiplicity",
    "multiplicity_at",
    "rational_support",
    "transport",
]
