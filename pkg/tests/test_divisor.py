# tests/test_divisor.py

from fractions import Fraction

from core.forms.binary_forms import BinaryForm, RationalPoint, X_FORM, Y_FORM, normalize
from core.forms.divisor import (
    Cluster,
    combine,
    divisor_from,
    divisors_equal,
    max_multiplicity,
    multiplicity_at,
    rational_support,
)


def F(expr: str) -> BinaryForm:
    return BinaryForm.from_expr(expr)


def test_divisor_from_examples():
    D = divisor_from([(F("x**2"), "1/2")])
    assert D.terms == ((Cluster(X_FORM), Fraction(1)),)

    D = divisor_from([(F("x**2 - y**2"), "1/2"), (F("(x - y)**2"), "1/4")])
    assert D.coefficient(Cluster(normalize(F("x - y")))) == 1
    assert D.coefficient(Cluster(normalize(F("x + y")))) == Fraction(1, 2)
    assert D.degree == Fraction(3, 2)

    assert divisor_from([]).is_zero


def test_combine_examples():
    D = divisor_from([(F("x**2 - y**2"), "1/3"), (Y_FORM, 2)])
    assert combine(D, D, 1, -1).is_zero

    x_div = divisor_from([(X_FORM, 1)])
    y_div = divisor_from([(Y_FORM, 1)])
    half = combine(x_div, y_div, "1/2", "1/2")
    assert half.coefficient(Cluster(X_FORM)) == Fraction(1, 2)
    assert half.coefficient(Cluster(Y_FORM)) == Fraction(1, 2)

    D = combine(divisor_from([(F("x**2 + x*y"), 1)]), x_div, 1, 1)
    assert D.coefficient(Cluster(X_FORM)) == 2
    assert D.coefficient(Cluster(F("x + y"))) == 1


def test_divisors_equal_ignores_cluster_grouping():
    """x^2 - y^2 as one cluster equals (x - y) + (x + y)."""
    a = divisor_from([(F("x**2 - y**2"), 1)])
    b = divisor_from([(F("x - y"), 1), (F("x + y"), 1)])
    assert len(a) == 1 and len(b) == 2
    assert divisors_equal(a, b)
    assert not divisors_equal(a, divisor_from([(F("x - y"), 1)]))


def test_max_multiplicity_examples():
    D = divisor_from([(X_FORM, "1/2"), (Y_FORM, "1/3")])
    assert max_multiplicity(D) == (Fraction(1, 2), Cluster(X_FORM))

    conic = normalize(F("x**2 + y**2"))
    assert max_multiplicity(divisor_from([(conic, "3/4")])) == (Fraction(3, 4), Cluster(conic))

    assert max_multiplicity(divisor_from([])) == (Fraction(0), None)


def test_multiplicity_at_examples():
    D = divisor_from([(X_FORM, "1/2")])
    assert multiplicity_at(D, RationalPoint.affine(0)) == Fraction(1, 2)
    assert multiplicity_at(D, RationalPoint.affine(1)) == 0

    D = divisor_from([(F("x**2 - y**2"), "1/3")])
    assert multiplicity_at(D, RationalPoint.affine(1)) == Fraction(1, 3)


def test_rational_support_skips_irrational_clusters():
    D = divisor_from([(F("x**2 + y**2"), 1), (F("x*y"), "1/2")])
    assert rational_support(D) == [RationalPoint.affine(0), RationalPoint.infinity()]
