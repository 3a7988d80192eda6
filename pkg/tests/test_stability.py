# tests/test_stability.py

import random
from fractions import Fraction

import pytest

from core.errors import NotFanoError
from core.forms.binary_forms import BinaryForm, MobiusMatrix, RationalPoint, X_FORM, Y_FORM
from core.quasimap.quasimap import apply_mobius_quasimap, make_quasimap
from core.quasimap.stability import (
    StabilityKind,
    beta_at,
    beta_profile,
    classification_table,
    classify,
    delta,
    is_log_fano,
    is_semistable_by_delta,
    small_weight_level,
)
from core.quasimap.veronese import rescale


def F(expr: str) -> BinaryForm:
    return BinaryForm.from_expr(expr)


def identity_line():
    """Degree 1, weight 1, no boundary: K-stable with delta below 1."""
    return make_quasimap(1, 1, [X_FORM, Y_FORM])


def half_point_quasimap(coeff: str = "1/2"):
    return make_quasimap(2, "1/4", [F("x**2"), F("y**2")], [(X_FORM, coeff)])


def test_delta_examples():
    assert delta(identity_line()) == 0
    assert delta(make_quasimap(3, "1/3", [F("x**3"), F("y**3")])) == Fraction(4, 3)
    assert delta(half_point_quasimap()) == 1


def test_identity_line_is_stable_with_zero_delta():
    q = identity_line()
    assert classify(q).kind is StabilityKind.STABLE
    assert small_weight_level(q) == 3
    assert delta(rescale(q, 3)) == Fraction(4, 3)
    assert is_semistable_by_delta(q)


def test_beta_examples():
    q = half_point_quasimap()
    assert beta_at(q, RationalPoint.affine(0)) == 0
    assert beta_at(q, RationalPoint.affine(1)) == Fraction(1, 2)
    assert beta_at(half_point_quasimap("3/4"), RationalPoint.affine(0)) == Fraction(-1, 8)


def test_classify_examples():
    assert classify(identity_line()).kind is StabilityKind.STABLE

    cls = classify(half_point_quasimap())
    assert cls.kind is StabilityKind.SEMISTABLE
    assert cls.witness is not None and cls.witness.form == X_FORM
    assert cls.multiplicity == Fraction(1, 2)
    assert not cls.is_polystable

    cls = classify(make_quasimap(2, "1/2", [F("x*y"), F("2*x*y")]))
    assert cls.kind is StabilityKind.POLYSTABLE
    assert cls.is_semistable and not cls.is_stable


def test_classify_unstable_and_not_fano():
    cls = classify(half_point_quasimap("3/4"))
    assert cls.kind is StabilityKind.UNSTABLE
    assert cls.multiplicity == Fraction(3, 4)

    heavy = make_quasimap(4, "1/2", [F("x**4"), F("y**4")])
    assert not is_log_fano(heavy)
    assert classify(heavy).kind is StabilityKind.NOT_FANO
    assert delta(heavy) == 0
    with pytest.raises(NotFanoError):
        beta_at(heavy, RationalPoint.affine(0))


@pytest.mark.parametrize("l", [2, 3])
def test_classification_is_weight_uniform(l):
    for q in (identity_line(), half_point_quasimap(), half_point_quasimap("3/4")):
        assert classify(rescale(q, l)).kind is classify(q).kind


def test_semistable_by_delta_matches_classification():
    for q in (identity_line(), half_point_quasimap(), half_point_quasimap("3/4")):
        assert is_semistable_by_delta(q) == classify(q).is_semistable


def test_beta_profile_rows():
    df = beta_profile(half_point_quasimap())
    assert list(df["point"]) == ["0", "general"]
    assert list(df["beta"]) == [Fraction(0), Fraction(1, 2)]


def test_classification_table_sorted_by_label():
    df = classification_table([("b", half_point_quasimap()), ("a", identity_line())])
    assert list(df["label"]) == ["a", "b"]
    assert list(df["class"]) == ["Stable", "Semistable"]
    assert df.loc[0, "level"] == 3


_POINT_POOL = [RationalPoint.infinity()] + [
    RationalPoint.affine(a) for a in (0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 3), 3)
]


def _line(p: RationalPoint) -> BinaryForm:
    return Y_FORM if p.is_infinity else BinaryForm.linear(1, -p.a)


def _random_matrix(rng: random.Random) -> MobiusMatrix:
    while True:
        rows = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        if rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0] != 0:
            return MobiusMatrix.from_rows(rows)


def _planted(rng: random.Random):
    """
    Split quasimap with known multiplicities: fixed part l0^e0 l1^e1, movable
    parts la^n and lb^n, boundary c0*l0 + c4*l4. Returns (q, {point: mult}).
    """
    p0, p1, pa, pb, p4 = rng.sample(_POINT_POOL, 5)
    e0, e1 = rng.randint(0, 2), rng.randint(0, 2)
    n = rng.randint(1, 2)
    u = Fraction(1, rng.choice([3, 4, 6, 8]))
    c0, c4 = rng.choice([0, Fraction(1, 4), Fraction(1, 3)]), rng.choice([0, Fraction(1, 4), Fraction(1, 2)])

    h = _line(p0) ** e0 * _line(p1) ** e1
    sections = [h * _line(pa) ** n, h * _line(pb) ** n]
    boundary = [(_line(p), c) for p, c in ((p0, c0), (p4, c4)) if c]
    q = make_quasimap(e0 + e1 + n, u, sections, boundary)
    mults = {p0: c0 + u * e0, p1: u * e1, p4: c4}
    return q, mults


def test_delta_matches_planted_multiplicities():
    rng = random.Random(314)
    for _ in range(30):
        q, mults = _planted(rng)
        m_star = max(mults.values())
        mu = q.boundary.degree + q.weight * q.degree
        if mu >= 2 or m_star >= 1:
            assert delta(q) == 0
            assert classify(q).kind is StabilityKind.NOT_FANO
            continue
        expected = 2 * min(1 - m_star, 1 - q.weight) / (2 - mu)
        assert delta(q) == expected

        kind = classify(q).kind
        if m_star < mu / 2:
            assert kind is StabilityKind.STABLE
        elif m_star == mu / 2:
            assert kind is StabilityKind.SEMISTABLE
        else:
            assert kind is StabilityKind.UNSTABLE


def test_invariants_survive_random_mobius_maps():
    rng = random.Random(2718)
    for _ in range(15):
        q, mults = _planted(rng)
        if classify(q).kind is StabilityKind.NOT_FANO:
            continue
        M = _random_matrix(rng)
        moved = apply_mobius_quasimap(q, M)
        assert classify(moved).kind is classify(q).kind
        assert delta(moved) == delta(q)
        inverse = M.inverse()
        for p in mults:
            assert beta_at(moved, inverse.apply_to_point(p)) == beta_at(q, p)


@pytest.mark.parametrize("l", [2, 3])
def test_random_classification_is_weight_uniform(l):
    rng = random.Random(100 + l)
    for _ in range(6):
        q, _ = _planted(rng)
        if classify(q).kind is StabilityKind.NOT_FANO:
            continue
        assert classify(rescale(q, l)).kind is classify(q).kind
