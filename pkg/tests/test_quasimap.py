# tests/test_quasimap.py

import pytest

from core.errors import DegenerateInput, TargetViolation
from core.forms.binary_forms import BinaryForm, MobiusMatrix, X_FORM, Y_FORM
from core.forms.divisor import divisor_from, divisors_equal
from core.quasimap.quasimap import (
    TargetCone,
    apply_mobius_quasimap,
    fixed_movable,
    invariants,
    is_constant,
    log_twisted_boundary,
    make_quasimap,
    minimal_r,
    sections_proportional,
)


def F(expr: str) -> BinaryForm:
    return BinaryForm.from_expr(expr)


def test_make_quasimap_validates():
    q = make_quasimap(1, 1, [X_FORM, Y_FORM])
    assert q.degree == 1 and q.weight == 1 and q.boundary.is_zero

    with pytest.raises(DegenerateInput):
        make_quasimap(1, 1, [BinaryForm.zero(1), BinaryForm.zero(1)])
    with pytest.raises(DegenerateInput):
        make_quasimap(2, 1, [F("x**2"), F("x")])
    with pytest.raises(DegenerateInput):
        make_quasimap(1, 0, [X_FORM, Y_FORM])
    with pytest.raises(DegenerateInput):
        make_quasimap(1, 1, [X_FORM, Y_FORM], [(X_FORM, "-1/2")])


def test_make_quasimap_checks_r_and_target():
    with pytest.raises(DegenerateInput):
        make_quasimap(2, "1/4", [F("x**2"), F("y**2")], [(X_FORM, "1/2")], r=1)
    q = make_quasimap(2, "1/4", [F("x**2"), F("y**2")], [(X_FORM, "1/2")], r=2)
    assert minimal_r(q.boundary) == 2

    conic = TargetCone(2, ("z0*z2 - z1**2",))
    make_quasimap(2, "1/2", [F("x**2"), F("x*y"), F("y**2")], target=conic)
    with pytest.raises(TargetViolation):
        make_quasimap(2, "1/2", [F("x**2"), F("x*y"), F("x**2")], target=conic)


def test_fixed_movable_examples():
    fixed, movable = fixed_movable(make_quasimap(1, 1, [X_FORM, Y_FORM]))
    assert fixed.is_zero and movable == 1

    fixed, movable = fixed_movable(make_quasimap(2, "1/2", [F("x**2"), F("x*y")]))
    assert divisors_equal(fixed, divisor_from([(X_FORM, 1)]))
    assert movable == 1

    fixed, movable = fixed_movable(make_quasimap(2, "1/2", [F("x*y"), F("2*x*y")]))
    assert divisors_equal(fixed, divisor_from([(X_FORM, 1), (Y_FORM, 1)]))
    assert movable == 0


def test_is_constant_examples():
    assert is_constant(make_quasimap(2, "1/2", [F("x*y"), F("2*x*y")])) == (True, (1, 2))
    assert is_constant(make_quasimap(2, "1/2", [F("x**2"), F("y**2")])) == (False, None)
    assert is_constant(make_quasimap(2, "1/2", [F("x**2 + x*y"), F("3*x**2 + 3*x*y")])) == (True, (1, 3))


def test_invariants_examples():
    inv = invariants(make_quasimap(2, "1/4", [F("x**2"), F("y**2")], [(X_FORM, "1/2")], r=2))
    assert (inv.mu, inv.v) == (1, 1)

    inv = invariants(make_quasimap(1, 1, [X_FORM, Y_FORM]))
    assert (inv.mu, inv.v) == (1, 1)

    inv = invariants(make_quasimap(12, "1/12", [F("x**12"), F("y**12")]))
    assert (inv.mu, inv.v, inv.movable_degree) == (1, 1, 12)


def test_log_twisted_boundary_adds_weighted_fixed_part():
    q = make_quasimap(2, "1/4", [F("x**2"), F("x*y")], [(Y_FORM, "1/2")], r=2)
    D = log_twisted_boundary(q)
    assert divisors_equal(D, divisor_from([(X_FORM, "1/4"), (Y_FORM, "1/2")]))


def test_apply_mobius_quasimap_moves_boundary():
    q = make_quasimap(2, "1/4", [F("x**2"), F("y**2")], [(X_FORM, "1/2")], r=2)
    moved = apply_mobius_quasimap(q, MobiusMatrix.swap())
    assert divisors_equal(moved.boundary, divisor_from([(Y_FORM, "1/2")]))
    assert sections_proportional(moved.sections, [F("y**2"), F("x**2")])


def test_sections_proportional():
    assert sections_proportional([F("x"), F("y")], [F("3*x"), F("3*y")])
    assert not sections_proportional([F("x"), F("y")], [F("3*x"), F("2*y")])
    assert not sections_proportional([F("x")], [F("x"), F("y")])
