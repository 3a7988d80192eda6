# tests/test_dvr_reduction.py

import json
from fractions import Fraction

import pytest

from core.debug import DebugSink
from core.dvr.family import TForm, family_fiber, generic_classify, make_family, special_fiber
from core.dvr.reduction import generic_fibers_match, optimal_slope, semistable_reduction
from core.errors import DegenerateInput, PreconditionViolated
from core.forms.binary_forms import BinaryForm, X_FORM
from core.forms.divisor import divisor_from, divisors_equal
from core.quasimap.quasimap import fixed_movable, is_constant, sections_proportional
from core.quasimap.stability import StabilityKind, classify
from services.persistence import ConfigError


def T(expr: str) -> TForm:
    return TForm.from_expr(expr)


def F(expr: str) -> BinaryForm:
    return BinaryForm.from_expr(expr)


@pytest.fixture(autouse=True)
def _isolated_home(tmp_path, monkeypatch):
    monkeypatch.setenv("QMAPK_HOME", str(tmp_path / "home"))
    monkeypatch.delenv("QMAPK_MAX_ITERS", raising=False)


def colliding_family():
    """x^2 and (x - t y)^2: two double points that collide at t = 0."""
    return make_family(2, "1/2", [T("x**2"), T("(x - t*y)**2")])


def ramified_family():
    """x^2 and x^2 - t y^2: the roots +-sqrt(t) need a square root of t."""
    return make_family(2, "1/2", [T("x**2"), T("x**2 - t*y**2")])


def test_special_fiber_examples():
    q0 = special_fiber(colliding_family())
    assert is_constant(q0)[0]
    fixed, movable = fixed_movable(q0)
    assert divisors_equal(fixed, divisor_from([(X_FORM, 2)]))
    assert movable == 0

    flat = make_family(2, "1/2", [T("x**2"), T("y**2")])
    assert list(special_fiber(flat).sections) == [F("x**2"), F("y**2")]

    q0 = special_fiber(make_family(2, "1/2", [T("t**2*x**2"), T("y**2")]))
    assert q0.sections[0].is_zero
    assert q0.sections[1] == F("y**2")


def test_make_family_strips_common_t_power():
    F_ = make_family(2, "1/2", [T("t*x**2"), T("t**2*y**2")])
    assert F_.sections[0].t_order == 0
    assert F_.sections[1].t_order == 1

    with pytest.raises(DegenerateInput):
        make_family(2, "1/2", [TForm.from_expr("0", degree=2), TForm.from_expr("0", degree=2)])


def test_family_fiber_at_parameter():
    q = family_fiber(colliding_family(), 3)
    assert list(q.sections) == [F("x**2"), F("(x - 3*y)**2")]


def test_generic_classify_examples():
    assert generic_classify(colliding_family()).kind is StabilityKind.STABLE
    assert generic_classify(make_family(2, "1/2", [T("x**2"), T("y**2")])).kind is StabilityKind.STABLE

    unstable = make_family(3, "1/3", [T("x**2*(x - t*y)"), T("x**3")])
    assert generic_classify(unstable).kind is StabilityKind.UNSTABLE
    with pytest.raises(PreconditionViolated):
        semistable_reduction(unstable)


def test_reduction_of_colliding_points():
    report = semistable_reduction(colliding_family())

    assert report.base_change_exponent == 1
    assert report.iterations == 1
    (step,) = report.steps
    assert step.slope == 1
    assert step.base_change == 1
    assert step.s_power == 1
    assert step.content == 2

    special = special_fiber(report.result)
    assert sections_proportional(special.sections, [F("x**2"), F("(x - y)**2")])
    assert classify(special).kind is StabilityKind.STABLE
    assert generic_fibers_match(colliding_family(), report)


def test_reduction_needs_base_change():
    F_ = ramified_family()
    assert optimal_slope(F_) == Fraction(1, 2)

    report = semistable_reduction(F_)
    assert report.base_change_exponent == 2
    (step,) = report.steps
    assert (step.base_change, step.shift, step.s_power) == (2, 1, 1)
    assert step.matrix() == (((1, 1), (0, 0)), ((0, 1), (1, 0)))

    special = special_fiber(report.result)
    assert sections_proportional(special.sections, [F("x**2"), F("x**2 - y**2")])
    assert classify(special).kind is StabilityKind.STABLE
    assert generic_fibers_match(F_, report)


def test_semistable_special_fiber_needs_no_steps():
    F_ = make_family(2, "1/2", [T("x**2 + t*x*y"), T("y**2")])
    report = semistable_reduction(F_)
    assert report.steps == ()
    assert report.base_change_exponent == 1
    assert report.result == F_
    assert generic_fibers_match(F_, report)


def test_reduction_step_log_goes_to_sink(tmp_path):
    sink = DebugSink(root=tmp_path / "debug", command="reduce-dvr")
    report = semistable_reduction(ramified_family(), sink=sink, label="ramified")

    out = sink.run_dir / "reduction" / "ramified.json"
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert len(rows) == len(report.steps) == 1
    assert rows[0]["slope"] == "1/2"
    assert len(report.step_frame()) == 1


def test_iteration_cap_comes_from_environment(monkeypatch):
    monkeypatch.setenv("QMAPK_MAX_ITERS", "0")
    with pytest.raises(ConfigError):
        semistable_reduction(colliding_family())

    with pytest.raises(ConfigError):
        semistable_reduction(colliding_family(), max_iters=0)
