# tests/test_codec.py

import json
from fractions import Fraction

import pytest

from core.forms.binary_forms import X_FORM, Y_FORM
from core.forms.divisor import divisors_equal
from core.quasimap.stability import classify
from services.codec import (
    CodecError,
    classification_to_json,
    divisor_to_json,
    form_to_json,
    load_json,
    parse_divisor,
    parse_family,
    parse_form,
    parse_pencil,
    parse_point,
    parse_quasimap,
    parse_weierstrass,
    quasimap_to_json,
)

IDENTITY_LINE = {"degree": 1, "weight": "1", "sections": [["0", "1"], ["1", "0"]]}

HALF_POINT = {
    "degree": 2,
    "weight": "1/4",
    "sections": [["0", "0", "1"], ["1", "0", "0"]],
    "boundary": [{"form": ["0", "1"], "coeff": "1/2"}],
}


def test_form_encoding_lowest_x_power_first():
    f = parse_form(["-1/2", "0", "1"])
    assert f.coeffs == (Fraction(-1, 2), 0, 1)
    assert form_to_json(f) == ["-1/2", "0", "1"]
    assert parse_form("inf") == Y_FORM


def test_parse_quasimap_examples():
    q = parse_quasimap(IDENTITY_LINE)
    assert list(q.sections) == [X_FORM, Y_FORM]
    assert q.r == 1

    q = parse_quasimap(HALF_POINT)
    assert q.r == 2
    assert q.boundary.degree == Fraction(1, 2)

    again = parse_quasimap(json.loads(json.dumps(quasimap_to_json(q))))
    assert again.sections == q.sections
    assert divisors_equal(again.boundary, q.boundary)


def test_boundary_at_infinity():
    D = parse_divisor([{"form": "inf", "coeff": "1/3"}])
    assert divisor_to_json(D) == [{"form": "inf", "coeff": "1/3"}]


def test_classification_payload_for_identity_line():
    q = parse_quasimap(IDENTITY_LINE)
    payload = classification_to_json(q, classify(q))
    assert payload["class"] == "Stable"
    assert payload["delta"] == "0"
    assert payload["level"] == 3
    assert "witness" not in payload


@pytest.mark.parametrize(
    "payload",
    [
        [],
        {"weight": "1", "sections": [["1", "0"]]},
        {"degree": 1, "weight": "1/0", "sections": [["0", "1"], ["1", "0"]]},
        {"degree": 1, "weight": 0.5, "sections": [["0", "1"], ["1", "0"]]},
        {"degree": 1, "weight": "1", "sections": [["0", "1"]], "boundary": [{"form": ["1", "0"]}]},
    ],
)
def test_malformed_quasimaps_raise_codec_error(payload):
    with pytest.raises(CodecError):
        parse_quasimap(payload)


def test_parse_other_payloads():
    F_ = parse_family({"degree": 2, "weight": "1/2", "sections": [[["0"], ["0"], ["1"]], [["0", "-1"], ["0"], ["1"]]]})
    assert F_.sections[1].rows == ((0, -1), (), (1,))

    P = parse_pencil(
        {
            "fiber_degree": 3,
            "base_degree": 1,
            "weight": "1/3",
            "sections": [
                [["1", "0"], ["0", "0"], ["0", "0"], ["0", "1"]],
                [["0", "1"], ["0", "0"], ["0", "0"], ["1", "0"]],
            ],
        }
    )
    assert P.weight == Fraction(1, 3)

    W = parse_weierstrass({"k": 1, "A": ["0", "0", "0", "0", "1"], "B": ["1", "0", "0", "0", "0", "0", "0"]})
    assert W.a4.degree == 4 and W.a6.degree == 6


def test_parse_point_and_load_json(tmp_path):
    assert parse_point("1/2").a == Fraction(1, 2)
    with pytest.raises(CodecError):
        parse_point("[0:0]")

    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(CodecError):
        load_json(path)
    with pytest.raises(CodecError):
        load_json(tmp_path / "missing.json")


@pytest.mark.parametrize(
    "payload",
    [
        {"degree": 2, "weight": "1/2", "sections": [[["0"], ["1"]], [["0"], ["0"], ["1"]]]},
        {"degree": 1, "weight": "-1", "sections": [[["0"], ["1"]]]},
    ],
)
def test_malformed_families_raise_codec_error(payload):
    with pytest.raises(CodecError):
        parse_family(payload)


def test_weierstrass_degree_mismatch_raises_codec_error():
    with pytest.raises(CodecError):
        parse_weierstrass({"k": 1, "A": ["0", "0", "0", "1"], "B": ["1", "0", "0", "0", "0", "0", "0"]})
