# tests/test_cli.py

import io
import json

import pytest

from cli.commands import render_pretty, run

IDENTITY_LINE = {"degree": 1, "weight": "1", "sections": [["0", "1"], ["1", "0"]]}
SWAPPED = {"degree": 1, "weight": "1", "sections": [["1", "0"], ["0", "1"]]}
HALF_POINT = {
    "degree": 2,
    "weight": "1/4",
    "sections": [["0", "0", "1"], ["1", "0", "0"]],
    "boundary": [{"form": ["0", "1"], "coeff": "1/2"}],
}
RAMIFIED = {"degree": 2, "weight": "1/2", "sections": [[["0"], ["0"], ["1"]], [["0", "-1"], ["0"], ["1"]]]}
CUBIC_PENCIL = {
    "fiber_degree": 3,
    "base_degree": 1,
    "weight": "1/3",
    "sections": [
        [["1", "0"], ["0", "0"], ["0", "0"], ["0", "1"]],
        [["0", "1"], ["0", "0"], ["0", "0"], ["1", "0"]],
    ],
}
GENERIC_ELLIPTIC = {"k": 1, "A": ["0", "0", "0", "0", "1"], "B": ["1", "0", "0", "0", "0", "0", "0"]}


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    monkeypatch.setenv("QMAPK_HOME", str(tmp_path / "home"))
    monkeypatch.delenv("QMAPK_MAX_ITERS", raising=False)


@pytest.fixture
def write(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write


def _run(*argv, stdin=None):
    out = io.StringIO()
    code = run(list(argv), stdin=stdin, stdout=out, stderr=io.StringIO())
    return code, out.getvalue()


def _run_json(*argv, stdin=None):
    code, text = _run(*argv, stdin=stdin)
    return code, json.loads(text)


def test_classify_single_file(write):
    code, payload = _run_json("classify", write("line.json", IDENTITY_LINE))
    assert code == 0
    assert payload["class"] == "Stable"
    assert payload["delta"] == "0"


def test_classify_batch_reports_each_file(write):
    files = [write("line.json", IDENTITY_LINE), write("half.json", HALF_POINT)]
    code, payload = _run_json("--workers", "2", "classify", *files)
    assert code == 0
    assert [item["file"] for item in payload] == files
    assert [item["class"] for item in payload] == ["Stable", "Semistable"]


def test_classify_from_stdin():
    code, payload = _run_json("classify", "-", stdin=io.StringIO(json.dumps(IDENTITY_LINE)))
    assert code == 0
    assert payload["class"] == "Stable"


def test_malformed_input_exits_2(write):
    code, payload = _run_json("classify", write("broken.json", "{nope"))
    assert code == 2
    assert payload["error"] == "CodecError"


def test_domain_error_exits_1(write):
    zero = {"degree": 1, "weight": "1", "sections": [["0", "0"], ["0", "0"]]}
    code, payload = _run_json("classify", write("zero.json", zero))
    assert code == 1
    assert payload["error"] == "DegenerateInput"


def test_batch_exit_code_is_the_worst(write):
    files = [write("line.json", IDENTITY_LINE), write("broken.json", "[")]
    code, payload = _run_json("classify", *files)
    assert code == 2
    assert "class" in payload[0]
    assert payload[1]["error"] == "CodecError"


def test_delta_reports_the_rescaled_value(write):
    code, payload = _run_json("delta", write("line.json", IDENTITY_LINE))
    assert code == 0
    assert payload["delta"] == "0"
    assert payload["level"] == 3
    assert payload["rescaled_delta"] == "4/3"
    assert payload["semistable_by_delta"] is True


def test_pretty_output_shows_decimal_approximations(write):
    code, text = _run("--format", "pretty", "delta", write("line.json", IDENTITY_LINE))
    assert code == 0
    assert "4/3 (≈1.333)" in text


def test_render_pretty_for_lists():
    text = render_pretty([{"file": "a.json", "delta": "1/3"}, {"file": "b.json", "delta": "0"}])
    assert "1/3 (≈0.3333)" in text
    assert "b.json" in text


def test_degenerate(write):
    code, payload = _run_json("degenerate", write("line.json", IDENTITY_LINE), "--point", "0")
    assert code == 0
    assert payload["center"] == "0"
    assert "beta" in payload
    assert payload["central_class"] in {"Stable", "Polystable", "Semistable", "Unstable", "NotFano"}


def test_degenerate_rejects_bad_point(write):
    code, payload = _run_json("degenerate", write("line.json", IDENTITY_LINE), "--point", "[0:0]")
    assert code == 2
    assert payload["error"] == "CodecError"


def test_reduce_dvr(write):
    code, payload = _run_json("reduce-dvr", write("ramified.json", RAMIFIED))
    assert code == 0
    assert payload["e"] == 2
    assert len(payload["steps"]) == 1
    assert payload["steps"][0]["slope"] == "1/2"
    assert payload["generic_fibers_match"] is True


def test_reduce_dvr_writes_debug_artifacts(write, tmp_path):
    debug_dir = tmp_path / "debug"
    code, _ = _run_json("--debug-dir", str(debug_dir), "reduce-dvr", write("ramified.json", RAMIFIED))
    assert code == 0
    assert len(list(debug_dir.glob("*/manifest.json"))) == 1
    assert len(list(debug_dir.glob("*/reduction/ramified.json"))) == 1


def test_reduce_dvr_rejects_bad_iteration_cap(write):
    code, payload = _run_json("--max-iters", "0", "reduce-dvr", write("ramified.json", RAMIFIED))
    assert code == 2
    assert payload["error"] == "ConfigError"


def test_cm_degree(write):
    code, payload = _run_json("cm-degree", write("cubic.json", CUBIC_PENCIL), "--samples", "4")
    assert code == 0
    assert payload["cm_degree"] == "2/3"
    assert payload["hypothesis_met"] is True
    assert payload["verdict"] == "consistent"
    assert len(payload["fibers"]) == 4


def test_elliptic_analyze(write):
    code, payload = _run_json("elliptic", "analyze", write("generic.json", GENERIC_ELLIPTIC))
    assert code == 0
    assert payload["moduliDegree"] == "1"
    assert payload["adiabatic"] == "StrictlyStable"
    assert {entry["type"] for entry in payload["profile"]} == {"I_1"}


def test_elliptic_rejects_wrong_degrees(write):
    bad = {"k": 1, "A": ["0", "0", "0", "1"], "B": GENERIC_ELLIPTIC["B"]}
    code, _ = _run("elliptic", "analyze", write("bad.json", bad))
    assert code == 2


def test_rescale(write):
    code, payload = _run_json("rescale", write("line.json", IDENTITY_LINE), "--l", "2")
    assert code == 0
    assert payload["degree"] == 2
    assert payload["weight"] == "1/2"
    assert len(payload["sections"]) == 3


def test_isom(write):
    code, payload = _run_json("isom", write("a.json", IDENTITY_LINE), write("b.json", SWAPPED))
    assert code == 0
    assert payload["isomorphic"] is True

    code, payload = _run_json("isom", write("a.json", IDENTITY_LINE), write("c.json", HALF_POINT))
    assert code == 0
    assert payload == {"isomorphic": False, "matrix": None}


def test_usage_errors():
    assert _run()[0] == 2
    assert _run("classify")[0] == 2
    assert _run("--help")[0] == 0
