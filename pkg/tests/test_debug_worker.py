# tests/test_debug_worker.py

import json
from fractions import Fraction

import pandas as pd
import pytest

from core.debug import DebugSink, _slug
from core.errors import DegenerateInput
from core.worker import run_batch


def test_slug():
    assert _slug("my family.json") == "my-family.json"
    assert _slug("reduce-dvr") == "reduce-dvr"
    assert _slug("..") == "item"
    assert _slug("///") == "item"
    assert _slug("") == "item"


def test_sink_without_root_writes_nothing(tmp_path):
    sink = DebugSink()
    assert not sink.enabled
    assert sink.run_dir is None
    assert sink.record_items("batch", "x", [{"a": 1}]) is None
    assert list(tmp_path.iterdir()) == []


def test_sink_writes_artifacts_and_manifest(tmp_path):
    sink = DebugSink(root=tmp_path, command="reduce dvr", stamp="run1")
    frame = pd.DataFrame([{"step": 1, "slope": Fraction(1, 2)}])
    path = sink.record_frame("reduction", "ramified", frame)

    assert path == tmp_path / "run1_reduce-dvr" / "reduction" / "ramified.json"
    written = json.loads(path.read_text(encoding="utf-8"))
    assert written["columns"] == ["step", "slope"]
    assert written["rows"] == [{"step": "1", "slope": "1/2"}]

    sink.record_items("batch", "classify", [{"file": "a.json", "class": "Stable"}])
    manifest = json.loads((sink.run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "reduce dvr"
    assert [(a["kind"], a["path"]) for a in manifest["artifacts"]] == [
        ("reduction", "reduction/ramified.json"),
        ("batch", "batch/classify.json"),
    ]


def test_sink_shared_by_batch_workers(tmp_path):
    sink = DebugSink(root=tmp_path, command="classify", stamp="run2")
    run_batch(lambda i: sink.record_items("batch", f"part{i}", [{"i": i}]), [(str(i), i) for i in range(6)], workers=3)
    manifest = json.loads((sink.run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert sorted(a["label"] for a in manifest["artifacts"]) == [f"part{i}" for i in range(6)]


def test_run_batch_keeps_order_and_captures_errors():
    def work(n):
        if n == 2:
            raise DegenerateInput("two is degenerate")
        return n * n

    outcomes = run_batch(work, [(f"item{n}", n) for n in range(5)], workers=3)
    assert [o.label for o in outcomes] == [f"item{n}" for n in range(5)]
    assert [o.value for o in outcomes if o.ok] == [0, 1, 9, 16]

    failed = outcomes[2]
    assert not failed.ok
    assert failed.error_type == "DegenerateInput"
    assert "two is degenerate" in failed.trace


def test_run_batch_rejects_bad_worker_count():
    with pytest.raises(ValueError):
        run_batch(lambda n: n, [("a", 1)], workers=0)
