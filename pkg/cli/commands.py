# cli/commands.py
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

import pandas as pd

from core.cm.pencil import default_sample_points, nefness_probe
from core.debug import DebugSink
from core.dvr.family import special_fiber
from core.dvr.reduction import generic_fibers_match, semistable_reduction
from core.elliptic.weierstrass import analyze
import core.errors as errors
from core.errors import QmapError
from core.quasimap.degeneration import degenerate_at
from core.quasimap.isomorphism import find_isomorphism
from core.quasimap.stability import classify, delta, is_semistable_by_delta, small_weight_level
from core.quasimap.veronese import rescale
from core.worker import run_batch
from services.codec import (
    CodecError,
    classification_to_json,
    degeneration_to_json,
    dumps,
    elliptic_report_to_json,
    load_json,
    mobius_to_json,
    parse_family,
    parse_pencil,
    parse_point,
    parse_quasimap,
    parse_weierstrass,
    probe_to_json,
    quasimap_to_json,
    rat,
    reduction_to_json,
)
from services.persistence import ConfigError, SettingsManager

logger = logging.getLogger(__name__)

Json = Dict[str, Any]

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2

_INPUT_ERRORS = {"CodecError", "ConfigError"}


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmapk",
        description="K-stability of quasimaps on P1: classification, delta, degenerations, DVR reduction, CM degrees.",
    )
    parser.add_argument("--format", choices=["json", "pretty"], default=None, help="Output format (default from settings).")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG (stderr).")
    parser.add_argument("--debug-dir", type=Path, default=None, help="Write run artifacts under this directory.")
    parser.add_argument("--workers", type=int, default=None, help="Threads for multi-file commands.")
    parser.add_argument("--max-iters", type=int, default=None, help="Iteration cap of the DVR reduction.")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("classify", help="Classify quasimaps.")
    p.add_argument("files", nargs="+", help="Quasimap JSON files ('-' for stdin).")

    p = sub.add_parser("delta", help="delta invariant, plus the small-weight rescaled value.")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("degenerate", help="Degeneration at a rational point and its beta.")
    p.add_argument("file")
    p.add_argument("--point", required=True, help="a/b for [a/b:1], or inf.")

    p = sub.add_parser("reduce-dvr", help="Semistable reduction of a family over Q[t]_(t).")
    p.add_argument("file")

    p = sub.add_parser("cm-degree", help="CM degree of a pencil with a nefness probe.")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=None, help="Number of sampled fibers.")

    p = sub.add_parser("elliptic", help="Weierstrass elliptic surfaces.")
    esub = p.add_subparsers(dest="elliptic_command", metavar="ACTION")
    esub.required = True
    pa = esub.add_parser("analyze", help="Kodaira profile, discriminant divisor, adiabatic verdict.")
    pa.add_argument("files", nargs="+")

    p = sub.add_parser("rescale", help="Veronese rescaling to weight u/l.")
    p.add_argument("file")
    p.add_argument("--l", dest="level", type=int, required=True)

    p = sub.add_parser("isom", help="Decide isomorphism of two quasimaps.")
    p.add_argument("first")
    p.add_argument("second")
    return parser


# =============================================================================
# Command bodies
# =============================================================================

class _Context:
    def __init__(self, args: argparse.Namespace, stdin: TextIO, settings: SettingsManager, sink: DebugSink):
        self.args = args
        self.stdin = stdin
        self.settings = settings
        self.sink = sink

    def read(self, path: str) -> Any:
        if path == "-":
            try:
                return json.loads(self.stdin.read())
            except json.JSONDecodeError as e:
                raise CodecError(f"stdin: invalid JSON ({e})") from e
        return load_json(path)


def _classify(ctx: _Context, path: str) -> Json:
    q = parse_quasimap(ctx.read(path))
    return classification_to_json(q, classify(q))


def _delta(ctx: _Context, path: str) -> Json:
    q = parse_quasimap(ctx.read(path))
    level = small_weight_level(q)
    return {
        "delta": rat(delta(q)),
        "level": level,
        "rescaled_delta": rat(delta(rescale(q, level))),
        "semistable_by_delta": is_semistable_by_delta(q, level),
    }


def _elliptic(ctx: _Context, path: str) -> Json:
    return elliptic_report_to_json(analyze(parse_weierstrass(ctx.read(path))))


def _degenerate(ctx: _Context) -> Json:
    q = parse_quasimap(ctx.read(ctx.args.file))
    report = degenerate_at(q, parse_point(ctx.args.point))
    payload = degeneration_to_json(report)
    payload["central_class"] = classify(report.central_fiber).kind.value
    return payload


def _reduce(ctx: _Context) -> Json:
    F = parse_family(ctx.read(ctx.args.file))
    report = semistable_reduction(
        F,
        max_iters=ctx.args.max_iters,
        sink=ctx.sink,
        label=Path(ctx.args.file).stem,
    )
    special = special_fiber(report.result)
    payload = reduction_to_json(report, special, classify(special))
    payload["generic_fibers_match"] = generic_fibers_match(F, report)
    return payload


def _cm_degree(ctx: _Context) -> Json:
    P = parse_pencil(ctx.read(ctx.args.file))
    samples = ctx.args.samples if ctx.args.samples is not None else ctx.settings.probe_samples()
    if samples < 1:
        raise CodecError(f"--samples must be >= 1, got {samples}")
    report = nefness_probe(P, default_sample_points(samples))
    ctx.sink.record_frame("nefness", Path(ctx.args.file).stem, report.fibers)
    return probe_to_json(report)


def _rescale(ctx: _Context) -> Json:
    return quasimap_to_json(rescale(parse_quasimap(ctx.read(ctx.args.file)), ctx.args.level))


def _isom(ctx: _Context) -> Json:
    q1 = parse_quasimap(ctx.read(ctx.args.first))
    q2 = parse_quasimap(ctx.read(ctx.args.second))
    M = find_isomorphism(q1, q2)
    return {"isomorphic": M is not None, "matrix": None if M is None else mobius_to_json(M)}


_PER_FILE: Dict[str, Callable[[_Context, str], Json]] = {
    "classify": _classify,
    "delta": _delta,
    "elliptic": _elliptic,
}

_SINGLE: Dict[str, Callable[[_Context], Json]] = {
    "degenerate": _degenerate,
    "reduce-dvr": _reduce,
    "cm-degree": _cm_degree,
    "rescale": _rescale,
    "isom": _isom,
}


# =============================================================================
# Output
# =============================================================================

def _error_payload(error_type: str, message: str) -> Json:
    return {"error": error_type, "message": message}


def _exit_code_for(error_type: str) -> int:
    return EXIT_INPUT if error_type in _INPUT_ERRORS else EXIT_DOMAIN


def _approx(value: Any) -> Any:
    """'1/3' -> '1/3 (≈0.3333)' for display only."""
    if isinstance(value, str) and "/" in value:
        try:
            q = Fraction(value)
        except (ValueError, ZeroDivisionError):
            return value
        return f"{value} (≈{float(q):.4g})"
    if isinstance(value, (list, dict)):
        return json.dumps(value, ensure_ascii=False, separators=(",", ":"))
    return value


def render_pretty(payload: Any) -> str:
    if isinstance(payload, list):
        rows = [{k: _approx(v) for k, v in item.items()} for item in payload]
        return pd.DataFrame(rows).to_string(index=False)
    frame = pd.DataFrame([{"field": k, "value": _approx(v)} for k, v in payload.items()])
    return frame.to_string(index=False)


def _emit(payload: Any, fmt: str, stdout: TextIO) -> None:
    stdout.write(render_pretty(payload) if fmt == "pretty" else dumps(payload))
    stdout.write("\n")


def _configure_logging(verbosity: int, stream: TextIO) -> None:
    if verbosity <= 0:
        return
    level = logging.DEBUG if verbosity >= 2 else logging.INFO
    logging.basicConfig(level=level, stream=stream, format="%(levelname)s %(name)s: %(message)s", force=True)


# =============================================================================
# Entry point
# =============================================================================

def run(
    argv: Optional[Sequence[str]] = None,
    *,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Parse argv, run one command, print JSON (or a table) and return the exit code."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_INPUT

    _configure_logging(args.verbose, stderr)
    settings = SettingsManager()
    try:
        fmt = args.format or settings.output_format()
        workers = args.workers if args.workers is not None else settings.batch_workers()
    except ConfigError as e:
        _emit(_error_payload("ConfigError", str(e)), "json", stdout)
        return EXIT_INPUT

    sink = DebugSink(root=args.debug_dir, command=args.command)
    ctx = _Context(args, stdin, settings, sink)

    if args.command in _PER_FILE:
        return _run_files(ctx, _PER_FILE[args.command], args.files, fmt, workers, stdout)

    try:
        payload = _SINGLE[args.command](ctx)
    except (QmapError, ConfigError) as e:
        error_type = type(e).__name__
        logger.info("run: %s failed with %s", args.command, error_type)
        _emit(_error_payload(error_type, str(e)), "json", stdout)
        return _exit_code_for(error_type)
    _emit(payload, fmt, stdout)
    return EXIT_OK


def _run_files(
    ctx: _Context,
    body: Callable[[_Context, str], Json],
    files: List[str],
    fmt: str,
    workers: int,
    stdout: TextIO,
) -> int:
    outcomes = run_batch(lambda path: body(ctx, path), [(f, f) for f in files], workers=workers)

    for o in outcomes:
        if not o.ok and not _is_domain_error(o.error_type):
            raise RuntimeError(f"{o.label}: unexpected {o.error_type}\n{o.trace}")

    if len(outcomes) == 1:
        o = outcomes[0]
        if o.ok:
            _emit(o.value, fmt, stdout)
            return EXIT_OK
        _emit(_error_payload(o.error_type, o.error), "json", stdout)
        return _exit_code_for(o.error_type)

    items = [
        {"file": o.label, **o.value} if o.ok else {"file": o.label, **_error_payload(o.error_type, o.error)}
        for o in outcomes
    ]
    ctx.sink.record_items("batch", ctx.args.command, items)
    _emit(items, fmt, stdout)
    codes = [_exit_code_for(o.error_type) for o in outcomes if not o.ok]
    return max(codes, default=EXIT_OK)


def _is_domain_error(error_type: Optional[str]) -> bool:
    if error_type in _INPUT_ERRORS:
        return True
    cls = getattr(errors, error_type or "", None)
    return isinstance(cls, type) and issubclass(cls, QmapError)


def main() -> None:
    sys.exit(run())


__all__ = ["build_parser", "render_pretty", "run", "main"]
