# services/codec.py
from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

try:
    import jsonschema  # type: ignore
except Exception:  # jsonschema is optional
    jsonschema = None  # type: ignore

from core.cm.pencil import BiForm, NefnessReport, PencilFamily, make_pencil
from core.dvr.family import DvrQuasimapFamily, TForm, make_family
from core.dvr.reduction import ReductionReport
from core.elliptic.kodaira import KodairaProfile
from core.elliptic.weierstrass import EllipticReport, WeierstrassModel
from core.errors import DegenerateInput, QmapError
from core.forms.binary_forms import BinaryForm, MobiusMatrix, RationalPoint, Y_FORM, as_rat
from core.forms.divisor import QDivisor, divisor_from
from core.quasimap.degeneration import DegenerationReport
from core.quasimap.quasimap import Quasimap, TargetCone, invariants, make_quasimap
from core.quasimap.stability import StabilityClass, delta, small_weight_level

logger = logging.getLogger(__name__)

Json = Dict[str, Any]


class CodecError(QmapError):
    """Malformed JSON payload."""


# =============================================================================
# Schemas (checked when jsonschema is installed)
# =============================================================================

_RAT = {"type": ["string", "integer"]}
_FORM = {"type": "array", "items": _RAT, "minItems": 1}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _RAT, "minItems": 1}, "minItems": 1}

QUASIMAP_SCHEMA: Json = {
    "type": "object",
    "required": ["degree", "weight", "sections"],
    "properties": {
        "degree": {"type": "integer", "minimum": 1},
        "weight": _RAT,
        "sections": {"type": "array", "items": _FORM, "minItems": 1},
        "boundary": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["form", "coeff"],
                "properties": {"form": {"anyOf": [_FORM, {"const": "inf"}]}, "coeff": _RAT},
            },
        },
        "r": {"type": "integer", "minimum": 1},
        "target": {
            "type": "object",
            "required": ["ambient_dim"],
            "properties": {
                "ambient_dim": {"type": "integer", "minimum": 0},
                "generators": {"type": "array", "items": {"type": "string"}},
            },
        },
    },
}

FAMILY_SCHEMA: Json = {
    "type": "object",
    "required": ["degree", "weight", "sections"],
    "properties": {
        "degree": {"type": "integer", "minimum": 1},
        "weight": _RAT,
        "sections": {"type": "array", "items": _MATRIX, "minItems": 1},
        "boundary": {
            "type": "array",
            "items": {"type": "object", "required": ["form", "coeff"], "properties": {"form": _MATRIX, "coeff": _RAT}},
        },
        "r": {"type": "integer", "minimum": 1},
    },
}

PENCIL_SCHEMA: Json = {
    "type": "object",
    "required": ["fiber_degree", "base_degree", "weight", "sections"],
    "properties": {
        "fiber_degree": {"type": "integer", "minimum": 1},
        "base_degree": {"type": "integer", "minimum": 0},
        "weight": _RAT,
        "sections": {"type": "array", "items": _MATRIX, "minItems": 1},
        "boundary": {
            "type": "array",
            "items": {"type": "object", "required": ["form", "coeff"], "properties": {"form": _MATRIX, "coeff": _RAT}},
        },
    },
}

WEIERSTRASS_SCHEMA: Json = {
    "type": "object",
    "required": ["k", "A", "B"],
    "properties": {"k": {"type": "integer", "minimum": 1}, "A": _FORM, "B": _FORM},
}


def _validate(payload: Any, schema: Json, what: str) -> None:
    if not isinstance(payload, dict):
        raise CodecError(f"{what}: expected a JSON object, got {type(payload).__name__}")
    for key in schema.get("required", []):
        if key not in payload:
            raise CodecError(f"{what}: missing key {key!r}")
    if jsonschema is not None:
        try:
            jsonschema.validate(instance=payload, schema=schema)  # type: ignore
        except jsonschema.ValidationError as e:  # type: ignore
            raise CodecError(f"{what}: {e.message}") from e


def load_json(path: Union[str, Path]) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise CodecError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CodecError(f"{path}: invalid JSON ({e})") from e


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


# =============================================================================
# Scalars and forms
# =============================================================================

def rat(value: Fraction) -> str:
    return str(value)


def parse_rat(value: Any, what: str = "rational") -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise CodecError(f"{what}: expected a \"num/den\" string, got {value!r}")
    try:
        return as_rat(value)
    except DegenerateInput as e:
        raise CodecError(f"{what}: {e}") from e


def form_to_json(f: BinaryForm) -> List[str]:
    return [rat(c) for c in f.coeffs]


def parse_form(value: Any, what: str = "form") -> BinaryForm:
    if value == "inf":
        return Y_FORM
    if not isinstance(value, list) or not value:
        raise CodecError(f"{what}: expected a non-empty coefficient list")
    return BinaryForm.from_coeffs([parse_rat(c, what) for c in value])


def matrix_to_json(rows: Sequence[Sequence[Fraction]], width: Optional[int] = None) -> List[List[str]]:
    width = width or max((len(r) for r in rows), default=1) or 1
    return [[rat(r[j]) if j < len(r) else "0" for j in range(width)] for r in rows]


def _parse_matrix(value: Any, what: str) -> List[List[Fraction]]:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) and r for r in value):
        raise CodecError(f"{what}: expected a non-empty matrix")
    return [[parse_rat(c, what) for c in row] for row in value]


def mobius_to_json(M: MobiusMatrix) -> List[List[str]]:
    return [[rat(c) for c in row] for row in M.rows()]


def parse_point(text: str) -> RationalPoint:
    try:
        return RationalPoint.parse(text)
    except DegenerateInput as e:
        raise CodecError(f"point: {e}") from e


# =============================================================================
# Divisors and quasimaps
# =============================================================================

def divisor_to_json(D: QDivisor) -> List[Json]:
    return [
        {"form": "inf" if cl.is_infinity else form_to_json(cl.form), "coeff": rat(c)}
        for cl, c in D
    ]


def parse_divisor(value: Any) -> QDivisor:
    if not isinstance(value, list):
        raise CodecError("boundary: expected a list of {form, coeff} objects")
    pairs = []
    for i, item in enumerate(value):
        if not isinstance(item, dict) or "form" not in item or "coeff" not in item:
            raise CodecError(f"boundary[{i}]: expected {{\"form\", \"coeff\"}}")
        pairs.append((parse_form(item["form"], f"boundary[{i}].form"), parse_rat(item["coeff"], f"boundary[{i}].coeff")))
    return divisor_from(pairs)


def quasimap_to_json(q: Quasimap) -> Json:
    out: Json = {
        "degree": q.degree,
        "weight": rat(q.weight),
        "sections": [form_to_json(f) for f in q.sections],
        "boundary": divisor_to_json(q.boundary),
        "r": q.r,
    }
    if q.target is not None:
        out["target"] = {"ambient_dim": q.target.ambient_dim, "generators": list(q.target.generators)}
    return out


def parse_quasimap(payload: Any) -> Quasimap:
    _validate(payload, QUASIMAP_SCHEMA, "quasimap")
    target = None
    if payload.get("target") is not None:
        t = payload["target"]
        target = TargetCone(int(t["ambient_dim"]), tuple(str(g) for g in t.get("generators", [])))
    return make_quasimap(
        int(payload["degree"]),
        parse_rat(payload["weight"], "weight"),
        [parse_form(f, f"sections[{i}]") for i, f in enumerate(payload["sections"])],
        parse_divisor(payload.get("boundary", [])),
        None if payload.get("r") is None else int(payload["r"]),
        target,
    )


def classification_to_json(q: Quasimap, cls: StabilityClass) -> Json:
    inv = invariants(q)
    out: Json = {
        "class": cls.kind.value,
        "delta": rat(delta(q)),
        "mu": rat(inv.mu),
        "v": rat(inv.v),
        "level": small_weight_level(q),
    }
    if cls.witness is not None:
        out["witness"] = {
            "form": "inf" if cls.witness.is_infinity else form_to_json(cls.witness.form),
            "degree": cls.witness_degree,
            "multiplicity": rat(cls.multiplicity),
        }
    return out


def degeneration_to_json(report: DegenerationReport) -> Json:
    return {
        "center": str(report.center),
        "beta": rat(report.beta),
        "product_type": report.is_product_type,
        "mobius": mobius_to_json(report.mobius),
        "central_fiber": quasimap_to_json(report.central_fiber),
    }


# =============================================================================
# DVR families
# =============================================================================

def family_to_json(F: DvrQuasimapFamily) -> Json:
    def tform(f: TForm) -> List[List[str]]:
        return matrix_to_json(f.rows)

    return {
        "degree": F.degree,
        "weight": rat(F.weight),
        "sections": [tform(s) for s in F.sections],
        "boundary": [{"form": tform(h), "coeff": rat(c)} for h, c in F.boundary],
        "r": F.r,
    }


def parse_family(payload: Any) -> DvrQuasimapFamily:
    _validate(payload, FAMILY_SCHEMA, "family")
    try:
        sections = [TForm.from_matrix(_parse_matrix(s, f"sections[{i}]")) for i, s in enumerate(payload["sections"])]
        boundary = []
        for i, item in enumerate(payload.get("boundary", [])):
            form = TForm.from_matrix(_parse_matrix(item["form"], f"boundary[{i}].form"))
            boundary.append((form, parse_rat(item["coeff"], f"boundary[{i}].coeff")))
        return make_family(
            int(payload["degree"]),
            parse_rat(payload["weight"], "weight"),
            sections,
            boundary,
            None if payload.get("r") is None else int(payload["r"]),
        )
    except DegenerateInput as e:
        raise CodecError(f"family: {e}") from e


def reduction_to_json(report: ReductionReport, special: Quasimap, cls: StabilityClass) -> Json:
    steps = []
    for st in report.steps:
        steps.append(
            {
                "center": str(st.center),
                "multiplicity": rat(st.multiplicity),
                "slope": rat(st.slope),
                "base_change": st.base_change,
                "shift": st.shift,
                "content": rat(st.content),
                "matrix": [[{"coeff": rat(c), "s_power": k} for c, k in row] for row in st.matrix()],
            }
        )
    return {
        "e": report.base_change_exponent,
        "iterations": report.iterations,
        "steps": steps,
        "result": family_to_json(report.result),
        "special_fiber": quasimap_to_json(special),
        "special_class": cls.kind.value,
    }


# =============================================================================
# Pencils
# =============================================================================

def pencil_to_json(P: PencilFamily) -> Json:
    return {
        "fiber_degree": P.fiber_degree,
        "base_degree": P.base_degree,
        "weight": rat(P.weight),
        "sections": [matrix_to_json(f.coeffs) for f in P.sections],
        "boundary": [{"form": matrix_to_json(h.coeffs), "coeff": rat(c)} for h, c in P.boundary],
    }


def parse_pencil(payload: Any) -> PencilFamily:
    _validate(payload, PENCIL_SCHEMA, "pencil")
    try:
        sections = [BiForm.from_matrix(_parse_matrix(s, f"sections[{i}]")) for i, s in enumerate(payload["sections"])]
        boundary = [
            (BiForm.from_matrix(_parse_matrix(item["form"], f"boundary[{i}].form")), parse_rat(item["coeff"], "coeff"))
            for i, item in enumerate(payload.get("boundary", []))
        ]
    except DegenerateInput as e:
        raise CodecError(f"pencil: {e}") from e
    return make_pencil(
        int(payload["fiber_degree"]),
        int(payload["base_degree"]),
        parse_rat(payload["weight"], "weight"),
        sections,
        boundary,
    )


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return rat(value)
    if hasattr(value, "item"):
        return value.item()
    return value


def probe_to_json(report: NefnessReport) -> Json:
    fibers = [{k: _plain(v) for k, v in row.items()} for row in report.fibers.to_dict(orient="records")]
    return {
        "cm_degree": rat(report.degree),
        "hypothesis_met": report.hypothesis_met,
        "verdict": report.verdict,
        "fibers": fibers,
    }


# =============================================================================
# Weierstrass models
# =============================================================================

def weierstrass_to_json(W: WeierstrassModel) -> Json:
    return {"k": W.k, "A": form_to_json(W.a4), "B": form_to_json(W.a6)}


def parse_weierstrass(payload: Any) -> WeierstrassModel:
    _validate(payload, WEIERSTRASS_SCHEMA, "weierstrass")
    a4, a6 = parse_form(payload["A"], "A"), parse_form(payload["B"], "B")
    try:
        return WeierstrassModel(int(payload["k"]), a4, a6)
    except DegenerateInput as e:
        raise CodecError(f"weierstrass: {e}") from e


def profile_to_json(profile: KodairaProfile) -> List[Json]:
    return [
        {
            "cluster": "inf" if e.cluster.is_infinity else form_to_json(e.cluster.form),
            "ord_A": "inf" if e.ord_a is None else e.ord_a,
            "ord_B": "inf" if e.ord_b is None else e.ord_b,
            "ord_Delta": e.ord_delta,
            "type": str(e.fiber),
            "lct": rat(e.lct),
        }
        for e in profile.entries
    ]


def elliptic_report_to_json(report: EllipticReport) -> Json:
    return {
        "model": weierstrass_to_json(report.model),
        "profile": profile_to_json(report.profile),
        "discDivisor": divisor_to_json(report.disc_divisor),
        "moduliDegree": rat(report.moduli_degree),
        "adiabatic": None if report.adiabatic is None else report.adiabatic.value,
        "associated": quasimap_to_json(report.associated),
    }


__all__ = [
    "CodecError",
    "load_json",
    "dumps",
    "rat",
    "parse_rat",
    "form_to_json",
    "parse_form",
    "mobius_to_json",
    "parse_point",
    "divisor_to_json",
    "parse_divisor",
    "quasimap_to_json",
    "parse_quasimap",
    "classification_to_json",
    "degeneration_to_json",
    "family_to_json",
    "parse_family",
    "reduction_to_json",
    "pencil_to_json",
    "parse_pencil",
    "probe_to_json",
    "weierstrass_to_json",
    "parse_weierstrass",
    "profile_to_json",
    "elliptic_report_to_json",
]
