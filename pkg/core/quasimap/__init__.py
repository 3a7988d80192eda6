# core/quasimap/__init__.py
from core.quasimap.quasimap import (
    NumericInvariants,
    Quasimap,
    TargetCone,
    apply_mobius_quasimap,
    fixed_movable,
    invariants,
    is_constant,
    log_twisted_boundary,
    make_quasimap,
)
from core.quasimap.stability import StabilityClass, StabilityKind, beta_at, classify, delta
from core.quasimap.veronese import rescale, unrescale
from core.quasimap.degeneration import DegenerationReport, degenerate_at
from core.quasimap.isomorphism import are_isomorphic, find_isomorphism

__all__ = [
    "NumericInvariants",
    "Quasimap",
    "TargetCone",
    "apply_mobius_quasimap",
    "fixed_movable",
    "invariants",
    "is_constant",
    "log_twisted_boundary",
    "make_quasimap",
    "StabilityClass",
    "StabilityKind",
    "beta_at",
    "classify",
    "delta",
    "rescale",
    "unrescale",
    "DegenerationReport",
    "degenerate_at",
    "are_isomorphic",
    "find_isomorphism",
]
