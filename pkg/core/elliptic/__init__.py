# core/elliptic/__init__.py
from core.elliptic.kodaira import FiberType, KodairaProfile, fiber_type, log_canonical_threshold
from core.elliptic.weierstrass import (
    AdiabaticVerdict,
    EllipticReport,
    WeierstrassModel,
    adiabatic_kstable,
    analyze,
    associated_quasimap,
    discriminant,
    discriminant_divisor,
    kodaira_profile,
    minimalize,
)

__all__ = [
    "FiberType",
    "KodairaProfile",
    "fiber_type",
    "log_canonical_threshold",
    "AdiabaticVerdict",
    "EllipticReport",
    "WeierstrassModel",
    "adiabatic_kstable",
    "analyze",
    "associated_quasimap",
    "discriminant",
    "discriminant_divisor",
    "kodaira_profile",
    "minimalize",
]
