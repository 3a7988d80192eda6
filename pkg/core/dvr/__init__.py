# core/dvr/__init__.py
from core.dvr.family import DvrQuasimapFamily, TForm, family_fiber, generic_classify, make_family, special_fiber
from core.dvr.reduction import ReductionReport, ReductionStep, generic_fibers_match, semistable_reduction

__all__ = [
    "DvrQuasimapFamily",
    "TForm",
    "family_fiber",
    "generic_classify",
    "make_family",
    "special_fiber",
    "ReductionReport",
    "ReductionStep",
    "generic_fibers_match",
    "semistable_reduction",
]
