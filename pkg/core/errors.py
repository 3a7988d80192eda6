# core/errors.py
from __future__ import annotations


class QmapError(ValueError):
    """Base class for every domain error raised by the calculus."""


class DegenerateInput(QmapError):
    pass


class TargetViolation(QmapError):
    pass


class NotFanoError(QmapError):
    pass


class PreconditionViolated(QmapError):
    pass


class ReductionInvariantError(PreconditionViolated):
    """The bad point of a DVR step is not unique or not rational."""


class NonTermination(QmapError):
    pass


class Unsupported(QmapError):
    pass


class DegenerateModel(QmapError):
    pass


__all__ = [
    "QmapError",
    "DegenerateInput",
    "TargetViolation",
    "NotFanoError",
    "PreconditionViolated",
    "ReductionInvariantError",
    "NonTermination",
    "Unsupported",
    "DegenerateModel",
]
