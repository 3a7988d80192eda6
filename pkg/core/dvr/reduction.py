# core/dvr/reduction.py
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from core.debug import DebugSink
from core.errors import DegenerateInput, NonTermination, PreconditionViolated, ReductionInvariantError, Unsupported
from core.dvr.family import (
    DvrQuasimapFamily,
    base_change_family,
    family_fiber,
    generic_classify,
    shift_family,
    special_fiber,
    transform_family,
)
from core.forms.binary_forms import MobiusMatrix, RatLike, RationalPoint, as_rat
from core.quasimap.isomorphism import are_isomorphic, matches_via
from core.quasimap.quasimap import invariants, log_twisted_boundary
from core.quasimap.stability import classify, delta
from services.persistence import resolve_max_iters

logger = logging.getLogger(__name__)

Point = Tuple[int, int]


@dataclass(frozen=True, slots=True)
class ReductionStep:
    """
    One elementary transformation centered at the bad point of the special fiber.

    The substitution applied is (x, y) -> translation @ diag(s^shift, 1), where
    s is the parameter after this step's base change. s_power re-expresses
    the shift in the final parameter of the report.
    """

    center: RationalPoint
    multiplicity: Fraction
    slope: Fraction
    base_change: int
    shift: int
    content: Fraction
    exponent: int
    translation: MobiusMatrix
    s_power: int = 0

    def matrix(self) -> Tuple[Tuple[Tuple[Fraction, int], Tuple[Fraction, int]], ...]:
        """Entries as (coefficient, power of the final s)."""
        M = self.translation
        return (
            ((M.a, self.s_power), (M.b, 0)),
            ((M.c, self.s_power), (M.d, 0)),
        )

    def matrix_at(self, s0: Fraction) -> MobiusMatrix:
        scale = s0**self.s_power
        M = self.translation
        return MobiusMatrix(M.a * scale, M.b, M.c * scale, M.d)


@dataclass(frozen=True, slots=True)
class ReductionReport:
    base_change_exponent: int
    steps: Tuple[ReductionStep, ...]
    result: DvrQuasimapFamily
    iterations: int

    @property
    def total_content(self) -> Fraction:
        return sum((st.content for st in self.steps), Fraction(0))

    def cumulative_matrix(self, s0: RatLike) -> MobiusMatrix:
        """Substitution carrying the input fiber at t = s0^e to the result fiber at s0."""
        s0 = as_rat(s0)
        M = MobiusMatrix.identity()
        for st in self.steps:
            M = M @ st.matrix_at(s0)
        return M

    def step_frame(self) -> pd.DataFrame:
        rows = [
            {
                "step": i + 1,
                "center": str(st.center),
                "multiplicity": st.multiplicity,
                "slope": st.slope,
                "base_change": st.base_change,
                "shift": st.shift,
                "s_power": st.s_power,
                "content": st.content,
            }
            for i, st in enumerate(self.steps)
        ]
        return pd.DataFrame(
            rows,
            columns=["step", "center", "multiplicity", "slope", "base_change", "shift", "s_power", "content"],
        )


# =============================================================================
# Newton data
# =============================================================================

def _lowest_x_order(points: Sequence[Point], a: Fraction) -> int:
    """x-order at [0:1] of the special fiber after x -> t^a x and t-content removal."""
    best = min(nu + a * k for k, nu in points)
    return min(k for k, nu in points if nu + a * k == best)


def _slopes(points: Sequence[Point]) -> List[Fraction]:
    out = []
    for k1, nu1 in points:
        for k2, nu2 in points:
            if k1 < k2 and nu1 > nu2:
                out.append(Fraction(nu1 - nu2, k2 - k1))
    return out


def _section_points(F: DvrQuasimapFamily) -> List[Point]:
    return [pt for s in F.sections for pt in s.newton_points()]


def _multiplicity_after(F: DvrQuasimapFamily, a: Fraction) -> Fraction:
    total = F.weight * _lowest_x_order(_section_points(F), a)
    for h, c in F.boundary:
        total += c * _lowest_x_order(h.newton_points(), a)
    return total


def optimal_slope(F: DvrQuasimapFamily) -> Fraction:
    """
    Least a > 0 such that x -> t^a x brings the multiplicity at [0:1] down to mu/2.

    The multiplicity is a non-increasing step function of a that only jumps
    at slopes of the t-adic Newton polygons of the section union and of each
    boundary form, so the minimum is attained at one of those slopes.
    """
    half = F.mu / 2
    candidates = set(_slopes(_section_points(F)))
    for h, _ in F.boundary:
        candidates.update(_slopes(h.newton_points()))
    for a in sorted(candidates):
        if _multiplicity_after(F, a) <= half:
            logger.debug("optimal_slope: a=%s among %d candidates", a, len(candidates))
            return a
    raise ReductionInvariantError(
        "optimal_slope: no shift brings the bad point down to mu/2; the generic fiber is not semistable there"
    )


# =============================================================================
# Loop
# =============================================================================

def _bad_cluster(F: DvrQuasimapFamily) -> Optional[Tuple[RationalPoint, Fraction]]:
    q0 = special_fiber(F)
    half = invariants(q0).mu / 2
    bad = [(cl, c) for cl, c in log_twisted_boundary(q0) if c > half]
    if not bad:
        return None
    if len(bad) > 1:
        raise ReductionInvariantError(
            f"semistable_reduction: {len(bad)} clusters exceed mu/2={half}: {[str(cl) for cl, _ in bad]}"
        )
    cl, c = bad[0]
    if cl.degree != 1:
        raise ReductionInvariantError(
            f"semistable_reduction: bad cluster {cl} of degree {cl.degree} is not a rational point"
        )
    return cl.point, c


def semistable_reduction(
    F: DvrQuasimapFamily,
    *,
    max_iters: Optional[int] = None,
    sink: Optional[DebugSink] = None,
    label: str = "family",
) -> ReductionReport:
    """
    Replace the special fiber of F by a K-semistable one, keeping the generic fiber.

    Parameters
    ----------
    F : DvrQuasimapFamily
        Family whose generic fiber is semistable.
    max_iters : int, optional
        Iteration cap; defaults to QMAPK_MAX_ITERS or the settings file (1000).
    sink : DebugSink, optional
        Receives the step log when enabled.

    Returns
    -------
    ReductionReport
        Base change exponent e (t = s^e), the step log and the reduced family in s.
    """
    generic = generic_classify(F)
    if not generic.is_semistable:
        raise PreconditionViolated(f"semistable_reduction: generic fiber is {generic.kind.value}")
    cap = resolve_max_iters(max_iters)

    current = F
    exponent = 1
    steps: List[ReductionStep] = []
    iterations = 0
    while True:
        found = _bad_cluster(current)
        if found is None:
            break
        if iterations >= cap:
            raise NonTermination(f"semistable_reduction: no semistable special fiber after {cap} iterations")
        iterations += 1
        center, mult = found

        translation = MobiusMatrix.moving_to_origin(center)
        current = transform_family(current, translation)
        slope = optimal_slope(current)
        q, a = slope.denominator, slope.numerator
        current = base_change_family(current, q)
        exponent *= q
        current, extracted = shift_family(current, a)
        if extracted <= 0:
            raise ReductionInvariantError(f"semistable_reduction: step {iterations} extracted no t-content")

        steps.append(
            ReductionStep(
                center=center,
                multiplicity=mult,
                slope=slope,
                base_change=q,
                shift=a,
                content=Fraction(extracted, exponent),
                exponent=exponent,
                translation=translation,
            )
        )
        logger.info(
            "semistable_reduction: step %d center=%s mult=%s a=%s e=%d",
            iterations, center, mult, slope, exponent,
        )

    steps = [replace(st, s_power=st.shift * (exponent // st.exponent)) for st in steps]
    final = classify(special_fiber(current))
    if not final.is_semistable:
        raise ReductionInvariantError(f"semistable_reduction: special fiber ended {final.kind.value}")

    report = ReductionReport(exponent, tuple(steps), current, iterations)
    if sink is not None:
        sink.record_frame("reduction", label, report.step_frame())
    logger.info("semistable_reduction: done, e=%d, %d steps, %s", exponent, len(steps), final.kind.value)
    return report


# =============================================================================
# Generic-fiber preservation
# =============================================================================

def sample_parameters(n: int = 5, seed: int = 0) -> List[Fraction]:
    rng = random.Random(seed)
    out: List[Fraction] = []
    while len(out) < n:
        s0 = Fraction(rng.randint(1, 7), rng.randint(1, 4)) * rng.choice((1, -1))
        if s0 not in out:
            out.append(s0)
    return out


def generic_fibers_match(
    F: DvrQuasimapFamily,
    report: ReductionReport,
    params: Optional[Sequence[RatLike]] = None,
) -> bool:
    """
    Compare the result fiber at s0 with the input fiber at t = s0^e.

    The cumulative step matrix must carry one onto the other; the fixed-part
    degree, delta and the classification must agree; and where the
    isomorphism search can decide, it must agree too. Parameters at which a
    fiber degenerates are skipped.
    """
    e = report.base_change_exponent
    checked = 0
    for s0 in (params if params is not None else sample_parameters()):
        s0 = as_rat(s0)
        if s0 == 0:
            continue
        try:
            before = family_fiber(F, s0**e)
            after = family_fiber(report.result, s0)
        except DegenerateInput:
            logger.debug("generic_fibers_match: fiber at s=%s degenerates, skipped", s0)
            continue
        checked += 1
        if not matches_via(before, after, report.cumulative_matrix(s0)):
            logger.info("generic_fibers_match: matrix check failed at s=%s", s0)
            return False
        if invariants(before).fixed_degree != invariants(after).fixed_degree:
            return False
        if delta(before) != delta(after) or classify(before).kind != classify(after).kind:
            return False
        try:
            if not are_isomorphic(before, after):
                return False
        except Unsupported:
            pass
    return checked > 0


__all__ = [
    "ReductionStep",
    "ReductionReport",
    "optimal_slope",
    "semistable_reduction",
    "sample_parameters",
    "generic_fibers_match",
]
