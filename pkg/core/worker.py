# core/worker.py
from __future__ import annotations

import logging
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Tuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class BatchOutcome:
    """Result of one batch item: either a value or a captured error."""

    label: str
    ok: bool
    value: Any = None
    error: Optional[str] = None
    error_type: Optional[str] = None
    trace: Optional[str] = None


def _run_one(fn: Callable[[Any], Any], label: str, item: Any) -> BatchOutcome:
    try:
        return BatchOutcome(label=label, ok=True, value=fn(item))
    except Exception as exc:
        trace = "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))
        logger.debug("run_batch: %s failed\n%s", label, trace)
        return BatchOutcome(
            label=label,
            ok=False,
            error=str(exc),
            error_type=type(exc).__name__,
            trace=trace,
        )


def run_batch(
    fn: Callable[[Any], Any],
    items: Iterable[Tuple[str, Any]],
    *,
    workers: int = 4,
) -> List[BatchOutcome]:
    """
    Apply fn to every (label, item) pair on a thread pool.

    Outcomes come back in input order; an exception in one item never
    cancels the others.
    """
    items = list(items)
    if workers < 1:
        raise ValueError(f"run_batch: workers must be >= 1, got {workers}")
    if workers == 1 or len(items) <= 1:
        outcomes = [_run_one(fn, label, item) for label, item in items]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
            futures = [pool.submit(_run_one, fn, label, item) for label, item in items]
            outcomes = [f.result() for f in futures]
    failed = sum(1 for o in outcomes if not o.ok)
    logger.info("run_batch: %d items, %d failed", len(outcomes), failed)
    return outcomes


__all__ = ["BatchOutcome", "run_batch"]
