# core/debug.py
from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

logger = logging.getLogger(__name__)

_UNSAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _slug(text: str) -> str:
    """One path component from an input file stem or command name."""
    return _UNSAFE_RE.sub("-", str(text)).strip("-.")[:96] or "item"


@dataclass(slots=True)
class DebugSink:
    """
    Per-run JSON artifacts behind --debug-dir: the step log of each DVR
    reduction, the fiber table of each nefness check and the outcome list of
    a batch. A sink without a root writes nothing.

      <root>/<stamp>_<command>/<kind>/<label>.json
      <root>/<stamp>_<command>/manifest.json
    """

    root: Optional[Path] = None
    command: str = "qmapk"
    stamp: str = field(default_factory=lambda: datetime.now().strftime("%Y%m%d_%H%M%S"))
    entries: List[Dict[str, str]] = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def enabled(self) -> bool:
        return self.root is not None

    @property
    def run_dir(self) -> Optional[Path]:
        if self.root is None:
            return None
        return Path(self.root) / f"{self.stamp}_{_slug(self.command)}"

    def record_frame(self, kind: str, label: str, frame: pd.DataFrame) -> Optional[Path]:
        """Write a report table; every cell as text so Fractions keep their num/den form."""
        rows = frame.astype(str).to_dict(orient="records")
        return self._write(kind, label, {"label": label, "columns": [str(c) for c in frame.columns], "rows": rows})

    def record_items(self, kind: str, label: str, items: Sequence[Dict[str, Any]]) -> Optional[Path]:
        return self._write(kind, label, {"label": label, "count": len(items), "items": list(items)})

    def _write(self, kind: str, label: str, payload: Dict[str, Any]) -> Optional[Path]:
        run_dir = self.run_dir
        if run_dir is None:
            return None
        path = run_dir / _slug(kind) / f"{_slug(label)}.json"
        # batch workers share one sink
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(payload, indent=2, default=str) + "\n", encoding="utf-8")
            self.entries.append({"kind": kind, "label": label, "path": str(path.relative_to(run_dir))})
            manifest = {"command": self.command, "stamp": self.stamp, "artifacts": self.entries}
            (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        logger.debug("DebugSink: wrote %s", path)
        return path


__all__ = ["DebugSink"]
