# services/persistence.py
from __future__ import annotations

import copy
import json
import logging
import os
import shutil
import tempfile
import threading
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Union

try:
    import jsonschema  # type: ignore
except Exception:  # jsonschema is optional
    jsonschema = None  # type: ignore

logger = logging.getLogger(__name__)

SETTINGS_VERSION = 1
SETTINGS_FILE = "settings.json"
HOME_ENV = "QMAPK_HOME"
MAX_ITERS_ENV = "QMAPK_MAX_ITERS"

DEFAULT_SETTINGS: dict[str, Any] = {
    "version": SETTINGS_VERSION,
    "reduction": {"max_iters": 1000},
    "probe": {"samples": 8},
    "batch": {"workers": 4},
    "output": {"format": "json"},
}

SETTINGS_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "version": {"type": "integer"},
        "reduction": {
            "type": "object",
            "properties": {"max_iters": {"type": "integer", "minimum": 1}},
        },
        "probe": {
            "type": "object",
            "properties": {"samples": {"type": "integer", "minimum": 1}},
        },
        "batch": {
            "type": "object",
            "properties": {"workers": {"type": "integer", "minimum": 1}},
        },
        "output": {
            "type": "object",
            "properties": {"format": {"enum": ["json", "pretty"]}},
        },
    },
}


def _expand(path: Union[str, Path]) -> Path:
    return Path(os.path.expanduser(str(path))).resolve()


def default_home() -> Path:
    env = os.environ.get(HOME_ENV)
    return _expand(env) if env else _expand(Path.home() / ".qmapk")


class ConfigError(RuntimeError):
    pass


class SettingsManager:
    """
    JSON settings persistence:
    - Atomic writes (tempfile + os.replace), .bak of the previous file on save
    - Optional schema validation (jsonschema, when installed)
    - Version stamp + migration hook
    - Thread-safe across calls

    Loading never creates files; a missing settings file yields the defaults.

    Typical use:
        settings = SettingsManager()
        cap = settings.max_iters()
        settings.save({"reduction": {"max_iters": 50}})
    """

    def __init__(self, base_dir: Optional[Union[str, Path]] = None):
        self._lock = threading.RLock()
        self.base_dir = _expand(base_dir) if base_dir is not None else default_home()

    # ------------- high-level helpers -------------

    def load_settings(self) -> dict[str, Any]:
        return self.load(
            SETTINGS_FILE,
            default=DEFAULT_SETTINGS,
            version=SETTINGS_VERSION,
            migrate=self._migrate_settings,
        )

    def max_iters(self) -> int:
        """Iteration cap of the DVR loop: QMAPK_MAX_ITERS, else the settings file."""
        env = os.environ.get(MAX_ITERS_ENV)
        if env:
            try:
                value = int(env)
            except ValueError as e:
                raise ConfigError(f"{MAX_ITERS_ENV}={env!r} is not an integer") from e
            if value < 1:
                raise ConfigError(f"{MAX_ITERS_ENV} must be >= 1, got {value}")
            return value
        return int(self.load_settings()["reduction"]["max_iters"])

    def probe_samples(self) -> int:
        return int(self.load_settings()["probe"]["samples"])

    def batch_workers(self) -> int:
        return int(self.load_settings()["batch"]["workers"])

    def output_format(self) -> str:
        return str(self.load_settings()["output"]["format"])

    # ------------- generic API -------------

    def load(
        self,
        filename: str,
        *,
        default: dict[str, Any],
        version: int,
        migrate: Optional[Callable[[dict, int, int], dict]] = None,
        on_corruption: str = "defaults",  # or "raise"
    ) -> dict[str, Any]:
        """
        Read a JSON file, merge it over the defaults, migrate and validate.

        - default: returned (as a copy) when the file is missing or unreadable
        - version: current schema version
        - migrate: fn(old_data, old_version, new_version) -> new_data
        - on_corruption: "defaults" | "raise"
        """
        path = self._path(filename)
        with self._lock:
            if not path.exists():
                return copy.deepcopy(default)

            try:
                data = self._read_json(path)
            except Exception as e:
                if on_corruption == "raise":
                    raise ConfigError(f"Failed to read {path}: {e}") from e
                logger.warning("SettingsManager.load: unreadable %s (%s); using defaults", path, e)
                return copy.deepcopy(default)

            if not isinstance(data, dict):
                raise ConfigError(f"{path}: settings must be a JSON object")

            old_version = int(data.get("version", 0))
            if old_version != version:
                if migrate is None:
                    raise ConfigError(f"{path}: version {old_version} != {version} and no migration")
                data = migrate(data, old_version, version)
                data["version"] = version

            if jsonschema is not None:
                try:
                    jsonschema.validate(instance=data, schema=SETTINGS_SCHEMA)  # type: ignore
                except jsonschema.ValidationError as e:  # type: ignore
                    raise ConfigError(f"{path}: {e.message}") from e

            return _merge(default, data)

    def save(self, data: Any, filename: str = SETTINGS_FILE) -> Path:
        """Merge data over the current settings and write atomically (backup kept as .bak)."""
        payload = asdict(data) if is_dataclass(data) else data
        if not isinstance(payload, dict):
            raise ConfigError("Only dict (or dataclass) settings can be saved.")
        with self._lock:
            merged = _merge(self.load_settings(), payload)
            merged["version"] = SETTINGS_VERSION
            if jsonschema is not None:
                try:
                    jsonschema.validate(instance=merged, schema=SETTINGS_SCHEMA)  # type: ignore
                except jsonschema.ValidationError as e:  # type: ignore
                    raise ConfigError(f"settings: {e.message}") from e
            path = self._path(filename)
            self._atomic_write(path, merged, make_backup=True)
            return path

    # ------------- internal utils -------------

    def _path(self, filename: str) -> Path:
        return self.base_dir / filename

    def _read_json(self, path: Path) -> Any:
        return json.loads(path.read_text(encoding="utf-8"))

    def _atomic_write(self, path: Path, data: Any, make_backup: bool = False) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=path.stem + ".", suffix=".tmp", dir=str(path.parent))
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2)
                f.flush()
                os.fsync(f.fileno())
            if path.exists() and make_backup:
                backup = path.with_suffix(path.suffix + ".bak")
                shutil.copy2(path, backup)
            os.replace(tmp, path)
        finally:
            try:
                if os.path.exists(tmp):
                    os.remove(tmp)
            except Exception:
                pass

    # ------------- migrations -------------

    def _migrate_settings(self, old: dict, old_v: int, new_v: int) -> dict:
        data = dict(old)
        # v0 files kept the cap at top level
        if "max_iters" in data:
            data.setdefault("reduction", {})["max_iters"] = data.pop("max_iters")
        if "workers" in data:
            data.setdefault("batch", {})["workers"] = data.pop("workers")
        data["version"] = new_v
        return data


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def resolve_max_iters(explicit: Optional[int] = None) -> int:
    """CLI flag, then QMAPK_MAX_ITERS, then the settings file, then 1000."""
    if explicit is not None:
        if explicit < 1:
            raise ConfigError(f"max_iters must be >= 1, got {explicit}")
        return explicit
    return SettingsManager().max_iters()


__all__ = [
    "ConfigError",
    "SettingsManager",
    "DEFAULT_SETTINGS",
    "default_home",
    "resolve_max_iters",
]
