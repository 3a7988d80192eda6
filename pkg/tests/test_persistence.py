# tests/test_persistence.py

import json

import pytest

from services.persistence import DEFAULT_SETTINGS, ConfigError, SettingsManager, resolve_max_iters


@pytest.fixture
def manager(tmp_path, monkeypatch):
    monkeypatch.setenv("QMAPK_HOME", str(tmp_path))
    monkeypatch.delenv("QMAPK_MAX_ITERS", raising=False)
    return SettingsManager()


def test_missing_file_gives_defaults_without_writing(manager, tmp_path):
    assert manager.load_settings() == DEFAULT_SETTINGS
    assert manager.max_iters() == 1000
    assert manager.probe_samples() == 8
    assert manager.batch_workers() == 4
    assert manager.output_format() == "json"
    assert not (tmp_path / "settings.json").exists()


def test_save_merges_and_keeps_backup(manager, tmp_path):
    manager.save({"reduction": {"max_iters": 50}})
    assert manager.max_iters() == 50
    assert manager.probe_samples() == 8

    manager.save({"probe": {"samples": 3}})
    assert (tmp_path / "settings.json.bak").exists()
    assert manager.max_iters() == 50
    assert manager.probe_samples() == 3


def test_environment_overrides_settings(manager, monkeypatch):
    manager.save({"reduction": {"max_iters": 50}})
    monkeypatch.setenv("QMAPK_MAX_ITERS", "7")
    assert manager.max_iters() == 7
    assert resolve_max_iters() == 7
    assert resolve_max_iters(3) == 3

    monkeypatch.setenv("QMAPK_MAX_ITERS", "many")
    with pytest.raises(ConfigError):
        manager.max_iters()


def test_version_zero_file_is_migrated(manager, tmp_path):
    (tmp_path / "settings.json").write_text(json.dumps({"max_iters": 12, "workers": 2}), encoding="utf-8")
    settings = manager.load_settings()
    assert settings["version"] == 1
    assert settings["reduction"]["max_iters"] == 12
    assert settings["batch"]["workers"] == 2


def test_corrupted_file_falls_back_to_defaults(manager, tmp_path, caplog):
    (tmp_path / "settings.json").write_text("{oops", encoding="utf-8")
    with caplog.at_level("WARNING"):
        assert manager.max_iters() == 1000
    assert "unreadable" in caplog.text


def test_schema_violation_is_a_config_error(manager):
    pytest.importorskip("jsonschema")
    with pytest.raises(ConfigError):
        manager.save({"output": {"format": "yaml"}})
