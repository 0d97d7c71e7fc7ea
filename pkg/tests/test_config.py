import pytest

from pyudtfs import config


def test_defaults(monkeypatch, tmp_path):
    """Test default settings when no file is found"""
    monkeypatch.delenv("PYUDTFS_CONFIG", raising=False)
    settings = config.load_settings(default_path=str(tmp_path / "missing.yaml"))
    assert settings == config.Settings()
    assert settings.get_description()["universe_cap"] == 512


def test_file_and_environment(monkeypatch, tmp_path):
    """Test values from a YAML file and environment overrides"""
    path = tmp_path / "pyudtfs.yaml"
    path.write_text("node_budget: 1000\njobs: 2\n")
    monkeypatch.setenv("PYUDTFS_CONFIG", str(path))
    monkeypatch.setenv("PYUDTFS_JOBS", "4")
    settings = config.load_settings()
    assert settings.node_budget == 1000
    assert settings.jobs == 4


def test_unknown_settings(monkeypatch, tmp_path):
    """Test unknown keys are rejected"""
    path = tmp_path / "pyudtfs.yaml"
    path.write_text("universe: 3\n")
    monkeypatch.setenv("PYUDTFS_CONFIG", str(path))
    with pytest.raises(ValueError):
        config.load_settings()


def test_process_settings():
    """Test replacing the process-wide settings"""
    previous = config.get_settings()
    try:
        config.set_settings(config.Settings(universe_cap=3))
        assert config.get_settings().universe_cap == 3
    finally:
        config.set_settings(previous)


def test_resource_limit_message():
    """Test the message names the cap and its value"""
    error = config.ResourceLimitError("tuple_cap", 10, "too many")
    assert str(error) == "resource cap tuple_cap=10 exceeded: too many"
    assert error.cap == "tuple_cap" and error.value == 10
