import pytest

from zforce import config
from zforce.cache import DEFAULT_MAX_ENTRIES, closure_cache
from zforce.pattern_graph import out_star, path_graph


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Keep config/log files inside tmp and start every test with a cold cache."""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg_config"))
    monkeypatch.setenv("XDG_DATA_HOME", str(tmp_path / "xdg_data"))
    monkeypatch.delenv("ZFORCE_WORKERS", raising=False)
    monkeypatch.delenv("ZFORCE_LOG_LEVEL", raising=False)
    monkeypatch.setattr(config, "_config_manager", None)
    closure_cache.invalidate()
    closure_cache.resize(DEFAULT_MAX_ENTRIES)
    closure_cache.reset_stats()
    yield


@pytest.fixture
def path3():
    """v0 -> v1 -> v2, solid edges, zero diagonal."""
    return path_graph(3)


@pytest.fixture
def star3():
    """Hub 0 with solid edges to leaves 1, 2, 3."""
    return out_star(3)


@pytest.fixture
def write_file(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write
