import pytest
import yaml

from zforce import config
from zforce.config import (
    AppConfig,
    CacheConfig,
    ConfigManager,
    SweepSpec,
    TrainConfig,
    default_workers,
    get_config_manager,
    load_sweep_spec,
    load_train_config,
)
from zforce.errors import ConfigError


class TestTrainConfigFile:
    def test_overrides_defaults(self, write_file):
        cfg = load_train_config(write_file("train.yaml", "episodes: 10\nhidden: [8, 4]\nlr_actor: 0.01\n"))
        assert cfg.episodes == 10
        assert cfg.hidden == (8, 4)
        assert cfg.lr_actor == 0.01
        assert cfg.gamma == TrainConfig().gamma

    def test_base_is_not_mutated(self, write_file):
        base = TrainConfig(seed=5)
        cfg = load_train_config(write_file("train.yaml", "episodes: 3\n"), base)
        assert cfg.seed == 5
        assert base.episodes == 2000

    def test_integer_accepted_for_float_field(self, write_file):
        assert load_train_config(write_file("t.yaml", "gamma: 1\n")).gamma == 1.0

    @pytest.mark.parametrize(
        "text, message",
        [
            ("epochs: 3\n", "unknown config key"),
            ("episodes: ten\n", "expected an integer"),
            ("mask_derived: 1\n", "expected a boolean"),
            ("gamma: 1.5\n", "gamma"),
            ("hidden: []\n", "hidden"),
            ("- 1\n- 2\n", "mapping"),
            ("episodes: [1\n", "malformed"),
        ],
    )
    def test_rejects_bad_files(self, write_file, text, message):
        with pytest.raises(ConfigError, match=message):
            load_train_config(write_file("bad.yaml", text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_train_config(tmp_path / "absent.yaml")

    def test_errors_exit_with_invalid_input_code(self):
        assert ConfigError("x").exit_code == 2


class TestSweepSpecFile:
    def test_nested_train_section(self, write_file):
        text = (
            "n_values: [8, 10]\np_values: [0.1]\nseeds: 2\n"
            "methods: [greedy, exact]\ntrain:\n  episodes: 5\n"
        )
        spec = load_sweep_spec(write_file("sweep.yaml", text))
        assert spec.n_values == (8, 10)
        assert spec.p_values == (0.1,)
        assert spec.methods == ("greedy", "exact")
        assert spec.train.episodes == 5

    @pytest.mark.parametrize(
        "text",
        [
            "methods: [annealing]\n",
            "n_values: []\n",
            "p_values: [1.5]\n",
            "seeds: 0\n",
            "train:\n  gamma: -1\n",
        ],
    )
    def test_invalid_spec(self, write_file, text):
        with pytest.raises(ConfigError):
            load_sweep_spec(write_file("sweep.yaml", text))

    def test_defaults_are_valid(self):
        assert SweepSpec().validate().methods == ("greedy",)


class TestDefaultWorkers:
    def test_unset(self):
        assert default_workers() == 1

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv("ZFORCE_WORKERS", "3")
        assert default_workers() == 3

    @pytest.mark.parametrize("raw", ["many", "0"])
    def test_invalid(self, monkeypatch, raw):
        monkeypatch.setenv("ZFORCE_WORKERS", raw)
        with pytest.raises(ConfigError):
            default_workers()


class TestConfigManager:
    def test_creates_default_file(self, tmp_path):
        manager = ConfigManager(tmp_path / "cfg")
        assert manager.config_file.exists()
        data = yaml.safe_load(manager.config_file.read_text())
        assert data["train"]["episodes"] == 2000
        assert data["sweep"]["methods"] == ["greedy"]
        assert data["logging"]["level"] == "INFO"

    def test_loads_user_overrides_leniently(self, tmp_path):
        cfg_dir = tmp_path / "cfg"
        cfg_dir.mkdir()
        (cfg_dir / "config.yaml").write_text("train:\n  episodes: 42\ncolour: blue\n")
        manager = ConfigManager(cfg_dir)
        assert manager.get_config().train.episodes == 42

    def test_broken_file_falls_back_to_defaults(self, tmp_path):
        cfg_dir = tmp_path / "cfg"
        cfg_dir.mkdir()
        (cfg_dir / "config.yaml").write_text("train: {episodes: -3}\n")
        assert ConfigManager(cfg_dir).get_config() == AppConfig()

    def test_invalid_cache_size_falls_back_to_defaults(self, tmp_path):
        cfg_dir = tmp_path / "cfg"
        cfg_dir.mkdir()
        (cfg_dir / "config.yaml").write_text("cache:\n  max_entries: 0\n")
        assert ConfigManager(cfg_dir).get_config().cache == CacheConfig()

    def test_log_level_from_environment(self, tmp_path, monkeypatch):
        manager = ConfigManager(tmp_path / "cfg")
        assert manager.get_log_level() == "INFO"
        monkeypatch.setenv("ZFORCE_LOG_LEVEL", "debug")
        assert manager.get_log_level() == "DEBUG"

    def test_custom_log_path(self, tmp_path):
        cfg_dir = tmp_path / "cfg"
        cfg_dir.mkdir()
        (cfg_dir / "config.yaml").write_text(f"logging:\n  file_path: {tmp_path / 'z.log'}\n")
        assert ConfigManager(cfg_dir).get_config().logging.file_path == str(tmp_path / "z.log")

    def test_global_manager_uses_xdg_dir(self, tmp_path):
        manager = get_config_manager()
        assert manager is get_config_manager()
        assert manager.config_file == tmp_path / "xdg_config" / "zforce" / "config.yaml"
        assert config._config_manager is manager
