"""
Configuration management for zforce.

Settings live in nested dataclasses with defaults. A user file at
$XDG_CONFIG_HOME/zforce/config.yaml (default ~/.config/zforce/config.yaml)
overrides them section by section; a missing file is created with the
defaults and a broken one is logged and ignored.

Files named explicitly on the command line (`train --config`, `sweep SPEC`)
are loaded strictly: unknown keys, wrong types and out-of-range values raise
ConfigError.

Environment:
- ZFORCE_LOG_LEVEL: overrides the configured log level
- ZFORCE_WORKERS: process pool size for sweeps and exact search
"""

import logging
import os
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from .cache import DEFAULT_MAX_ENTRIES
from .errors import ConfigError

logger = logging.getLogger(__name__)

METHODS = ("greedy", "exact", "rl")


@dataclass
class LogConfig:
    """Logging configuration."""

    level: str = "INFO"
    file_path: Optional[str] = None  # None for default
    max_size_mb: int = 10
    backup_count: int = 5


@dataclass
class CacheConfig:
    """Capacity of the process-wide closure cache."""

    max_entries: int = DEFAULT_MAX_ENTRIES

    def validate(self) -> "CacheConfig":
        if self.max_entries < 1:
            raise ConfigError(f"cache.max_entries must be positive, got {self.max_entries}")
        return self


@dataclass
class TrainConfig:
    """Actor-critic training settings."""

    episodes: int = 2000
    gamma: float = 0.99
    lr_actor: float = 1e-3
    lr_critic: float = 1e-3
    seed: int = 0
    hidden: Tuple[int, ...] = (32, 32)
    degree_channels: bool = True
    mask_derived: bool = False
    eval_every: int = 20
    grad_clip: float = 10.0
    batch_episodes: int = 1

    def validate(self) -> "TrainConfig":
        if self.episodes < 1:
            raise ConfigError(f"episodes must be positive, got {self.episodes}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.lr_actor <= 0.0 or self.lr_critic <= 0.0:
            raise ConfigError("learning rates must be positive")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigError(f"hidden widths must be positive, got {list(self.hidden)}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be positive, got {self.eval_every}")
        if self.grad_clip <= 0.0:
            raise ConfigError(f"grad_clip must be positive, got {self.grad_clip}")
        if self.batch_episodes < 1:
            raise ConfigError(f"batch_episodes must be positive, got {self.batch_episodes}")
        return self


@dataclass
class SweepSpec:
    """ER experiment grid: every (n, p, seed) cell runs every method."""

    n_values: Tuple[int, ...] = (20, 40, 60, 80, 100)
    p_values: Tuple[float, ...] = (0.04, 0.05, 0.1, 0.15, 0.2, 0.3)
    seeds: int = 5
    base_seed: int = 0
    methods: Tuple[str, ...] = ("greedy",)
    node_budget: int = 15
    time_budget: float = 60.0
    arbitrary_fraction: float = 0.0
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> "SweepSpec":
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError(f"n_values must be positive, got {list(self.n_values)}")
        if not self.p_values or any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ConfigError(f"p_values must lie in [0, 1], got {list(self.p_values)}")
        if self.seeds < 1:
            raise ConfigError(f"seeds must be positive, got {self.seeds}")
        unknown = [m for m in self.methods if m not in METHODS]
        if not self.methods or unknown:
            raise ConfigError(f"methods must be drawn from {list(METHODS)}, got {list(self.methods)}")
        if not 0.0 <= self.arbitrary_fraction <= 1.0:
            raise ConfigError("arbitrary_fraction must lie in [0, 1]")
        if self.node_budget < 1 or self.time_budget <= 0.0:
            raise ConfigError("budgets must be positive")
        self.train.validate()
        return self


@dataclass
class AppConfig:
    """Main application configuration."""

    logging: LogConfig = field(default_factory=LogConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)


def _coerce(key: str, default: Any, value: Any) -> Any:
    """Convert a YAML value to the type of the field's default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        if not default:
            return tuple(value)
        return tuple(_coerce(f"{key}[{i}]", default[0], v) for i, v in enumerate(value))
    if default is None:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    return value


def _merge_dataclass(obj: Any, updates: Dict[str, Any], strict: bool, prefix: str = "") -> None:
    """Merge updates into dataclass object, recursing into nested sections."""
    if not isinstance(updates, dict):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping, got {updates!r}")
    known = {f.name for f in fields(obj)}
    for key, value in updates.items():
        path = f"{prefix}{key}"
        if key not in known:
            if strict:
                raise ConfigError(f"unknown config key {path!r}")
            logger.warning(f"Ignoring unknown config key {path!r}")
            continue
        current = getattr(obj, key)
        if is_dataclass(current):
            _merge_dataclass(current, value, strict, prefix=f"{path}.")
        else:
            setattr(obj, key, _coerce(path, current, value))


def _config_to_dict(obj: Any) -> Dict[str, Any]:
    """Convert config dataclass to a YAML-friendly dictionary."""
    out: Dict[str, Any] = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        if is_dataclass(value):
            out[f.name] = _config_to_dict(value)
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def _read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def load_train_config(path: Union[str, Path], base: Optional[TrainConfig] = None) -> TrainConfig:
    """Strictly load a TrainConfig file over `base` (defaults when None)."""
    cfg = replace(base) if base else TrainConfig()
    _merge_dataclass(cfg, _read_yaml(path), strict=True)
    return cfg.validate()


def load_sweep_spec(path: Union[str, Path]) -> SweepSpec:
    spec = SweepSpec()
    _merge_dataclass(spec, _read_yaml(path), strict=True)
    return spec.validate()


def default_workers() -> int:
    raw = os.environ.get("ZFORCE_WORKERS")
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"ZFORCE_WORKERS must be an integer, got {raw!r}")
    if workers < 1:
        raise ConfigError(f"ZFORCE_WORKERS must be positive, got {workers}")
    return workers


def default_config_dir() -> Path:
    xdg = os.environ.get("XDG_CONFIG_HOME")
    base = Path(xdg) if xdg else Path.home() / ".config"
    return base / "zforce"


class ConfigManager:
    """Configuration manager with YAML file support."""

    def __init__(self, config_dir: Optional[Path] = None):
        self.config_dir = Path(config_dir) if config_dir else default_config_dir()
        self.config_file = self.config_dir / "config.yaml"
        self._config: AppConfig = AppConfig()
        self.load_config()

    def load_config(self) -> None:
        """Load configuration from YAML file."""
        try:
            if self.config_file.exists():
                user_config = _read_yaml(self.config_file)
                config = AppConfig()
                _merge_dataclass(config, user_config, strict=False)
                config.cache.validate()
                config.train.validate()
                config.sweep.validate()
                self._config = config
                logger.debug(f"Loaded configuration from {self.config_file}")
            else:
                self.save_config()
                logger.info(f"Created default configuration at {self.config_file}")
        except ConfigError as e:
            logger.error(f"Failed to load config: {e}, using defaults")
            self._config = AppConfig()

    def save_config(self) -> None:
        """Save current configuration to YAML file."""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, "w") as f:
                yaml.safe_dump(_config_to_dict(self._config), f, default_flow_style=False, indent=2)
            logger.debug(f"Saved configuration to {self.config_file}")
        except OSError as e:
            logger.error(f"Failed to save config: {e}")

    def get_config(self) -> AppConfig:
        return self._config

    def get_log_level(self) -> str:
        return os.environ.get("ZFORCE_LOG_LEVEL", self._config.logging.level).upper()


_config_manager: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """Process-wide ConfigManager, created on first use."""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager
