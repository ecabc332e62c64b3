"""
zforce - minimum input sets for strong structural controllability.

Given the zero/nonzero/arbitrary pattern of a linear network, zforce finds
small sets of input nodes that make every realization of the pattern
controllable. The test is graph-theoretic: an input set works iff the zero
forcing closure colors the whole graph G and its modified graph G*.

Features:
  - Pattern graphs from edge lists, pattern-matrix CSVs, G(n, p) generation
    and social-influence networks
  - Zero forcing closure with force chronologies
  - Degree greedy and exact (brute force) minimizers
  - Actor-critic learner over a directed graph network (numpy)
  - Exact-integer Kalman rank cross-check
  - ER sweeps and degree reports as CSV

Main Components:
  - pattern_graph.py / zero_forcing.py: graphs and the closure engine
  - solvers.py: greedy and exact minimizers
  - rl_env.py / gnn.py / trainer.py: coloring MDP and its learner
  - numeric_verify.py: rank check on random integer realizations
  - sweep.py / stats.py / formats.py: experiments, aggregation, I/O
  - cli.py: the `zforce` command

Usage:
  zforce solve graph.txt --method greedy
  python -m zforce verify graph.txt 0,3

Dependencies:
  - numpy, networkx, PyYAML, rich
  - Python 3.10+
"""

import logging
import os
import tempfile
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

__version__ = "0.1.0"


def get_log_path() -> str:
    """Rotating log file under $XDG_DATA_HOME/zforce/logs (default ~/.local/share).

    Falls back to the system temp dir when the log directory cannot be made.
    """
    data_home = os.environ.get("XDG_DATA_HOME") or str(Path.home() / ".local" / "share")
    log_dir = Path(data_home) / "zforce" / "logs"
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
    except OSError:
        return str(Path(tempfile.gettempdir()) / "zforce.log")
    return str(log_dir / "zforce.log")


def setup_logging(
    log_config=None, verbose: bool = False, console: Optional[object] = None, level: Optional[str] = None
) -> None:
    """Install the rotating file handler and a rich console handler on the root logger.

    `log_config` is a config.LogConfig; the file handler honours its level,
    path, size and backup count. `level` overrides the configured level (the
    CLI passes ZFORCE_LOG_LEVEL through it). The console shows warnings, or
    info with `verbose`.
    """
    from rich.console import Console
    from rich.logging import RichHandler

    from .config import LogConfig

    cfg = log_config or LogConfig()
    file_level = getattr(logging, (level or cfg.level).upper(), logging.INFO)
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_zforce", False):
            root.removeHandler(handler)
            handler.close()

    try:
        file_handler: logging.Handler = RotatingFileHandler(
            cfg.file_path or get_log_path(),
            maxBytes=cfg.max_size_mb * 1024 * 1024,
            backupCount=cfg.backup_count,
        )
    except OSError:
        file_handler = logging.NullHandler()
    file_handler.setLevel(file_level)
    file_handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))

    console_handler = RichHandler(console=console or Console(stderr=True), show_path=False)
    console_handler.setLevel(logging.INFO if verbose else logging.WARNING)

    for handler in (file_handler, console_handler):
        handler._zforce = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    root.setLevel(min(file_level, console_handler.level))
