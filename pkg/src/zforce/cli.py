"""
Command-line front end.

    zforce solve GRAPH [--method greedy|exact|rl]
    zforce train GRAPH [GRAPH ...] [--config FILE]
    zforce sweep SPEC --out FILE [--summary FILE]
    zforce verify GRAPH INPUTS
    zforce rank-check GRAPH INPUTS [--trials N]
    zforce degree-report GRAPH [INPUTS]

Tables and status go to stderr through rich; CSV goes to stdout unless a
file is named. Exit codes: 0 ok, 1 unexpected failure (or an input set that
fails `verify`), 2 invalid input, 3 budget exceeded, 4 training abort.
"""

import argparse
import functools
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from rich.console import Console
from rich.markup import escape
from rich.progress import Progress
from rich.table import Table

from . import __version__, setup_logging
from .cache import closure_cache
from .config import METHODS, default_workers, get_config_manager, load_sweep_spec, load_train_config
from .errors import InvalidInputError, ZforceError
from .formats import (
    DEGREE_FIELDS,
    HISTOGRAM_FIELDS,
    RANK_FIELDS,
    RESULT_FIELDS,
    TRAIN_LOG_FIELDS,
    rank_row,
    read_graph,
    read_sweep_rows,
    result_rows,
    write_chronology_csv,
    write_csv,
    write_graph,
    write_trace_csv,
)
from .gnn import load_checkpoint, save_checkpoint
from .model import InputSet, SolveResult
from .numeric_verify import kalman_check
from .pattern_graph import PatternGraph
from .solvers import exact_minimum, greedy_degree, validate
from .stats import SummaryRow, degree_histograms, degree_profile, summarize_sweep
from .sweep import SweepRunner
from .trainer import greedy_rollout, solve_rl, train, train_many
from .zero_forcing import derived_set

logger = logging.getLogger(__name__)

console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILED = 1


def cli_safe(func: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
    """
    Decorator for command handlers that maps errors to exit codes.

    A ZforceError is logged and reported with its own exit code; anything
    else is logged with its traceback and reported as exit code 1.
    """

    @functools.wraps(func)
    def wrapper(args: argparse.Namespace) -> int:
        try:
            return func(args)
        except ZforceError as e:
            logger.error(f"{func.__name__} failed: {e}")
            console.print(f"[red]error:[/red] {escape(str(e))}")
            return e.exit_code
        except Exception as e:
            logger.error(f"Unexpected failure in {func.__name__}: {e}", exc_info=True)
            console.print(f"[red]unexpected error:[/red] {escape(str(e))}")
            return EXIT_FAILED

    return wrapper


def _load_graph(args: argparse.Namespace, path: Optional[str] = None) -> PatternGraph:
    return read_graph(path or args.graph, fmt=args.format, social=args.social)


def _emit_csv(target: Optional[str], header: Sequence[str], rows: List[List[str]]) -> None:
    write_csv(target if target else sys.stdout, header, rows)


def _result_table(title: str, result: SolveResult, n: int) -> Table:
    table = Table(title=title)
    for col in ("method", "n", "z", "eta", "elapsed (ms)", "inputs"):
        table.add_column(col)
    table.add_row(
        result.method,
        str(n),
        str(result.size),
        f"{result.eta:.4f}",
        f"{result.elapsed * 1000.0:.1f}",
        str(result.inputs),
    )
    return table


@cli_safe
def cmd_solve(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    if args.trace and args.method != "rl":
        raise InvalidInputError("--trace needs --method rl")
    if args.export_graph:
        write_graph(g, args.export_graph)
    if args.method == "greedy":
        result = greedy_degree(g)
    elif args.method == "exact":
        workers = args.workers or default_workers()
        result = exact_minimum(g, args.node_budget, args.time_budget, workers=workers)
    else:
        if not args.checkpoint:
            raise InvalidInputError("method rl needs --checkpoint (train one with `zforce train`)")
        params = load_checkpoint(args.checkpoint)
        result = solve_rl(g, params, mask_derived=args.mask_derived)
        if args.trace:
            write_trace_csv(greedy_rollout(g, params, args.mask_derived), args.trace)
    report = validate(g, result.inputs)
    if not report.valid:
        raise AssertionError(f"{result.method} returned a set that is not a ZFS: {result.inputs}")
    console.print(_result_table(args.graph, result, g.n))
    graph_id = args.graph_id or Path(args.graph).stem
    _emit_csv(args.csv, RESULT_FIELDS, result_rows([(graph_id, g.n, result)], timing=not args.no_timing))
    if args.chronology:
        write_chronology_csv(derived_set(g, result.inputs), args.chronology)
    return EXIT_OK


@cli_safe
def cmd_train(args: argparse.Namespace) -> int:
    base = get_config_manager().get_config().train
    cfg = load_train_config(args.config, base) if args.config else replace(base)
    if args.episodes is not None:
        cfg.episodes = args.episodes
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    graphs = [_load_graph(args, path) for path in args.graphs]

    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("training", total=cfg.episodes)

        def tick(done: int, total: int) -> None:
            progress.update(task, completed=done)

        if len(graphs) == 1:
            reports = [train(graphs[0], cfg, progress=tick)]
        else:
            reports = train_many(graphs, cfg, progress=tick)

    save_checkpoint(reports[0].params, args.checkpoint)
    log_rows = sorted((e for r in reports for e in r.log), key=lambda e: e.episode)
    write_csv(args.log, TRAIN_LOG_FIELDS, [e.to_row() for e in log_rows])
    for path, g, report in zip(args.graphs, graphs, reports):
        console.print(
            f"{escape(path)}: best z = [bold]{report.best_z}[/bold] of n = {g.n}  inputs [{report.best}]"
        )
    return EXIT_OK


@cli_safe
def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep_spec(args.spec)
    runner = SweepRunner(spec, args.out, workers=args.workers or default_workers(), timing=not args.no_timing)
    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("sweep", total=None)

        def tick(done: int, total: int) -> None:
            progress.update(task, completed=done, total=total)

        written = runner.run(progress=tick)
    console.print(f"wrote {len(written)} new rows to {escape(args.out)}")
    if args.summary:
        summary = summarize_sweep(read_sweep_rows(args.out))
        rows = [[s.to_record()[f] for f in SummaryRow.FIELDS] for s in summary]
        write_csv(args.summary, SummaryRow.FIELDS, rows)
    return EXIT_OK


@cli_safe
def cmd_verify(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    inputs = InputSet.parse(args.inputs, g.n)
    report = validate(g, inputs)
    table = Table(title=f"inputs [{inputs}]")
    table.add_column("condition")
    table.add_column("ok")
    table.add_column("uncolored")
    table.add_row("dset(G) = V", str(report.g_ok), " ".join(map(str, report.uncolored_g)))
    table.add_row("dset(G*) = V", str(report.gstar_ok), " ".join(map(str, report.uncolored_gstar)))
    console.print(table)
    if report.valid:
        console.print("[green]valid zero forcing set[/green]")
    else:
        console.print("[red]not a zero forcing set[/red]")
    if args.chronology:
        write_chronology_csv(derived_set(g, inputs), args.chronology)
    return EXIT_OK if report.valid else EXIT_FAILED


@cli_safe
def cmd_rank_check(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    inputs = InputSet.parse(args.inputs, g.n)
    value_range = (args.min_value, args.max_value)
    report = kalman_check(g, inputs, trials=args.trials, seed=args.seed, value_range=value_range)
    console.print(
        f"zfs={report.pattern_z_condition}  full rank {report.full_rank_count}/{report.trials}  "
        f"min rank {report.min_rank} of {g.n}"
    )
    graph_id = args.graph_id or Path(args.graph).stem
    _emit_csv(args.csv, RANK_FIELDS, [rank_row(graph_id, inputs, report)])
    return EXIT_OK


@cli_safe
def cmd_degree_report(args: argparse.Namespace) -> int:
    g = _load_graph(args)
    inputs = InputSet.parse(args.inputs, g.n) if args.inputs else greedy_degree(g).inputs
    profile = degree_profile(g, inputs)
    rows = [
        [r.label, str(r.count), f"{r.mean_degree:.6f}", f"{r.mean_in_degree:.6f}", f"{r.mean_out_degree:.6f}"]
        for r in profile.rows
    ]
    console.print(
        f"{profile.share_at_min_in_degree:.0%} of input nodes sit at the minimum "
        f"in-degree {profile.min_in_degree}"
    )
    _emit_csv(args.csv, DEGREE_FIELDS, rows)
    if args.histogram:
        hist = degree_histograms(g, inputs)
        write_csv(args.histogram, HISTOGRAM_FIELDS, [[h.population, h.kind, h.degree, h.count] for h in hist])
    return EXIT_OK


def _add_graph_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--format",
        choices=("edgelist", "matrix"),
        default=None,
        help="graph file format (default: by suffix, .csv is a matrix)",
    )
    p.add_argument(
        "--social", action="store_true", help="read the edges as an influence network (diagonal `?`)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zforce", description="Minimum input sets for strong structural controllability"
    )
    parser.add_argument("--version", action="version", version=f"zforce {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="show info-level log messages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a small zero forcing set")
    p.add_argument("graph")
    p.add_argument("--method", choices=METHODS, default="greedy")
    p.add_argument("--node-budget", type=int, default=15)
    p.add_argument("--time-budget", type=float, default=60.0, help="seconds")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--checkpoint", help="trained model for --method rl")
    p.add_argument("--mask-derived", action="store_true", help="rl: never pick already black nodes")
    p.add_argument("--graph-id", default=None)
    p.add_argument("--csv", default=None, help="write the result row here instead of stdout")
    p.add_argument("--chronology", default=None, help="write the force chronology of the result")
    p.add_argument("--trace", default=None, help="rl: write the greedy rollout step by step")
    p.add_argument("--export-graph", default=None, help="write the graph back out (.csv: matrix)")
    p.add_argument("--no-timing", action="store_true", help="write elapsed_ms as 0 for reproducible output")
    _add_graph_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="train the actor-critic learner")
    p.add_argument("graphs", nargs="+", metavar="graph")
    p.add_argument("--config", default=None, help="YAML file with TrainConfig fields")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--checkpoint", default="model.npz")
    p.add_argument("--log", default="train_log.csv")
    _add_graph_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run an ER experiment grid")
    p.add_argument("spec", help="YAML file with SweepSpec fields")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check an input set")
    p.add_argument("graph")
    p.add_argument("inputs", help="comma-separated node ids")
    p.add_argument("--chronology", default=None)
    _add_graph_options(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank-check", help="Kalman rank on random integer realizations")
    p.add_argument("graph")
    p.add_argument("inputs")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-value", type=int, default=-5)
    p.add_argument("--max-value", type=int, default=5)
    p.add_argument("--graph-id", default=None)
    p.add_argument("--csv", default=None)
    _add_graph_options(p)
    p.set_defaults(func=cmd_rank_check)

    p = sub.add_parser("degree-report", help="degrees of the input set vs the whole graph")
    p.add_argument("graph")
    p.add_argument("inputs", nargs="?", default=None, help="defaults to the greedy solution")
    p.add_argument("--csv", default=None)
    p.add_argument("--histogram", default=None)
    _add_graph_options(p)
    p.set_defaults(func=cmd_degree_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    manager = get_config_manager()
    config = manager.get_config()
    setup_logging(config.logging, verbose=args.verbose, console=console, level=manager.get_log_level())
    closure_cache.resize(config.cache.max_entries)
    logger.debug(f"zforce {__version__}: {args.command}")
    return args.func(args)


def run() -> None:
    sys.exit(main())
