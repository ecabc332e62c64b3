"""
File ingestion and CSV emission.

Graphs come in as edge lists (`n <count>`, `<src> <dst> <class>`,
`diag <node> <class>`) or as `{0,*,?}` pattern-matrix CSVs. Every table the
tool writes is a headered CSV with `\\n` line endings so reruns with the same
seeds produce identical bytes.
"""

import csv
import io
import logging
import threading
from pathlib import Path
from typing import IO, Dict, Iterable, List, Optional, Sequence, Set, TextIO, Tuple, Union

from .errors import GraphFormatError, InvalidInputError
from .model import DerivedSetResult, EpisodeTrace, RankReport, SolveResult, SweepRow
from .pattern_graph import PatternGraph, from_edge_list, from_pattern_csv, social_influence_pattern

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RESULT_FIELDS = ("graph_id", "method", "n", "z", "eta", "elapsed_ms", "inputs")
CHRONOLOGY_FIELDS = ("step", "forcer", "forced")
TRACE_FIELDS = ("step", "action", "reward", "colors")
TRAIN_LOG_FIELDS = ("episode", "length", "return", "best_z")
RANK_FIELDS = ("graph_id", "inputs", "zfs", "trials", "full_rank_count", "min_rank")
DEGREE_FIELDS = ("population", "count", "mean_degree", "mean_in_degree", "mean_out_degree")
HISTOGRAM_FIELDS = ("population", "kind", "degree", "count")


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e}") from e


def detect_format(path: PathLike) -> str:
    return "matrix" if Path(path).suffix.lower() == ".csv" else "edgelist"


def parse_social_edges(text: str) -> Tuple[List[Tuple[int, int]], Optional[int]]:
    """Influence edges `<src> <dst>` (a trailing class token is ignored)."""
    edges = []
    n: Optional[int] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif len(parts) in (2, 3):
                edges.append((int(parts[0]), int(parts[1])))
            else:
                raise GraphFormatError("expected `<src> <dst>`", lineno)
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {raw.strip()!r}", lineno)
    return edges, n


def read_graph(path: PathLike, fmt: Optional[str] = None, social: bool = False) -> PatternGraph:
    fmt = fmt or detect_format(path)
    if social:
        edges, n = parse_social_edges(_read_text(path))
        g = social_influence_pattern(edges, n)
    elif fmt == "matrix":
        g = read_pattern_csv(path)
    elif fmt == "edgelist":
        g = from_edge_list(_read_text(path))
    else:
        raise InvalidInputError(f"unknown graph format {fmt!r}")
    logger.info(f"Loaded {g!r} from {path}")
    return g


def read_pattern_csv(path: PathLike) -> PatternGraph:
    return from_pattern_csv(_read_text(path))


def format_pattern_csv(g: PatternGraph) -> str:
    return "".join(",".join(e.token for e in row) + "\n" for row in g.to_pattern_matrix())


def write_pattern_csv(g: PatternGraph, path: PathLike) -> None:
    Path(path).write_text(format_pattern_csv(g), encoding="utf-8")


def format_edge_list(g: PatternGraph) -> str:
    lines = [f"n {g.n}"]
    for src, dst, cls in g.edges():
        lines.append(f"diag {src} {cls.token}" if src == dst else f"{src} {dst} {cls.token}")
    return "\n".join(lines) + "\n"


def write_edge_list(g: PatternGraph, path: PathLike) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")


def write_graph(g: PatternGraph, path: PathLike, fmt: Optional[str] = None) -> None:
    """Write `g` as a pattern-matrix CSV or an edge list (default: by suffix)."""
    fmt = fmt or detect_format(path)
    try:
        if fmt == "matrix":
            write_pattern_csv(g, path)
        elif fmt == "edgelist":
            write_edge_list(g, path)
        else:
            raise InvalidInputError(f"unknown graph format {fmt!r}")
    except OSError as e:
        raise InvalidInputError(f"cannot write {path}: {e}") from e


def _writer(stream: IO[str]):
    return csv.writer(stream, lineterminator="\n")


def write_csv(
    target: Union[PathLike, TextIO], header: Sequence[str], rows: Iterable[Sequence[object]]
) -> None:
    """Write a headered CSV to a path or an open text stream."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_csv(fh, header, rows)
        return
    w = _writer(target)
    w.writerow(header)
    w.writerows(rows)


def chronology_rows(result: DerivedSetResult) -> List[List[int]]:
    return [[k, e.forcer, e.forced] for k, e in enumerate(result.chronology, start=1)]


def write_chronology_csv(result: DerivedSetResult, target: Union[PathLike, TextIO]) -> None:
    write_csv(target, CHRONOLOGY_FIELDS, chronology_rows(result))


def write_trace_csv(trace: EpisodeTrace, target: Union[PathLike, TextIO]) -> None:
    """One row per step: the action taken, its reward and the state it was taken in."""
    rows = [[k, st.action, f"{st.reward:g}", st.state.colors.bitstring()] for k, st in enumerate(trace.steps)]
    rows.append([trace.length, "", "", trace.final.colors.bitstring()])
    write_csv(target, TRACE_FIELDS, rows)


def result_rows(results: Iterable[Tuple[str, int, SolveResult]], timing: bool = True) -> List[List[str]]:
    rows = []
    for graph_id, n, result in results:
        row = result.to_row(graph_id, n)
        if not timing:
            row[5] = "0.000"
        rows.append(row)
    return rows


def rank_row(graph_id: str, inputs: Iterable[int], report: RankReport) -> List[str]:
    return [
        graph_id,
        ";".join(str(v) for v in inputs),
        str(report.pattern_z_condition).lower(),
        str(report.trials),
        str(report.full_rank_count),
        str(report.min_rank),
    ]


def to_csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


class CsvAppender:
    """Append-only CSV writer shared by producer threads.

    The header is written once, when the file is new or empty. Rows already
    present can be listed by key so interrupted runs resume without
    duplicates.
    """

    def __init__(self, path: PathLike, fields: Sequence[str]):
        self.path = Path(path)
        self.fields = tuple(fields)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists() and self.path.stat().st_size > 0:
            with open(self.path, newline="", encoding="utf-8") as fh:
                header = next(csv.reader(fh), None)
            if header is None or tuple(header) != self.fields:
                raise InvalidInputError(f"{self.path} has header {header}, expected {list(self.fields)}")
        else:
            with open(self.path, "w", newline="", encoding="utf-8") as fh:
                _writer(fh).writerow(self.fields)

    def records(self) -> List[Dict[str, str]]:
        with self._lock, open(self.path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    def existing_keys(self, key_fields: Sequence[str]) -> Set[Tuple[str, ...]]:
        return {tuple(rec[k] for k in key_fields) for rec in self.records()}

    def append(self, record: Dict[str, str]) -> None:
        with self._lock, open(self.path, "a", newline="", encoding="utf-8") as fh:
            _writer(fh).writerow([record[f] for f in self.fields])


def read_sweep_rows(path: PathLike) -> List[SweepRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for rec in reader:
            try:
                rows.append(
                    SweepRow(
                        n=int(rec["n"]),
                        p=float(rec["p"]),
                        seed=int(rec["seed"]),
                        method=rec["method"],
                        z=int(rec["z"]),
                        eta=float(rec["eta"]),
                        mean_degree=float(rec["mean_degree"]),
                        elapsed=float(rec["elapsed_ms"]) / 1000.0,
                    )
                )
            except (KeyError, ValueError) as e:
                raise InvalidInputError(f"malformed sweep row at line {reader.line_num}: {e}") from e
    return rows
