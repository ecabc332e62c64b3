"""
Pattern graphs over the {0, *, ?} alphabet.

A pattern matrix A describes a family of linear systems: `0` is a fixed zero,
`*` an arbitrary nonzero value and `?` an arbitrary value that may be zero.
Entry A[i][j] != 0 means node j influences node i, so the graph carries the
directed edge j -> i. Solid edges (E_*) come from `*` entries and dashed
edges (E_?) from `?` entries; diagonal entries are self-loops.

Main pieces:
  - PatternGraph: immutable graph backed by an int8 entry matrix
  - from_pattern_matrix / from_edge_list / from_pattern_csv: ingestion
  - to_modified: the graph G* whose diagonal is rewritten for the second
    zero forcing condition
  - degrees: in/out/total degree per node
  - generate_er: directed G(n, p) graphs via networkx
  - social_influence_pattern: opinion-dynamics networks whose diagonal is
    always `?`
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .errors import GraphFormatError, InvalidInputError
from .model import PatternEntry

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, PatternEntry]
EntryLike = Union[PatternEntry, int, str]


class PatternGraph:
    """Directed graph of a {0, *, ?} pattern matrix.

    `entries[i, j]` holds the PatternEntry code of A_ij; the edge it induces
    runs from j to i. Instances are immutable and hash by their entries.
    """

    def __init__(self, entries: np.ndarray, labels: Optional[Sequence[str]] = None):
        arr = np.array(entries, dtype=np.int8, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidInputError(f"pattern matrix must be square, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 2):
            raise InvalidInputError("pattern matrix entries must be 0 (zero), 1 (*) or 2 (?)")
        arr.setflags(write=False)
        self._entries = arr
        if labels is not None and len(labels) != arr.shape[0]:
            raise InvalidInputError("label count does not match node count")
        self.labels: Optional[Tuple[str, ...]] = tuple(labels) if labels is not None else None

    @property
    def n(self) -> int:
        return int(self._entries.shape[0])

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def entry(self, i: int, j: int) -> PatternEntry:
        return PatternEntry(int(self._entries[i, j]))

    def diagonal(self) -> List[PatternEntry]:
        return [PatternEntry(int(c)) for c in np.diag(self._entries)]

    @cached_property
    def out_adjacency(self) -> Tuple[Tuple[Tuple[int, PatternEntry], ...], ...]:
        """Per node, the (target, edge class) pairs sorted by target."""
        out: List[List[Tuple[int, PatternEntry]]] = [[] for _ in range(self.n)]
        rows, cols = np.nonzero(self._entries)
        for i, j in sorted(zip(cols.tolist(), rows.tolist())):
            out[i].append((j, PatternEntry(int(self._entries[j, i]))))
        return tuple(tuple(lst) for lst in out)

    @cached_property
    def in_adjacency(self) -> Tuple[Tuple[Tuple[int, PatternEntry], ...], ...]:
        """Per node, the (source, edge class) pairs sorted by source."""
        inc: List[List[Tuple[int, PatternEntry]]] = [[] for _ in range(self.n)]
        rows, cols = np.nonzero(self._entries)
        for i, j in sorted(zip(rows.tolist(), cols.tolist())):
            inc[i].append((j, PatternEntry(int(self._entries[i, j]))))
        return tuple(tuple(lst) for lst in inc)

    def edges(self) -> List[Edge]:
        """All edges as (source, target, class), sorted by source then target."""
        return [(i, j, cls) for i, outs in enumerate(self.out_adjacency) for j, cls in outs]

    def solid_edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, j, cls in self.edges() if cls is PatternEntry.NONZERO]

    def dashed_edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, j, cls in self.edges() if cls is PatternEntry.ARBITRARY]

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self._entries))

    def adjacency(self) -> np.ndarray:
        """Float indicator with adj[i, j] = 1 iff the edge i -> j exists."""
        return (self._entries != 0).T.astype(np.float64)

    def to_pattern_matrix(self) -> List[List[PatternEntry]]:
        return [[PatternEntry(int(c)) for c in row] for row in self._entries]

    def relabel(self, permutation: Sequence[int]) -> "PatternGraph":
        """Return the graph where node i becomes node permutation[i]."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise InvalidInputError("relabel needs a permutation of 0..n-1")
        inverse = np.argsort(perm)
        return PatternGraph(self._entries[np.ix_(inverse, inverse)])

    def to_networkx(self) -> nx.DiGraph:
        dg = nx.DiGraph()
        dg.add_nodes_from(range(self.n))
        for i, j, cls in self.edges():
            dg.add_edge(i, j, cls=cls.token)
        return dg

    @cached_property
    def _digest(self) -> str:
        digest = hashlib.sha1(self.n.to_bytes(4, "little") + self._entries.tobytes())
        return digest.hexdigest()[:16]

    def fingerprint(self) -> str:
        return self._digest

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternGraph):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return f"PatternGraph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class DegreeSequence:
    in_degree: np.ndarray
    out_degree: np.ndarray

    @property
    def degree(self) -> np.ndarray:
        return self.in_degree + self.out_degree

    def __getitem__(self, node: int) -> Tuple[int, int, int]:
        k_in = int(self.in_degree[node])
        k_out = int(self.out_degree[node])
        return k_in, k_out, k_in + k_out

    def __len__(self) -> int:
        return len(self.in_degree)


@dataclass(frozen=True)
class EdgePolicy:
    """Edge-class policy for generated graphs: share of edges drawn as `?`."""

    arbitrary_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.arbitrary_fraction <= 1.0:
            raise InvalidInputError("arbitrary_fraction must lie in [0, 1]")


def _coerce_entry(value: EntryLike) -> int:
    if isinstance(value, PatternEntry):
        return int(value)
    if isinstance(value, str):
        return int(PatternEntry.from_token(value))
    code = int(value)
    if code not in (0, 1, 2):
        raise InvalidInputError(f"invalid pattern entry {value!r}")
    return code


def from_pattern_matrix(entries: Sequence[Sequence[EntryLike]]) -> PatternGraph:
    rows = [list(r) for r in entries]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InvalidInputError("pattern matrix must be square")
    arr = np.zeros((n, n), dtype=np.int8)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            arr[i, j] = _coerce_entry(value)
    return PatternGraph(arr)


def to_modified(g: PatternGraph) -> PatternGraph:
    """G*: zero diagonal entries become `*`, nonzero or arbitrary become `?`."""
    arr = np.array(g.entries, copy=True)
    diag = np.diag(arr)
    new_diag = np.where(diag == PatternEntry.ZERO, PatternEntry.NONZERO, PatternEntry.ARBITRARY)
    np.fill_diagonal(arr, new_diag.astype(np.int8))
    return PatternGraph(arr, g.labels)


def degrees(g: PatternGraph) -> DegreeSequence:
    edge = g.entries != 0
    # edge[i, j] is the edge j -> i
    return DegreeSequence(
        in_degree=edge.sum(axis=1).astype(np.int64),
        out_degree=edge.sum(axis=0).astype(np.int64),
    )


def mean_degree(g: PatternGraph) -> float:
    """Average in-degree (= average out-degree) |E| / n."""
    return g.edge_count / g.n if g.n else 0.0


def mean_total_degree(g: PatternGraph) -> float:
    """<k> = 2|E| / n."""
    return 2.0 * mean_degree(g)


def generate_er(
    n: int, p: float, seed: int, policy: Optional[EdgePolicy] = None
) -> PatternGraph:
    """Directed G(n, p) with zero diagonal; every ordered pair tried once."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise InvalidInputError(f"node count must be positive, got {n}")
    policy = policy or EdgePolicy()
    dg = nx.gnp_random_graph(n, p, seed=seed, directed=True)
    arr = np.zeros((n, n), dtype=np.int8)
    class_rng = np.random.default_rng(seed)
    for src, dst in sorted(dg.edges()):
        cls = PatternEntry.NONZERO
        if policy.arbitrary_fraction > 0.0 and class_rng.random() < policy.arbitrary_fraction:
            cls = PatternEntry.ARBITRARY
        arr[dst, src] = cls
    logger.debug(f"Generated ER graph n={n} p={p} seed={seed} edges={int(np.count_nonzero(arr))}")
    return PatternGraph(arr)


def from_edge_list(text: str) -> PatternGraph:
    """Parse the line-oriented edge-list format.

    Lines are `n <count>`, `<src> <dst> <class>` with class `*` or `?`,
    `diag <node> <class>` and `#` comments. Without an `n` header, integer
    ids are used as given (n = largest id + 1); any other labels are mapped
    to dense ids in order of first appearance and kept in `labels`.
    """
    declared_n: Optional[int] = None
    records: List[Tuple[int, str, str, str]] = []  # (line, src, dst-or-"", class)
    diag_records: List[Tuple[int, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if len(parts) != 2 or declared_n is not None:
                raise GraphFormatError("expected a single header `n <count>`", lineno)
            try:
                declared_n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"node count {parts[1]!r} is not an integer", lineno)
            if declared_n < 1:
                raise GraphFormatError("node count must be positive", lineno)
        elif parts[0] == "diag":
            if len(parts) != 3:
                raise GraphFormatError("expected `diag <node> <class>`", lineno)
            diag_records.append((lineno, parts[1], parts[2]))
        else:
            if len(parts) != 3:
                raise GraphFormatError("expected `<src> <dst> <class>`", lineno)
            if parts[2] not in ("*", "?"):
                raise GraphFormatError(f"edge class must be `*` or `?`, got {parts[2]!r}", lineno)
            records.append((lineno, parts[0], parts[1], parts[2]))

    ids: Dict[str, int] = {}
    tokens = [t for _, s, d, _ in records for t in (s, d)] + [t for _, t, _ in diag_records]
    numeric = all(t.isdigit() for t in tokens)

    def resolve(token: str, lineno: int) -> int:
        if declared_n is None and numeric:
            return int(token)
        if declared_n is not None:
            try:
                node = int(token)
            except ValueError:
                raise GraphFormatError(f"node id {token!r} is not an integer", lineno)
            if not 0 <= node < declared_n:
                raise GraphFormatError(f"node id {node} out of range for n={declared_n}", lineno)
            return node
        if token not in ids:
            ids[token] = len(ids)
        return ids[token]

    triples: List[Tuple[int, int, int, PatternEntry]] = []
    for lineno, src, dst, cls in records:
        cls_entry = PatternEntry.from_token(cls, lineno)
        triples.append((lineno, resolve(src, lineno), resolve(dst, lineno), cls_entry))
    diags: List[Tuple[int, int, PatternEntry]] = []
    for lineno, node, cls in diag_records:
        diags.append((lineno, resolve(node, lineno), PatternEntry.from_token(cls, lineno)))

    if declared_n is not None:
        n = declared_n
    elif numeric:
        n = 1 + max((int(t) for t in tokens), default=-1)
    else:
        n = len(ids)
    if n == 0:
        raise GraphFormatError("document declares no nodes")
    arr = np.zeros((n, n), dtype=np.int8)
    seen = set()
    for lineno, src, dst, cls in triples:
        if (src, dst) in seen:
            raise GraphFormatError(f"duplicate edge {src} -> {dst}", lineno)
        seen.add((src, dst))
        arr[dst, src] = cls
    for lineno, node, cls in diags:
        if (node, node) in seen:
            raise GraphFormatError(f"duplicate diagonal entry for node {node}", lineno)
        seen.add((node, node))
        arr[node, node] = cls

    labels = list(ids) if ids else None
    return PatternGraph(arr, labels)


def from_pattern_csv(text: str) -> PatternGraph:
    """Parse a CSV of `0`, `*`, `?` tokens, one matrix row per line."""
    rows: List[List[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(PatternEntry.from_token(tok, lineno)) for tok in line.split(",")])
    if not rows:
        raise GraphFormatError("empty pattern matrix")
    n = len(rows)
    for lineno, row in enumerate(rows, start=1):
        if len(row) != n:
            raise GraphFormatError(
                f"row has {len(row)} entries, expected {n} (matrix must be square)", lineno
            )
    return PatternGraph(np.asarray(rows, dtype=np.int8))


def social_influence_pattern(
    edges: Iterable[Tuple[int, int]], n: Optional[int] = None
) -> PatternGraph:
    """Pattern of an opinion-dynamics network x' = W^T x.

    Each influence edge src -> dst becomes a `*` entry at [dst][src]; the
    diagonal mixes self-dynamics with the row sum of influences, so every
    diagonal entry is `?`.
    """
    edge_list = [(int(s), int(d)) for s, d in edges]
    if n is None:
        n = 1 + max((max(s, d) for s, d in edge_list), default=-1)
    if n < 1:
        raise InvalidInputError("social influence network needs at least one node")
    arr = np.zeros((n, n), dtype=np.int8)
    for src, dst in edge_list:
        if not (0 <= src < n and 0 <= dst < n):
            raise InvalidInputError(f"node id out of range in edge {src} -> {dst} for n={n}")
        if src != dst:
            arr[dst, src] = PatternEntry.NONZERO
    np.fill_diagonal(arr, PatternEntry.ARBITRARY)
    return PatternGraph(arr)


def path_graph(n: int, cls: PatternEntry = PatternEntry.NONZERO) -> PatternGraph:
    arr = np.zeros((n, n), dtype=np.int8)
    for i in range(n - 1):
        arr[i + 1, i] = cls
    return PatternGraph(arr)


def cycle_graph(n: int, cls: PatternEntry = PatternEntry.NONZERO) -> PatternGraph:
    arr = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        arr[(i + 1) % n, i] = cls
    return PatternGraph(arr)


def out_star(leaves: int, cls: PatternEntry = PatternEntry.NONZERO) -> PatternGraph:
    """Hub 0 with edges 0 -> 1..leaves."""
    n = leaves + 1
    arr = np.zeros((n, n), dtype=np.int8)
    arr[1:, 0] = cls
    return PatternGraph(arr)


def isolated_nodes(n: int) -> PatternGraph:
    return PatternGraph(np.zeros((n, n), dtype=np.int8))
