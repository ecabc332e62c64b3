"""
Data models shared across zforce modules.

This module defines the small immutable records (frozen dataclasses) that
flow between the graph, closure, solver, environment and reporting layers.
Keeping them here separates data from logic and makes every result easy to
serialize to the CSV schemas the CLI emits.

Data Classes:
  - PatternEntry: one symbol of a {0, *, ?} pattern matrix
  - InputSet: ordered set of input (driver) nodes
  - ColorState: black/white indicator over nodes
  - ForceEvent / DerivedSetResult: closure of the color change rule
  - ValidationReport / SolveResult: solver outputs
  - EnvState / StepOutcome / TraceStep / EpisodeTrace: coloring MDP
  - Realization / RankReport: numerical cross-check
  - SweepRow / DegreeRow: experiment and report rows

Conventions:
  - Node ids are dense 0-based integers
  - Colors use 1 for black and 0 for white
  - All records are immutable; "modifying" methods return new instances
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .errors import GraphFormatError, InvalidInputError

_TOKENS = {0: "0", 1: "*", 2: "?"}


class PatternEntry(IntEnum):
    ZERO = 0
    NONZERO = 1
    ARBITRARY = 2

    @property
    def token(self) -> str:
        return _TOKENS[int(self)]

    @property
    def is_edge(self) -> bool:
        return self is not PatternEntry.ZERO

    @classmethod
    def from_token(cls, token: str, line: Optional[int] = None) -> "PatternEntry":
        token = token.strip()
        for code, tok in _TOKENS.items():
            if tok == token:
                return cls(code)
        raise GraphFormatError(f"unknown pattern token {token!r}", line)


@dataclass(frozen=True)
class InputSet:
    nodes: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidInputError(f"duplicate node in input set {self.nodes}")
        if any(v < 0 for v in self.nodes):
            raise InvalidInputError(f"negative node id in input set {self.nodes}")

    @classmethod
    def of(cls, nodes: Iterable[int], n: Optional[int] = None) -> "InputSet":
        """Build an input set, checking ids against node count `n` when given."""
        result = cls(tuple(int(v) for v in nodes))
        if n is not None:
            result.check(n)
        return result

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "InputSet":
        """Parse a comma or semicolon separated id list ("" is the empty set)."""
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        try:
            return cls.of((int(p) for p in parts), n)
        except ValueError as e:
            raise InvalidInputError(f"bad input set {text!r}: {e}") from e

    def check(self, n: int) -> None:
        bad = [v for v in self.nodes if v >= n]
        if bad:
            raise InvalidInputError(f"input node(s) {bad} out of range for n={n}")

    def as_set(self) -> FrozenSet[int]:
        return frozenset(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.nodes)

    def __contains__(self, node: object) -> bool:
        return node in self.nodes

    def __str__(self) -> str:
        return ";".join(str(v) for v in self.nodes)


@dataclass(frozen=True)
class ColorState:
    colors: Tuple[int, ...]

    @classmethod
    def white(cls, n: int) -> "ColorState":
        return cls((0,) * n)

    @classmethod
    def from_black(cls, n: int, black: Iterable[int]) -> "ColorState":
        colors = [0] * n
        for v in black:
            colors[v] = 1
        return cls(tuple(colors))

    @property
    def n(self) -> int:
        return len(self.colors)

    def black_nodes(self) -> FrozenSet[int]:
        return frozenset(i for i, c in enumerate(self.colors) if c)

    def white_nodes(self) -> List[int]:
        return [i for i, c in enumerate(self.colors) if not c]

    def black_count(self) -> int:
        return sum(self.colors)

    def all_black(self) -> bool:
        return all(self.colors)

    def is_black(self, node: int) -> bool:
        return bool(self.colors[node])

    def intersect(self, other: "ColorState") -> "ColorState":
        if other.n != self.n:
            raise InvalidInputError(f"color length mismatch: {self.n} vs {other.n}")
        return ColorState(tuple(a & b for a, b in zip(self.colors, other.colors)))

    def bitstring(self) -> str:
        return "".join(str(c) for c in self.colors)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.colors, dtype=np.float64)


@dataclass(frozen=True)
class ForceEvent:
    forcer: int
    forced: int


@dataclass(frozen=True)
class DerivedSetResult:
    initial: ColorState
    final: ColorState
    chronology: Tuple[ForceEvent, ...] = ()

    def derived_nodes(self) -> FrozenSet[int]:
        return self.final.black_nodes()

    def size(self) -> int:
        return self.final.black_count()


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    g_ok: bool
    gstar_ok: bool
    uncolored_g: Tuple[int, ...] = ()
    uncolored_gstar: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SolveResult:
    inputs: InputSet
    size: int
    eta: float
    method: str
    elapsed: float  # seconds

    def to_row(self, graph_id: str, n: int) -> List[str]:
        """CSV row: graph_id,method,n,z,eta,elapsed_ms,inputs."""
        return [
            graph_id,
            self.method,
            str(n),
            str(self.size),
            f"{self.eta:.6f}",
            f"{self.elapsed * 1000.0:.3f}",
            str(self.inputs),
        ]


@dataclass(frozen=True)
class EnvState:
    colors: ColorState
    chosen: InputSet = field(default_factory=InputSet)
    step: int = 0


@dataclass(frozen=True)
class StepOutcome:
    next: EnvState
    reward: float
    terminal: bool


@dataclass(frozen=True)
class TraceStep:
    state: EnvState
    action: int
    reward: float


@dataclass(frozen=True)
class EpisodeTrace:
    steps: Tuple[TraceStep, ...]
    final: EnvState
    terminal_by_reward: bool

    @property
    def length(self) -> int:
        return len(self.steps)

    def rewards(self) -> List[float]:
        return [s.reward for s in self.steps]

    def actions(self) -> List[int]:
        return [s.action for s in self.steps]

    def states(self) -> List[EnvState]:
        return [s.state for s in self.steps] + [self.final]


@dataclass(frozen=True)
class Realization:
    a: np.ndarray  # n x n, dtype int64
    b: np.ndarray  # n x m, dtype int64


@dataclass(frozen=True)
class RankReport:
    trials: int
    full_rank_count: int
    min_rank: int
    pattern_z_condition: bool


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: float
    seed: int
    method: str
    z: int
    eta: float
    mean_degree: float
    elapsed: float

    FIELDS = ("n", "p", "seed", "method", "z", "eta", "mean_degree", "elapsed_ms")

    def key(self) -> Tuple[str, ...]:
        """Identity of a row as written: (n, p, seed, method) strings."""
        return (str(self.n), f"{self.p:g}", str(self.seed), self.method)

    def to_record(self) -> Dict[str, str]:
        return {
            "n": str(self.n),
            "p": f"{self.p:g}",
            "seed": str(self.seed),
            "method": self.method,
            "z": str(self.z),
            "eta": f"{self.eta:.6f}",
            "mean_degree": f"{self.mean_degree:.6f}",
            "elapsed_ms": f"{self.elapsed * 1000.0:.3f}",
        }


@dataclass(frozen=True)
class DegreeRow:
    label: str
    count: int
    mean_degree: float
    mean_in_degree: float
    mean_out_degree: float
