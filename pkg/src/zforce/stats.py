"""
Degree statistics and sweep aggregation.

- degree_profile: mean degree figures of the whole graph next to those of an
  input set (which nodes the minimizers end up choosing)
- degree_histograms: per-degree node counts for both populations
- summarize_sweep: per (n, p, method) aggregates of sweep rows
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .model import DegreeRow, InputSet, SweepRow
from .pattern_graph import PatternGraph, degrees

logger = logging.getLogger(__name__)

ALL_NODES = "all nodes"
INPUT_SET = "input set"


@dataclass(frozen=True)
class DegreeProfile:
    rows: Tuple[DegreeRow, DegreeRow]
    min_in_degree: int
    share_at_min_in_degree: float  # input nodes whose in-degree equals the graph minimum


@dataclass(frozen=True)
class HistogramRow:
    population: str
    kind: str  # "in", "out" or "total"
    degree: int
    count: int


@dataclass(frozen=True)
class SummaryRow:
    n: int
    p: float
    method: str
    instances: int
    mean_eta: float
    std_eta: float
    mean_degree: float

    FIELDS = ("n", "p", "method", "instances", "mean_eta", "std_eta", "mean_degree")

    def to_record(self) -> Dict[str, str]:
        return {
            "n": str(self.n),
            "p": f"{self.p:g}",
            "method": self.method,
            "instances": str(self.instances),
            "mean_eta": f"{self.mean_eta:.6f}",
            "std_eta": f"{self.std_eta:.6f}",
            "mean_degree": f"{self.mean_degree:.6f}",
        }


def _degree_row(label: str, k_in: np.ndarray, k_out: np.ndarray) -> DegreeRow:
    if k_in.size == 0:
        return DegreeRow(label, 0, 0.0, 0.0, 0.0)
    mean_in = float(k_in.mean())
    mean_out = float(k_out.mean())
    return DegreeRow(label, int(k_in.size), mean_in + mean_out, mean_in, mean_out)


def degree_profile(g: PatternGraph, inputs: Iterable[int]) -> DegreeProfile:
    chosen = InputSet.of(inputs, g.n)
    deg = degrees(g)
    idx = np.asarray(sorted(chosen.as_set()), dtype=np.int64)
    everyone = _degree_row(ALL_NODES, deg.in_degree, deg.out_degree)
    subset = _degree_row(INPUT_SET, deg.in_degree[idx], deg.out_degree[idx])
    min_in = int(deg.in_degree.min()) if g.n else 0
    share = float((deg.in_degree[idx] == min_in).mean()) if idx.size else 0.0
    return DegreeProfile(rows=(everyone, subset), min_in_degree=min_in, share_at_min_in_degree=share)


def degree_histograms(g: PatternGraph, inputs: Iterable[int]) -> List[HistogramRow]:
    chosen = InputSet.of(inputs, g.n)
    deg = degrees(g)
    idx = np.asarray(sorted(chosen.as_set()), dtype=np.int64)
    rows: List[HistogramRow] = []
    for population, sel in ((ALL_NODES, np.arange(g.n)), (INPUT_SET, idx)):
        for kind, values in (("in", deg.in_degree), ("out", deg.out_degree), ("total", deg.degree)):
            counts = np.bincount(values[sel], minlength=int(values.max(initial=0)) + 1)
            rows.extend(
                HistogramRow(population, kind, d, int(c)) for d, c in enumerate(counts) if c
            )
    return rows


def summarize_sweep(rows: Iterable[SweepRow]) -> List[SummaryRow]:
    """Aggregate sweep rows per (n, p, method), sorted by that key."""
    groups: Dict[Tuple[int, float, str], List[SweepRow]] = defaultdict(list)
    for row in rows:
        groups[(row.n, row.p, row.method)].append(row)
    out = []
    for (n, p, method), members in sorted(groups.items()):
        etas = [r.eta for r in members]
        mean_eta = sum(etas) / len(etas)
        var = sum((e - mean_eta) ** 2 for e in etas) / len(etas)
        out.append(
            SummaryRow(
                n=n,
                p=p,
                method=method,
                instances=len(members),
                mean_eta=mean_eta,
                std_eta=math.sqrt(var),
                mean_degree=sum(r.mean_degree for r in members) / len(members),
            )
        )
    logger.debug(f"Summarized {sum(s.instances for s in out)} rows into {len(out)} cells")
    return out


def mean_eta_by_p(summary: Sequence[SummaryRow], n: int, method: str) -> List[Tuple[float, float]]:
    """(p, mean eta) pairs for one n and method, ordered by p."""
    return sorted((s.p, s.mean_eta) for s in summary if s.n == n and s.method == method)
