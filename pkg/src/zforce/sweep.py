"""
ER sweep harness.

Every (n, p, seed) cell of a SweepSpec generates one directed G(n, p) graph
and runs each requested method on it. Cells are independent and run in a
process pool; results come back in submission order and a single appender
in the main thread writes them, so the output file only ever grows by whole
rows and its body does not depend on the worker count.

Rows already present in the output file are skipped, which makes an
interrupted sweep resumable.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Set, Tuple, Union

from .config import SweepSpec
from .errors import BudgetExceededError
from .formats import CsvAppender
from .model import SolveResult, SweepRow
from .pattern_graph import EdgePolicy, PatternGraph, generate_er, mean_degree
from .solvers import exact_minimum, greedy_degree
from .trainer import train

logger = logging.getLogger(__name__)

KEY_FIELDS = ("n", "p", "seed", "method")


@dataclass(frozen=True)
class Cell:
    n: int
    p: float
    seed: int
    methods: Tuple[str, ...]


def solve_with(g: PatternGraph, method: str, spec: SweepSpec, seed: int) -> SolveResult:
    if method == "greedy":
        return greedy_degree(g)
    if method == "exact":
        return exact_minimum(g, spec.node_budget, spec.time_budget)
    report = train(g, replace(spec.train, seed=seed))
    return report.to_result(g.n)


def run_cell(cell: Cell, spec: SweepSpec, timing: bool = True) -> List[SweepRow]:
    g = generate_er(cell.n, cell.p, cell.seed, EdgePolicy(spec.arbitrary_fraction))
    k = mean_degree(g)
    rows = []
    for method in cell.methods:
        try:
            result = solve_with(g, method, spec, cell.seed)
        except BudgetExceededError as e:
            logger.warning(f"Skipping {method} on n={cell.n} p={cell.p:g} seed={cell.seed}: {e}")
            continue
        rows.append(
            SweepRow(
                n=cell.n,
                p=cell.p,
                seed=cell.seed,
                method=method,
                z=result.size,
                eta=result.eta,
                mean_degree=k,
                elapsed=result.elapsed if timing else 0.0,
            )
        )
    return rows


def _key(n: int, p: float, seed: int, method: str) -> Tuple[str, ...]:
    return SweepRow(n, p, seed, method, 0, 0.0, 0.0, 0.0).key()


class SweepRunner:
    """Runs the pending cells of a spec and appends their rows to one CSV."""

    def __init__(
        self,
        spec: SweepSpec,
        out_path: Union[str, Path],
        workers: int = 1,
        timing: bool = True,
    ):
        self.spec = spec.validate()
        self.workers = max(1, workers)
        self.timing = timing
        self.appender = CsvAppender(out_path, SweepRow.FIELDS)

    def cells(self) -> Iterator[Cell]:
        s = self.spec
        for n, p, i in itertools.product(s.n_values, s.p_values, range(s.seeds)):
            yield Cell(n, p, s.base_seed + i, tuple(s.methods))

    def pending(self) -> List[Cell]:
        done: Set[Tuple[str, ...]] = self.appender.existing_keys(KEY_FIELDS)
        out = []
        for cell in self.cells():
            todo = tuple(m for m in cell.methods if _key(cell.n, cell.p, cell.seed, m) not in done)
            if todo:
                out.append(replace(cell, methods=todo))
        return out

    def run(self, progress: Optional[Callable[[int, int], None]] = None) -> List[SweepRow]:
        cells = self.pending()
        total = len(cells)
        logger.info(f"Sweep: {total} cells to run with {self.workers} worker(s)")
        written: List[SweepRow] = []

        def consume(results) -> None:
            for idx, rows in enumerate(results, start=1):
                for row in rows:
                    self.appender.append(row.to_record())
                    written.append(row)
                if progress is not None:
                    progress(idx, total)

        if self.workers == 1:
            consume(run_cell(c, self.spec, self.timing) for c in cells)
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                consume(
                    pool.map(
                        run_cell,
                        cells,
                        itertools.repeat(self.spec),
                        itertools.repeat(self.timing),
                    )
                )
        return written


def run_sweep(
    spec: SweepSpec,
    out_path: Union[str, Path],
    workers: int = 1,
    timing: bool = True,
) -> List[SweepRow]:
    return SweepRunner(spec, out_path, workers, timing).run()
