"""
Non-learning minimizers of the zero forcing number.

- greedy_degree: zero in-degree nodes first, then low in-degree white nodes
  one at a time until both closures are complete
- exact_minimum: brute force by increasing cardinality, the reference oracle
  for small graphs; optionally spread over a process pool
- validate: ZFS check with the nodes each closure leaves white
"""

import itertools
import logging
import time
from collections import deque
from concurrent import futures
from typing import Callable, Deque, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import BudgetExceededError
from .model import InputSet, SolveResult, ValidationReport
from .pattern_graph import PatternGraph, degrees
from .zero_forcing import closures, intersection_state, is_zfs, zero_in_degree_nodes, zfs_lower_bound

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 15
DEFAULT_TIME_BUDGET = 60.0
_TIME_CHECK_EVERY = 256
_CHUNK_SIZE = 512


def _result(g: PatternGraph, chosen: Sequence[int], method: str, start: float) -> SolveResult:
    inputs = InputSet.of(chosen)
    return SolveResult(
        inputs=inputs,
        size=len(inputs),
        eta=len(inputs) / g.n,
        method=method,
        elapsed=time.perf_counter() - start,
    )


def greedy_degree(g: PatternGraph) -> SolveResult:
    """Degree-based greedy.

    Every zero in-degree node is taken first. While the intersection state
    still has white nodes, the white node with the smallest in-degree is
    added (ties: largest out-degree, then lowest id) and the closures are
    recomputed.
    """
    start = time.perf_counter()
    deg = degrees(g)
    chosen: List[int] = zero_in_degree_nodes(g)
    state = intersection_state(g, chosen)
    while not state.all_black():
        taken = set(chosen)
        candidates = [v for v in state.white_nodes() if v not in taken]
        pick = min(candidates, key=lambda v: (int(deg.in_degree[v]), -int(deg.out_degree[v]), v))
        chosen.append(pick)
        state = intersection_state(g, chosen)
        logger.debug(f"greedy: added node {pick}, {state.black_count()}/{g.n} black")
    return _result(g, chosen, "greedy", start)


def _candidates(mandatory: Tuple[int, ...], free: Tuple[int, ...], k: int) -> Iterator[Tuple[int, ...]]:
    # merging a fixed set into lexicographically ordered combinations keeps the order
    for combo in itertools.combinations(free, k - len(mandatory)):
        yield tuple(sorted(mandatory + combo))


def _first_valid(g: PatternGraph, candidates: List[Tuple[int, ...]]) -> Optional[Tuple[int, ...]]:
    for cand in candidates:
        if is_zfs(g, cand):
            return cand
    return None


def _chunks(items: Iterable[Tuple[int, ...]], size: int) -> Iterator[List[Tuple[int, ...]]]:
    it = iter(items)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def _first_valid_pooled(
    pool: futures.Executor,
    g: PatternGraph,
    candidates: Iterable[Tuple[int, ...]],
    window: int,
    remaining: Callable[[], float],
) -> Optional[Tuple[int, ...]]:
    """Chunks go out at most `window` at a time and are read back in submission
    order, so the first hit is the lexicographically smallest one.

    Raises futures.TimeoutError once `remaining()` runs out.
    """
    chunks = _chunks(candidates, _CHUNK_SIZE)
    pending: Deque[futures.Future] = deque()

    def refill() -> None:
        while len(pending) < window:
            chunk = next(chunks, None)
            if chunk is None:
                return
            pending.append(pool.submit(_first_valid, g, chunk))

    refill()
    try:
        while pending:
            hit = pending.popleft().result(timeout=max(remaining(), 0.0))
            if hit is not None:
                return hit
            refill()
        return None
    finally:
        for fut in pending:
            fut.cancel()


def exact_minimum(
    g: PatternGraph,
    node_budget: int = DEFAULT_NODE_BUDGET,
    time_budget: float = DEFAULT_TIME_BUDGET,
    workers: int = 1,
) -> SolveResult:
    """Minimum ZFS by enumeration; the lexicographically smallest one is returned.

    Raises BudgetExceededError("node", ...) when n > node_budget and
    BudgetExceededError("time", ...) once time_budget seconds have passed.
    """
    if g.n > node_budget:
        raise BudgetExceededError("node", node_budget, g.n)
    start = time.perf_counter()
    mandatory = tuple(zero_in_degree_nodes(g))
    free = tuple(v for v in range(g.n) if v not in set(mandatory))
    _, floor = zfs_lower_bound(g)

    def remaining() -> float:
        return time_budget - (time.perf_counter() - start)

    def check_time() -> None:
        if remaining() < 0.0:
            raise BudgetExceededError("time", time_budget, round(time.perf_counter() - start, 3))

    pool = futures.ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(max(floor, len(mandatory)), g.n + 1):
            logger.debug(f"exact: trying cardinality {k}")
            found: Optional[Tuple[int, ...]] = None
            if pool is None:
                for idx, cand in enumerate(_candidates(mandatory, free, k)):
                    if idx % _TIME_CHECK_EVERY == 0:
                        check_time()
                    if is_zfs(g, cand):
                        found = cand
                        break
            else:
                check_time()
                try:
                    cands = _candidates(mandatory, free, k)
                    found = _first_valid_pooled(pool, g, cands, 2 * workers, remaining)
                except futures.TimeoutError:
                    elapsed = round(time.perf_counter() - start, 3)
                    raise BudgetExceededError("time", time_budget, elapsed) from None
            if found is not None:
                return _result(g, found, "exact", start)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    # the full node set is always a ZFS, so the loop returns before this
    raise AssertionError("enumeration ended without a zero forcing set")


def validate(g: PatternGraph, inputs: Iterable[int]) -> ValidationReport:
    in_g, in_gstar = closures(g, inputs)
    return ValidationReport(
        valid=in_g.all_black() and in_gstar.all_black(),
        g_ok=in_g.all_black(),
        gstar_ok=in_gstar.all_black(),
        uncolored_g=tuple(in_g.white_nodes()),
        uncolored_gstar=tuple(in_gstar.white_nodes()),
    )
