"""
Numerical cross-check of the graph test against the Kalman rank condition.

A realization replaces every `*` by a random nonzero integer and every `?`
by a random integer that may be zero. The pair (A, B) is controllable when
[B, AB, ..., A^{n-1}B] has full row rank; ranks are computed exactly with
fraction-free (Bareiss) elimination over Python integers.

If the graph test says the input set is a ZFS, every realization must be
controllable. A failing trial is a counterexample to the closure engine.
"""

import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import BudgetExceededError, InvalidInputError
from .model import InputSet, PatternEntry, RankReport, Realization
from .pattern_graph import PatternGraph
from .zero_forcing import is_zfs

logger = logging.getLogger(__name__)

DEFAULT_VALUE_RANGE = (-5, 5)
MAX_NODES = 12
_INT64_SAFE = 2**62


def build_b(inputs: Iterable[int], n: int) -> np.ndarray:
    """n x m input matrix with B[v_j, j] = 1 for the j-th input node."""
    chosen = InputSet.of(inputs, n)
    b = np.zeros((n, len(chosen)), dtype=np.int64)
    for col, node in enumerate(chosen):
        b[node, col] = 1
    return b


def _value_pools(value_range: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = int(value_range[0]), int(value_range[1])
    if lo > hi:
        raise InvalidInputError(f"value range [{lo}, {hi}] is empty")
    values = list(range(lo, hi + 1))
    nonzero = np.asarray([v for v in values if v != 0], dtype=np.int64)
    if nonzero.size == 0:
        raise InvalidInputError(f"value range [{lo}, {hi}] has no nonzero values")
    arbitrary = np.asarray(sorted(set(values) | {0}), dtype=np.int64)
    return nonzero, arbitrary


def sample_realization(
    g: PatternGraph,
    seed,
    value_range: Tuple[int, int] = DEFAULT_VALUE_RANGE,
    inputs: Iterable[int] = (),
) -> Realization:
    """Integer matrices with the zero/nonzero structure of g.

    `*` entries are uniform over the nonzero values of the range, `?` entries
    uniform over the range plus zero. `seed` is anything numpy accepts as a
    seed (an int or a sequence such as [seed, trial]).
    """
    nonzero, arbitrary = _value_pools(value_range)
    rng = np.random.default_rng(seed)
    entries = g.entries
    a = np.zeros((g.n, g.n), dtype=np.int64)
    solid = entries == PatternEntry.NONZERO
    dashed = entries == PatternEntry.ARBITRARY
    a[solid] = rng.choice(nonzero, size=int(solid.sum()))
    a[dashed] = rng.choice(arbitrary, size=int(dashed.sum()))
    return Realization(a=a, b=build_b(inputs, g.n))


def controllability_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[B, AB, ..., A^{n-1}B], in int64 when the entries provably fit."""
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise InvalidInputError(f"shape mismatch: A is {a.shape}, B is {b.shape}")
    alpha = int(np.abs(a).max(initial=0))
    beta = int(np.abs(b).max(initial=0))
    # entries of A^k B are bounded by (n * alpha)^k * beta * m
    bound = max(1, n * alpha) ** max(n - 1, 0) * max(beta, 1) * max(b.shape[1], 1)
    if bound < _INT64_SAFE:
        a_, b_ = a.astype(np.int64), b.astype(np.int64)
    else:
        a_, b_ = a.astype(object), b.astype(object)
    blocks = [b_]
    for _ in range(n - 1):
        blocks.append(a_ @ blocks[-1])
    return np.concatenate(blocks, axis=1) if b.shape[1] else np.zeros((n, 0), dtype=np.int64)


def rank_exact(m) -> int:
    """Rank of an integer matrix by Bareiss elimination with exact division."""
    rows: List[List[int]] = [[int(x) for x in row] for row in np.asarray(m, dtype=object).tolist()]
    if not rows or not rows[0]:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, n_rows):
            factor = rows[r][col]
            rows[r] = [(p * rows[r][c] - factor * rows[rank][c]) // prev for c in range(n_cols)]
        prev = p
        rank += 1
    return rank


def kalman_check(
    g: PatternGraph,
    inputs: Sequence[int],
    trials: int = 20,
    seed: int = 0,
    value_range: Tuple[int, int] = DEFAULT_VALUE_RANGE,
    max_nodes: int = MAX_NODES,
) -> RankReport:
    if g.n > max_nodes:
        raise BudgetExceededError("node", max_nodes, g.n)
    if trials < 1:
        raise InvalidInputError(f"trials must be positive, got {trials}")
    chosen = InputSet.of(inputs, g.n)
    zfs = is_zfs(g, chosen)
    full = 0
    min_rank = g.n
    for t in range(trials):
        real = sample_realization(g, [seed, t], value_range, chosen)
        rank = rank_exact(controllability_matrix(real.a, real.b))
        full += rank == g.n
        min_rank = min(min_rank, rank)
        if zfs and rank < g.n:
            logger.error(f"Trial {t}: ZFS {chosen} gave rank {rank} < {g.n}")
    return RankReport(trials=trials, full_rank_count=full, min_rank=min_rank, pattern_z_condition=zfs)
