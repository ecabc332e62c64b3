"""
Zero forcing closure over pattern graphs.

Color change rule: a node v_i forces v_j black when v_j is the only white
node among all out-neighbours of v_i (self-loop and dashed edges included)
and the edge v_i -> v_j is solid. The forcer's own color is not checked;
`strict=True` restores the classical rule where only black nodes force.

A set of input nodes is a zero forcing set (ZFS) when the closure covers
every node in both G and the modified graph G*. The coloring environment
observes the intersection of the two closures.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple, Union

from .errors import InvalidInputError
from .model import ColorState, DerivedSetResult, ForceEvent, InputSet, PatternEntry
from .pattern_graph import PatternGraph, degrees, to_modified

logger = logging.getLogger(__name__)

Inputs = Union[InputSet, Iterable[int]]


def _as_input_set(inputs: Inputs, n: int) -> InputSet:
    result = inputs if isinstance(inputs, InputSet) else InputSet.of(inputs)
    result.check(n)
    return result


def _white_out_counts(g: PatternGraph, colors: Sequence[int]) -> List[int]:
    return [sum(1 for j, _ in outs if not colors[j]) for outs in g.out_adjacency]


def _forced_target(g: PatternGraph, node: int, colors: Sequence[int]) -> int:
    """The unique white out-neighbour of `node` if it hangs on a solid edge, else -1."""
    for j, cls in g.out_adjacency[node]:
        if not colors[j]:
            return j if cls is PatternEntry.NONZERO else -1
    return -1


def applicable_forces(
    g: PatternGraph, colors: ColorState, strict: bool = False
) -> List[ForceEvent]:
    """Every force the rule allows against `colors`, in ascending forcer order."""
    if colors.n != g.n:
        raise InvalidInputError(f"color state has {colors.n} nodes, graph has {g.n}")
    c = colors.colors
    counts = _white_out_counts(g, c)
    events = []
    for i in range(g.n):
        if counts[i] != 1 or (strict and not c[i]):
            continue
        target = _forced_target(g, i, c)
        if target >= 0:
            events.append(ForceEvent(i, target))
    return events


def _closure(
    g: PatternGraph, black: Iterable[int], strict: bool
) -> Tuple[List[int], List[ForceEvent]]:
    colors = [0] * g.n
    for v in black:
        colors[v] = 1
    counts = _white_out_counts(g, colors)
    chronology: List[ForceEvent] = []
    changed = True
    while changed:
        changed = False
        for i in range(g.n):
            if counts[i] != 1 or (strict and not colors[i]):
                continue
            target = _forced_target(g, i, colors)
            if target < 0:
                continue
            colors[target] = 1
            chronology.append(ForceEvent(i, target))
            for k, _ in g.in_adjacency[target]:
                counts[k] -= 1
            changed = True
    return colors, chronology


def derived_set(g: PatternGraph, inputs: Inputs, strict: bool = False) -> DerivedSetResult:
    """Closure of the color change rule starting with `inputs` black.

    Sweeps the nodes in ascending id order, applying each available force
    immediately, until a full sweep changes nothing.
    """
    chosen = _as_input_set(inputs, g.n)
    colors, chronology = _closure(g, chosen, strict)
    return DerivedSetResult(
        initial=ColorState.from_black(g.n, chosen),
        final=ColorState(tuple(colors)),
        chronology=tuple(chronology),
    )


@lru_cache(maxsize=128)
def _modified(g: PatternGraph) -> PatternGraph:
    return to_modified(g)


def closures(g: PatternGraph, inputs: Inputs) -> Tuple[ColorState, ColorState]:
    """Final color states of the closure in G and in G*."""
    chosen = _as_input_set(inputs, g.n)
    in_g, _ = _closure(g, chosen, False)
    in_gstar, _ = _closure(_modified(g), chosen, False)
    return ColorState(tuple(in_g)), ColorState(tuple(in_gstar))


def is_zfs(g: PatternGraph, inputs: Inputs) -> bool:
    """True iff the closure is all black in both G and G*."""
    in_g, in_gstar = closures(g, inputs)
    return in_g.all_black() and in_gstar.all_black()


def intersection_state(g: PatternGraph, inputs: Inputs) -> ColorState:
    chosen = _as_input_set(inputs, g.n)
    in_g, in_gstar = closures(g, chosen)
    state = in_g.intersect(in_gstar)
    logger.debug(f"Closure of {len(chosen)} inputs: {state.black_count()}/{g.n} black")
    return state


def zfs_lower_bound(g: PatternGraph) -> Tuple[int, int]:
    """(number of zero in-degree nodes of g, max(1, that number))."""
    count = int((degrees(g).in_degree == 0).sum())
    return count, max(1, count)


def zero_in_degree_nodes(g: PatternGraph) -> List[int]:
    return [int(v) for v in (degrees(g).in_degree == 0).nonzero()[0]]


def replay_chronology(
    g: PatternGraph,
    inputs: Inputs,
    chronology: Iterable[ForceEvent],
    strict: bool = False,
) -> ColorState:
    """Re-apply a chronology one event at a time, checking each precondition."""
    chosen = _as_input_set(inputs, g.n)
    colors = list(ColorState.from_black(g.n, chosen).colors)
    for step, event in enumerate(chronology, start=1):
        if not (0 <= event.forcer < g.n and 0 <= event.forced < g.n):
            raise InvalidInputError(f"step {step}: node id out of range in {event}")
        if colors[event.forced]:
            raise InvalidInputError(f"step {step}: node {event.forced} is already black")
        if strict and not colors[event.forcer]:
            raise InvalidInputError(f"step {step}: forcer {event.forcer} is white")
        whites = [j for j, _ in g.out_adjacency[event.forcer] if not colors[j]]
        if whites != [event.forced] or _forced_target(g, event.forcer, colors) != event.forced:
            raise InvalidInputError(
                f"step {step}: {event.forcer} cannot force {event.forced} "
                f"(white out-neighbours {whites})"
            )
        colors[event.forced] = 1
    return ColorState(tuple(colors))
