"""
Coloring MDP over a fixed pattern graph.

An episode starts from an empty input set. Each action adds one node to the
input set; the next state is the intersection of the closures in G and G*.
Every step costs -1 until both closures are complete, which pays 100 and
ends the episode.
"""

import logging
from typing import Iterable, List, Optional, Sequence

from .cache import ClosureCache, cached_closure, closure_cache
from .errors import InvalidActionError, InvalidInputError
from .model import ColorState, EnvState, InputSet, StepOutcome
from .pattern_graph import PatternGraph
from .zero_forcing import intersection_state

logger = logging.getLogger(__name__)

REWARD_COMPLETE = 100.0
REWARD_STEP = -1.0


def reset(g: PatternGraph, cache: Optional[ClosureCache] = None) -> EnvState:
    return ColoringEnv(g, cache=cache).reset()


def valid_actions(s: EnvState, mask_derived: bool = False) -> List[int]:
    """Nodes not yet chosen; with `mask_derived`, also only white ones."""
    return [
        v
        for v in range(s.colors.n)
        if v not in s.chosen and not (mask_derived and s.colors.is_black(v))
    ]


def step(g: PatternGraph, s: EnvState, a: int, mask_derived: bool = False) -> StepOutcome:
    return ColoringEnv(g, mask_derived=mask_derived).step(s, a)


def episode_return(rewards: Sequence[float], gamma: float) -> List[float]:
    """Discounted suffix sums R_k = r_k + gamma * R_{k+1}."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidInputError(f"discount must lie in [0, 1], got {gamma}")
    returns = [0.0] * len(rewards)
    running = 0.0
    for k in range(len(rewards) - 1, -1, -1):
        running = rewards[k] + gamma * running
        returns[k] = running
    return returns


class ColoringEnv:
    """Environment bound to one graph.

    States are immutable EnvState values, so one env can serve many
    episodes and rollouts side by side.
    """

    def __init__(
        self,
        g: PatternGraph,
        mask_derived: bool = False,
        cache: Optional[ClosureCache] = None,
    ):
        self.g = g
        self.mask_derived = mask_derived
        self._state_of = cached_closure(cache if cache is not None else closure_cache)(
            intersection_state
        )

    @property
    def n(self) -> int:
        return self.g.n

    def state_for(self, chosen: Iterable[int]) -> EnvState:
        inputs = InputSet.of(chosen, self.g.n)
        colors: ColorState = self._state_of(self.g, inputs)
        return EnvState(colors=colors, chosen=inputs, step=len(inputs))

    def reset(self) -> EnvState:
        return self.state_for(())

    def valid_actions(self, s: EnvState) -> List[int]:
        return valid_actions(s, self.mask_derived)

    def step(self, s: EnvState, a: int) -> StepOutcome:
        if a not in self.valid_actions(s):
            raise InvalidActionError(f"action {a} is not valid in state with inputs [{s.chosen}]")
        nxt = self.state_for(s.chosen.nodes + (a,))
        done = nxt.colors.all_black()
        reward = REWARD_COMPLETE if done else REWARD_STEP
        terminal = done or len(nxt.chosen) == self.g.n
        return StepOutcome(next=nxt, reward=reward, terminal=terminal)
