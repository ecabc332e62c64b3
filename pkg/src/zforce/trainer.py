"""
One-step actor-critic training on the coloring MDP.

For each sampled episode the TD errors psi_k = r_k + gamma V(s_{k+1}) - V(s_k)
(with V(s_{k+1}) = 0 on the terminal step) weight both updates:

    actor:  theta += lr_actor  * sum_k psi_k grad log pi(a_k | s_k)
    critic: omega += lr_critic * sum_k psi_k grad V(s_k)

Gradients are summed over an episode (or a batch of episodes), checked for
finiteness and clipped by global norm before they are applied. Every
terminal input set seen during training is a valid ZFS; the smallest one is
kept as the answer.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .cache import closure_cache
from .config import TrainConfig
from .errors import NonFiniteGradientError
from .gnn import (
    Architecture,
    FeatureOptions,
    ModelParams,
    Tower,
    actor_forward,
    actor_gradients,
    all_finite,
    clip_by_global_norm,
    critic_forward,
    critic_gradients,
    features_from_state,
)
from .model import EpisodeTrace, InputSet, SolveResult, TraceStep
from .pattern_graph import PatternGraph
from .rl_env import REWARD_COMPLETE, ColoringEnv, episode_return
from .zero_forcing import is_zfs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpisodeLog:
    """One training episode. `terminal_reward` is the last step's reward (0.0
    for an empty episode); the CSV row leaves it out."""

    episode: int
    length: int
    ret: float
    best_z: int
    terminal_reward: float = 0.0

    def to_row(self) -> List[str]:
        return [str(self.episode), str(self.length), f"{self.ret:.6f}", str(self.best_z)]


@dataclass
class TrainReport:
    params: ModelParams
    best: InputSet
    log: List[EpisodeLog] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def best_z(self) -> int:
        return len(self.best)

    def to_result(self, n: int) -> SolveResult:
        return SolveResult(
            inputs=self.best,
            size=len(self.best),
            eta=len(self.best) / n,
            method="rl",
            elapsed=self.wall_time,
        )


class BestTracker:
    """Smallest valid input set offered so far; the earliest one wins ties."""

    def __init__(self, g: PatternGraph):
        self.g = g
        self.best: Optional[InputSet] = None

    def offer(self, inputs: InputSet) -> bool:
        if self.best is not None and len(inputs) >= len(self.best):
            return False
        if not is_zfs(self.g, inputs):
            return False
        self.best = inputs
        return True

    @property
    def size(self) -> int:
        return len(self.best) if self.best is not None else self.g.n


def architecture_for(cfg: TrainConfig) -> Architecture:
    return Architecture(hidden=tuple(cfg.hidden), features=FeatureOptions(cfg.degree_channels))


def td_error(r: float, v_now: float, v_next: float, gamma: float, terminal: bool) -> float:
    return r + (0.0 if terminal else gamma * v_next) - v_now


def run_episode(
    g: PatternGraph,
    params: ModelParams,
    rng: np.random.Generator,
    mask_derived: bool = False,
    greedy: bool = False,
    env: Optional[ColoringEnv] = None,
) -> EpisodeTrace:
    """Roll out one episode, sampling from the policy (argmax when `greedy`)."""
    env = env or ColoringEnv(g, mask_derived=mask_derived)
    options = params.arch.features
    s = env.reset()
    steps: List[TraceStep] = []
    by_reward = s.colors.all_black()
    while not by_reward and len(s.chosen) < g.n:
        actions = env.valid_actions(s)
        probs = actor_forward(g, features_from_state(g, s, options), params.actor, actions)
        p = probs[actions]
        if greedy:
            a = actions[int(np.argmax(p))]
        else:
            a = int(rng.choice(actions, p=p / p.sum()))
        outcome = env.step(s, a)
        steps.append(TraceStep(state=s, action=a, reward=outcome.reward))
        s = outcome.next
        if outcome.terminal:
            by_reward = outcome.reward == REWARD_COMPLETE
            break
    return EpisodeTrace(steps=tuple(steps), final=s, terminal_by_reward=by_reward)


def accumulate_gradients(
    trace: EpisodeTrace,
    g: PatternGraph,
    params: ModelParams,
    cfg: TrainConfig,
    actor_grads: Optional[Tower] = None,
    critic_grads: Optional[Tower] = None,
) -> Tuple[Tower, Tower, List[float]]:
    """Sum psi-weighted gradients of one trace into the given accumulators."""
    actor_grads = actor_grads if actor_grads is not None else params.actor.zeros_like()
    critic_grads = critic_grads if critic_grads is not None else params.critic.zeros_like()
    options = params.arch.features
    env = ColoringEnv(g, mask_derived=cfg.mask_derived)
    feats = [features_from_state(g, s, options) for s in trace.states()]
    values = [critic_forward(g, u, params.critic) for u in feats]
    psis = []
    last = trace.length - 1
    for k, st in enumerate(trace.steps):
        psi = td_error(st.reward, values[k], values[k + 1], cfg.gamma, terminal=k == last)
        psis.append(psi)
        if psi == 0.0:
            continue
        _, ga = actor_gradients(g, feats[k], params.actor, env.valid_actions(st.state), st.action, seed=psi)
        _, gc = critic_gradients(g, feats[k], params.critic, seed=psi)
        actor_grads.add_scaled(ga, 1.0)
        critic_grads.add_scaled(gc, 1.0)
    return actor_grads, critic_grads, psis


def apply_gradients(
    params: ModelParams,
    actor_grads: Tower,
    critic_grads: Tower,
    cfg: TrainConfig,
    episode: Optional[int] = None,
) -> ModelParams:
    """Clip, check and apply ascent steps; returns new parameters."""
    for name, grads in (("actor", actor_grads), ("critic", critic_grads)):
        if not all_finite(grads):
            raise NonFiniteGradientError(f"non-finite {name} gradient", episode=episode)
        norm = clip_by_global_norm(grads, cfg.grad_clip)
        if norm > cfg.grad_clip:
            logger.debug(f"Clipped {name} gradient norm {norm:.3f} to {cfg.grad_clip}")
    updated = params.copy()
    updated.actor.add_scaled(actor_grads, cfg.lr_actor)
    updated.critic.add_scaled(critic_grads, cfg.lr_critic)
    return updated


def update(trace: EpisodeTrace, g: PatternGraph, params: ModelParams, cfg: TrainConfig) -> ModelParams:
    actor_grads, critic_grads, _ = accumulate_gradients(trace, g, params, cfg)
    return apply_gradients(params, actor_grads, critic_grads, cfg)


def greedy_rollout(
    g: PatternGraph,
    params: ModelParams,
    mask_derived: bool = False,
    env: Optional[ColoringEnv] = None,
) -> EpisodeTrace:
    return run_episode(g, params, np.random.default_rng(0), mask_derived=mask_derived, greedy=True, env=env)


def solve_rl(
    g: PatternGraph,
    params: ModelParams,
    mask_derived: bool = False,
    env: Optional[ColoringEnv] = None,
) -> SolveResult:
    """Greedy rollout of the trained policy (argmax, lowest id on ties)."""
    start = time.perf_counter()
    trace = greedy_rollout(g, params, mask_derived, env)
    chosen = trace.final.chosen
    return SolveResult(
        inputs=chosen,
        size=len(chosen),
        eta=len(chosen) / g.n,
        method="rl",
        elapsed=time.perf_counter() - start,
    )


ProgressFn = Callable[[int, int], None]


class _Session:
    """Training state for one graph: env, best set and episode log."""

    def __init__(self, g: PatternGraph, cfg: TrainConfig):
        self.g = g
        self.env = ColoringEnv(g, mask_derived=cfg.mask_derived)
        self.tracker = BestTracker(g)
        self.log: List[EpisodeLog] = []

    def record(self, episode: int, trace: EpisodeTrace, gamma: float) -> None:
        self.tracker.offer(trace.final.chosen)
        rewards = trace.rewards()
        ret = episode_return(rewards, gamma)[0] if rewards else 0.0
        last = rewards[-1] if rewards else 0.0
        self.log.append(EpisodeLog(episode, trace.length, ret, self.tracker.size, last))

    def evaluate(self, episode: int, params: ModelParams, mask_derived: bool) -> None:
        result = solve_rl(self.g, params, mask_derived, env=self.env)
        if self.tracker.offer(result.inputs):
            logger.debug(f"episode {episode}: greedy rollout improved best to {result.size}")
        logger.debug(f"episode {episode}: greedy z={result.size}, best z={self.tracker.size}")


def _train_sessions(
    sessions: Sequence[_Session], cfg: TrainConfig, progress: Optional[ProgressFn]
) -> ModelParams:
    cfg.validate()
    params = ModelParams.init(architecture_for(cfg), cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    actor_grads: Optional[Tower] = None
    critic_grads: Optional[Tower] = None
    for episode in range(1, cfg.episodes + 1):
        session = sessions[(episode - 1) % len(sessions)]
        trace = run_episode(session.g, params, rng, env=session.env)
        session.record(episode, trace, cfg.gamma)
        actor_grads, critic_grads, _ = accumulate_gradients(
            trace, session.g, params, cfg, actor_grads, critic_grads
        )
        if episode % cfg.batch_episodes == 0 or episode == cfg.episodes:
            params = apply_gradients(params, actor_grads, critic_grads, cfg, episode=episode)
            actor_grads = critic_grads = None
        if episode == 1 or episode % cfg.eval_every == 0 or episode == cfg.episodes:
            for s in sessions:
                s.evaluate(episode, params, cfg.mask_derived)
        if progress is not None:
            progress(episode, cfg.episodes)
    return params


def train(g: PatternGraph, cfg: TrainConfig, progress: Optional[ProgressFn] = None) -> TrainReport:
    start = time.perf_counter()
    session = _Session(g, cfg)
    params = _train_sessions([session], cfg, progress)
    assert session.tracker.best is not None
    report = TrainReport(params, session.tracker.best, session.log, time.perf_counter() - start)
    logger.info(f"Training finished: best z={report.best_z} on n={g.n} in {report.wall_time:.1f}s")
    stats = closure_cache.get_stats(g.fingerprint())
    logger.debug(f"Closure cache for this graph: {stats['hit_rate']:.1%} hits, {stats['entries']} states")
    return report


def train_many(
    graphs: Sequence[PatternGraph], cfg: TrainConfig, progress: Optional[ProgressFn] = None
) -> List[TrainReport]:
    """Curriculum over several graphs sharing one set of parameters.

    Episodes visit the graphs round-robin; one report per graph, all holding
    the same final parameters.
    """
    start = time.perf_counter()
    sessions = [_Session(g, cfg) for g in graphs]
    params = _train_sessions(sessions, cfg, progress)
    elapsed = time.perf_counter() - start
    return [
        TrainReport(params, s.tracker.best or InputSet.of(range(s.g.n)), s.log, elapsed) for s in sessions
    ]
