"""
Directed graph network for the coloring policy and value function.

Each layer mixes three views of a node: the mean over its out-neighbours,
the mean over its in-neighbours and itself,

    H' = relu(A_out H W_out + A_in H W_in + H W_self + b)

where A_out / A_in are the row-normalized out/in indicator matrices
(self-loops included). The actor and the critic are separate towers of such
layers: the actor scores every node with a linear head and normalizes over
the valid actions, the critic mean-pools the node embeddings into a scalar.

Everything is float64 numpy with hand-written backpropagation; checkpoints
are `.npz` archives with a JSON architecture descriptor.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CheckpointError, InvalidInputError
from .model import ColorState, EnvState
from .pattern_graph import PatternGraph, degrees

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_LAYER_KEYS = ("w_out", "w_in", "w_self", "bias")


@dataclass(frozen=True)
class FeatureOptions:
    """Node input channels: one-hot color, optionally normalized in/out degree."""

    degree_channels: bool = True

    @property
    def width(self) -> int:
        return 4 if self.degree_channels else 2


@dataclass(frozen=True)
class Architecture:
    hidden: Tuple[int, ...] = (32, 32)
    features: FeatureOptions = field(default_factory=FeatureOptions)

    def __post_init__(self) -> None:
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise InvalidInputError(f"hidden widths must be positive, got {self.hidden}")

    def widths(self) -> List[int]:
        return [self.features.width, *self.hidden]

    def to_dict(self) -> Dict[str, object]:
        return {"hidden": list(self.hidden), "degree_channels": self.features.degree_channels}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Architecture":
        return cls(
            hidden=tuple(int(h) for h in data["hidden"]),  # type: ignore[union-attr]
            features=FeatureOptions(degree_channels=bool(data["degree_channels"])),
        )


@dataclass
class LayerParams:
    w_out: np.ndarray
    w_in: np.ndarray
    w_self: np.ndarray
    bias: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        return [self.w_out, self.w_in, self.w_self, self.bias]


@dataclass
class Tower:
    """Stack of layers plus a linear read-out (head weights and scalar bias)."""

    layers: List[LayerParams]
    head: np.ndarray
    head_bias: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        out = [a for layer in self.layers for a in layer.arrays()]
        return out + [self.head, self.head_bias]

    def named_arrays(self, prefix: str) -> List[Tuple[str, np.ndarray]]:
        named = []
        for idx, layer in enumerate(self.layers):
            for key, arr in zip(_LAYER_KEYS, layer.arrays()):
                named.append((f"{prefix}.layer{idx}.{key}", arr))
        named.append((f"{prefix}.head", self.head))
        named.append((f"{prefix}.head_bias", self.head_bias))
        return named

    def copy(self) -> "Tower":
        return Tower(
            layers=[LayerParams(*(a.copy() for a in layer.arrays())) for layer in self.layers],
            head=self.head.copy(),
            head_bias=self.head_bias.copy(),
        )

    def zeros_like(self) -> "Tower":
        return Tower(
            layers=[LayerParams(*(np.zeros_like(a) for a in layer.arrays())) for layer in self.layers],
            head=np.zeros_like(self.head),
            head_bias=np.zeros_like(self.head_bias),
        )

    def add_scaled(self, other: "Tower", alpha: float) -> None:
        """In place: self += alpha * other."""
        for mine, theirs in zip(self.arrays(), other.arrays()):
            mine += alpha * theirs


@dataclass
class ModelParams:
    arch: Architecture
    actor: Tower
    critic: Tower

    @classmethod
    def init(cls, arch: Architecture, seed: int) -> "ModelParams":
        """Glorot-uniform weights, zero biases, actor and critic drawn in turn."""
        rng = np.random.default_rng(seed)
        return cls(arch=arch, actor=_init_tower(arch, rng), critic=_init_tower(arch, rng))

    def named_arrays(self) -> List[Tuple[str, np.ndarray]]:
        return self.actor.named_arrays("actor") + self.critic.named_arrays("critic")

    def copy(self) -> "ModelParams":
        return ModelParams(arch=self.arch, actor=self.actor.copy(), critic=self.critic.copy())


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _init_tower(arch: Architecture, rng: np.random.Generator) -> Tower:
    widths = arch.widths()
    layers = []
    for f_in, f_out in zip(widths[:-1], widths[1:]):
        layers.append(
            LayerParams(
                w_out=_glorot(rng, f_in, f_out, (f_in, f_out)),
                w_in=_glorot(rng, f_in, f_out, (f_in, f_out)),
                w_self=_glorot(rng, f_in, f_out, (f_in, f_out)),
                bias=np.zeros(f_out),
            )
        )
    d = widths[-1]
    return Tower(layers=layers, head=_glorot(rng, d, 1, (d,)), head_bias=np.zeros(1))


# --- graph operators and features ---


@dataclass(frozen=True)
class GraphOperators:
    a_out: np.ndarray  # a_out[i, j] = 1/outdeg(i) for each edge i -> j
    a_in: np.ndarray  # a_in[i, j] = 1/indeg(i) for each edge j -> i
    in_degree: np.ndarray
    out_degree: np.ndarray


def _row_normalize(m: np.ndarray) -> np.ndarray:
    sums = m.sum(axis=1, keepdims=True)
    return np.divide(m, sums, out=np.zeros_like(m), where=sums > 0)


@lru_cache(maxsize=64)
def graph_operators(g: PatternGraph) -> GraphOperators:
    adj = g.adjacency()
    deg = degrees(g)
    return GraphOperators(
        a_out=_row_normalize(adj),
        a_in=_row_normalize(adj.T.copy()),
        in_degree=deg.in_degree.astype(np.float64),
        out_degree=deg.out_degree.astype(np.float64),
    )


def features_from_state(
    g: PatternGraph,
    s: Union[EnvState, ColorState],
    options: Optional[FeatureOptions] = None,
) -> np.ndarray:
    """n x F node features: white -> (1, 0), black -> (0, 1), then degree channels."""
    options = options or FeatureOptions()
    colors = s.colors if isinstance(s, EnvState) else s
    if colors.n != g.n:
        raise InvalidInputError(f"state has {colors.n} nodes, graph has {g.n}")
    black = colors.as_array()
    cols = [1.0 - black, black]
    if options.degree_channels:
        ops = graph_operators(g)
        scale = max(1.0, float(ops.in_degree.max(initial=0.0)), float(ops.out_degree.max(initial=0.0)))
        cols += [ops.in_degree / scale, ops.out_degree / scale]
    return np.stack(cols, axis=1)


# --- forward passes ---


@dataclass
class _LayerCache:
    h: np.ndarray
    agg_out: np.ndarray
    agg_in: np.ndarray
    pre: np.ndarray


def _check_layer(h: np.ndarray, n: int, p: LayerParams) -> None:
    if h.ndim != 2 or h.shape[0] != n:
        raise InvalidInputError(f"layer input must have {n} rows, got shape {h.shape}")
    if h.shape[1] != p.w_self.shape[0]:
        raise InvalidInputError(f"layer expects {p.w_self.shape[0]} features, got {h.shape[1]}")


def _layer(ops: GraphOperators, h: np.ndarray, p: LayerParams) -> Tuple[np.ndarray, _LayerCache]:
    agg_out = ops.a_out @ h
    agg_in = ops.a_in @ h
    pre = agg_out @ p.w_out + agg_in @ p.w_in + h @ p.w_self + p.bias
    return np.maximum(pre, 0.0), _LayerCache(h, agg_out, agg_in, pre)


def forward_layer(h: np.ndarray, g: PatternGraph, p: LayerParams) -> np.ndarray:
    _check_layer(h, g.n, p)
    out, _ = _layer(graph_operators(g), h, p)
    return out


def embeddings(g: PatternGraph, u: np.ndarray, tower: Tower) -> np.ndarray:
    """Final-layer node embeddings Z."""
    z, _ = _embed(g, u, tower)
    return z


def _embed(g: PatternGraph, u: np.ndarray, tower: Tower) -> Tuple[np.ndarray, List[_LayerCache]]:
    ops = graph_operators(g)
    h = u
    caches = []
    for p in tower.layers:
        _check_layer(h, g.n, p)
        h, cache = _layer(ops, h, p)
        caches.append(cache)
    return h, caches


def _mask_indices(mask: Iterable[int], n: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(v) for v in mask)), dtype=np.int64)
    if idx.size == 0:
        raise InvalidInputError("action mask is empty")
    if idx[0] < 0 or idx[-1] >= n:
        raise InvalidInputError(f"action mask has ids outside 0..{n - 1}")
    return idx


def _masked_softmax(logits: np.ndarray, idx: np.ndarray) -> np.ndarray:
    probs = np.zeros_like(logits)
    sub = logits[idx] - logits[idx].max()
    e = np.exp(sub)
    probs[idx] = e / e.sum()
    return probs


def actor_forward(g: PatternGraph, u: np.ndarray, actor: Tower, mask: Iterable[int]) -> np.ndarray:
    """Probability vector over nodes; exactly zero outside the mask."""
    idx = _mask_indices(mask, g.n)
    z, _ = _embed(g, u, actor)
    return _masked_softmax(z @ actor.head + actor.head_bias[0], idx)


def critic_forward(g: PatternGraph, u: np.ndarray, critic: Tower) -> float:
    z, _ = _embed(g, u, critic)
    return float(z.mean(axis=0) @ critic.head + critic.head_bias[0])


# --- backward passes ---


def _backprop(
    ops: GraphOperators, tower: Tower, caches: List[_LayerCache], dz: np.ndarray, grads: Tower
) -> None:
    dh = dz
    for p, cache, gp in zip(reversed(tower.layers), reversed(caches), reversed(grads.layers)):
        dpre = dh * (cache.pre > 0.0)
        gp.w_out += cache.agg_out.T @ dpre
        gp.w_in += cache.agg_in.T @ dpre
        gp.w_self += cache.h.T @ dpre
        gp.bias += dpre.sum(axis=0)
        dh = ops.a_out.T @ (dpre @ p.w_out.T) + ops.a_in.T @ (dpre @ p.w_in.T) + dpre @ p.w_self.T


def log_softmax_grad(probs: np.ndarray, action: int) -> np.ndarray:
    """d log pi(action) / d logits; zero at masked-out nodes."""
    d = -probs.copy()
    d[action] += 1.0
    return d


def actor_gradients(
    g: PatternGraph,
    u: np.ndarray,
    actor: Tower,
    mask: Iterable[int],
    action: int,
    seed: float = 1.0,
) -> Tuple[float, Tower]:
    """log pi(action | u) and seed * its gradient w.r.t. the actor tower."""
    idx = _mask_indices(mask, g.n)
    if action not in set(idx.tolist()):
        raise InvalidInputError(f"action {action} is outside the mask")
    z, caches = _embed(g, u, actor)
    probs = _masked_softmax(z @ actor.head + actor.head_bias[0], idx)
    dlogits = seed * log_softmax_grad(probs, action)
    grads = actor.zeros_like()
    grads.head += z.T @ dlogits
    grads.head_bias += dlogits.sum()
    _backprop(graph_operators(g), actor, caches, np.outer(dlogits, actor.head), grads)
    return float(np.log(probs[action])), grads


def critic_gradients(g: PatternGraph, u: np.ndarray, critic: Tower, seed: float = 1.0) -> Tuple[float, Tower]:
    """V(u) and seed * its gradient w.r.t. the critic tower."""
    z, caches = _embed(g, u, critic)
    pooled = z.mean(axis=0)
    value = float(pooled @ critic.head + critic.head_bias[0])
    grads = critic.zeros_like()
    grads.head += seed * pooled
    grads.head_bias += seed
    dz = np.tile(seed * critic.head / g.n, (g.n, 1))
    _backprop(graph_operators(g), critic, caches, dz, grads)
    return value, grads


def gradients(
    g: PatternGraph,
    u: np.ndarray,
    tower: Tower,
    seed: float = 1.0,
    mask: Optional[Iterable[int]] = None,
    action: Optional[int] = None,
) -> Tower:
    """Seeded parameter gradient: of log pi(action) when an action is given, else of V."""
    if action is None:
        return critic_gradients(g, u, tower, seed)[1]
    return actor_gradients(g, u, tower, mask if mask is not None else range(g.n), action, seed)[1]


def global_norm(grads: Sequence[Tower]) -> float:
    return float(np.sqrt(sum(float(np.sum(a * a)) for t in grads for a in t.arrays())))


def clip_by_global_norm(grads: Tower, max_norm: float) -> float:
    """Scale `grads` in place so its norm is at most max_norm; returns the original norm."""
    norm = global_norm([grads])
    if norm > max_norm > 0.0:
        scale = max_norm / norm
        for a in grads.arrays():
            a *= scale
    return norm


def all_finite(grads: Tower) -> bool:
    return all(np.all(np.isfinite(a)) for a in grads.arrays())


# --- checkpoints ---


def save_checkpoint(params: ModelParams, path: Union[str, Path]) -> None:
    meta = {"format_version": FORMAT_VERSION, "architecture": params.arch.to_dict()}
    arrays = {name: arr for name, arr in params.named_arrays()}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    logger.info(f"Saved checkpoint to {path}")


def load_checkpoint(path: Union[str, Path]) -> ModelParams:
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["__meta__"]))
            if meta.get("format_version") != FORMAT_VERSION:
                raise CheckpointError(f"unsupported checkpoint format {meta.get('format_version')!r}")
            arch = Architecture.from_dict(meta["architecture"])
            params = ModelParams.init(arch, seed=0)
            for name, arr in params.named_arrays():
                if name not in data:
                    raise CheckpointError(f"checkpoint is missing {name}")
                stored = data[name]
                if stored.shape != arr.shape:
                    raise CheckpointError(f"{name} has shape {stored.shape}, expected {arr.shape}")
                arr[...] = stored
    except CheckpointError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return params
