"""
Bounded memo for closure computations.

The coloring environment asks for the intersection state of the same input
sets over and over across episodes. ClosureCache keeps those states in a
thread-safe LRU keyed by (graph fingerprint, input set) so repeated queries
skip both closure runs.

Architecture:
- ClosureCache: RLock-guarded OrderedDict with hit/miss/set/eviction stats,
  overall and per graph fingerprint
- closure_cache: process-wide default instance, sized from `cache.max_entries`
  by the CLI
- cached_closure: decorator memoizing `fn(g, inputs)` through a cache
"""

import logging
import threading
from collections import Counter, OrderedDict, defaultdict
from functools import wraps
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, Optional, Tuple

logger = logging.getLogger(__name__)

CacheKey = Tuple[str, FrozenSet[int]]

DEFAULT_MAX_ENTRIES = 50_000


def _graph_of(key: Hashable) -> Optional[str]:
    return key[0] if isinstance(key, tuple) and key and isinstance(key[0], str) else None


class ClosureCache:
    """Thread-safe LRU cache of immutable closure results."""

    def __init__(self, max_entries: int = DEFAULT_MAX_ENTRIES):
        if max_entries < 1:
            raise ValueError("max_entries must be positive")
        self.max_entries = max_entries
        self._cache: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.RLock()
        self._totals: Counter = Counter()
        self._by_graph: Dict[str, Counter] = defaultdict(Counter)

    @staticmethod
    def key(fingerprint: str, inputs: Iterable[int]) -> CacheKey:
        return fingerprint, frozenset(inputs)

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            outcome = "hits" if key in self._cache else "misses"
            self._count(key, outcome)
            if outcome == "misses":
                return None
            self._cache.move_to_end(key)
            return self._cache[key]

    def set(self, key: Hashable, value: Any) -> None:
        with self._lock:
            self._cache[key] = value
            self._cache.move_to_end(key)
            self._count(key, "sets")
            self._evict()

    def resize(self, max_entries: int) -> None:
        """Change the capacity, evicting least recently used entries to fit."""
        if max_entries < 1:
            raise ValueError("max_entries must be positive")
        with self._lock:
            self.max_entries = max_entries
            self._evict()

    def _evict(self) -> None:
        while len(self._cache) > self.max_entries:
            old, _ = self._cache.popitem(last=False)
            self._count(old, "evictions")

    def _count(self, key: Hashable, outcome: str) -> None:
        self._totals[outcome] += 1
        graph = _graph_of(key)
        if graph is not None:
            self._by_graph[graph][outcome] += 1

    def invalidate(self, fingerprint: Optional[str] = None) -> None:
        """Drop every entry, or only those of one graph."""
        with self._lock:
            if fingerprint is None:
                self._cache.clear()
                logger.debug("Closure cache cleared")
                return
            stale = [k for k in self._cache if _graph_of(k) == fingerprint]
            for k in stale:
                del self._cache[k]
            logger.debug(f"Invalidated {len(stale)} closure entries for graph {fingerprint}")

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)

    def get_stats(self, fingerprint: Optional[str] = None) -> Dict[str, Any]:
        """Counters for the whole cache, or for the entries of one graph.

        `hit_rate` is hits over lookups (0.0 before the first lookup).
        """
        with self._lock:
            if fingerprint is None:
                counts = self._totals
                entries = len(self._cache)
            else:
                counts = self._by_graph.get(fingerprint, Counter())
                entries = sum(1 for k in self._cache if _graph_of(k) == fingerprint)
            lookups = counts["hits"] + counts["misses"]
            stats: Dict[str, Any] = {
                outcome: counts[outcome] for outcome in ("hits", "misses", "sets", "evictions")
            }
            stats["entries"] = entries
            stats["hit_rate"] = counts["hits"] / lookups if lookups else 0.0
            if fingerprint is None:
                stats["graphs"] = len(self._by_graph)
            return stats

    def reset_stats(self) -> None:
        with self._lock:
            self._totals.clear()
            self._by_graph.clear()


closure_cache = ClosureCache()


def cached_closure(cache: Optional[ClosureCache] = None) -> Callable:
    """Memoize `fn(g, inputs)` on (g.fingerprint(), frozenset(inputs)).

    Only for functions whose result depends on the input nodes as a set.
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(g, inputs):
            store = cache if cache is not None else closure_cache
            nodes = tuple(inputs)
            key = ClosureCache.key(g.fingerprint(), nodes)
            hit = store.get(key)
            if hit is not None:
                return hit
            result = func(g, nodes)
            store.set(key, result)
            return result

        return wrapper

    return decorator
