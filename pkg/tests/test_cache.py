import threading

import pytest

from zforce.cache import ClosureCache, cached_closure, closure_cache
from zforce.pattern_graph import isolated_nodes
from zforce.zero_forcing import intersection_state


class TestClosureCache:
    def test_key_ignores_order(self):
        assert ClosureCache.key("abc", [2, 0, 1]) == ClosureCache.key("abc", (0, 1, 2))

    def test_get_miss_then_hit(self):
        cache = ClosureCache()
        key = ClosureCache.key("g", [0])
        assert cache.get(key) is None
        cache.set(key, "state")
        assert cache.get(key) == "state"
        stats = cache.get_stats()
        assert stats["hits"] == 1
        assert stats["misses"] == 1
        assert stats["hit_rate"] == 0.5
        assert stats["entries"] == 1

    def test_lru_eviction(self):
        cache = ClosureCache(max_entries=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")
        cache.set("c", 3)
        assert cache.get("b") is None
        assert cache.get("a") == 1
        assert cache.get_stats()["evictions"] == 1
        assert len(cache) == 2

    def test_resize_evicts_oldest(self):
        cache = ClosureCache(max_entries=4)
        for i in range(4):
            cache.set(ClosureCache.key("g", [i]), i)
        cache.resize(2)
        assert len(cache) == 2
        assert cache.get(ClosureCache.key("g", [0])) is None
        assert cache.get(ClosureCache.key("g", [3])) == 3
        assert cache.get_stats()["evictions"] == 2
        with pytest.raises(ValueError):
            cache.resize(0)

    def test_stats_per_graph(self):
        cache = ClosureCache()
        cache.set(ClosureCache.key("g1", [0]), 1)
        cache.get(ClosureCache.key("g1", [0]))
        cache.get(ClosureCache.key("g1", [0]))
        cache.get(ClosureCache.key("g1", [1]))
        cache.get(ClosureCache.key("g2", [0]))
        g1 = cache.get_stats("g1")
        assert (g1["hits"], g1["misses"], g1["entries"]) == (2, 1, 1)
        assert g1["hit_rate"] == pytest.approx(2 / 3)
        assert cache.get_stats("g2")["hit_rate"] == 0.0
        assert cache.get_stats("unseen")["entries"] == 0
        overall = cache.get_stats()
        assert (overall["hits"], overall["misses"], overall["graphs"]) == (2, 2, 2)

    def test_invalidate_one_graph(self):
        cache = ClosureCache()
        cache.set(ClosureCache.key("g1", [0]), 1)
        cache.set(ClosureCache.key("g1", [1]), 2)
        cache.set(ClosureCache.key("g2", [0]), 3)
        cache.invalidate("g1")
        assert len(cache) == 1
        cache.invalidate()
        assert len(cache) == 0

    def test_reset_stats(self):
        cache = ClosureCache()
        cache.get("missing")
        cache.reset_stats()
        assert cache.get_stats()["misses"] == 0

    def test_rejects_empty_capacity(self):
        with pytest.raises(ValueError):
            ClosureCache(max_entries=0)

    def test_concurrent_sets_respect_capacity(self):
        cache = ClosureCache(max_entries=50)

        def fill(offset):
            for i in range(200):
                cache.set((offset, i), i)

        threads = [threading.Thread(target=fill, args=(t,)) for t in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cache) == 50
        assert cache.get_stats()["sets"] == 800


class TestCachedClosure:
    def test_function_runs_once_per_set(self, path3):
        calls = []

        @cached_closure(ClosureCache())
        def state(g, inputs):
            calls.append(inputs)
            return intersection_state(g, inputs)

        first = state(path3, [1, 2])
        second = state(path3, (2, 1))
        assert first == second
        assert len(calls) == 1

    def test_graphs_do_not_share_entries(self, path3):
        cached = cached_closure(ClosureCache())(intersection_state)
        assert cached(path3, []).colors == (0, 1, 1)
        assert cached(isolated_nodes(3), []).colors == (0, 0, 0)

    def test_default_cache_is_global(self, path3):
        cached = cached_closure()(intersection_state)
        cached(path3, [0])
        assert len(closure_cache) == 1
