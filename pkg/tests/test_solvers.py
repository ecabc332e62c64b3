import itertools
import time

import numpy as np
import pytest

from zforce.errors import BudgetExceededError
from zforce.model import InputSet, PatternEntry
from zforce.pattern_graph import (
    EdgePolicy,
    PatternGraph,
    cycle_graph,
    from_edge_list,
    generate_er,
    isolated_nodes,
    out_star,
)
from zforce.solvers import exact_minimum, greedy_degree, validate
from zforce.zero_forcing import is_zfs


def small_graphs(count, max_n=9, seed=7, arbitrary_fraction=0.25):
    rng = np.random.default_rng(seed)
    for trial in range(count):
        n = int(rng.integers(2, max_n + 1))
        p = float(rng.uniform(0.1, 0.45))
        yield generate_er(n, p, seed=1000 + trial, policy=EdgePolicy(arbitrary_fraction))


class TestGreedy:
    def test_path_needs_one_input(self, path3):
        result = greedy_degree(path3)
        assert result.inputs == InputSet.of([0])
        assert result.size == 1
        assert result.eta == pytest.approx(1 / 3)
        assert result.method == "greedy"

    def test_star_takes_hub_then_lowest_leaves(self, star3):
        assert greedy_degree(star3).inputs == InputSet.of([0, 1, 2])

    def test_isolated_nodes_all_mandatory(self):
        assert greedy_degree(isolated_nodes(4)).size == 4

    def test_result_is_always_a_zfs(self):
        for g in small_graphs(40, max_n=20):
            result = greedy_degree(g)
            assert is_zfs(g, result.inputs)
            assert 1 <= result.size <= g.n


class TestExact:
    def test_path(self, path3):
        result = exact_minimum(path3)
        assert result.inputs == InputSet.of([0])
        assert result.method == "exact"

    def test_cycle_needs_one(self):
        assert exact_minimum(cycle_graph(3)).inputs == InputSet.of([0])

    @pytest.mark.parametrize("leaves", [2, 3, 4, 5, 6])
    def test_star_law(self, leaves):
        result = exact_minimum(out_star(leaves))
        assert result.size == leaves
        assert result.inputs == InputSet.of(range(leaves))

    def test_never_worse_than_greedy(self):
        for g in small_graphs(30):
            assert exact_minimum(g).size <= greedy_degree(g).size

    def test_answer_is_minimal(self):
        for g in small_graphs(15, max_n=7):
            z = exact_minimum(g).size
            smaller = itertools.combinations(range(g.n), z - 1)
            assert not any(is_zfs(g, c) for c in smaller)

    def test_invariant_under_relabelling(self):
        rng = np.random.default_rng(3)
        for g in small_graphs(20):
            perm = rng.permutation(g.n)
            assert exact_minimum(g.relabel(perm)).size == exact_minimum(g).size

    def test_dashing_an_edge_never_helps(self):
        for g in small_graphs(20, arbitrary_fraction=0.0):
            solid = g.solid_edges()
            if not solid:
                continue
            i, j = solid[0]
            entries = g.entries.copy()
            entries[j, i] = PatternEntry.ARBITRARY
            dashed = PatternGraph(entries)
            assert exact_minimum(dashed).size >= exact_minimum(g).size

    def test_node_budget(self):
        g = isolated_nodes(16)
        with pytest.raises(BudgetExceededError) as excinfo:
            exact_minimum(g)
        assert excinfo.value.budget == "node"
        assert excinfo.value.limit == 15
        assert excinfo.value.actual == 16
        assert excinfo.value.exit_code == 3

    def test_node_budget_can_be_raised(self):
        assert exact_minimum(isolated_nodes(16), node_budget=16).size == 16

    def test_time_budget(self, mocker, path3):
        clock = mocker.patch("zforce.solvers.time")
        clock.perf_counter.side_effect = itertools.count(0.0, 30.0)
        with pytest.raises(BudgetExceededError, match="time budget exceeded"):
            exact_minimum(path3, time_budget=10.0)

    def test_time_budget_with_worker_pool(self):
        """The pool stops at the deadline instead of finishing the cardinality."""
        entries = np.ones((20, 20), dtype=np.int8)
        np.fill_diagonal(entries, 0)
        start = time.perf_counter()
        with pytest.raises(BudgetExceededError) as excinfo:
            exact_minimum(PatternGraph(entries), node_budget=20, time_budget=0.5, workers=2)
        assert excinfo.value.budget == "time"
        assert excinfo.value.actual < 0.9
        assert time.perf_counter() - start < 2.0

    def test_worker_pool_gives_same_answer(self):
        for g in small_graphs(3, max_n=10, seed=21):
            assert exact_minimum(g, workers=2).inputs == exact_minimum(g).inputs


class TestValidate:
    def test_valid_set(self, path3):
        report = validate(path3, [0])
        assert report.valid and report.g_ok and report.gstar_ok
        assert report.uncolored_g == () and report.uncolored_gstar == ()

    def test_last_node_only(self, path3):
        report = validate(path3, [2])
        assert not report.valid
        assert not report.g_ok
        assert report.gstar_ok
        assert report.uncolored_g == (0,)
        assert report.uncolored_gstar == ()

    def test_dashed_edge_leaves_target_white(self):
        report = validate(from_edge_list("n 2\n0 1 ?"), [0])
        assert report.uncolored_g == (1,)
        assert not report.valid
