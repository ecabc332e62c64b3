import numpy as np
import pytest

from zforce.errors import InvalidInputError
from zforce.model import ColorState, ForceEvent, InputSet, PatternEntry
from zforce.pattern_graph import (
    EdgePolicy,
    cycle_graph,
    from_edge_list,
    generate_er,
    isolated_nodes,
    out_star,
    to_modified,
)
from zforce.zero_forcing import (
    applicable_forces,
    closures,
    derived_set,
    intersection_state,
    is_zfs,
    replay_chronology,
    zero_in_degree_nodes,
    zfs_lower_bound,
)


def random_cases(count, max_n=30, seed=1234):
    """(graph, input set) pairs over small ER graphs with mixed edge classes."""
    rng = np.random.default_rng(seed)
    for trial in range(count):
        n = int(rng.integers(2, max_n + 1))
        p = float(rng.uniform(0.05, 0.35))
        g = generate_er(n, p, seed=trial, policy=EdgePolicy(arbitrary_fraction=0.3))
        if trial % 2:
            g = to_modified(g)
        size = int(rng.integers(0, n // 2 + 1))
        inputs = sorted(int(v) for v in rng.choice(n, size=size, replace=False))
        yield g, inputs, rng


def closure_in_random_order(g, inputs, rng):
    colors = ColorState.from_black(g.n, inputs)
    while True:
        events = applicable_forces(g, colors)
        if not events:
            return colors
        pick = events[int(rng.integers(len(events)))]
        colors = ColorState.from_black(g.n, colors.black_nodes() | {pick.forced})


class TestApplicableForces:
    def test_path_all_white_fires_twice(self, path3):
        events = applicable_forces(path3, ColorState.white(3))
        assert events == [ForceEvent(0, 1), ForceEvent(1, 2)]

    def test_dashed_edge_never_forces(self):
        g = from_edge_list("n 2\n0 1 ?")
        assert applicable_forces(g, ColorState.white(2)) == []

    def test_two_white_out_neighbours_block(self):
        assert applicable_forces(out_star(2), ColorState.white(3)) == []

    def test_white_dashed_neighbour_counts_towards_uniqueness(self):
        # 0 -> 1 solid and 0 -> 2 dashed: two white out-neighbours
        g = from_edge_list("n 3\n0 1 *\n0 2 ?")
        assert applicable_forces(g, ColorState.white(3)) == []
        assert applicable_forces(g, ColorState.from_black(3, [2])) == [ForceEvent(0, 1)]

    def test_strict_mode_needs_black_forcer(self, path3):
        assert applicable_forces(path3, ColorState.white(3), strict=True) == []
        assert applicable_forces(path3, ColorState.from_black(3, [0]), strict=True) == [ForceEvent(0, 1)]

    def test_length_mismatch(self, path3):
        with pytest.raises(InvalidInputError):
            applicable_forces(path3, ColorState.white(2))


class TestDerivedSet:
    def test_path_from_first_node(self, path3):
        result = derived_set(path3, InputSet.of([0]))
        assert result.final.all_black()
        assert result.chronology == (ForceEvent(0, 1), ForceEvent(1, 2))

    def test_empty_graph_empty_inputs(self):
        assert derived_set(isolated_nodes(4), []).derived_nodes() == frozenset()

    def test_dashed_edge_stops_closure(self):
        g = from_edge_list("n 2\n0 1 ?")
        assert derived_set(g, [0]).derived_nodes() == {0}

    def test_white_forcers_act_on_empty_input(self, path3):
        assert derived_set(path3, []).derived_nodes() == {1, 2}

    def test_strict_mode_from_empty_input(self, path3):
        assert derived_set(path3, [], strict=True).size() == 0
        assert derived_set(path3, [0], strict=True).final.all_black()

    def test_modified_path_self_forces_from_empty_input(self, path3):
        result = derived_set(to_modified(path3), [])
        assert result.final.all_black()
        assert result.chronology[0] == ForceEvent(2, 2)

    def test_out_of_range_input(self, path3):
        with pytest.raises(InvalidInputError):
            derived_set(path3, [3])


class TestZfs:
    def test_path_first_node(self, path3):
        assert is_zfs(path3, [0])

    def test_isolated_nodes_empty_input(self):
        g = isolated_nodes(3)
        in_g, in_gstar = closures(g, [])
        assert in_g.black_count() == 0
        assert in_gstar.all_black()
        assert not is_zfs(g, [])

    def test_star_needs_hub_and_all_but_one_leaf(self, star3):
        assert is_zfs(star3, [0, 1, 2])
        assert not is_zfs(star3, [0, 1])

    def test_all_nodes_always_work(self):
        for g, _, _ in random_cases(20, max_n=12):
            assert is_zfs(g, range(g.n))


class TestIntersectionState:
    def test_complete_when_zfs(self, path3):
        assert intersection_state(path3, [0]).all_black()

    def test_isolated_empty_input_is_all_white(self):
        assert intersection_state(isolated_nodes(3), []).colors == (0, 0, 0)

    def test_isolated_pair(self):
        assert intersection_state(isolated_nodes(2), [0]).colors == (1, 0)

    def test_path_empty_input(self, path3):
        assert intersection_state(path3, []).colors == (0, 1, 1)


class TestLowerBound:
    def test_path(self, path3):
        assert zfs_lower_bound(path3) == (1, 1)

    def test_cycle_floor_is_one(self):
        assert zfs_lower_bound(cycle_graph(3)) == (0, 1)

    def test_star(self, star3):
        assert zfs_lower_bound(star3) == (1, 1)
        assert zero_in_degree_nodes(star3) == [0]

    def test_own_diagonal_counts_as_in_edge(self):
        g = from_edge_list("n 2\ndiag 0 ?\n")
        assert zero_in_degree_nodes(g) == [1]


class TestClosureProperties:
    def test_confluence(self):
        for g, inputs, rng in random_cases(200):
            expected = derived_set(g, inputs).final
            assert closure_in_random_order(g, inputs, rng) == expected

    def test_monotone_in_inputs(self):
        for g, inputs, rng in random_cases(100):
            v = int(rng.integers(g.n))
            smaller = derived_set(g, inputs).derived_nodes()
            larger = derived_set(g, set(inputs) | {v}).derived_nodes()
            assert smaller <= larger

    def test_closure_is_idempotent(self):
        for g, inputs, _ in random_cases(100):
            once = derived_set(g, inputs)
            twice = derived_set(g, sorted(once.derived_nodes()))
            assert twice.size() == once.size()

    def test_zero_in_degree_nodes_are_required(self):
        for g, inputs, _ in random_cases(100):
            missing = set(zero_in_degree_nodes(g)) - set(inputs)
            if missing:
                assert not is_zfs(g, inputs)

    def test_black_never_reverts(self):
        for g, inputs, _ in random_cases(50):
            result = derived_set(g, inputs)
            assert result.initial.black_nodes() <= result.final.black_nodes()

    def test_chronology_replays(self):
        for g, inputs, _ in random_cases(100):
            result = derived_set(g, inputs)
            assert replay_chronology(g, inputs, result.chronology) == result.final


class TestReplayChronology:
    def test_rejects_force_that_is_not_unique(self, path3):
        with pytest.raises(InvalidInputError, match="cannot force"):
            replay_chronology(path3, [0], [ForceEvent(0, 2)])

    def test_rejects_already_black_target(self, path3):
        with pytest.raises(InvalidInputError, match="already black"):
            replay_chronology(path3, [0], [ForceEvent(0, 1), ForceEvent(0, 1)])

    def test_rejects_dashed_force(self):
        g = from_edge_list("n 2\n0 1 ?")
        with pytest.raises(InvalidInputError):
            replay_chronology(g, [0], [ForceEvent(0, 1)])

    def test_white_forcer_allowed_unless_strict(self, path3):
        events = [ForceEvent(1, 2)]
        assert replay_chronology(path3, [], events).black_nodes() == {2}
        with pytest.raises(InvalidInputError, match="white"):
            replay_chronology(path3, [], events, strict=True)


def test_entry_classes_used_in_cases():
    """The random fixture mixes both edge classes."""
    classes = set()
    for g, _, _ in random_cases(20):
        classes.update(cls for _, _, cls in g.edges())
    assert {PatternEntry.NONZERO, PatternEntry.ARBITRARY} <= classes
