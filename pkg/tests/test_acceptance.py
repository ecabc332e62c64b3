"""
End-to-end checks of the solver stack on the graph families used in the
experiments: out-stars, small ER graphs against the exact oracle, the
eta-versus-p trend and the degree profile of greedy input sets.

The long-running ones carry the `slow` marker.
"""

import numpy as np
import pytest

from zforce.config import SweepSpec, TrainConfig
from zforce.gnn import (
    Architecture,
    ModelParams,
    actor_forward,
    actor_gradients,
    critic_forward,
    critic_gradients,
    features_from_state,
)
from zforce.model import ColorState
from zforce.pattern_graph import generate_er, out_star
from zforce.solvers import exact_minimum, greedy_degree
from zforce.stats import degree_profile, mean_eta_by_p, summarize_sweep
from zforce.sweep import run_sweep
from zforce.trainer import train
from zforce.zero_forcing import is_zfs


def test_star_law():
    for leaves in range(2, 7):
        result = exact_minimum(out_star(leaves))
        assert result.size == leaves
        assert result.eta == pytest.approx(leaves / (leaves + 1))


@pytest.mark.slow
def test_exact_is_a_floor_for_greedy_and_rl():
    rng = np.random.default_rng(2024)
    cfg = TrainConfig(episodes=40, hidden=(8, 8), eval_every=10)
    for trial in range(50):
        n = int(rng.integers(6, 11))
        p = (0.1, 0.3)[trial % 2]
        g = generate_er(n, p, seed=trial)
        z = exact_minimum(g).size
        greedy = greedy_degree(g)
        rl = train(g, cfg).to_result(n)
        for result in (greedy, rl):
            assert is_zfs(g, result.inputs)
            assert result.size >= z


def test_gradients_on_random_small_models():
    eps = 1e-6
    for trial in range(20):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(3, 7))
        g = generate_er(n, 0.4, seed=trial)
        params = ModelParams.init(Architecture(hidden=(4, 4)), seed=trial)
        for tower in (params.actor, params.critic):
            for layer in tower.layers:
                layer.bias[...] = rng.uniform(-0.5, 0.5, size=layer.bias.shape)
        colors = ColorState(tuple(int(c) for c in rng.integers(0, 2, size=n)))
        u = features_from_state(g, colors)
        action = int(rng.integers(n))
        mask = range(n)

        def logp():
            return float(np.log(actor_forward(g, u, params.actor, mask)[action]))

        def value():
            return critic_forward(g, u, params.critic)

        checks = (
            (params.actor, logp, actor_gradients(g, u, params.actor, mask, action)[1]),
            (params.critic, value, critic_gradients(g, u, params.critic)[1]),
        )
        for tower, f, analytic in checks:
            numeric = []
            for arr in tower.arrays():
                grad = np.zeros_like(arr)
                for idx in np.ndindex(arr.shape):
                    orig = arr[idx]
                    arr[idx] = orig + eps
                    up = f()
                    arr[idx] = orig - eps
                    down = f()
                    arr[idx] = orig
                    grad[idx] = (up - down) / (2 * eps)
                numeric.append(grad)
            a = np.concatenate([x.ravel() for x in numeric])
            b = np.concatenate([x.ravel() for x in analytic.arrays()])
            assert np.linalg.norm(a - b) <= 1e-4 * max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


@pytest.mark.slow
def test_eta_grows_with_edge_probability(tmp_path):
    spec = SweepSpec(n_values=(50,), p_values=(0.05, 0.1, 0.2, 0.3), seeds=10)
    rows = run_sweep(spec, tmp_path / "sweep.csv", timing=False)
    trend = [eta for _, eta in mean_eta_by_p(summarize_sweep(rows), 50, "greedy")]
    assert all(a < b for a, b in zip(trend, trend[1:]))


def test_greedy_prefers_low_in_degree_nodes():
    below = 0
    for seed in range(20):
        g = generate_er(100, 0.05, seed=seed)
        everyone, chosen = degree_profile(g, greedy_degree(g).inputs).rows
        below += chosen.mean_in_degree < everyone.mean_in_degree
    assert below >= 16


@pytest.mark.slow
def test_rl_keeps_up_with_greedy():
    wins = 0
    instances = 0
    for p in (0.1, 0.2):
        for seed in range(5):
            g = generate_er(20, p, seed=seed)
            rl = train(g, TrainConfig(seed=seed)).best_z
            wins += rl <= greedy_degree(g).size
            instances += 1
    assert wins >= 0.7 * instances
