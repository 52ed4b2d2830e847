import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixmnl import (
    ComparisonGraph,
    NumericalError,
    ValidationError,
    erdos_renyi,
    rank_centrality,
)
from mixmnl.rankcentrality import (
    build_transition,
    default_iteration_count,
    estimate_dynamic_range,
    exact_stationary,
    power_stationary,
    project_outcomes,
)

from conftest import complete_graph


def ideal_outcomes(graph, weights):
    w = np.asarray(weights, dtype=np.float64)
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    return (w[j] - w[i]) / (w[i] + w[j])


class TestProjection:
    def test_clips_to_unit_interval(self):
        out = project_outcomes(np.array([-2.0, -0.5, 0.0, 0.5, 2.0]))
        np.testing.assert_array_equal(out, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            project_outcomes(np.array([0.0, np.nan]))


class TestTransition:
    def test_two_item_chain(self):
        g = ComparisonGraph(2, [[0, 1]])
        # w = (1, 2): item 1 wins with probability 2/3
        t = build_transition(g, np.array([1.0 / 3.0]))
        dense = t.matrix.toarray()
        np.testing.assert_allclose(dense, [[1.0 / 3.0, 2.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]], atol=1e-15)
        pi = exact_stationary(t)
        np.testing.assert_allclose(pi, [1.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_row_stochastic_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 12))
        g = complete_graph(n)
        outcomes = rng.uniform(-1.0, 1.0, g.n_pairs)
        dense = build_transition(g, outcomes).matrix.toarray()
        assert (dense >= 0.0).all()
        np.testing.assert_allclose(dense.sum(axis=1), 1.0, atol=1e-12)

    def test_shape_checked(self):
        g = complete_graph(4)
        with pytest.raises(ValidationError):
            build_transition(g, np.zeros(3))

    def test_range_checked(self):
        g = ComparisonGraph(2, [[0, 1]])
        with pytest.raises(ValidationError):
            build_transition(g, np.array([1.5]))


class TestStationary:
    def test_ideal_chain_recovers_weights(self):
        # Exact pairwise marginals make the chain reversible with
        # stationary distribution proportional to the weights.
        g = complete_graph(7)
        w = np.array([1.0, 2.0, 1.3, 1.8, 1.1, 1.6, 1.9])
        pi = exact_stationary(build_transition(g, ideal_outcomes(g, w)))
        np.testing.assert_allclose(pi, w / w.sum(), atol=1e-12)

    def test_power_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        g = erdos_renyi(40, 6.0, rng)
        w = rng.uniform(1.0, 2.0, 40)
        t = build_transition(g, ideal_outcomes(g, w))
        exact = exact_stationary(t)
        power = power_stationary(t, 4000).distribution
        assert np.abs(power - exact).max() <= 1e-12

    def test_power_error_decays_with_iterations(self):
        rng = np.random.default_rng(1)
        g = erdos_renyi(30, 5.0, rng)
        w = rng.uniform(1.0, 2.0, 30)
        t = build_transition(g, ideal_outcomes(g, w))
        exact = exact_stationary(t)
        err = lambda k: np.abs(power_stationary(t, k).distribution - exact).max()
        e1, e2 = err(25), err(50)
        assert e2 < e1 / 2

    def test_last_change_reported(self):
        g = complete_graph(5)
        w = np.linspace(1.0, 2.0, 5)
        t = build_transition(g, ideal_outcomes(g, w))
        result = power_stationary(t, 500)
        assert result.last_change <= 1e-12

    def test_reducible_chain_rejected(self):
        # Two cliques joined by nothing: the dense solve must refuse.
        edges = [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]]
        g = ComparisonGraph(6, edges)
        t = build_transition(g, np.zeros(6))
        with pytest.raises(NumericalError):
            exact_stationary(t)

    def test_saturated_edge_breaks_reachability(self):
        # An outcome pinned at +1 zeroes the backward rate; if that edge
        # was the only bridge the chain is no longer strongly connected.
        g = ComparisonGraph(3, [[0, 1], [1, 2]])
        t = build_transition(g, np.array([1.0, 0.0]))
        with pytest.raises(NumericalError):
            exact_stationary(t)


class TestDynamicRange:
    def test_exact_on_ideal_outcomes(self):
        rng = np.random.default_rng(2)
        g = erdos_renyi(25, 5.0, rng)
        w = rng.uniform(1.0, 3.0, 25)
        est = estimate_dynamic_range(g, ideal_outcomes(g, w))
        assert est == pytest.approx(w.max() / w.min(), rel=1e-9)

    def test_cap_applies(self):
        g = ComparisonGraph(2, [[0, 1]])
        est = estimate_dynamic_range(g, np.array([1.0 - 1e-15]))
        assert est == 16.0

    def test_disconnected_rejected(self):
        g = ComparisonGraph(4, [[0, 1], [2, 3]])
        with pytest.raises(ValidationError):
            estimate_dynamic_range(g, np.zeros(2))


class TestDefaults:
    def test_iteration_budget_converges(self):
        # The default budget must push the power iteration to within
        # 1e-8 of the true stationary distribution on ideal inputs.
        for seed in range(5):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(20, 120))
            g = erdos_renyi(n, 6.0, rng)
            w = rng.uniform(1.0, 2.0, n)
            outcomes = ideal_outcomes(g, w)
            budget = default_iteration_count(g, outcomes)
            pi = power_stationary(build_transition(g, outcomes), budget).distribution
            truth = w / w.sum()
            rel = np.abs(pi - truth).max() / truth.min()
            assert rel <= 1e-8, (seed, n, budget, rel)

    def test_bipartite_graph_rejected(self):
        g = ComparisonGraph(4, [[0, 1], [1, 2], [2, 3], [0, 3]])
        with pytest.raises(ValidationError):
            default_iteration_count(g, np.zeros(4))


class TestRankCentrality:
    def test_end_to_end_recovers_weights(self):
        rng = np.random.default_rng(3)
        g = erdos_renyi(50, 7.0, rng)
        w = rng.uniform(1.0, 2.0, 50)
        pi = rank_centrality(g, ideal_outcomes(g, w))
        np.testing.assert_allclose(pi, w / w.sum(), atol=1e-9)

    def test_perturbation_scales_linearly(self):
        # First-order stability: halving the outcome perturbation should
        # roughly halve the stationary error (log-log slope near one).
        rng = np.random.default_rng(4)
        g = erdos_renyi(40, 6.0, rng)
        w = rng.uniform(1.0, 2.0, 40)
        base = ideal_outcomes(g, w)
        noise = rng.uniform(-1.0, 1.0, g.n_pairs)
        truth = w / w.sum()
        scales = [1e-4, 1e-3, 1e-2]
        errors = []
        for s in scales:
            pi = rank_centrality(g, np.clip(base + s * noise, -1, 1), n_iterations=6000)
            errors.append(np.abs(pi - truth).max())
        slope = np.polyfit(np.log(scales), np.log(errors), 1)[0]
        assert 0.9 <= slope <= 1.1

    def test_explicit_iteration_count(self):
        g = complete_graph(4)
        w = np.array([1.0, 1.5, 1.2, 2.0])
        pi = rank_centrality(g, ideal_outcomes(g, w), n_iterations=2000)
        np.testing.assert_allclose(pi, w / w.sum(), atol=1e-10)
