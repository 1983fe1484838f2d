import numpy as np
import pytest

from conftest import dense_fixation, subsets
from moranbounds.bounds import isothermal_value
from moranbounds.errors import GraphInvalidError, InputConstraintError, ParameterDomainError, SizeCapError
from moranbounds.exact import (
    WeightVector,
    exact_fixation_all,
    fixation_of_graph,
    fixation_of_vertex,
    moran_residual,
    solve_L0,
)
from moranbounds.graphs import build_graph, complete_graph, connected_graphs, make_urchin, path_graph, star_graph


class TestSmallGraphs:
    def test_k2(self):
        t = exact_fixation_all(build_graph(2, [(0, 1)]), 2.0)
        assert t.singleton(0) == pytest.approx(2 / 3, abs=1e-12)
        assert t.singleton(1) == pytest.approx(2 / 3, abs=1e-12)

    def test_k3(self):
        t = exact_fixation_all(complete_graph(3), 2.0)
        for v in range(3):
            assert t.singleton(v) == pytest.approx(4 / 7, abs=1e-12)

    def test_absorbing_values(self):
        t = exact_fixation_all(star_graph(4), 3.0)
        assert t[[]] == 0.0 and t[[0, 1, 2, 3]] == 1.0

    def test_neutral_drift_is_uniform(self):
        # at r = 1 the fixation probability of S is sum of its temperatures-weighted share
        g = star_graph(5)
        t = exact_fixation_all(g, 1.0)
        deg = g.degree.astype(float)
        for S in subsets(5):
            assert t[S] == pytest.approx(sum(1 / deg[v] for v in S) / sum(1 / deg), abs=1e-11)

    def test_path_against_dense(self):
        g = path_graph(5)
        ref = dense_fixation(g, 2.0)
        t = exact_fixation_all(g, 2.0)
        assert np.max(np.abs(t.values - ref)) < 1e-11

    def test_singleton_graph(self):
        t = exact_fixation_all(build_graph(1, []), 2.0)
        assert t.singleton(0) == 1.0


class TestAgainstDenseOracle:
    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 7.0])
    def test_every_state(self, n, r):
        for g in connected_graphs(n):
            t = exact_fixation_all(g, r)
            assert np.max(np.abs(t.values - dense_fixation(g, r))) < 1e-10

    def test_urchin_3(self):
        g = make_urchin(3)
        t = exact_fixation_all(g, 6.0)
        assert np.max(np.abs(t.values - dense_fixation(g, 6.0))) < 1e-10


class TestProperties:
    def test_monotone_in_infected_set(self, corpus6):
        for g in corpus6:
            if g.n < 3:
                continue
            t = exact_fixation_all(g, 2.0)
            v = t.values
            for s in range(1 << g.n):
                for u in range(g.n):
                    if not s >> u & 1:
                        assert v[s | 1 << u] >= v[s] - 1e-12

    def test_monotone_in_r(self, corpus6):
        rs = [0.5, 1.0, 1.5, 2.0, 5.0]
        for g in corpus6:
            if g.n < 2:
                continue
            vals = [exact_fixation_all(g, r).values for r in rs]
            for a, b in zip(vals, vals[1:]):
                assert np.all(b >= a - 1e-12)

    def test_residual_small(self):
        t = exact_fixation_all(make_urchin(5), 6.0)
        assert t.residual < 1e-11
        assert moran_residual(make_urchin(5), t.values, 6.0) == t.residual

    def test_residual_detects_wrong_values(self):
        g = star_graph(4)
        t = exact_fixation_all(g, 2.0)
        bad = t.values.copy()
        bad[3] += 0.01
        assert moran_residual(g, bad, 2.0) > 1e-3

    def test_helpers(self):
        g = star_graph(4)
        t = exact_fixation_all(g, 2.0)
        assert fixation_of_vertex(g, 2.0, 2) == t.singleton(2)
        assert fixation_of_graph(g, 2.0) == pytest.approx(t.per_vertex().mean())


class TestGuards:
    def test_cap(self):
        with pytest.raises(SizeCapError):
            exact_fixation_all(make_urchin(12), 2.0)
        with pytest.raises(SizeCapError):
            exact_fixation_all(star_graph(6), 2.0, cap=5)

    def test_disconnected(self):
        with pytest.raises(GraphInvalidError):
            exact_fixation_all(build_graph(4, [(0, 1), (2, 3)]), 2.0)

    def test_bad_r(self):
        with pytest.raises(ParameterDomainError):
            exact_fixation_all(complete_graph(3), -1.0)

    def test_vertex_out_of_range(self):
        with pytest.raises(InputConstraintError):
            fixation_of_vertex(complete_graph(3), 2.0, 3)

    def test_output_formats(self):
        t = exact_fixation_all(complete_graph(3), 2.0)
        lines = t.to_csv().splitlines()
        assert lines[0] == "bitmask,probability" and len(lines) == 9
        assert '"graph"' in t.to_json()


class TestWeightedLowerSystem:
    @pytest.mark.parametrize("g", [star_graph(5), path_graph(5), make_urchin(3)], ids=["star", "path", "urchin"])
    def test_uniform_weights_give_isothermal_value(self, g):
        t = solve_L0(g, 3.0, WeightVector.uniform(g.n))
        for v in range(g.n):
            assert t.singleton(v) == pytest.approx(isothermal_value(g.n, 3.0), abs=1e-11)

    def test_uniform_weights_any_pair_map(self):
        g = star_graph(4)

        def first_pair(s):
            for x, y in sorted((x, y) for x in range(4) for y in g.adjacency[x]):
                if s >> x & 1 and not s >> y & 1:
                    return x, y

        t = solve_L0(g, 2.0, WeightVector.uniform(4), first_pair)
        assert t.policy == "pair_map"
        assert t.singleton(1) == pytest.approx(isothermal_value(4, 2.0), abs=1e-11)

    def test_min_pair_below_exact_on_corpus(self, corpus6):
        for g in corpus6:
            if g.n < 2:
                continue
            exact = exact_fixation_all(g, 2.0).values
            low = solve_L0(g, 2.0, WeightVector.temperatures(g)).values
            assert np.all(low <= exact + 1e-10)

    @pytest.mark.parametrize("g", [star_graph(9), make_urchin(5), path_graph(10)], ids=["star9", "urchin5", "path10"])
    def test_min_pair_below_exact_larger(self, g):
        exact = exact_fixation_all(g, 4.0).values
        low = solve_L0(g, 4.0, WeightVector.temperatures(g)).values
        assert np.all(low <= exact + 1e-10)

    def test_rejects_r_at_most_one(self):
        with pytest.raises(ParameterDomainError):
            solve_L0(star_graph(3), 1.0, WeightVector.uniform(3))

    def test_bad_pair_map(self):
        g = star_graph(3)
        with pytest.raises(InputConstraintError):
            solve_L0(g, 2.0, WeightVector.uniform(3), {})

    def test_weights_positive(self):
        with pytest.raises(ParameterDomainError):
            WeightVector(np.array([1.0, 0.0]))
