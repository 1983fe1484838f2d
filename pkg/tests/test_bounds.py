import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moranbounds.bounds import (
    AMPLIFYING,
    NEUTRAL,
    SUPPRESSING,
    classify_vertices,
    isothermal_value,
    pair_upper_bound,
    single_mutant_upper_bound,
    thermal_lower_bound,
)
from moranbounds.errors import InputConstraintError, ParameterDomainError
from moranbounds.exact import exact_fixation_all
from moranbounds.graphs import build_graph, complete_graph, cycle_graph, make_phi_urchin, make_urchin, star_graph
from moranbounds.sim import SimParams


class TestClosedForms:
    def test_thermal_star(self):
        g = star_graph(4)
        assert thermal_lower_bound(g, 2.0, 0) == pytest.approx(1 / 5)
        assert thermal_lower_bound(g, 2.0, 1) == pytest.approx(1 / 3)

    def test_thermal_regular(self):
        assert thermal_lower_bound(cycle_graph(6), 3.0, 2) == pytest.approx(0.5)

    def test_thermal_needs_r_above_one(self):
        with pytest.raises(ParameterDomainError):
            thermal_lower_bound(star_graph(4), 1.0, 0)

    def test_single_mutant_k2(self):
        assert single_mutant_upper_bound(build_graph(2, [(0, 1)]), 2.0, 0) == pytest.approx(2 / 3)

    def test_single_mutant_star_leaf(self):
        # leaf's only neighbour is the centre of degree 3
        assert single_mutant_upper_bound(star_graph(4), 2.0, 1) == pytest.approx(2 / (2 + 1 / 3))

    def test_pair_bound_k3(self):
        # Q_v = 1, Q_uv = 1/2 + 1/2 = 1
        assert pair_upper_bound(complete_graph(3), 2.0) == pytest.approx(8 / 9)

    def test_pair_bound_needs_two_vertices(self):
        with pytest.raises(InputConstraintError):
            pair_upper_bound(build_graph(1, []), 2.0)


class TestIsothermal:
    def test_k3(self):
        assert isothermal_value(3, 2.0) == pytest.approx(4 / 7)

    def test_neutral(self):
        assert isothermal_value(7, 1.0) == pytest.approx(1 / 7)

    def test_huge_n_no_overflow(self):
        assert isothermal_value(10**6, 2.0) == pytest.approx(0.5)
        assert isothermal_value(10**6, 0.5) == 0.0

    def test_near_one(self):
        r = 1 + 1e-12
        assert isothermal_value(10, r) == pytest.approx(0.1, rel=1e-9)

    def test_domain(self):
        with pytest.raises(ParameterDomainError):
            isothermal_value(5, 0.0)
        with pytest.raises(InputConstraintError):
            isothermal_value(0, 2.0)

    @given(st.integers(1, 500), st.floats(0.05, 50.0), st.floats(0.05, 50.0))
    def test_monotone_in_r(self, n, r1, r2):
        lo, hi = sorted((r1, r2))
        assert isothermal_value(n, lo) <= isothermal_value(n, hi) + 1e-15

    @given(st.integers(2, 200), st.floats(0.1, 20.0))
    def test_matches_direct_formula(self, n, r):
        if abs(r - 1) < 1e-6:
            return
        direct = (1 - 1 / r) / (1 - r**-n)
        assert isothermal_value(n, r) == pytest.approx(direct, rel=1e-9, abs=1e-300)


class TestCorpusSandwich:
    @pytest.mark.parametrize("r", [1.5, 5.0])
    def test_thermal_le_exact_le_single_mutant(self, corpus6, r):
        for g in corpus6:
            if g.n < 2:
                continue
            exact = exact_fixation_all(g, r).per_vertex()
            for v in range(g.n):
                assert thermal_lower_bound(g, r, v) <= exact[v] + 1e-10
                assert exact[v] <= single_mutant_upper_bound(g, r, v) + 1e-10
            assert exact.mean() <= pair_upper_bound(g, r) + 1e-10


class TestClassification:
    def test_complete_graph_all_neutral(self):
        rep = classify_vertices(complete_graph(5), 2.0)
        assert rep.tags == [NEUTRAL] * 5
        assert rep.epsilon >= 1e-9

    def test_urchin_noses_amplify(self):
        rep = classify_vertices(make_urchin(3), 6.0)
        assert rep.tags[3:] == [AMPLIFYING] * 3
        assert rep.sandwich_holds()

    def test_phi_urchin_clique_suppresses(self):
        rep = classify_vertices(make_phi_urchin(12, 2), 6.0)
        assert rep.tags[:4] == [SUPPRESSING] * 4
        assert rep.tags[4:] == [AMPLIFYING] * 8
        assert rep.counts == {AMPLIFYING: 8, SUPPRESSING: 4, NEUTRAL: 0}

    def test_threshold_count(self):
        rep = classify_vertices(make_urchin(4), 6.0, c=2.0)
        exact = exact_fixation_all(make_urchin(4), 6.0).per_vertex()
        assert rep.above_threshold == int(np.sum(exact > 1 - 2.0 / 8))
        assert classify_vertices(make_urchin(4), 6.0).above_threshold is None

    def test_mc_method(self):
        g = star_graph(5)
        rep = classify_vertices(g, 3.0, "mc", sim_params=SimParams(3.0, seed=1, runs=4000))
        exact = exact_fixation_all(g, 3.0).per_vertex()
        for v in range(5):
            assert abs(rep.value[v] - exact[v]) <= 4 * rep.std_err[v]
        assert rep.tags[0] == SUPPRESSING
        assert "estimate" in rep.as_dict()["vertices"][0]

    def test_mc_requires_params(self):
        with pytest.raises(InputConstraintError):
            classify_vertices(star_graph(4), 2.0, "mc")
        with pytest.raises(InputConstraintError):
            classify_vertices(star_graph(4), 2.0, "mc", sim_params=SimParams(3.0))

    def test_unknown_method(self):
        with pytest.raises(InputConstraintError):
            classify_vertices(star_graph(4), 2.0, "guess")

    def test_r_domain(self):
        with pytest.raises(ParameterDomainError):
            classify_vertices(star_graph(4), 1.0)

    def test_report_serialisation(self):
        rep = classify_vertices(star_graph(4), 2.0)
        d = rep.as_dict()
        assert d["isothermal"] == pytest.approx(isothermal_value(4, 2.0))
        assert len(d["vertices"]) == 4 and d["sandwich_holds"]
        header = rep.to_csv().splitlines()[0]
        assert header == "vertex,thermal_lb,value,std_err,single_mutant_ub,tag"
        assert math.isclose(d["graph_value"], float(np.mean(rep.value)))
