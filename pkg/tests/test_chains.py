import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranbounds.chains import (
    BirthDeathChain,
    TridiagonalAbsorbingChain,
    birth_death_as_tridiagonal,
    birth_death_fixation,
    linear_chain_hit_probabilities,
)
from moranbounds.errors import InputConstraintError, ParameterDomainError

positive = st.floats(0.05, 50.0, allow_nan=False, allow_infinity=False)


class TestBirthDeath:
    def test_gamblers_ruin_two_steps(self):
        assert birth_death_fixation(BirthDeathChain(np.array([0.5]))) == pytest.approx(1 / 3)
        assert birth_death_fixation(BirthDeathChain(np.array([2.0]))) == pytest.approx(2 / 3)

    def test_constant_bias_closed_form(self):
        lam, m = 3.0, 7
        expected = (1 - 1 / lam) / (1 - lam ** -(m + 1))
        assert birth_death_fixation(BirthDeathChain(np.full(m, lam))) == pytest.approx(expected, rel=1e-13)

    def test_neutral(self):
        assert birth_death_fixation(BirthDeathChain(np.ones(9))) == pytest.approx(0.1)

    def test_extreme_biases_stay_finite(self):
        assert birth_death_fixation(BirthDeathChain(np.full(5000, 1e-3))) == 0.0
        assert birth_death_fixation(BirthDeathChain(np.full(5000, 1e3))) == pytest.approx(1 - 1e-3, rel=1e-12)

    def test_accepts_plain_sequence(self):
        assert birth_death_fixation([2.0]) == pytest.approx(2 / 3)

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterDomainError, match="lambda_2"):
            BirthDeathChain(np.array([1.0, 0.0]))
        with pytest.raises(InputConstraintError):
            BirthDeathChain(np.array([]))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(positive, min_size=1, max_size=30), st.data())
    def test_monotone_in_each_bias(self, lams, data):
        j = data.draw(st.integers(0, len(lams) - 1))
        factor = data.draw(st.floats(1.01, 10.0))
        base = birth_death_fixation(BirthDeathChain(np.array(lams)))
        bumped = list(lams)
        bumped[j] *= factor
        assert birth_death_fixation(BirthDeathChain(np.array(bumped))) >= base - 1e-15

    @settings(max_examples=200, deadline=None)
    @given(st.lists(positive, min_size=1, max_size=40))
    def test_agrees_with_tridiagonal_solve(self, lams):
        chain = BirthDeathChain(np.array(lams))
        hit = linear_chain_hit_probabilities(birth_death_as_tridiagonal(chain))
        assert hit[0] == pytest.approx(birth_death_fixation(chain), abs=1e-12)


def _chain(m, rng, stay_frac=0.3, **kw):
    raw = rng.random((5, m))
    raw[4] *= stay_frac
    raw /= raw.sum(axis=0)
    return TridiagonalAbsorbingChain(raw[0], raw[1], raw[2], raw[3], raw[4], **kw)


class TestTridiagonal:
    @pytest.mark.parametrize("bottom,top", [("failure", "success"), ("reflect", "success"), ("success", "failure")])
    def test_solution_satisfies_recurrence(self, bottom, top):
        rng = np.random.default_rng(1)
        c = _chain(25, rng, bottom=bottom, top=top)
        x = linear_chain_hit_probabilities(c)
        ext = {"success": 1.0, "failure": 0.0}
        for i in range(c.m):
            below = x[i] if (i == 0 and bottom == "reflect") else (ext[bottom] if i == 0 else x[i - 1])
            above = x[i] if (i == c.m - 1 and top == "reflect") else (ext[top] if i == c.m - 1 else x[i + 1])
            rhs = c.up[i] * above + c.down[i] * below + c.out_success[i] + c.stay[i] * x[i]
            assert x[i] == pytest.approx(rhs, abs=1e-13)

    def test_reflecting_with_only_success_exit(self):
        m = 6
        up = np.full(m, 0.4)
        down = np.full(m, 0.5)
        succ = np.full(m, 0.1)
        c = TridiagonalAbsorbingChain(up, down, succ, np.zeros(m), bottom="reflect", top="reflect")
        np.testing.assert_allclose(linear_chain_hit_probabilities(c), 1.0, atol=1e-12)

    def test_dense_agreement(self):
        rng = np.random.default_rng(4)
        c = _chain(12, rng)
        lower, diag, upper, rhs = c.system()
        A = np.diag(diag) + np.diag(upper[:-1], 1) + np.diag(lower[1:], -1)
        np.testing.assert_allclose(linear_chain_hit_probabilities(c), np.linalg.solve(A, rhs), atol=1e-13)

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ParameterDomainError):
            TridiagonalAbsorbingChain(np.array([0.5]), np.array([0.4]), np.zeros(1), np.zeros(1))

    def test_bad_end(self):
        with pytest.raises(InputConstraintError):
            TridiagonalAbsorbingChain(np.array([0.5]), np.array([0.5]), np.zeros(1), np.zeros(1), top="bounce")
