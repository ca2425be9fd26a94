import math

import numpy as np
import pytest

from fluctuate.errors import DomainError, UnsupportedRegimeError
from fluctuate.exact import pmf_B
from fluctuate.lpsm import pmf_V
from fluctuate.model import LpsmParams, ModelParams
from fluctuate.specfun import EULER_GAMMA
from fluctuate.tail import (
    fit_tail_exponent,
    gamma1_two_term,
    tail_expansion,
    tail_finite_N_gamma1,
    tail_lpsm_gamma1,
    tail_lpsm_general,
)


@pytest.fixture(scope="module")
def neutral_pmf():
    return pmf_V(LpsmParams(1.0, 1.0, 0.0), 10000).probs


class TestGeneral:
    def test_leading_examples(self):
        t = tail_lpsm_general(LpsmParams(0.5, 1.0, 0.0))
        assert t.leading[0] == pytest.approx(math.gamma(1.5), rel=1e-15) and t.leading[1] == -1.5
        t = tail_lpsm_general(LpsmParams(2.5, 1.0, 0.5))
        assert t.leading[0] == pytest.approx(math.gamma(3.5) / 0.5 ** 2.5, rel=1e-14)
        assert t.leading[0] == pytest.approx(18.80, abs=0.01)

    def test_subleading_order(self):
        assert tail_lpsm_general(LpsmParams(0.5, 1.0)).terms[1][1] == -2.0
        assert tail_lpsm_general(LpsmParams(1.5, 1.0)).terms[1][1] == -3.5

    def test_terms_sorted(self):
        for g in (0.3, 0.7, 1.3, 2.5, 3.7):
            powers = [t[1] for t in tail_lpsm_general(LpsmParams(g, 2.0, 0.3)).terms]
            assert powers == sorted(powers, reverse=True)

    def test_integer_gamma_truncated(self):
        t = tail_lpsm_general(LpsmParams(2.0, 1.0, 0.5))
        assert t.truncated and len(t.terms) == 1

    def test_gamma_one_routed_away(self):
        with pytest.raises(UnsupportedRegimeError):
            tail_lpsm_general(LpsmParams(1.0 + 1e-8, 1.0))
        assert tail_expansion(LpsmParams(1.0, 1.0, 0.3)).regime == "LpsmGamma1"

    @pytest.mark.parametrize("q", [0.0, 0.5])
    @pytest.mark.parametrize("d", [1e-3, -1e-3])
    def test_singular_terms_cancel_near_one(self, q, d):
        # the n^{-1-2g} and n^{-2-g} terms merge into the log n / n^3 form at gamma = 1
        ref = tail_lpsm_gamma1(1.0, q)
        n = 1e3
        exact_pair = ref.evaluate(n) - ref.evaluate(n, 1)
        errs = []
        for scale in (1.0, 0.1):
            t = tail_lpsm_general(LpsmParams(1.0 + d * scale, 1.0, q))
            errs.append(abs(t.evaluate(n) - t.evaluate(n, 1) - exact_pair) / exact_pair)
        assert errs[0] < 0.02 and errs[1] < errs[0] / 5

    def test_json(self):
        d = tail_lpsm_general(LpsmParams(1.5, 1.0)).to_dict()
        assert d["regime"] == "LpsmGeneral" and d["cutoff_base"] == 1.0 and len(d["terms"]) == 3


class TestGamma1:
    def test_q_zero_reduction(self):
        theta = 1.7
        c = [t[0] for t in tail_lpsm_gamma1(theta, 0.0).terms]
        assert c == pytest.approx([theta, 2 * theta ** 2, theta ** 2 * (2 * EULER_GAMMA - 3) - theta], rel=1e-15)
        assert tail_lpsm_gamma1(theta, 0.0).regime == "LpsmGamma1NoDeath"

    def test_sum_example(self):
        assert tail_lpsm_gamma1(1.0).evaluate(1e3) == pytest.approx(1.0110e-6, rel=1e-4)

    def test_vs_pmf(self, neutral_pmf):
        assert tail_lpsm_gamma1(1.0).evaluate(1000) == pytest.approx(neutral_pmf[1000], rel=1e-2)

    def test_two_term_form(self, neutral_pmf):
        # exact through order theta^2; the theta^3 remainder fades with n
        assert gamma1_two_term(1.0, 100) == pytest.approx(neutral_pmf[100], rel=5e-3)
        n = np.array([1000, 5000])
        assert np.allclose(gamma1_two_term(1.0, n), neutral_pmf[n], rtol=1e-4)

    def test_leading_ratio_schedule(self, neutral_pmf):
        lead = tail_lpsm_gamma1(1.0)
        for n, tol in ((100, 0.25), (1000, 0.05), (10000, 0.015)):
            assert abs(neutral_pmf[n] / lead.evaluate(n, 1) - 1) < tol


@pytest.mark.parametrize("p", [LpsmParams(0.5, 1.0, 0.0), LpsmParams(1.5, 1.0, 0.5),
                               LpsmParams(2.5, 1.0, 0.0), LpsmParams(0.5, 2.0, 0.5)])
def test_subleading_terms_help_at_1000(p):
    probs = pmf_V(p, 1000).probs
    t = tail_expansion(p)
    errs = [abs(t.evaluate(1000, k) - probs[1000]) for k in range(1, len(t.terms) + 1)]
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs


def test_subleading_terms_help_at_1000_gamma1(neutral_pmf):
    t = tail_lpsm_gamma1(1.0)
    errs = [abs(t.evaluate(1000, k) - neutral_pmf[1000]) for k in (1, 2, 3)]
    assert errs[2] <= errs[0]


@pytest.fixture(scope="module")
def exact():
    return pmf_B(TestFiniteN.P, nmax=2100).probs


class TestFiniteN:
    P = ModelParams.from_lpsm_like(1.0, 0.0, 100, 0.01)

    def test_structure(self):
        t = tail_finite_N_gamma1(self.P)
        assert t.cutoff_base == pytest.approx(0.99) and t.regime == "FiniteNGamma1NoDeath"
        assert [x[1] for x in t.terms] == pytest.approx([-0.99, -1.99, -1.99])

    def test_preconditions(self):
        for p in (ModelParams.from_lpsm_like(1.5, 0.0, 100, 0.01),
                  ModelParams.from_lpsm_like(1.0, 0.2, 100, 0.01),
                  ModelParams.from_lpsm_like(1.0, 0.0, 100, 1.5)):
            with pytest.raises(UnsupportedRegimeError):
                tail_finite_N_gamma1(p)

    def test_full_expansion_at_500(self, exact):
        assert tail_finite_N_gamma1(self.P).evaluate(500) == pytest.approx(exact[500], rel=0.01)

    def test_cutoff_ratio(self, exact):
        assert abs(exact[2001] / exact[2000] - 0.99) < 1e-3

    def test_doubling_ratio_full_expansion(self, exact):
        t = tail_finite_N_gamma1(self.P)
        assert exact[600] / exact[300] == pytest.approx(t.evaluate(600) / t.evaluate(300), rel=0.01)

    @pytest.mark.xfail(strict=True, reason="the leading-order ratio is 13% off at n = 300; see README")
    def test_doubling_ratio_leading_order(self, exact):
        ref = 0.99 ** 300 * 2 ** (0.01 - 1)
        assert abs(exact[600] / exact[300] / ref - 1) < 0.10

    def test_small_mu_reduction(self):
        # Gamma(mu) ~ 1/mu and psi(mu - 1) ~ -1/mu turn the n^{mu-2} term into theta / n^2
        theta = 2.0
        t = tail_finite_N_gamma1(ModelParams.from_lpsm_like(1.0, 0.0, theta / 1e-6, 1e-6))
        assert t.terms[2][0] == pytest.approx(theta, rel=1e-5)
        assert t.terms[0][0] == pytest.approx(1e-6, rel=1e-5)


class TestFit:
    def test_synthetic(self):
        p = np.zeros(500)
        p[1:] = np.arange(1, 500.0) ** -2.0
        r = fit_tail_exponent(p, 10, 499)
        assert r["slope"] == pytest.approx(-2.0, abs=1e-12) and r["r2"] == pytest.approx(1.0)

    @pytest.mark.parametrize("g,q,tol", [(0.5, 0.0, 0.05), (2.0, 0.5, 0.1)])
    def test_lpsm_slopes(self, g, q, tol):
        pm = pmf_V(LpsmParams(g, 1.0, q), 10000)
        assert fit_tail_exponent(pm, 1000, 10000)["slope"] == pytest.approx(-1 - g, abs=tol)

    def test_errors(self):
        p = np.ones(100) * 0.01
        p[50] = 0.0
        with pytest.raises(DomainError):
            fit_tail_exponent(p, 10, 60)
        with pytest.raises(DomainError):
            fit_tail_exponent(p, 5, 60)
        with pytest.raises(DomainError):
            fit_tail_exponent(p, 10, 200)
