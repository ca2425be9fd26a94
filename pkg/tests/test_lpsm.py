import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluctuate.exact import pmf_B
from fluctuate.lpsm import (
    boundary_theta,
    clone_intensity,
    clone_size_gf,
    clone_size_pmf,
    coefficients_lpsm,
    log_gf_V,
    log_laplace_V,
    mode_V,
    moments_V,
    p0_contour_theta,
    pmf_V,
    ratio_p1_p0,
    resistance_p0,
    resistance_probability,
)
from fluctuate.exact import coefficients_exact
from fluctuate.model import LpsmParams, ModelParams


def L(gamma, theta, q=0.0):
    return LpsmParams(gamma, theta, q)


def tv(a, b):
    """Total variation with the untabulated mass of each side as one extra bin."""
    return 0.5 * (np.abs(a - b).sum() + abs((1 - a.sum()) - (1 - b.sum())))


class TestGeneratingFunction:
    def test_normalization(self):
        for g in (0.5, 1.0, 2.5):
            assert log_gf_V(L(g, 3.0, 0.4), 1.0) == 0.0

    def test_at_zero(self):
        assert log_gf_V(L(2.5, 3.0), 0.0) == pytest.approx(-3.0 / 2.5, rel=1e-15)

    def test_neutral_closed_form(self):
        assert log_gf_V(L(1.0, 1.0), 0.5) == pytest.approx(-math.log(2), rel=1e-14)

    @pytest.mark.parametrize("g,q", [(0.5, 0.0), (1.5, 0.5), (3.0, 0.9), (1.0, 0.3)])
    def test_vs_mpmath(self, g, q):
        p = L(g, 2.0, q)
        for z in (0.1, 0.5, 0.9, 0.999):
            xi = (q - z) / (1 - z)
            ref = float(-2.0 / g * mpmath.hyp2f1(1, g, 1 + g, xi))
            assert log_gf_V(p, z) == pytest.approx(ref, rel=1e-12)

    def test_laplace_form(self):
        p = L(1.5, 2.0, 0.5)
        s = 0.3
        assert log_laplace_V(p, s) == pytest.approx(log_gf_V(p, math.exp(-s)), rel=1e-12)


class TestCoefficients:
    def test_q_zero(self):
        g, theta = 1.7, 2.0
        qc = coefficients_lpsm(L(g, theta), 30).q_coeffs
        for k in range(1, 31):
            assert qc[k] == pytest.approx(theta * math.factorial(k - 1) / float(mpmath.rf(g + 1, k)), rel=1e-13)

    def test_lea_coulson_weights(self):
        qc = coefficients_lpsm(L(1.0, 1.0), 50).q_coeffs
        k = np.arange(1, 51)
        assert np.allclose(qc[1:], 1.0 / (k * (k + 1)), rtol=1e-13, atol=0)

    def test_gamma_two(self):
        qc = coefficients_lpsm(L(2.0, 1.0), 2).q_coeffs
        assert qc[:3] == pytest.approx([-0.5, 1 / 3, 1 / 12], rel=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 6.0), st.floats(0.0, 0.95), st.integers(1, 400))
    def test_vs_mpmath(self, g, q, k):
        qc = coefficients_lpsm(L(g, 1.0, q), k).q_coeffs
        ref = mpmath.factorial(k - 1) / mpmath.rf(g + 1, k) * mpmath.hyp2f1(k, g, 1 + g + k, q)
        assert qc[k] == pytest.approx(float(ref), rel=1e-10)

    def test_limit_of_exact_coefficients(self):
        p = L(1.5, 1.0, 0.5)
        ref = coefficients_lpsm(p, 20).q_coeffs
        errs = []
        for N in (1e2, 1e4, 1e6):
            got = coefficients_exact(ModelParams.from_lpsm_like(1.5, 0.5, N, 1.0 / N), 20).q_coeffs
            errs.append(np.max(np.abs(got - ref)))
        assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3


class TestPmf:
    def test_lea_coulson(self):
        probs = pmf_V(L(1.0, 1.0), 5).probs
        assert abs(probs[0] - math.exp(-1)) < 1e-12
        assert abs(probs[1] - math.exp(-1) / 2) < 1e-12

    def test_small_theta(self):
        assert pmf_V(L(1.5, 1e-12, 0.5), 3).probs[0] == pytest.approx(1.0, abs=1e-11)

    def test_convergence_from_finite_n(self):
        p = L(1.5, 1.0, 0.5)
        ref = pmf_V(p, 4000)
        tvs = [tv(pmf_B(ModelParams.from_lpsm_like(1.5, 0.5, N, 1.0 / N), nmax=4000).probs, ref.probs)
               for N in (1e2, 1e3, 1e4)]
        assert tvs[0] > tvs[1] > tvs[2] and tvs[2] < 0.01

    def test_compound_poisson_assembly(self):
        # Poisson clone count compounded with the clone-size law, assembled directly
        p = L(1.5, 2.0, 0.5)
        n = 30
        lam = clone_intensity(p)
        x = clone_size_pmf(p, n)
        # mass at size zero only thins the Poisson count
        lam1 = lam * (1.0 - x[0])
        f = x[1:] / (1.0 - x[0])
        out = np.zeros(n + 1)
        out[0] = math.exp(-lam1)
        for m in range(1, n + 1):
            j = np.arange(1, m + 1)
            out[m] = lam1 / m * np.sum(j * f[:m] * out[m - j])
        assert np.max(np.abs(out - pmf_V(p, n).probs)) < 1e-8


class TestMoments:
    def test_examples(self):
        assert moments_V(L(2.0, 1.0)) == {"mean": 1.0, "variance": math.inf}
        assert moments_V(L(3.0, 1.0)) == {"mean": 0.5, "variance": 1.5}
        assert moments_V(L(0.5, 1.0)) == {"mean": math.inf, "variance": math.inf}

    def test_against_pmf_with_tail_correction(self):
        p = L(3.0, 1.0, 0.4)
        n = 20000
        probs = pmf_V(p, n).probs
        k = np.arange(n + 1, dtype=float)
        # tail beyond n from the leading n^{-1-gamma} term
        c = p.theta * math.gamma(1 + p.gamma) / (1 - p.q) ** p.gamma
        tail_k = np.arange(n + 1, 50 * n, dtype=float)
        tail_p = c * tail_k ** (-1 - p.gamma)
        m1 = probs @ k + tail_p @ tail_k
        m2 = probs @ k ** 2 + tail_p @ tail_k ** 2
        mom = moments_V(p)
        assert m1 == pytest.approx(mom["mean"], rel=1e-2)
        assert m2 - m1 ** 2 == pytest.approx(mom["variance"], rel=1e-2)


class TestResistance:
    def test_examples(self):
        assert resistance_p0(L(2.0, 1.0)) == pytest.approx(math.exp(-0.5), rel=1e-15)
        assert resistance_p0(L(2.0, 1e-300)) == 1.0
        assert resistance_probability(L(2.0, 1e-20)) == pytest.approx(0.5e-20, rel=1e-12)

    def test_matches_exp_q0(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = L(rng.uniform(0.1, 8), rng.uniform(0.01, 20), rng.uniform(0, 0.95))
            assert resistance_p0(p) == pytest.approx(math.exp(coefficients_lpsm(p, 0).q_coeffs[0]), rel=1e-13)

    def test_matches_pmf(self):
        for g, q in ((0.5, 0.2), (1.5, 0.5), (4.0, 0.0)):
            p = L(g, 2.0, q)
            assert abs(resistance_p0(p) - pmf_V(p, 3).probs[0]) < 1e-12


class TestRatioBoundaryMode:
    def test_ratio(self):
        assert ratio_p1_p0(L(1.0, 1.0)) == pytest.approx(0.5, rel=1e-15)
        assert ratio_p1_p0(L(2.0, 3.0)) == pytest.approx(1.0, rel=1e-15)
        p = L(1.5, 2.0, 0.5)
        probs = pmf_V(p, 2).probs
        assert ratio_p1_p0(p) == pytest.approx(probs[1] / probs[0], rel=1e-12)

    def test_boundary(self):
        b = boundary_theta(3.0, 0.0)
        assert b.exact == pytest.approx(4.0, rel=1e-15) and b.approx == 4.0
        b = boundary_theta(20.0, 0.5)
        assert abs(b.exact / b.approx - 1) < 0.02
        assert boundary_theta(1e-8, 0.0).exact == pytest.approx(1.0, abs=1e-7)

    def test_boundary_residual_stabilizes(self):
        res = [boundary_theta(g, 0.5) for g in (10, 20, 40, 80)]
        resid = [g * (r.exact - r.approx) for g, r in zip((10, 20, 40, 80), res)]
        # gamma-scaled residual changes less and less
        steps = np.abs(np.diff(resid))
        assert steps[0] > steps[1] > steps[2]
        assert all(abs(r.exact - r.approx) <= abs(resid[-1]) * 2 / g for g, r in zip((10, 20, 40, 80), res))

    def test_contour(self):
        c = p0_contour_theta(2.0, 0.0, math.exp(-0.5))
        assert c.exact == pytest.approx(1.0, rel=1e-14)
        assert p0_contour_theta(2.0, 0.3, 1 - 1e-12).exact < 1e-10
        c = p0_contour_theta(10.0, 0.4, 0.5)
        assert abs(c.exact / c.approx - 1) < 0.05

    def test_mode_examples(self):
        r = mode_V(L(1.5, 1.0, 0.5))
        assert r.mode == 0 and r.certified and r.ratio_p1_p0 < 1
        assert mode_V(L(0.5, 10.0, 0.5)).mode >= 1
        assert mode_V(L(1.5, 1e-6, 0.5)).mode == 0
        assert set(r.to_dict()) >= {"mode", "p_at_mode", "p0", "ratio_p1_p0", "certified"}

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.3, 4.0), st.floats(0.05, 8.0), st.floats(0.0, 0.9))
    def test_mode_zero_iff_ratio_below_one(self, g, theta, q):
        p = L(g, theta, q)
        ratio = ratio_p1_p0(p)
        if abs(ratio - 1) < 1e-9:
            return
        r = mode_V(p, nmax_cap=1 << 12)
        probs = pmf_V(p, r.scanned - 1).probs
        assert r.p_at_mode >= probs.max()
        assert (r.mode == 0) == (ratio < 1)


class TestCloneSize:
    def test_no_zero_clones_without_death(self):
        val, lam = clone_size_gf(L(1.0, 2.0), 0.0)
        assert val == 0.0 and lam == 2.0

    def test_normalization_at_one(self):
        for g in (0.5, 1.0, 3.0):
            assert clone_size_gf(L(g, 1.0, 0.3), 1.0)[0] == 1.0

    def test_gf_matches_pmf(self):
        p = L(2.5, 1.0, 0.4)
        x = clone_size_pmf(p, 200)
        z = 0.6
        assert np.dot(x, z ** np.arange(201)) == pytest.approx(clone_size_gf(p, z)[0], rel=1e-12)
        assert x[0] == pytest.approx(clone_size_gf(p, 0.0)[0], rel=1e-12)
