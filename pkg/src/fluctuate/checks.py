"""Identity and oracle checks shared by ``fluctuate selftest`` and the tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import mpmath
import numpy as np

from .specfun import _series, hyp2f1, hyp2f1_z1_limit

__all__ = ["CheckResult", "identity_suite", "selftest"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    cases: int
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: worst={self.worst:.3g} over {self.cases} cases {self.detail}".rstrip()


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


def _pfaff(rng, n):
    """Both Pfaff forms, each evaluated at w = z/(z-1) in (0, 1).

    ``hyp2f1`` itself routes negative arguments through one of them, so the
    two right-hand sides are compared with each other, and with the direct
    series where it converges.
    """
    worst = 0.0
    for _ in range(n):
        b = rng.uniform(0.05, 4.0)
        c = b + rng.uniform(0.05, 4.0)
        a = rng.uniform(-4.0, 4.0)
        z = -rng.uniform(1e-3, 50.0)
        omz = 1.0 - z
        w = z / (z - 1.0)
        via_b = omz ** (-b) * hyp2f1(c - a, b, c, w, one_minus_z=1.0 / omz)
        via_a = omz ** (-a) * hyp2f1(a, c - b, c, w, one_minus_z=1.0 / omz)
        worst = max(worst, abs(via_a - via_b) / max(abs(via_b), 1e-300))
        if z > -0.8:
            direct = _series(a, b, c, z, 1e-15)
            worst = max(worst, abs(direct - via_b) / max(abs(direct), 1.0))
    return worst


def _euler(rng, n):
    worst = 0.0
    for _ in range(n):
        a = rng.uniform(-3.0, 3.0)
        b = rng.uniform(-3.0, 3.0)
        c = rng.uniform(0.2, 5.0)
        z = rng.uniform(0.0, 0.9)
        lhs = hyp2f1(a, b, c, z)
        rhs = (1.0 - z) ** (c - a - b) * hyp2f1(c - a, c - b, c, z)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0))
    return worst


def _derivative(rng, n):
    worst = 0.0
    for _ in range(n):
        a = rng.uniform(0.1, 3.0)
        b = rng.uniform(0.1, 3.0)
        c = rng.uniform(0.5, 5.0)
        z = rng.uniform(-0.9, 0.9)
        h = 1e-5
        fd = (hyp2f1(a, b, c, z + h) - hyp2f1(a, b, c, z - h)) / (2 * h)
        exact = a * b / c * hyp2f1(a + 1, b + 1, c + 1, z)
        worst = max(worst, _rel(fd, exact))
    return worst


def _contiguous(rng, n):
    worst = 0.0
    for _ in range(n):
        b = rng.uniform(0.05, 5.0)
        c = rng.uniform(0.5, 6.0)
        z = rng.uniform(-5.0, 0.95)
        lhs = hyp2f1(1.0, b, c, z)
        rhs = 1.0 + b / c * z * hyp2f1(1.0, b + 1, c + 1, z)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
    return worst


def _gauss(rng, n):
    worst = 0.0
    for _ in range(n):
        a = rng.uniform(-3.0, 3.0)
        b = rng.uniform(-3.0, 3.0)
        c = a + b + rng.uniform(0.05, 4.0)
        if c <= 0 and abs(c - round(c)) < 1e-9:
            c += 0.5
        got = hyp2f1(a, b, c, 1.0)
        ref = float(mpmath.hyp2f1(a, b, c, 1))
        worst = max(worst, abs(got - ref) / max(abs(ref), 1.0))
    return worst


def _z1_limits(rng, n):
    """Classification of z -> 1; returns (worst, misclassified)."""
    worst = 0.0
    wrong = 0
    with mpmath.workdps(90):
        for i in range(n):
            a = rng.uniform(0.1, 3.0)
            b = rng.uniform(0.1, 3.0)
            kind = i % 3
            if kind == 0:
                c = a + b + rng.uniform(0.2, 3.0)
            elif kind == 1:
                c = a + b
            else:
                c = a + b - rng.uniform(0.2, 2.0)
                if c <= 0:
                    c = a + b - 0.2
            lim = hyp2f1_z1_limit(a, b, c)
            expect = ("finite", "log", "power")[kind]
            if lim.kind != expect:
                wrong += 1
                continue
            if kind == 0:
                ref = mpmath.hyp2f1(a, b, c, 1)
                err = _rel(lim.value, float(ref))
            elif kind == 1:
                # F(1 - e1) - F(1 - e2) = coef * log(e2 / e1) + o(1)
                e1, e2 = mpmath.mpf(10) ** -40, mpmath.mpf(10) ** -30
                diff = mpmath.hyp2f1(a, b, c, 1 - e1) - mpmath.hyp2f1(a, b, c, 1 - e2)
                err = _rel(lim.coefficient, float(diff / mpmath.log(e2 / e1)))
            else:
                eps = mpmath.mpf(10) ** -70
                ref = eps ** (a + b - c) * mpmath.hyp2f1(a, b, c, 1 - eps)
                err = _rel(lim.coefficient, float(ref))
                if abs(lim.exponent - (c - a - b)) > 1e-14:
                    wrong += 1
            worst = max(worst, err)
    return worst, wrong


def identity_suite(n_cases: int = 1000, seed: int = 20240101) -> list:
    """Randomized identity checks of :func:`fluctuate.specfun.hyp2f1`.

    Each identity runs ``n_cases`` random parameter sets.
    """
    rng = np.random.default_rng(seed)
    out = []
    for name, fn, tol in (
        ("pfaff", _pfaff, 1e-10),
        ("euler", _euler, 1e-10),
        ("derivative", _derivative, 1e-6),
        ("contiguous", _contiguous, 1e-12),
        ("gauss_at_one", _gauss, 1e-10),
    ):
        worst = fn(rng, n_cases)
        out.append(CheckResult(name, worst <= tol, worst, n_cases, f"tol={tol:g}"))
    worst, wrong = _z1_limits(rng, n_cases)
    out.append(CheckResult("z1_limits", worst <= 1e-8 and wrong == 0, worst, n_cases,
                           f"tol=1e-8 misclassified={wrong}"))
    return out


def selftest(quick: bool = True) -> list:
    """Fast end-to-end checks; returns a list of :class:`CheckResult`."""
    from .exact import mean_B, pmf_B, pmf_oracle_cauchy, variance_B
    from .lpsm import coefficients_lpsm, pmf_V, resistance_p0
    from .model import LpsmParams, ModelParams
    from .sim import SimConfig, chi_square_test, simulate, tv_distance

    results = identity_suite(100 if quick else 1000)

    p = LpsmParams(1.0, 1.0, 0.0)
    pm = pmf_V(p, 5)
    err = max(abs(pm.probs[0] - math.exp(-1)), abs(pm.probs[1] - math.exp(-1) / 2))
    results.append(CheckResult("lea_coulson", err <= 1e-12, err, 1))

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        lp = LpsmParams(rng.uniform(0.2, 5), rng.uniform(0.01, 10), rng.uniform(0, 0.9))
        q0 = coefficients_lpsm(lp, 1).q_coeffs[0]
        worst = max(worst, _rel(math.exp(q0), resistance_p0(lp)))
    results.append(CheckResult("resistance_identity", worst <= 1e-13, worst, 20))

    mp = ModelParams.from_lpsm_like(1.5, 0.5, 100, 0.01)
    rec = pmf_B(mp, nmax=30).probs
    ora = pmf_oracle_cauchy(mp, 30).probs
    err = float(np.max(np.abs(rec - ora)))
    results.append(CheckResult("oracle_vs_recursion", err <= 1e-8, err, 31))

    mp = ModelParams.from_lpsm_like(2.0, 0.0, 100, 0.01)
    pb = pmf_B(mp)
    e1 = _rel(pb.mean(), mean_B(mp))
    e2 = _rel(pb.variance(), variance_B(mp))
    results.append(CheckResult("moment_closure", e1 <= 1e-4 and e2 <= 1e-3, max(e1, e2), 2))

    t0 = time.perf_counter()
    mp = ModelParams.from_lpsm_like(1.5, 0.5, 100, 0.01)
    s = simulate(SimConfig(mp, 20000 if quick else 100000, seed=11))
    ref = pmf_B(mp)
    tv = tv_distance(s, ref)
    chi = chi_square_test(s, ref)
    results.append(CheckResult("monte_carlo", tv < 0.02 and chi["pvalue"] > 1e-3, tv, s.n_trajectories,
                               f"p={chi['pvalue']:.3g} t={time.perf_counter() - t0:.2f}s"))
    return results
