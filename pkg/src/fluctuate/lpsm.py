"""Large-population small-mutation-rate limit law V.

In the limit ``N -> infinity``, ``mu -> 0`` with ``theta = N mu`` fixed the
mutant count converges to V with

    log E[z**V] = -(theta/gamma) 2F1(1, gamma; 1+gamma; xi),
    xi = (q - z)/(1 - z).

V is compound Poisson with clone intensity ``theta / ((1-q) gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NumericError
from .exact import CoefficientSeries, Pmf, integral_recurrence, pmf_from_coefficients
from .model import LpsmParams
from .specfun import hyp2f1, hyp2f1_z1_limit

__all__ = [
    "ModeReport",
    "BoundaryReport",
    "ContourReport",
    "log_gf_V",
    "log_laplace_V",
    "coefficients_lpsm",
    "pmf_V",
    "moments_V",
    "resistance_p0",
    "resistance_probability",
    "ratio_p1_p0",
    "boundary_theta",
    "p0_contour_theta",
    "mode_V",
    "clone_intensity",
    "clone_size_gf",
    "clone_size_pmf",
]

_FORM_TOL = 1e-10
# coefficients above this index come from the backward recurrence
_DIRECT_KMAX = 200


def _log_gf_forms(p: LpsmParams, omz: float):
    """Both closed forms of Lambda_V at ``z = 1 - omz``."""
    g, q, theta = p.gamma, p.q, p.theta
    # xi = 1 - (1-q)/(1-z) and y = 1 - (1-z)/(1-q), with 1-z passed exactly
    xi = 1.0 - (1.0 - q) / omz
    omy = omz / (1.0 - q)
    y = 1.0 - omy
    a = -theta / g * hyp2f1(1.0, g, 1.0 + g, xi, one_minus_z=(1.0 - q) / omz)
    b = -theta / g * omy * hyp2f1(1.0, 1.0, 1.0 + g, y, one_minus_z=omy)
    return a, b


def _log_gf_checked(p, omz):
    if omz == 0.0:
        # normalisation; see hyp2f1_z1_limit for the behaviour of the forms
        return 0.0
    a, b = _log_gf_forms(p, omz)
    if abs(a - b) > _FORM_TOL * max(abs(a), abs(b), 1e-300):
        raise NumericError("closed forms of Lambda_V disagree", xi_form=a, y_form=b, z=1.0 - omz)
    return a


def log_gf_V(p: LpsmParams, z: float) -> float:
    """Lambda_V(z) = log E[z**V] for z in [0, 1].

    The xi-form and the y-form (related by a Pfaff transformation) are
    both evaluated and must agree to 1e-10. ``Lambda_V(1) = 0``.

    Examples
    --------
    >>> round(log_gf_V(LpsmParams(gamma=1, theta=1, q=0), 0.5), 6)
    -0.693147
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"log_gf_V needs z in [0, 1], got {z!r}")
    return _log_gf_checked(p, 1.0 - z)


def log_laplace_V(p: LpsmParams, s: float) -> float:
    """log E[exp(-s V)] for s >= 0, accurate for tiny s."""
    if s < 0:
        raise DomainError("log_laplace_V needs s >= 0")
    if s == 0.0:
        return 0.0
    return _log_gf_checked(p, -math.expm1(-s))


def _lpsm_ratios(g, kmax):
    out = np.empty(kmax)
    r = 1.0 / (g + 1.0)
    for k in range(1, kmax + 1):
        out[k - 1] = r
        r *= k / (g + 1.0 + k)
    return out


def _lpsm_qk(g, q, k):
    """(k-1)!/(g+1)_k * 2F1(k, g; 1+g+k; q) for one k."""
    logr = math.lgamma(k) + math.lgamma(g + 1.0) - math.lgamma(g + 1.0 + k)
    return math.exp(logr) * hyp2f1(k, g, 1.0 + g + k, q)


def coefficients_lpsm(p: LpsmParams, nmax: int) -> CoefficientSeries:
    """Recursion coefficients of V.

    ``q_0 = -(theta/gamma) 2F1(1, gamma; 1+gamma; q)`` and
    ``q_k = theta (k-1)!/(gamma+1)_k 2F1(k, gamma; 1+gamma+k; q)``.
    Beyond k = 200 the values come from a backward three-term recurrence
    anchored at two direct evaluations.

    Examples
    --------
    >>> c = coefficients_lpsm(LpsmParams(gamma=2, theta=1, q=0), 2)
    >>> [round(x, 12) for x in c.q_coeffs]
    [-0.5, 0.333333333333, 0.083333333333]
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    g, q, theta = p.gamma, p.q, p.theta
    qc = np.empty(nmax + 1)
    qc[0] = -theta / g * hyp2f1(1.0, g, 1.0 + g, q)
    if nmax == 0:
        return CoefficientSeries("Lpsm", qc, p, "closed_form")
    if q == 0.0:
        qc[1:] = theta * _lpsm_ratios(g, nmax)
        return CoefficientSeries("Lpsm", qc, p, "closed_form")
    kd = min(nmax, _DIRECT_KMAX)
    ratios = _lpsm_ratios(g, kd)
    qc[1 : kd + 1] = theta * ratios * np.array([hyp2f1(k, g, 1.0 + g + k, q) for k in range(1, kd + 1)])
    if nmax > kd:
        anchors = (_lpsm_qk(g, q, nmax + 1), _lpsm_qk(g, q, nmax + 2))
        qc[kd + 1 :] = theta * integral_recurrence(g, q, 1.0, anchors, kd + 1, nmax)
    return CoefficientSeries("Lpsm", qc, p, "closed_form")


def pmf_V(p: LpsmParams, nmax: int = 1000) -> Pmf:
    """Pmf of V on 0..nmax.

    The tail of V is a power law, so the table is always truncated at a
    fixed ``nmax``; the missing mass is reported.
    """
    return pmf_from_coefficients(coefficients_lpsm(p, nmax), nmax)


def moments_V(p: LpsmParams) -> dict:
    """Mean and variance of V; infinite moments are ``math.inf``.

    Examples
    --------
    >>> moments_V(LpsmParams(gamma=3, theta=1, q=0))
    {'mean': 0.5, 'variance': 1.5}
    """
    g, q, theta = p.gamma, p.q, p.theta
    mean = theta / ((1.0 - q) * (g - 1.0)) if g > 1.0 else math.inf
    if g > 2.0:
        var = theta / (1.0 - q) ** 2 * (q * (2.0 - g) + g) / ((g - 2.0) * (g - 1.0))
    else:
        var = math.inf
    return {"mean": mean, "variance": var}


def resistance_p0(p: LpsmParams) -> float:
    """P(V = 0), evaluated through the y-form of the generating function.

    With ``y0 = -q/(1-q)``, ``log P(V=0) = -(theta/gamma)(1-y0)
    2F1(1, 1; 1+gamma; y0)``; this is a separate code path from
    ``exp(q_0)``.
    """
    g, q, theta = p.gamma, p.q, p.theta
    y0 = -q / (1.0 - q)
    omy = 1.0 / (1.0 - q)
    return math.exp(-theta / g * omy * hyp2f1(1.0, 1.0, 1.0 + g, y0, one_minus_z=omy))


def resistance_probability(p: LpsmParams) -> float:
    """P(V > 0) = 1 - P(V = 0), without cancellation for small theta."""
    g, q, theta = p.gamma, p.q, p.theta
    y0 = -q / (1.0 - q)
    omy = 1.0 / (1.0 - q)
    return -math.expm1(-theta / g * omy * hyp2f1(1.0, 1.0, 1.0 + g, y0, one_minus_z=omy))


def ratio_p1_p0(p: LpsmParams) -> float:
    """P(V=1)/P(V=0) = theta/(gamma+1) 2F1(1, gamma; 2+gamma; q)."""
    g = p.gamma
    return p.theta / (g + 1.0) * hyp2f1(1.0, g, 2.0 + g, p.q)


@dataclass(frozen=True)
class BoundaryReport:
    """theta at which P(V=1) = P(V=0), exact and large-gamma line."""

    gamma: float
    q: float
    exact: float
    approx: float


def boundary_theta(gamma: float, q: float) -> BoundaryReport:
    """theta*(gamma, q) = (1+gamma)/2F1(1, gamma; 2+gamma; q).

    ``approx`` is the large-gamma line ``1 + q + (1-q) gamma``.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not 0 <= q < 1:
        raise DomainError("q must lie in [0, 1)")
    exact = (1.0 + gamma) / hyp2f1(1.0, gamma, 2.0 + gamma, q)
    return BoundaryReport(gamma, q, exact, 1.0 + q + (1.0 - q) * gamma)


@dataclass(frozen=True)
class ContourReport:
    """theta on the level line P(V=0) = target."""

    gamma: float
    q: float
    p0_target: float
    exact: float
    approx: float


def p0_contour_theta(gamma: float, q: float, p0_target: float) -> ContourReport:
    """theta solving P(V=0) = p0_target, exact and large-gamma forms."""
    if not 0 < p0_target < 1:
        raise DomainError("p0_target must lie in (0, 1)")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not 0 <= q < 1:
        raise DomainError("q must lie in [0, 1)")
    lp = math.log(p0_target)
    exact = -gamma * lp / hyp2f1(1.0, gamma, 1.0 + gamma, q)
    approx = -(gamma * (1.0 - q) + q) * lp
    return ContourReport(gamma, q, p0_target, exact, approx)


@dataclass(frozen=True)
class ModeReport:
    """Most probable value of V.

    ``certified`` is true when the mass beyond the scanned range is below
    ``p_at_mode``, so no later value can exceed it.
    """

    mode: int
    p_at_mode: float
    p0: float
    ratio_p1_p0: float
    certified: bool
    local_maxima: list = field(default_factory=list)
    multimodal: bool = False
    scanned: int = 0

    def to_dict(self):
        return asdict(self)


def _local_maxima(probs):
    n = len(probs)
    out = []
    for i in range(n):
        left = probs[i - 1] if i > 0 else -1.0
        right = probs[i + 1] if i + 1 < n else -1.0
        if probs[i] > left and probs[i] >= right and probs[i] > 0:
            out.append(i)
    return out


def mode_V(p: LpsmParams, nmax_cap: int = 1 << 16) -> ModeReport:
    """Scan the pmf of V until the running maximum is provably global."""
    n = 256
    while True:
        n = min(n, nmax_cap)
        pmf = pmf_V(p, n)
        probs = pmf.probs
        mode = int(np.argmax(probs))
        pmax = float(probs[mode])
        certified = pmf.truncation_mass < pmax
        if certified or n >= nmax_cap:
            break
        n *= 2
    maxima = _local_maxima(probs)
    # the last index is not a maximum if the table was merely cut there
    if maxima and maxima[-1] == len(probs) - 1 and not certified:
        maxima = maxima[:-1]
    return ModeReport(
        mode=mode,
        p_at_mode=pmax,
        p0=float(probs[0]),
        ratio_p1_p0=ratio_p1_p0(p),
        certified=bool(certified),
        local_maxima=maxima,
        multimodal=len(maxima) > 1,
        scanned=len(probs),
    )


def clone_intensity(p: LpsmParams) -> float:
    """Poisson intensity theta/((1-q) gamma) of the clone count."""
    return p.theta / ((1.0 - p.q) * p.gamma)


def clone_size_gf(p: LpsmParams, z: float):
    """Generating function of the clone-size law and the clone intensity.

    Returns ``(E[z**X], intensity)`` with ``E[z**X] = 1 - (1-q)
    2F1(1, gamma; 1+gamma; xi)``.
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"clone_size_gf needs z in [0, 1], got {z!r}")
    g, q = p.gamma, p.q
    if z == 1.0:
        # 2F1(1,g;1+g;xi) = (1-y) 2F1(1,1;1+g;y) and every z->1 behaviour of
        # the second factor is dominated by the vanishing (1-y)
        # (finite, log or power kind alike)
        hyp2f1_z1_limit(1.0, 1.0, 1.0 + g)
        return 1.0, clone_intensity(p)
    omz = 1.0 - z
    xi = 1.0 - (1.0 - q) / omz
    value = 1.0 - (1.0 - q) * hyp2f1(1.0, g, 1.0 + g, xi, one_minus_z=(1.0 - q) / omz)
    return value, clone_intensity(p)


def clone_size_pmf(p: LpsmParams, nmax: int, grid_size: int | None = None) -> np.ndarray:
    """P(X = n), n = 0..nmax, by discrete Cauchy integrals in mpmath.

    Uses the series ``2F1(1, g; 1+g; xi) = g sum_k xi^k/(g+k)`` on a
    circle where ``|xi| <= max(1/2, (1+q)/2)``.
    """
    import mpmath

    from .exact import _xi_radius

    if grid_size is None:
        grid_size = max(4 * nmax, 64)
    g, q = p.gamma, p.q
    rho = max(0.5, 0.5 * (1.0 + q))
    r = _xi_radius(q, rho)
    dps = int(30 + nmax * math.log10(1.0 / r))
    with mpmath.workdps(dps):
        nterms = int(math.ceil(dps * math.log(10.0) / math.log(1.0 / rho))) + 10
        mg = mpmath.mpf(g)
        coef = [mg / (mg + k) for k in range(nterms)]
        coef.reverse()
        rr = mpmath.mpf(r)
        mq = mpmath.mpf(q)
        M = grid_size
        half = []
        for j in range(M // 2 + 1):
            z = rr * mpmath.expjpi(mpmath.mpf(2 * j) / M)
            xi = (mq - z) / (1 - z)
            half.append(1 - (1 - mq) * mpmath.polyval(coef, xi))
        full = half + [mpmath.conj(half[M - j]) for j in range(M // 2 + 1, M)]
        out = np.empty(nmax + 1)
        for n in range(nmax + 1):
            acc = mpmath.fsum(full[j] * mpmath.expjpi(-mpmath.mpf(2 * j * n) / M) for j in range(M))
            out[n] = float((acc / M / rr**n).real)
    return out
