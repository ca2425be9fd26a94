"""Exact finite-N distribution of the mutant count B.

B is compound Poisson, so ``log G_B(z) = sum_k q_k z**k`` and the
probabilities follow from the recursion

    p_0 = exp(q_0),   p_n = (1/n) * sum_{k<n} (n - k) q_{n-k} p_k.

Two independent routes to p_n are provided: the recursion with
coefficients from closed forms (:func:`pmf_B`) and Cauchy-integral
coefficient extraction at high precision (:func:`pmf_oracle_cauchy`).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaincc, betaln, gammaln

from .errors import DomainError, NumericError
from .model import LpsmParams, ModelParams, params_from_mapping
from .specfun import hyp2f1

__all__ = [
    "CoefficientSeries",
    "Pmf",
    "log_gf_B",
    "log_laplace_B",
    "mean_B",
    "variance_B",
    "coefficients_exact",
    "coefficients_neutral",
    "pmf_from_coefficients",
    "pmf_B",
    "pmf_oracle_cauchy",
    "NEUTRAL_TOL",
    "BRANCH_TOL",
]

# |gamma - 1| below this selects the neutral closed forms
NEUTRAL_TOL = 1e-8
# removable singularities of the moment formulas at gamma = 1, 2
BRANCH_TOL = 1e-8
# largest tolerated ratio of the biggest binomial-sum addend to the result
_MAX_CANCELLATION = 1e6
# "auto" leaves the binomial sum earlier: its error grows like the square
# of the cancellation ratio
_AUTO_CANCELLATION = 1e2
_BINOMIAL_KMAX = 200
_FLUSH = 1e-300
_NEG_SLACK = 1e-12
_RESCALE_HI = 1e200


@dataclass(frozen=True)
class CoefficientSeries:
    """Taylor coefficients q_0..q_nmax of a log-generating function.

    ``regime`` is one of ``"ExactGeneral"``, ``"ExactNeutral"`` or
    ``"Lpsm"``.
    """

    regime: str
    q_coeffs: np.ndarray
    params: object
    method: str = ""

    @property
    def nmax(self):
        return len(self.q_coeffs) - 1

    def check(self):
        """Raise if q_0 > 0 or some q_k < -1e-12."""
        q = self.q_coeffs
        if q[0] > 0:
            raise NumericError("q_0 must be nonpositive", q0=float(q[0]))
        if len(q) > 1 and q[1:].min() < -_NEG_SLACK:
            k = int(np.argmin(q[1:])) + 1
            raise NumericError("negative jump weight", k=k, q_k=float(q[k]))
        return self


@dataclass(frozen=True)
class Pmf:
    """Truncated probability table p_0..p_nmax.

    Attributes
    ----------
    probs : ndarray
        Probabilities, read-only.
    truncation_mass : float
        ``1 - sum(probs)``, clipped at 0.
    params : ModelParams or LpsmParams
        Source parameters.
    regime : str
        Which route produced the table.
    bound : str
        ``"eps"`` when the adaptive loop met its tolerance, ``"cap"`` when
        it stopped at the size cap, ``"nmax"`` for a fixed request.
    flushed : bool
        Whether values below 1e-300 were set to zero.
    """

    probs: np.ndarray
    truncation_mass: float
    params: object
    regime: str
    bound: str = "nmax"
    flushed: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def nmax(self):
        return len(self.probs) - 1

    def mean(self):
        n = np.arange(len(self.probs))
        return float(np.dot(n, self.probs))

    def variance(self):
        n = np.arange(len(self.probs), dtype=float)
        m = np.dot(n, self.probs)
        return float(np.dot((n - m) ** 2, self.probs))

    def to_csv(self, digits=17):
        buf = io.StringIO()
        buf.write("n,p\n")
        fmt = f"{{:.{digits}g}}"
        for n, p in enumerate(self.probs):
            buf.write(f"{n},{fmt.format(p)}\n")
        return buf.getvalue()

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "regime": self.regime,
            "truncation_mass": self.truncation_mass,
            "p": [float(p) for p in self.probs],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(
            probs=np.array(data["p"], dtype=float),
            truncation_mass=float(data["truncation_mass"]),
            params=params_from_mapping(data["params"]),
            regime=data["regime"],
        )

    @classmethod
    def from_csv(cls, text, params, regime):
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        probs = np.array([float(p) for _, p in rows])
        return cls(probs, max(0.0, 1.0 - float(probs.sum())), params, regime)


# ---------------------------------------------------------------------------
# generating function and moments
# ---------------------------------------------------------------------------


def log_gf_B(params: ModelParams, z: float) -> float:
    """Log-generating function Lambda_B(z) = log E[z**B] for z in [0, 1].

    Examples
    --------
    >>> p = ModelParams(alpha=1, beta=0, nu=0.01, delta=1, N=100)
    >>> round(log_gf_B(p, 0.5), 4)
    -0.6832
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"log_gf_B needs z in [0, 1], got {z!r}")
    n_eff, mu_eff = params.effective()
    if mu_eff == 0.0 or n_eff == 1.0 or z == 1.0:
        return 0.0
    g = params.gamma
    q = params.q
    xi = (q - z) / (1.0 - z)
    c = n_eff ** (-1.0 / g)
    theta = n_eff * mu_eff
    return theta / g * (hyp2f1(1.0, g, 1.0 + g, xi * c) / n_eff - hyp2f1(1.0, g, 1.0 + g, xi))


def log_laplace_B(params: ModelParams, s: float) -> float:
    """log E[exp(-s B)] for s >= 0, keeping 1 - exp(-s) exact for tiny s."""
    if s < 0:
        raise DomainError("log_laplace_B needs s >= 0")
    n_eff, mu_eff = params.effective()
    if s == 0.0 or mu_eff == 0.0 or n_eff == 1.0:
        return 0.0
    g = params.gamma
    q = params.q
    omz = -math.expm1(-s)
    c = n_eff ** (-1.0 / g)
    theta = n_eff * mu_eff
    # 1 - xi = (1-q)/(1-z); 1 - c xi = 1 - c + c (1-q)/(1-z)
    omxi = (1.0 - q) / omz
    xi = 1.0 - omxi
    f1 = hyp2f1(1.0, g, 1.0 + g, c * xi, one_minus_z=1.0 - c + c * omxi)
    f2 = hyp2f1(1.0, g, 1.0 + g, xi, one_minus_z=omxi)
    return theta / g * (f1 / n_eff - f2)


def mean_B(params: ModelParams) -> float:
    """E(B); the gamma = 1 branch is used when |gamma - 1| < 1e-8."""
    n_eff, mu_eff = params.effective()
    theta = n_eff * mu_eff
    if theta == 0.0:
        return 0.0
    g = params.gamma
    if abs(g - 1.0) < BRANCH_TOL:
        core = math.log(n_eff)
    else:
        core = math.expm1((1.0 / g - 1.0) * math.log(n_eff)) / (1.0 - g)
    return theta / (1.0 - params.q) * core


def variance_B(params: ModelParams) -> float:
    """Var(B) with special branches at gamma = 1 and gamma = 2."""
    n_eff, mu_eff = params.effective()
    theta = n_eff * mu_eff
    if theta == 0.0:
        return 0.0
    g = params.gamma
    q = params.q
    ln = math.log(n_eff)
    if abs(g - 1.0) < BRANCH_TOL:
        core = 2.0 * (n_eff - 1.0) - (1.0 + q) * ln
    elif abs(g - 2.0) < BRANCH_TOL:
        core = (1.0 + q) * (n_eff**-0.5 - 1.0) + ln
    else:
        core = (
            2.0 / (2.0 - g) * n_eff ** (2.0 / g - 1.0)
            + (1.0 + q) / (g - 1.0) * n_eff ** (1.0 / g - 1.0)
            + (q * (2.0 - g) + g) / ((2.0 - g) * (1.0 - g))
        )
    return theta / (1.0 - q) ** 2 * core


# ---------------------------------------------------------------------------
# recursion coefficients
# ---------------------------------------------------------------------------


def _pochhammer_ratios(g, kmax):
    """(k-1)!/(g+1)_k for k = 1..kmax by cumulative product."""
    out = np.empty(kmax)
    r = 1.0 / (g + 1.0)
    for k in range(1, kmax + 1):
        out[k - 1] = r
        r *= k / (g + 1.0 + k)
    return out


def _lpsm_terms(g, q, kmax):
    """(k-1)!/(g+1)_k * 2F1(k, g; 1+g+k; q) for k = 1..kmax."""
    ratios = _pochhammer_ratios(g, kmax)
    if q == 0.0:
        return ratios
    hyp = np.array([hyp2f1(k, g, 1.0 + g + k, q) for k in range(1, kmax + 1)])
    return ratios * hyp


def _q0_exact(g, q, n_eff, theta):
    c = n_eff ** (-1.0 / g)
    return theta / g * (hyp2f1(1.0, g, 1.0 + g, c * q) / n_eff - hyp2f1(1.0, g, 1.0 + g, q))


def _qk_binomial(g, q, n_eff, mu_eff, kmax):
    """Binomial-weighted hypergeometric sum for q_1..q_kmax.

    Returns the coefficients and the cancellation ratio of each.
    """
    theta = n_eff * mu_eff
    r = (1.0 - q) / (q - n_eff ** (1.0 / g))
    x = n_eff ** (-1.0 / g) * q
    j = np.arange(1, kmax + 1, dtype=float)
    fj = np.array([hyp2f1(1.0, g, 1.0 + g + jj, x) for jj in j])
    with np.errstate(under="ignore"):
        aj = np.exp(j * math.log(abs(r))) * np.where(j % 2 == 1, np.sign(r), 1.0) * fj / (j + g)
    lead = theta * _lpsm_terms(g, q, kmax)
    out = np.empty(kmax)
    cancel = np.empty(kmax)
    for k in range(1, kmax + 1):
        jj = j[:k]
        logc = gammaln(k) - gammaln(jj) - gammaln(k - jj + 1.0)
        terms = mu_eff * np.exp(logc) * aj[:k]
        val = math.fsum(terms) + lead[k - 1]
        out[k - 1] = val
        big = max(np.abs(terms).max(), abs(lead[k - 1]))
        cancel[k - 1] = big / abs(val) if val != 0.0 else math.inf
    return out, cancel


def _qk_beta(g, q, n_eff, mu_eff, kmin, kmax):
    """Positive-term representation of q_kmin..q_kmax.

    Uses ``q_k = theta * sum_m (g)_m q^m / m! * B(k+m, g+1) *
    I_{1-x_c}(g+1, k+m)`` with ``x_c = c (1-q)/(1-c q)``, ``c = N**(-1/g)``,
    obtained by integrating the clone-birth integral in the variable
    ``(1-s)/(1-s q)``. Every addend is nonnegative.
    """
    theta = n_eff * mu_eff
    c = n_eff ** (-1.0 / g)
    xc = c * (1.0 - q) / (1.0 - c * q)
    k = np.arange(kmin, kmax + 1, dtype=float)
    total = np.zeros_like(k)
    if q == 0.0:
        return theta * np.exp(betaln(k, g + 1.0)) * betaincc(g + 1.0, k, xc)
    logq = math.log(q)
    lgg = math.lgamma(g)
    m = 0
    while True:
        logw = math.lgamma(g + m) - lgg + m * logq - math.lgamma(m + 1.0)
        with np.errstate(under="ignore"):
            term = np.exp(logw + betaln(k + m, g + 1.0)) * betaincc(g + 1.0, k + m, xc)
        total += term
        # terms decrease geometrically once m exceeds (g - 1) q / (1 - q)
        if m > (g - 1.0) * q / (1.0 - q) and np.all(term <= 1e-17 * total):
            break
        m += 1
        if m > 1_000_000:
            raise NumericError("beta-series for q_k did not converge", gamma=g, q=q)
    return theta * total


def integral_recurrence(g, q, tc, anchors, klo, khi):
    """I_klo..I_khi by backward recurrence from I_{khi+1}, I_{khi+2}.

    ``I_k = int_0^tc t^(k-1) f(t) dt`` with ``f = (1-t)^g (1-t q)^(-g)``.
    Integrating ``t^k (1-t)(1-tq) f'`` by parts gives

        k I_k = B_k + [(1+q)(k+1) + g(1-q)] I_{k+1} - q (k+2) I_{k+2},

    ``B_k = tc^k (1-tc)(1-tc q) f(tc)``. Homogeneous solutions behave like
    powers of k and like q^-k, so the downward direction damps errors in
    the anchors.
    """
    size = khi - klo + 3
    vals = np.zeros(size)
    vals[-2], vals[-1] = anchors
    a1 = 1.0 + q
    a0 = g * (1.0 - q)
    if tc < 1.0:
        boundary = (1.0 - tc) ** (g + 1.0) * (1.0 - tc * q) ** (1.0 - g)
        logtc = math.log(tc)
    else:
        boundary = 0.0
        logtc = 0.0
    for i in range(size - 3, -1, -1):
        k = klo + i
        bk = math.exp(k * logtc) * boundary if k * logtc > -745.0 else 0.0
        vals[i] = (bk + (a1 * (k + 1) + a0) * vals[i + 1] - q * (k + 2) * vals[i + 2]) / k
    return vals[: khi - klo + 1]


def _qk_backward(g, q, n_eff, mu_eff, klo, khi):
    """q_klo..q_khi from :func:`integral_recurrence` with beta-series anchors."""
    theta = n_eff * mu_eff
    c = n_eff ** (-1.0 / g)
    tc = (1.0 - c) / (1.0 - c * q)
    anchors = _qk_beta(g, q, n_eff, mu_eff, khi + 1, khi + 2) / theta
    return theta * integral_recurrence(g, q, tc, anchors, klo, khi)


# the beta series is used up to this index, the recurrence beyond it
_BETA_KMAX = 1000


def _qk_positive(g, q, n_eff, mu_eff, kmin, kmax):
    """Cancellation-free q_kmin..q_kmax."""
    parts = []
    if kmin <= _BETA_KMAX:
        parts.append(_qk_beta(g, q, n_eff, mu_eff, kmin, min(kmax, _BETA_KMAX)))
    if kmax > _BETA_KMAX:
        parts.append(_qk_backward(g, q, n_eff, mu_eff, max(kmin, _BETA_KMAX + 1), kmax))
    return np.concatenate(parts)


def coefficients_exact(params: ModelParams, nmax: int, method: str = "auto") -> CoefficientSeries:
    """Recursion coefficients q_0..q_nmax of the finite-N law.

    Parameters
    ----------
    params : ModelParams
    nmax : int
        Highest coefficient index.
    method : {"auto", "binomial", "beta"}
        ``"binomial"`` evaluates the alternating binomial-weighted sum and
        raises :class:`NumericError` when it loses more than six digits;
        ``"beta"`` uses the positive-term series (with a stable backward
        recurrence for k > 1000); ``"auto"`` uses the
        binomial sum while its cancellation ratio stays below 100 (and
        k <= 200) and the beta series afterwards.
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    if method not in ("auto", "binomial", "beta"):
        raise ValueError(f"unknown method {method!r}")
    n_eff, mu_eff = params.effective()
    g = params.gamma
    q = params.q
    theta = n_eff * mu_eff
    qc = np.zeros(nmax + 1)
    if theta == 0.0 or n_eff == 1.0:
        return CoefficientSeries("ExactGeneral", qc, params, method)
    qc[0] = _q0_exact(g, q, n_eff, theta)
    if nmax == 0:
        return CoefficientSeries("ExactGeneral", qc, params, method)
    if method == "beta":
        qc[1:] = _qk_positive(g, q, n_eff, mu_eff, 1, nmax)
        return CoefficientSeries("ExactGeneral", qc, params, method)
    kb = nmax if method == "binomial" else min(nmax, _BINOMIAL_KMAX)
    vals, cancel = _qk_binomial(g, q, n_eff, mu_eff, kb)
    if method == "binomial":
        bad = np.nonzero(cancel > _MAX_CANCELLATION)[0]
        if bad.size:
            k = int(bad[0]) + 1
            raise NumericError(
                "binomial sum lost more than 6 digits", k=k, cancellation=float(cancel[bad[0]])
            )
        qc[1:] = vals
        return CoefficientSeries("ExactGeneral", qc, params, method)
    bad = np.nonzero(cancel > _AUTO_CANCELLATION)[0]
    good = int(bad[0]) if bad.size else kb
    qc[1 : good + 1] = vals[:good]
    if good < nmax:
        qc[good + 1 :] = _qk_positive(g, q, n_eff, mu_eff, good + 1, nmax)
    return CoefficientSeries("ExactGeneral", qc, params, method)


def coefficients_neutral(params: ModelParams, nmax: int) -> CoefficientSeries:
    """Recursion coefficients for neutral mutants (gamma = 1).

    The bracket ``1/k - phi/(k+1) 2F1(1,1;2+k;x)`` is rewritten with the
    contiguous relation as a sum of two positive terms, so no
    cancellation occurs for large k.
    """
    if abs(params.gamma - 1.0) >= NEUTRAL_TOL:
        raise DomainError(f"neutral coefficients need gamma = 1, got {params.gamma!r}")
    n_eff, mu_eff = params.effective()
    theta = n_eff * mu_eff
    q = params.q
    phi = 1.0 - 1.0 / n_eff
    qc = np.zeros(nmax + 1)
    if theta == 0.0 or phi == 0.0:
        return CoefficientSeries("ExactNeutral", qc, params, "neutral")
    k = np.arange(1, nmax + 1, dtype=float)
    first = (1.0 + k / n_eff) / (k * (k + 1.0))
    if q == 0.0:
        qc[0] = -theta * phi
        with np.errstate(under="ignore"):
            qc[1:] = theta * np.exp(k * math.log(phi)) * first
        return CoefficientSeries("ExactNeutral", qc, params, "neutral")
    x = -phi * q / (1.0 - q)
    qc[0] = -theta / q * math.log1p(phi * q / (1.0 - q))
    hyp = np.array([hyp2f1(1.0, 2.0, 3.0 + kk, x) for kk in k])
    second = phi * abs(x) / ((k + 1.0) * (k + 2.0)) * hyp
    logbase = math.log(phi) - math.log1p(-q / n_eff)
    with np.errstate(under="ignore"):
        qc[1:] = theta * np.exp(k * logbase) * (first + second)
    return CoefficientSeries("ExactNeutral", qc, params, "neutral")


# ---------------------------------------------------------------------------
# probability recursion
# ---------------------------------------------------------------------------


def _recursion(qc, nmax):
    """Compound-Poisson recursion in scaled arithmetic.

    Returns probabilities and whether any value was flushed to zero.
    The recursion is linear in p, so the table is carried with a common
    scale factor ``exp(logscale)`` to survive p_0 far below the double
    range.
    """
    p = np.zeros(nmax + 1)
    kq = np.arange(nmax + 1) * qc[: nmax + 1]
    p[0] = 1.0
    logscale = float(qc[0])
    for n in range(1, nmax + 1):
        val = np.dot(kq[n:0:-1], p[:n]) / n
        if val < 0.0:
            true = val * math.exp(logscale) if logscale < 700 else -math.inf
            if true < -_NEG_SLACK:
                raise NumericError("recursion produced a negative probability", n=n, p=true)
            val = 0.0
        p[n] = val
        if val > _RESCALE_HI:
            p[: n + 1] *= 1.0 / _RESCALE_HI
            logscale += math.log(_RESCALE_HI)
    out = np.zeros_like(p)
    pos = p > 0.0
    with np.errstate(under="ignore"):
        out[pos] = np.exp(np.log(p[pos]) + logscale)
    flushed = bool(np.any((out < _FLUSH) & (p > 0)))
    out[out < _FLUSH] = 0.0
    return out, flushed


def pmf_from_coefficients(coeffs: CoefficientSeries, nmax: int | None = None) -> Pmf:
    """Probabilities p_0..p_nmax from recursion coefficients.

    Examples
    --------
    >>> import numpy as np
    >>> k = np.arange(1, 6)
    >>> qc = CoefficientSeries("Lpsm", np.r_[-1.0, 1.0 / (k * (k + 1))], None)
    >>> pmf = pmf_from_coefficients(qc)
    >>> round(pmf.probs[1] / pmf.probs[0], 12)
    0.5
    """
    if nmax is None:
        nmax = coeffs.nmax
    if nmax > coeffs.nmax:
        raise ValueError(f"coefficients cover 0..{coeffs.nmax}, requested {nmax}")
    probs, flushed = _recursion(np.asarray(coeffs.q_coeffs, dtype=float), nmax)
    mass = max(0.0, 1.0 - math.fsum(probs))
    return Pmf(probs, mass, coeffs.params, coeffs.regime, "nmax", flushed)


def _coefficients_for(params, nmax, method):
    if abs(params.gamma - 1.0) < NEUTRAL_TOL:
        return coefficients_neutral(params, nmax)
    return coefficients_exact(params, nmax, method)


def pmf_B(params: ModelParams, nmax: int | None = None, eps: float = 1e-8,
          nmax_cap: int = 1 << 17, method: str = "auto") -> Pmf:
    """Exact pmf of B, with adaptive truncation when ``nmax`` is omitted.

    The table is doubled in length until the missing mass falls below
    ``eps`` or ``nmax_cap`` is reached; :attr:`Pmf.bound` records which.
    """
    if nmax is not None:
        return pmf_from_coefficients(_coefficients_for(params, nmax, method), nmax)
    n = 128
    while True:
        n = min(n, nmax_cap)
        pmf = pmf_from_coefficients(_coefficients_for(params, n, method), n)
        if pmf.truncation_mass < eps:
            return Pmf(pmf.probs, pmf.truncation_mass, params, pmf.regime, "eps", pmf.flushed)
        if n >= nmax_cap:
            return Pmf(pmf.probs, pmf.truncation_mass, params, pmf.regime, "cap", pmf.flushed)
        n *= 2


# ---------------------------------------------------------------------------
# Cauchy-integral oracle
# ---------------------------------------------------------------------------


def _xi_radius(q, target):
    """Largest r with max |xi(z)| <= target on |z| = r (by bisection)."""
    phis = np.linspace(0.0, math.pi, 2049)
    unit = np.exp(1j * phis)

    def worst(r):
        z = r * unit
        return np.abs((q - z) / (1.0 - z)).max()

    lo, hi = 0.0, 0.999
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if worst(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def pmf_oracle_cauchy(params, nmax: int, grid_size: int | None = None, dps: int | None = None) -> Pmf:
    """Pmf by discrete Cauchy integrals of G on a circle, in mpmath.

    ``log G`` is summed from its power series in ``xi``, which does not
    touch :func:`hyp2f1`; the radius keeps ``|xi| <= max(1/2, (1+q)/2)``
    on the circle so that series converges geometrically.

    Parameters
    ----------
    params : ModelParams or LpsmParams
    nmax : int
    grid_size : int, optional
        Number of nodes, at least ``4 * nmax`` (default ``max(4 nmax, 64)``).
    dps : int, optional
        Working decimal digits; chosen from the radius by default.
    """
    import mpmath

    if grid_size is None:
        grid_size = max(4 * nmax, 64)
    if grid_size < 4 * nmax:
        raise ValueError("grid_size must be at least 4 * nmax")
    q = params.q
    g = params.gamma
    if isinstance(params, LpsmParams):
        theta = params.theta
        n_eff, mu_eff = math.inf, 0.0
    else:
        n_eff, mu_eff = params.effective()
        theta = n_eff * mu_eff
    if theta == 0.0 or n_eff == 1.0:
        probs = np.zeros(nmax + 1)
        probs[0] = 1.0
        return Pmf(probs, 0.0, params, "OracleCauchy")

    rho = max(0.5, 0.5 * (1.0 + q))
    r = _xi_radius(q, rho)
    if dps is None:
        dps = int(30 + nmax * math.log10(1.0 / r) + theta / math.log(10.0))
    with mpmath.workdps(dps):
        nterms = int(math.ceil(dps * math.log(10.0) / math.log(1.0 / rho))) + 10
        mg = mpmath.mpf(g)
        if isinstance(params, LpsmParams):
            coef = [-mpmath.mpf(theta) / (mg + k) for k in range(nterms)]
        else:
            cN = mpmath.mpf(n_eff) ** (-1 / mg)
            ne = mpmath.mpf(n_eff)
            mu = mpmath.mpf(mu_eff)
            coef = [mu * (cN**k - ne) / (mg + k) for k in range(nterms)]
        coef.reverse()
        rr = mpmath.mpf(r)
        mq = mpmath.mpf(q)
        M = grid_size
        values = []
        for j in range(M // 2 + 1):
            z = rr * mpmath.expjpi(mpmath.mpf(2 * j) / M)
            xi = (mq - z) / (1 - z)
            values.append(mpmath.exp(mpmath.polyval(coef, xi)))
        # G(conj z) = conj G(z) fills the lower half of the circle
        full = values + [mpmath.conj(values[M - j]) for j in range(M // 2 + 1, M)]
        probs = np.empty(nmax + 1)
        worst_imag = 0.0
        for n in range(nmax + 1):
            acc = mpmath.fsum(full[j] * mpmath.expjpi(-mpmath.mpf(2 * j * n) / M) for j in range(M))
            cn = acc / M / rr**n
            probs[n] = float(cn.real)
            worst_imag = max(worst_imag, float(abs(cn.imag)))
    if worst_imag > 1e-10:
        raise NumericError("Cauchy oracle residue too large", imag=worst_imag, radius=r)
    mass = max(0.0, 1.0 - math.fsum(probs))
    return Pmf(probs, mass, params, "OracleCauchy", extra={"radius": r, "dps": dps})
