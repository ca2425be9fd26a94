"""Limit laws of the mutant count.

Two limits are covered:

* ``Z``: the limit of ``V/a - b`` as ``theta -> inf``, with ``V`` the
  small-mutation-rate law of :mod:`fluctuate.lpsm`;
* ``W``: the limit of ``B/a - b`` as ``N -> inf`` at fixed ``mu``.

Both are described by their Laplace exponents ``Lambda(s) = log E[exp(-s X)]``.
With this convention every exponent is convex, and ``Lambda_Z`` for
``gamma in (0, 2)``, ``gamma != 1`` reads ``-pi / sin(pi gamma) * s**gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .lpsm import log_laplace_V, moments_V
from .model import LpsmParams, ModelParams
from .specfun import hyp2f1

__all__ = [
    "REGIME_TOL",
    "LimitLaw",
    "ConvergenceReport",
    "regime_of",
    "large_theta_law",
    "large_N_law",
    "stable_params",
    "lambda_Z",
    "verify_limit_convergence",
]

REGIME_TOL = 1e-12

LARGE_THETA = "LargeTheta"
LARGE_N = "LargeNFixedMu"


def regime_of(gamma: float) -> str:
    """Regime tag of ``gamma``; the boundary values 1 and 2 are matched at 1e-12."""
    if not gamma > 0 or not math.isfinite(gamma):
        raise DomainError(f"gamma must be positive and finite, got {gamma!r}")
    if abs(gamma - 1.0) <= REGIME_TOL:
        return "1"
    if abs(gamma - 2.0) <= REGIME_TOL:
        return "2"
    if gamma < 1.0:
        return "(0,1)"
    if gamma < 2.0:
        return "(1,2)"
    return "(2,inf)"


def _stable_coefficient(gamma):
    # pi / sin(pi gamma), the s**gamma coefficient up to sign
    return math.pi / math.sin(math.pi * gamma)


def lambda_Z(gamma: float, s):
    """Laplace exponent of the large-theta limit ``Z``.

    Parameters
    ----------
    gamma : float
    s : float or array_like
        Nonnegative Laplace variable.
    """
    reg = regime_of(gamma)
    x = np.asarray(s, dtype=float)
    if np.any(x < 0):
        raise DomainError("Laplace variable must be nonnegative")
    if reg == "1":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    elif reg in ("2", "(2,inf)"):
        out = 0.5 * x * x
    else:
        out = -_stable_coefficient(gamma) * x ** gamma
    return float(out) if out.ndim == 0 else out


def stable_params(gamma: float) -> dict:
    """Parameters ``(alpha, sigma, beta, mu)`` of ``Z`` as a stable law ``S_alpha``.

    ``sigma**gamma = (pi/2) csc(pi gamma/2)`` for ``gamma in (0, 2)``, which is
    what the substitution ``s -> -i s`` in :func:`lambda_Z` produces; ``gamma = 1``
    is the Landau case ``S_1(pi/2, 1, 0)`` and ``gamma >= 2`` is Gaussian.

    Examples
    --------
    >>> stable_params(1.0)["sigma"] == math.pi / 2
    True
    """
    reg = regime_of(gamma)
    if reg == "1":
        return {"alpha": 1.0, "sigma": math.pi / 2, "beta": 1.0, "mu": 0.0}
    if reg in ("2", "(2,inf)"):
        return {"alpha": 2.0, "sigma": 1.0 / math.sqrt(2.0), "beta": 0.0, "mu": 0.0}
    sigma = (0.5 * math.pi / math.sin(0.5 * math.pi * gamma)) ** (1.0 / gamma)
    return {"alpha": float(gamma), "sigma": sigma, "beta": 1.0, "mu": 0.0}


def _json_number(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class LimitLaw:
    """Scaling constants and Laplace exponent of a limit law.

    ``X = lim (Y / scale_a - shift_b)`` where ``Y`` is ``V`` (family
    ``LargeTheta``) or ``B`` (family ``LargeNFixedMu``).  ``mean`` and
    ``variance`` refer to the limit variable and may be ``inf``.
    """

    family: str
    regime: str
    gamma: float
    q: float
    scale_a: float
    shift_b: float
    stable_alpha: float
    stable_sigma: float
    mean: float
    variance: float
    mu: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def exponent(self, s):
        """Evaluate the Laplace exponent at ``s >= 0`` (scalar or array)."""
        if self.family == LARGE_THETA:
            return lambda_Z(self.gamma, s)
        return _lambda_W(self.gamma, self.q, self.mu, s)

    def to_dict(self):
        return {
            "family": self.family,
            "regime": self.regime,
            "a": self.scale_a,
            "b": self.shift_b,
            "alpha": self.stable_alpha,
            "sigma": self.stable_sigma,
            "mean": _json_number(self.mean),
            "variance": _json_number(self.variance),
        }


def large_theta_law(gamma: float, q: float, theta: float) -> LimitLaw:
    """Large-theta limit of the small-mutation-rate law.

    The scaling for ``gamma > 2`` is ``a = sqrt(Var V)``, ``b = E(V)/a``,
    which makes the limit a standard normal in the sense of ``Lambda = s**2/2``.

    Raises
    ------
    DomainError
        If ``gamma <= 0``, ``q`` is outside ``[0, 1)`` or ``theta <= 1``.
    """
    reg = regime_of(gamma)
    if not 0.0 <= q < 1.0:
        raise DomainError(f"q must lie in [0, 1), got {q!r}")
    if not theta > 1.0 or not math.isfinite(theta):
        raise DomainError(f"theta must exceed 1, got {theta!r}")
    inf = math.inf
    if reg == "1":
        a = theta / (1.0 - q)
        b = math.log(theta)
        mean, var = inf, inf
    elif reg == "2":
        a = math.sqrt(theta * math.log(theta)) / (1.0 - q)
        b = math.sqrt(theta / math.log(theta))
        mean, var = 0.0, 1.0
    elif reg == "(2,inf)":
        mom = moments_V(LpsmParams(gamma, theta, q))
        a = math.sqrt(mom["variance"])
        b = mom["mean"] / a
        mean, var = 0.0, 1.0
    else:
        a = theta ** (1.0 / gamma) / (1.0 - q)
        b = theta ** (1.0 - 1.0 / gamma) / (gamma - 1.0)
        mean = inf if reg == "(0,1)" else 0.0
        var = inf
    st = stable_params(gamma)
    return LimitLaw(LARGE_THETA, reg, float(gamma), float(q), a, b,
                    st["alpha"], st["sigma"], mean, var)


def _lambda_W(gamma, q, mu, s):
    reg = regime_of(gamma)
    x = np.asarray(s, dtype=float)
    if np.any(x < 0):
        raise DomainError("Laplace variable must be nonnegative")
    flat = x.ravel()
    if reg == "(2,inf)":
        c = 0.5 * mu * (gamma - q * (gamma - 2.0)) / ((gamma - 2.0) * (gamma - 1.0))
        out = c * flat * flat
    elif reg == "2":
        out = 0.5 * mu * flat * flat
    elif reg == "1":
        out = mu * flat * (1.0 + np.log1p(flat))
    elif reg == "(1,2)":
        g = gamma
        out = np.array([mu / (2.0 - g) * t * t * hyp2f1(1.0, 2.0 - g, 3.0 - g, -t) for t in flat])
    else:
        g = gamma
        out = np.array([mu / (g - 1.0) * t * hyp2f1(1.0, 1.0 - g, 2.0 - g, -t) for t in flat])
    out = np.asarray(out, dtype=float).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def large_N_law(params: ModelParams) -> LimitLaw:
    """Large-``N`` limit at fixed mutation rate.

    ``N`` and ``mu`` enter through the effective pair of
    :meth:`ModelParams.effective`.  The mean is ``-Lambda_W'(0)``, which is
    ``mu/(1-gamma)`` for ``gamma < 1`` and ``-mu`` for ``gamma = 1``.
    """
    n_eff, mu = params.effective()
    if not mu > 0:
        raise DomainError("large_N_law needs a positive mutation rate")
    gamma, q = params.gamma, params.q
    reg = regime_of(gamma)
    if reg == "(2,inf)":
        a1 = math.sqrt(n_eff)
        b = mu * math.sqrt(n_eff) / (gamma - 1.0)
        var = mu * (gamma - q * (gamma - 2.0)) / ((gamma - 2.0) * (gamma - 1.0))
        mean = 0.0
    elif reg == "2":
        ln = math.log(n_eff)
        if not ln > 0:
            raise DomainError("gamma = 2 scaling needs N/N0 > 1")
        a1 = math.sqrt(n_eff * ln)
        b = mu * math.sqrt(n_eff / ln)
        mean, var = 0.0, mu
    elif reg == "(1,2)":
        a1 = n_eff ** (1.0 / gamma)
        b = mu * (n_eff ** (1.0 - 1.0 / gamma) - 1.0) / (gamma - 1.0)
        mean, var = 0.0, 2.0 * mu / (2.0 - gamma)
    elif reg == "1":
        a1 = n_eff
        b = mu * (1.0 + math.log(n_eff))
        mean, var = -mu, 2.0 * mu
    else:
        a1 = n_eff ** (1.0 / gamma)
        b = 0.0
        mean, var = mu / (1.0 - gamma), 2.0 * mu / (2.0 - gamma)
    st = stable_params(gamma)
    return LimitLaw(LARGE_N, reg, float(gamma), float(q), a1 / (1.0 - q), b,
                    st["alpha"], st["sigma"], mean, var, mu=mu)


@dataclass
class ConvergenceReport:
    """Sup-norm distances to ``Lambda_Z`` along a theta sequence.

    Distances are relative: ``max |diff| / max |Lambda_Z|`` over ``s_grid``.
    ``w_distances[i]`` uses the fixed-``mu`` pathway at ``mu = 1/thetas[i]``.
    """

    gamma: float
    q: float
    s_grid: list
    thetas: list
    distances: list
    w_distances: list
    monotone: bool

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "q": self.q,
            "s_grid": list(self.s_grid),
            "thetas": list(self.thetas),
            "distances": list(self.distances),
            "w_distances": list(self.w_distances),
            "monotone": self.monotone,
        }


def _w_pathway(gamma, q, mu, s):
    # Lambda_W(s/a) + c s with a = mu**(1/gamma); only gamma = 1 needs a shift
    reg = regime_of(gamma)
    if reg == "(2,inf)":
        law_var = mu * (gamma - q * (gamma - 2.0)) / ((gamma - 2.0) * (gamma - 1.0))
        a = math.sqrt(law_var)
    else:
        a = mu ** (1.0 / gamma)
    shift = math.log(mu) - 1.0 if reg == "1" else 0.0
    return _lambda_W(gamma, q, mu, s / a) + shift * s


def verify_limit_convergence(p: LpsmParams, theta_sequence=None, s_grid=None) -> ConvergenceReport:
    """Measure how fast the rescaled exponents approach ``Lambda_Z``.

    Parameters
    ----------
    p : LpsmParams
        Supplies ``gamma`` and ``q``; ``p.theta`` is used when no sequence is given.
    theta_sequence : sequence of float, optional
        Increasing values of theta, each larger than 1.
    s_grid : array_like, optional
        Defaults to 40 points on ``[0.1, 2]``.
    """
    s = np.linspace(0.1, 2.0, 40) if s_grid is None else np.asarray(s_grid, dtype=float)
    thetas = [p.theta] if theta_sequence is None else [float(t) for t in theta_sequence]
    if any(b <= a for a, b in zip(thetas, thetas[1:])):
        raise DomainError("theta_sequence must be increasing")
    target = np.asarray(lambda_Z(p.gamma, s))
    scale = float(np.max(np.abs(target)))
    dist, wdist = [], []
    for th in thetas:
        law = large_theta_law(p.gamma, p.q, th)
        lp = LpsmParams(p.gamma, th, p.q)
        vals = np.array([log_laplace_V(lp, x / law.scale_a) for x in s]) + law.shift_b * s
        dist.append(float(np.max(np.abs(vals - target))) / scale)
        w = _w_pathway(p.gamma, p.q, 1.0 / th, s)
        wdist.append(float(np.max(np.abs(w - target))) / scale)
    monotone = all(b <= 1.1 * a for a, b in zip(dist, dist[1:]))
    return ConvergenceReport(float(p.gamma), float(p.q), s.tolist(), thetas, dist, wdist, monotone)
