"""Large-n asymptotics of the mutant-count pmf.

An expansion is a list of terms ``(c, p, l)`` standing for ``c * n**p * log(n)**l``,
optionally multiplied by an exponential cut-off ``base**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedRegimeError
from .exact import Pmf
from .model import LpsmParams, ModelParams
from .specfun import EULER_GAMMA, digamma, rgamma

__all__ = [
    "GAMMA1_TOL",
    "TailExpansion",
    "tail_lpsm_general",
    "tail_lpsm_gamma1",
    "tail_finite_N_gamma1",
    "tail_expansion",
    "gamma1_two_term",
    "fit_tail_exponent",
]

GAMMA1_TOL = 1e-6


@dataclass(frozen=True)
class TailExpansion:
    """Asymptotic expansion of ``p_n``.

    Attributes
    ----------
    regime : str
        One of ``LpsmGeneral``, ``LpsmGamma1``, ``LpsmGamma1NoDeath``,
        ``FiniteNGamma1NoDeath``.
    terms : tuple of (coefficient, power_of_n, log_power)
        Ordered by decreasing size for large n.
    cutoff_base : float
        Exponential cut-off, 1 except in the finite-N regime.
    truncated : bool
        True when sub-leading terms were dropped because of a pole.
    """

    regime: str
    terms: tuple
    cutoff_base: float = 1.0
    truncated: bool = False
    notes: tuple = field(default=(), compare=False)

    @property
    def leading(self):
        return self.terms[0]

    def evaluate(self, n, order=None):
        """Sum of the first ``order`` terms (all by default) at ``n >= 1``."""
        x = np.asarray(n, dtype=float)
        if np.any(x < 1):
            raise DomainError("tail expansion needs n >= 1")
        terms = self.terms if order is None else self.terms[:order]
        total = np.zeros_like(x)
        logx = np.log(x)
        for c, pw, lp in terms:
            total = total + c * x ** pw * logx ** lp
        if self.cutoff_base != 1.0:
            total = total * np.exp(x * math.log(self.cutoff_base))
        return float(total) if total.ndim == 0 else total

    def to_dict(self):
        return {
            "regime": self.regime,
            "terms": [{"coefficient": c, "power": pw, "log_power": lp} for c, pw, lp in self.terms],
            "cutoff_base": self.cutoff_base,
            "truncated": self.truncated,
        }


def _sorted_terms(terms):
    # larger power first; at equal power the log term dominates
    return tuple(sorted(terms, key=lambda t: (-t[1], -t[2])))


def tail_lpsm_general(p: LpsmParams) -> TailExpansion:
    """Three-term tail of the small-mutation-rate law for ``gamma != 1``.

    The ``n**(-1-2 gamma)`` term carries ``kappa**2 / (2 Gamma(-2 gamma))``
    with ``kappa = theta pi / sin(gamma pi)``; it vanishes when ``2 gamma``
    is an integer.  At integer ``gamma`` only the leading term is kept.

    Raises
    ------
    UnsupportedRegimeError
        If ``gamma`` is within 1e-6 of 1; use :func:`tail_lpsm_gamma1`.
    """
    g, q, theta = p.gamma, p.q, p.theta
    if abs(g - 1.0) < GAMMA1_TOL:
        raise UnsupportedRegimeError("gamma = 1 has its own expansion, see tail_lpsm_gamma1")
    lead = (theta * math.gamma(1.0 + g) / (1.0 - q) ** g, -1.0 - g, 0)
    if abs(g - round(g)) < GAMMA1_TOL:
        return TailExpansion("LpsmGeneral", (lead,), truncated=True,
                             notes=("sin(gamma pi) = 0: sub-leading terms dropped",))
    kappa = theta * math.pi / math.sin(g * math.pi)
    second = (kappa * kappa * rgamma(-2.0 * g) / (2.0 * (1.0 - q) ** (2.0 * g)), -1.0 - 2.0 * g, 0)
    third = (
        -theta * math.gamma(2.0 + g) / (1.0 - q) ** (1.0 + g)
        * (theta / (1.0 - g) + g * (1.0 + q) / 2.0),
        -2.0 - g,
        0,
    )
    return TailExpansion("LpsmGeneral", (lead,) + _sorted_terms([second, third]))


def tail_lpsm_gamma1(theta: float, q: float = 0.0) -> TailExpansion:
    """Tail at ``gamma = 1``, where a ``log n / n**3`` term appears."""
    if not theta > 0 or not 0.0 <= q < 1.0:
        raise DomainError("need theta > 0 and q in [0, 1)")
    w = 1.0 - q
    L = -math.log1p(-q)
    terms = (
        (theta / w, -2.0, 0),
        (2.0 * theta * theta / (w * w), -3.0, 1),
        ((theta * theta * (2.0 * EULER_GAMMA - 3.0 - 2.0 * L) - theta * (1.0 + q)) / (w * w), -3.0, 0),
    )
    return TailExpansion("LpsmGamma1NoDeath" if q == 0.0 else "LpsmGamma1", terms)


def gamma1_two_term(theta: float, n):
    """``theta/(n(n+1)) + theta**2 (2 C_E - 3 + 2 psi(n)) / (n(n+1)(n+2))`` at q = 0."""
    x = np.asarray(n, dtype=float)
    psi = np.vectorize(digamma, otypes=[float])(x)
    out = theta / (x * (x + 1)) + theta ** 2 * (2 * EULER_GAMMA - 3 + 2 * psi) / (x * (x + 1) * (x + 2))
    return float(out) if out.ndim == 0 else out


def tail_finite_N_gamma1(params: ModelParams) -> TailExpansion:
    """Finite-N tail at ``gamma = 1``, ``q = 0``, with cut-off ``(1 - 1/N)**n``.

    ``mu`` and ``theta`` enter as written in the expansion, as independent
    symbols, using the effective pair of :meth:`ModelParams.effective`.

    Raises
    ------
    UnsupportedRegimeError
        Unless ``|gamma - 1| < 1e-6``, ``q = 0`` and ``0 < mu < 1``.
    """
    n_eff, mu = params.effective()
    if abs(params.gamma - 1.0) >= GAMMA1_TOL or params.q != 0.0 or not 0.0 < mu < 1.0:
        raise UnsupportedRegimeError("finite-N tail needs gamma = 1, q = 0 and 0 < mu < 1")
    theta = n_eff * mu
    r = rgamma(mu)
    terms = (
        (r, mu - 1.0, 0),
        (r * (1.0 - mu) * (theta - mu), mu - 2.0, 1),
        (-r * (1.0 - mu) * ((theta - mu) * digamma(mu - 1.0) + mu / 2.0), mu - 2.0, 0),
    )
    return TailExpansion("FiniteNGamma1NoDeath", terms, cutoff_base=1.0 - 1.0 / n_eff)


def tail_expansion(params) -> TailExpansion:
    """Pick the expansion that applies to ``params``."""
    if isinstance(params, LpsmParams):
        if abs(params.gamma - 1.0) < GAMMA1_TOL:
            return tail_lpsm_gamma1(params.theta, params.q)
        return tail_lpsm_general(params)
    if isinstance(params, ModelParams):
        return tail_finite_N_gamma1(params)
    raise DomainError(f"unsupported parameter type {type(params).__name__}")


def fit_tail_exponent(pmf, n_lo: int, n_hi: int) -> dict:
    """Least-squares line through ``(log n, log p_n)`` for ``n_lo <= n <= n_hi``.

    Parameters
    ----------
    pmf : Pmf or array_like
        Probabilities indexed from 0.

    Examples
    --------
    >>> n = np.arange(200.0); p = np.zeros(200); p[1:] = n[1:] ** -2.0
    >>> round(fit_tail_exponent(p, 10, 199)["slope"], 12)
    -2.0
    """
    probs = pmf.probs if isinstance(pmf, Pmf) else np.asarray(pmf, dtype=float)
    if not (10 <= n_lo < n_hi):
        raise DomainError("need 10 <= n_lo < n_hi")
    if n_hi >= probs.size:
        raise DomainError(f"pmf only reaches n = {probs.size - 1}")
    n = np.arange(n_lo, n_hi + 1)
    y = probs[n_lo:n_hi + 1]
    if np.any(y <= 0):
        raise DomainError("pmf must be positive on the fitting range")
    x = np.log(n)
    ly = np.log(y)
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}
