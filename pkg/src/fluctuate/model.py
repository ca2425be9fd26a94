"""Model parameters and derived quantities.

Wild type grows deterministically as ``N0 * exp(delta * t)`` until it
reaches ``N``; each wild-type division spawns a mutant at rate ``nu`` and
mutant clones follow a linear birth-death process with rates ``alpha``
and ``beta``.

Everything downstream only depends on the ratio ``N / N0`` and on
``mu * N0``; see :meth:`ModelParams.effective`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import DomainError, ValidationError

__all__ = [
    "ModelParams",
    "LpsmParams",
    "Derived",
    "derive",
    "xi_of_z",
    "y_of_z",
    "y_of_xi",
    "params_from_mapping",
]

RAW_KEYS = ("alpha", "beta", "nu", "delta", "N", "N0")
LPSM_KEYS = ("gamma", "theta", "q")


def _finite(x):
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class Derived:
    """Quantities derived from :class:`ModelParams`."""

    lam: float
    gamma: float
    mu: float
    q: float
    theta: float
    phi: float
    tau: float
    m: float


@dataclass(frozen=True)
class ModelParams:
    """Raw rates of the finite-population model.

    Parameters
    ----------
    alpha, beta : float
        Mutant birth and death rates.
    nu : float
        Mutation rate per wild-type cell.
    delta : float
        Wild-type growth rate.
    N : float
        Final wild-type population, real-valued.
    N0 : float
        Initial wild-type population.
    """

    alpha: float
    beta: float
    nu: float
    delta: float
    N: float
    N0: float = 1.0

    def __post_init__(self):
        problems = []
        for key in RAW_KEYS:
            if not _finite(getattr(self, key)):
                problems.append(f"{key} must be a finite number")
        if problems:
            raise ValidationError(problems)
        if not self.alpha > 0:
            problems.append("alpha must be positive")
        if self.beta < 0:
            problems.append("beta must be nonnegative")
        if not self.alpha - self.beta > 0:
            problems.append("lambda must be positive")
        if self.nu < 0:
            problems.append("nu must be nonnegative")
        if not self.delta > 0:
            problems.append("delta must be positive")
        if self.N < 1:
            problems.append("N must be at least 1")
        if self.N0 < 1:
            problems.append("N0 must be at least 1")
        if self.N < self.N0:
            problems.append("N must be at least N0")
        if problems:
            raise ValidationError(problems)

    # derived quantities, recomputed on access
    @property
    def lam(self):
        return self.alpha - self.beta

    @property
    def gamma(self):
        return self.delta / self.lam

    @property
    def mu(self):
        return self.nu / self.alpha

    @property
    def q(self):
        return self.beta / self.alpha

    @property
    def theta(self):
        return self.N * self.mu

    @property
    def phi(self):
        return 1.0 - 1.0 / self.N

    def effective(self):
        """Return ``(N_eff, mu_eff)`` with ``N_eff = N/N0``, ``mu_eff = mu*N0``.

        The mutant count depends on ``N`` and ``N0`` only through these,
        and ``theta = N_eff * mu_eff`` is unchanged.
        """
        return self.N / self.N0, self.mu * self.N0

    @classmethod
    def from_lpsm_like(cls, gamma, q, N, mu, N0=1.0):
        """Build raw rates with ``alpha = 1`` from (gamma, q, N, mu)."""
        alpha = 1.0
        beta = q
        return cls(alpha=alpha, beta=beta, nu=mu * alpha, delta=gamma * (alpha - beta), N=N, N0=N0)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        missing = [k for k in RAW_KEYS[:-1] if k not in data]
        unknown = [k for k in data if k not in RAW_KEYS]
        problems = [f"missing key {k!r}" for k in missing] + [f"unknown key {k!r}" for k in unknown]
        if problems:
            raise ValidationError(problems)
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class LpsmParams:
    """Parameters of the large-population small-mutation-rate limit law."""

    gamma: float
    theta: float
    q: float = 0.0

    def __post_init__(self):
        problems = []
        for key in LPSM_KEYS:
            if not _finite(getattr(self, key)):
                problems.append(f"{key} must be a finite number")
        if problems:
            raise ValidationError(problems)
        if not self.gamma > 0:
            problems.append("gamma must be positive")
        if not self.theta > 0:
            problems.append("theta must be positive")
        if not 0 <= self.q < 1:
            problems.append("q must lie in [0, 1)")
        if problems:
            raise ValidationError(problems)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        missing = [k for k in ("gamma", "theta") if k not in data]
        unknown = [k for k in data if k not in LPSM_KEYS]
        problems = [f"missing key {k!r}" for k in missing] + [f"unknown key {k!r}" for k in unknown]
        if problems:
            raise ValidationError(problems)
        return cls(**{k: float(v) for k, v in data.items()})


def params_from_mapping(data):
    """Parse either parameter schema; mixing the two is an error."""
    raw = [k for k in data if k in RAW_KEYS]
    lpsm = [k for k in data if k in LPSM_KEYS]
    if raw and lpsm:
        raise ValidationError(
            f"raw keys {raw} and limit-law keys {lpsm} cannot be combined"
        )
    if lpsm:
        return LpsmParams.from_dict(data)
    return ModelParams.from_dict(data)


def derive(params: ModelParams) -> Derived:
    """All derived quantities of a validated parameter set.

    Examples
    --------
    >>> d = derive(ModelParams(alpha=2, beta=1, nu=0.02, delta=1.5, N=1000))
    >>> d.gamma, d.q, round(d.theta, 12)
    (1.5, 0.5, 10.0)
    """
    p = params
    return Derived(
        lam=p.lam,
        gamma=p.gamma,
        mu=p.mu,
        q=p.q,
        theta=p.theta,
        phi=p.phi,
        tau=math.log(p.N) / p.delta,
        m=p.nu * (p.N - p.N0) / p.delta,
    )


def xi_of_z(z, q):
    """Clone-generating-function argument ``xi = (q - z)/(1 - z)``."""
    if not z < 1:
        raise DomainError(f"xi_of_z requires z < 1, got {z!r}")
    return (q - z) / (1.0 - z)


def y_of_z(z, q):
    """``y = (z - q)/(1 - q)``."""
    return (z - q) / (1.0 - q)


def y_of_xi(xi):
    """``y = xi/(xi - 1)``, the same quantity expressed through xi."""
    return xi / (xi - 1.0)
