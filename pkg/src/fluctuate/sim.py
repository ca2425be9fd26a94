"""Monte Carlo samplers for the mutant count.

Two samplers:

``SemiDeterministic``
    Exact sampler of the model solved in :mod:`fluctuate.exact`.  Mutant
    clones arrive as a Poisson process with intensity ``nu N0 e^{delta s}``
    and each clone is a linear birth-death process observed at its age.
``FullyStochastic``
    Two-type Markov chain: pure-birth wild type, mutation as an
    ``A -> A + B`` channel, birth-death mutants.  Stopped when the wild type
    first reaches ``ceil(N)``.

Randomness is split into fixed blocks of trajectories; block ``j`` draws
from ``SeedSequence([seed, j, tag])``, so the output does not depend on how
many worker threads run the blocks.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import stats

from .errors import DomainError, ValidationError
from .model import ModelParams

__all__ = [
    "SEMI_DETERMINISTIC",
    "FULLY_STOCHASTIC",
    "SimConfig",
    "EnsembleSummary",
    "sample_semi_deterministic",
    "sample_fully_stochastic",
    "simulate",
    "clone_sizes",
    "tv_distance",
    "chi_square_test",
    "worker_count",
]

SEMI_DETERMINISTIC = "SemiDeterministic"
FULLY_STOCHASTIC = "FullyStochastic"
_TAGS = {SEMI_DETERMINISTIC: 1, FULLY_STOCHASTIC: 2}
BLOCK = 2048
HIST_CAP = 10 ** 6


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``max_events`` bounds the clone count of a semi-deterministic trajectory
    and the number of jumps of a fully stochastic one; trajectories that hit
    it are excluded and counted in ``EnsembleSummary.flagged``.
    """

    params: ModelParams
    trajectories: int
    seed: int = 0
    mode: str = SEMI_DETERMINISTIC
    max_events: int = 10 ** 8
    hist_cap: int = HIST_CAP

    def __post_init__(self):
        problems = []
        if not isinstance(self.params, ModelParams):
            problems.append("params must be ModelParams")
        if int(self.trajectories) != self.trajectories or self.trajectories < 1:
            problems.append("trajectories must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            problems.append("seed must be a 64-bit nonnegative integer")
        if self.mode not in _TAGS:
            problems.append(f"mode must be one of {sorted(_TAGS)}")
        if self.max_events <= 0:
            problems.append("max_events must be positive")
        if self.hist_cap < 1:
            problems.append("hist_cap must be positive")
        if problems:
            raise ValidationError(problems)

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "trajectories": int(self.trajectories),
            "seed": int(self.seed),
            "mode": self.mode,
            "max_events": int(self.max_events),
            "hist_cap": int(self.hist_cap),
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        params = ModelParams.from_dict(data.pop("params"))
        return cls(params=params, **data)


@dataclass
class EnsembleSummary:
    """Histogram of mutant counts over an ensemble.

    ``counts[n]`` is the number of trajectories that ended with ``n`` mutants
    for ``n < hist_cap``; larger values land in ``overflow``.  ``mean`` and
    ``variance`` use the uncapped values.
    """

    counts: np.ndarray
    overflow: int
    n_trajectories: int
    mean: float
    variance: float
    clone_count_mean: float
    flagged: int = 0
    mode: str = SEMI_DETERMINISTIC
    seed: int = 0
    tv_distance_vs: tuple | None = None
    extra: dict = field(default_factory=dict)

    def pmf(self):
        """Empirical frequencies ``counts / n_trajectories``."""
        return self.counts / float(self.n_trajectories)

    def to_csv(self):
        lines = ["n,count"]
        lines += [f"{n},{int(c)}" for n, c in enumerate(self.counts) if c]
        if self.overflow:
            lines.append(f">={len(self.counts)},{self.overflow}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        nz = np.flatnonzero(self.counts)
        return {
            "mode": self.mode,
            "seed": self.seed,
            "n_trajectories": self.n_trajectories,
            "flagged": self.flagged,
            "mean": self.mean,
            "variance": self.variance,
            "clone_count_mean": self.clone_count_mean,
            "overflow": self.overflow,
            "counts": {str(int(n)): int(self.counts[n]) for n in nz},
            "tv_distance_vs": list(self.tv_distance_vs) if self.tv_distance_vs else None,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def worker_count():
    """Worker threads: ``FLUCTUATE_THREADS`` if set, else the CPU count."""
    env = os.environ.get("FLUCTUATE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"FLUCTUATE_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("FLUCTUATE_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def _block_rng(seed, block, mode):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), block, _TAGS[mode]])))


def clone_sizes(rng, q, lam_age):
    """Sizes of clones founded by one cell.

    ``lam_age`` is ``lambda * age``.  With ``E = exp(lam_age)`` a clone is
    extinct with probability ``q * eta`` and otherwise geometric on
    ``1, 2, ...`` with success probability ``1 - eta``,
    ``eta = (E - 1)/(E - q)``.
    """
    x = np.asarray(lam_age, dtype=float)
    em1 = np.expm1(x)
    eta = np.clip(em1 / (em1 + (1.0 - q)), 0.0, 1.0)
    alive = rng.random(x.shape) >= q * eta
    sizes = np.zeros(x.shape, dtype=np.int64)
    if np.any(alive):
        sizes[alive] = rng.geometric(1.0 - eta[alive])
    return sizes


def _semi_block(cfg, block, n):
    p = cfg.params
    rng = _block_rng(cfg.seed, block, cfg.mode)
    m = p.nu * (p.N - p.N0) / p.delta
    k = rng.poisson(m, size=n)
    flagged = k > cfg.max_events
    k = np.where(flagged, 0, k)
    total = int(k.sum())
    u = rng.random(total)
    # lambda (tau - s) with s drawn from the inverse cdf of e^{delta s}
    lam_age = (math.log(p.N) - np.log(p.N0 + u * (p.N - p.N0))) / p.gamma
    sizes = clone_sizes(rng, p.q, lam_age)
    owner = np.repeat(np.arange(n), k)
    b = np.bincount(owner, weights=sizes, minlength=n).astype(np.int64)
    return b, k, flagged


@njit(nogil=True, cache=True)
def _fully_block_kernel(rng, n, a0, a_stop, delta, nu, alpha, beta, max_events, out_b, out_k, out_flag):
    for i in range(n):
        a = a0
        b = 0
        k = 0
        ev = 0
        flag = False
        while a < a_stop:
            ra = a * (delta + nu)
            u = rng.random() * (ra + b * (alpha + beta))
            if u < ra:
                if u < a * delta:
                    a += 1
                else:
                    b += 1
                    k += 1
            elif u - ra < b * alpha:
                b += 1
            else:
                b -= 1
            ev += 1
            if ev >= max_events:
                flag = True
                break
        out_b[i] = b
        out_k[i] = k
        out_flag[i] = flag


def _fully_block(cfg, block, n):
    p = cfg.params
    rng = _block_rng(cfg.seed, block, cfg.mode)
    b = np.zeros(n, dtype=np.int64)
    k = np.zeros(n, dtype=np.int64)
    flag = np.zeros(n, dtype=np.bool_)
    a0 = int(round(p.N0))
    a_stop = int(math.ceil(p.N))
    _fully_block_kernel(rng, n, a0, a_stop, p.delta, p.nu, p.alpha, p.beta,
                        int(cfg.max_events), b, k, flag)
    return b, k, flag


def _run(cfg, block_fn):
    sizes = [min(BLOCK, cfg.trajectories - j) for j in range(0, cfg.trajectories, BLOCK)]
    jobs = list(enumerate(sizes))
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda job: block_fn(cfg, *job), jobs))
    else:
        results = [block_fn(cfg, *job) for job in jobs]
    # merge in block order, so the floating-point sums are reproducible
    b = np.concatenate([r[0] for r in results])
    k = np.concatenate([r[1] for r in results])
    flagged = np.concatenate([r[2] for r in results])
    keep = ~flagged
    b, k = b[keep], k[keep]
    n_ok = int(keep.sum())
    if n_ok == 0:
        raise DomainError("every trajectory hit max_events")
    capped = b < cfg.hist_cap
    counts = np.bincount(b[capped])
    bf = b.astype(float)
    return EnsembleSummary(
        counts=counts,
        overflow=int((~capped).sum()),
        n_trajectories=n_ok,
        mean=float(bf.mean()),
        variance=float(bf.var(ddof=1)) if n_ok > 1 else 0.0,
        clone_count_mean=float(k.mean()),
        flagged=int(flagged.sum()),
        mode=cfg.mode,
        seed=int(cfg.seed),
    )


def sample_semi_deterministic(cfg: SimConfig) -> EnsembleSummary:
    """Sample the semi-deterministic model; exact in distribution."""
    if cfg.mode != SEMI_DETERMINISTIC:
        raise ValidationError("config mode must be SemiDeterministic")
    return _run(cfg, _semi_block)


def sample_fully_stochastic(cfg: SimConfig) -> EnsembleSummary:
    """Sample the two-type Markov chain stopped at ``#A = ceil(N)``.

    Only the embedded jump chain is simulated: the stopping rule depends on
    the wild-type count alone, so holding times do not change the law of
    the mutant count at stopping.
    """
    if cfg.mode != FULLY_STOCHASTIC:
        raise ValidationError("config mode must be FullyStochastic")
    return _run(cfg, _fully_block)


def simulate(cfg: SimConfig) -> EnsembleSummary:
    if cfg.mode == SEMI_DETERMINISTIC:
        return sample_semi_deterministic(cfg)
    return sample_fully_stochastic(cfg)


def _reference(ref):
    probs = getattr(ref, "probs", ref)
    return np.asarray(probs, dtype=float)


def tv_distance(summary: EnsembleSummary, ref) -> float:
    """Total-variation distance between the ensemble and a reference pmf.

    ``ref`` is a :class:`~fluctuate.exact.Pmf` or an array of ``p_0..p_L``;
    mass beyond ``L`` on either side is compared as one extra bin.
    """
    p = _reference(ref)
    emp = summary.pmf()
    L = p.size
    e_head = np.zeros(L)
    e_head[:min(L, emp.size)] = emp[:L]
    e_tail = 1.0 - e_head.sum()
    p_tail = max(1.0 - p.sum(), 0.0)
    return 0.5 * (float(np.abs(e_head - p).sum()) + abs(e_tail - p_tail))


def chi_square_test(summary: EnsembleSummary, ref, min_expected: float = 5.0) -> dict:
    """Pearson chi-square test of the ensemble against a reference pmf.

    Bins are grown left to right until the expected count reaches
    ``min_expected``; everything from the last bin on, including mass past
    the reference table, forms the final bin.
    """
    p = _reference(ref)
    n = summary.n_trajectories
    obs_all = np.zeros(p.size + 1)
    c = summary.counts
    obs_all[:min(p.size, c.size)] = c[:p.size]
    obs_all[-1] = n - obs_all[:-1].sum()
    exp_all = np.append(p * n, max(1.0 - p.sum(), 0.0) * n)
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs_all, exp_all):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    if obs:
        obs[-1] += o_acc
        exp[-1] += e_acc
    obs = np.array(obs)
    exp = np.array(exp)
    if obs.size < 2:
        raise DomainError("not enough expected mass for a chi-square test")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return {"statistic": stat, "dof": dof, "pvalue": float(stats.chi2.sf(stat, dof)), "bins": int(obs.size)}
