import json
import math

import numpy as np
import pytest

from fluctuate.errors import DomainError, ValidationError
from fluctuate.exact import pmf_B
from fluctuate.model import ModelParams
from fluctuate.sim import (
    FULLY_STOCHASTIC,
    SEMI_DETERMINISTIC,
    SimConfig,
    chi_square_test,
    clone_sizes,
    sample_fully_stochastic,
    sample_semi_deterministic,
    simulate,
    tv_distance,
    worker_count,
)

P = ModelParams.from_lpsm_like(1.5, 0.5, 100, 0.01)


def kendall_gf(z, alpha, beta, t):
    """Generating function of a linear birth-death process started from one cell."""
    lam = alpha - beta
    e = math.exp(-lam * t)
    return (beta * (z - 1) - (alpha * z - beta) * e) / (alpha * (z - 1) - (alpha * z - beta) * e)


class TestConfig:
    def test_validation(self):
        for kw in (dict(trajectories=0), dict(trajectories=10, seed=-1), dict(trajectories=10, mode="x"),
                   dict(trajectories=10, max_events=0)):
            with pytest.raises(ValidationError):
                SimConfig(P, **kw)

    def test_round_trip(self):
        cfg = SimConfig(P, 100, seed=5, mode=FULLY_STOCHASTIC, max_events=1000)
        assert SimConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    def test_mode_mismatch(self):
        with pytest.raises(ValidationError):
            sample_fully_stochastic(SimConfig(P, 10))
        with pytest.raises(ValidationError):
            sample_semi_deterministic(SimConfig(P, 10, mode=FULLY_STOCHASTIC))

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv("FLUCTUATE_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("FLUCTUATE_THREADS", "zero")
        with pytest.raises(ValidationError):
            worker_count()


@pytest.mark.parametrize("mode", [SEMI_DETERMINISTIC, FULLY_STOCHASTIC])
def test_no_mutations(mode):
    p = ModelParams(alpha=1, beta=0.5, nu=0, delta=1, N=50)
    s = simulate(SimConfig(p, 500, mode=mode))
    assert s.counts.tolist() == [500] and s.clone_count_mean == 0.0


@pytest.mark.parametrize("mode,params", [(SEMI_DETERMINISTIC, P),
                                         (FULLY_STOCHASTIC, ModelParams.from_lpsm_like(1.5, 0.5, 50, 0.02))])
def test_determinism_across_workers(monkeypatch, mode, params):
    out = []
    for threads in ("1", "3"):
        monkeypatch.setenv("FLUCTUATE_THREADS", threads)
        out.append(simulate(SimConfig(params, 5000, seed=42, mode=mode)).to_json())
    assert out[0] == out[1]
    other = simulate(SimConfig(params, 5000, seed=43, mode=mode)).to_json()
    assert other != out[0]


def test_counts_sum_to_trajectories():
    s = simulate(SimConfig(P, 3000, seed=1))
    assert s.counts.sum() + s.overflow == s.n_trajectories == 3000


def test_clone_count_mean():
    p = ModelParams(alpha=1, beta=0, nu=0.01, delta=1, N=100)
    s = simulate(SimConfig(p, 100000, seed=2))
    m = 0.01 * 99
    assert abs(s.clone_count_mean - m) < 3 * math.sqrt(m / 100000)


@pytest.mark.parametrize("q,t", [(0.0, 1.0), (0.5, 2.0), (0.9, 0.3)])
def test_clone_size_law(q, t):
    rng = np.random.default_rng(9)
    n = 200000
    x = clone_sizes(rng, q, np.full(n, (1 - q) * t))
    for z in (0.3, 0.6):
        sample = z ** x.astype(float)
        se = sample.std() / math.sqrt(n)
        assert abs(sample.mean() - kendall_gf(z, 1.0, q, t)) < 3 * se


def test_semi_deterministic_matches_exact():
    s = simulate(SimConfig(P, 100000, seed=3))
    ref = pmf_B(P)
    assert tv_distance(s, ref) < 0.01
    assert chi_square_test(s, ref)["pvalue"] > 1e-3


def test_fully_stochastic_first_step():
    # from one wild-type cell to two: B = 0 unless a mutation beats the first division
    p = ModelParams(alpha=1, beta=0, nu=0.5, delta=1, N=2)
    n = 40000
    s = simulate(SimConfig(p, n, seed=4, mode=FULLY_STOCHASTIC))
    p0 = 1 / 1.5
    assert abs(s.counts[0] / n - p0) < 3 * math.sqrt(p0 * (1 - p0) / n)


def test_max_events_flags():
    p = ModelParams.from_lpsm_like(1.5, 0.5, 200, 0.05)
    s = simulate(SimConfig(p, 2000, seed=5, mode=FULLY_STOCHASTIC, max_events=300))
    assert 0 < s.flagged < 2000 and s.n_trajectories == 2000 - s.flagged
    with pytest.raises(DomainError):
        simulate(SimConfig(p, 100, seed=5, mode=FULLY_STOCHASTIC, max_events=5))


def test_overflow_bin():
    s = simulate(SimConfig(P, 5000, seed=6, hist_cap=3))
    assert s.counts.size <= 3 and s.overflow > 0
    assert s.to_csv().startswith("n,count\n")
    assert s.to_csv().strip().splitlines()[-1] == f">=3,{s.overflow}"


def test_chi_square_detects_wrong_reference():
    s = simulate(SimConfig(P, 50000, seed=7))
    wrong = pmf_B(ModelParams.from_lpsm_like(1.5, 0.5, 100, 0.012))
    assert chi_square_test(s, wrong)["pvalue"] < 1e-6
