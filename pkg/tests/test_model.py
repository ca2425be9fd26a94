import json
import math

import pytest
from hypothesis import given, strategies as st

from fluctuate.errors import DomainError, ValidationError
from fluctuate.model import (
    LpsmParams,
    ModelParams,
    derive,
    params_from_mapping,
    xi_of_z,
    y_of_xi,
    y_of_z,
)


def test_derive_neutral_example():
    d = derive(ModelParams(alpha=1, beta=0, nu=0.01, delta=1, N=100))
    assert d.gamma == 1 and d.q == 0
    assert d.mu == pytest.approx(0.01, rel=1e-15)
    assert d.theta == pytest.approx(1.0, rel=1e-15)
    assert d.phi == pytest.approx(0.99, rel=1e-15)
    assert d.tau == pytest.approx(math.log(100), rel=1e-15)
    assert d.m == pytest.approx(0.99, rel=1e-15)


def test_derive_with_death():
    d = derive(ModelParams(alpha=2, beta=1, nu=0.02, delta=1.5, N=1000))
    assert (d.lam, d.gamma, d.q) == (1.0, 1.5, 0.5)
    assert d.mu == pytest.approx(0.01, rel=1e-15)
    assert d.theta == pytest.approx(10.0, rel=1e-14)


def test_derive_is_pure():
    p = ModelParams(alpha=2, beta=1, nu=0.02, delta=1.5, N=1000)
    assert derive(p) == derive(p)
    assert p == ModelParams(alpha=2, beta=1, nu=0.02, delta=1.5, N=1000)


def test_lambda_must_be_positive():
    with pytest.raises(ValidationError, match="lambda must be positive"):
        ModelParams(alpha=1, beta=1, nu=0.01, delta=1, N=100)


def test_every_violation_is_listed():
    with pytest.raises(ValidationError) as info:
        ModelParams(alpha=1, beta=2, nu=-1, delta=1, N=0.5)
    msg = str(info.value)
    for part in ("lambda", "nu", "N must be at least 1"):
        assert part in msg


def test_n_below_n0_rejected():
    with pytest.raises(ValidationError):
        ModelParams(alpha=1, beta=0, nu=0.01, delta=1, N=10, N0=20)


@pytest.mark.parametrize("kw", [dict(gamma=0, theta=1), dict(gamma=1, theta=0), dict(gamma=1, theta=1, q=1.0),
                                dict(gamma=math.nan, theta=1)])
def test_lpsm_validation(kw):
    with pytest.raises(ValidationError):
        LpsmParams(**kw)


def test_json_round_trip():
    p = ModelParams(alpha=2, beta=1, nu=0.02, delta=1.5, N=1000, N0=3)
    assert ModelParams.from_dict(json.loads(p.to_json())) == p
    lp = LpsmParams(1.5, 10.0, 0.5)
    assert LpsmParams.from_dict(json.loads(lp.to_json())) == lp
    assert set(json.loads(p.to_json())) == {"alpha", "beta", "nu", "delta", "N", "N0"}
    assert set(json.loads(lp.to_json())) == {"gamma", "theta", "q"}


def test_mixed_schema_rejected():
    with pytest.raises(ValidationError):
        params_from_mapping({"alpha": 1, "beta": 0, "nu": 0.01, "delta": 1, "N": 100, "gamma": 1})
    assert isinstance(params_from_mapping({"gamma": 1, "theta": 2}), LpsmParams)


def test_effective_parameters_keep_theta():
    p = ModelParams.from_lpsm_like(1.5, 0.5, 1000, 0.01, N0=10)
    n_eff, mu_eff = p.effective()
    assert n_eff == pytest.approx(100) and n_eff * mu_eff == pytest.approx(p.theta)


@pytest.mark.parametrize("z,q,xi,y", [(0.0, 0.5, 0.5, -1.0), (0.3, 0.3, 0.0, 0.0), (0.9, 0.0, -9.0, 0.9)])
def test_xi_examples(z, q, xi, y):
    assert xi_of_z(z, q) == pytest.approx(xi, abs=1e-14)
    assert y_of_z(z, q) == pytest.approx(y, abs=1e-14)


def test_xi_domain():
    with pytest.raises(DomainError):
        xi_of_z(1.0, 0.2)


@pytest.mark.parametrize("q", [0.0, 0.25, 0.5, 0.9])
def test_y_round_trip_grid(q):
    for i in range(10):
        z = i / 10
        if z == q:
            continue
        xi = xi_of_z(z, q)
        # rounding of xi is amplified by 1/|1 - xi| when xi approaches 1
        cond = max(1.0, 1.0 / abs(1.0 - xi))
        assert abs(y_of_xi(xi) - y_of_z(z, q)) <= 1e-15 * cond * max(1.0, abs(y_of_z(z, q)))


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.95))
def test_y_round_trip_property(z, q):
    xi = xi_of_z(z, q)
    if xi == 1.0:
        return
    assert abs(y_of_xi(xi) - y_of_z(z, q)) <= 1e-12 * max(1.0, abs(y_of_z(z, q)))
