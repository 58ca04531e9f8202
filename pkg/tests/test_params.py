"""
파라미터/스케일링 테스트
"""
import logging
import math

import pytest

from src.errors import DomainError, EnvelopeError
from src.scaling.params import (
    FiniteSystemConfig,
    ScaledPoint,
    TacnodeParams,
    d_param,
    reflect_config,
    reflect_params,
    scaled_endpoints,
    scaled_spacetime,
    sigma_tilde,
)


@pytest.mark.parametrize(
    "n, lam, sigma, expected",
    [
        (4, 4.0, 0.0, (-2.0, 4.0, 6.0)),
        (1, 1.0, 2.0, (-2.0, 2.0, 4.0)),
    ],
)
def test_scaled_endpoints_examples(n, lam, sigma, expected):
    a1, a2, a = scaled_endpoints(n, TacnodeParams(lam=lam, sigma=sigma))
    assert (a1, a2, a) == pytest.approx(expected, rel=1e-14)


def test_scaled_endpoints_n64():
    a1, _, _ = scaled_endpoints(64, TacnodeParams(lam=1.0, sigma=1.0))
    assert a1 == pytest.approx(-8.25, rel=1e-14)


def test_scaled_endpoints_ratio():
    params = TacnodeParams(lam=2.7, sigma=-1.3)
    a1, a2, a = scaled_endpoints(37, params)
    assert a2 == pytest.approx(math.sqrt(2.7) * -a1, rel=1e-12)
    assert a == pytest.approx(a2 - a1, rel=1e-12)


def test_scaled_spacetime():
    assert scaled_spacetime(8, ScaledPoint(0.0, 0.0)) == pytest.approx((0.5, 0.0))
    time, space = scaled_spacetime(8, ScaledPoint(1.0, 2.0))
    assert time == pytest.approx(0.75, rel=1e-14)
    assert space == pytest.approx(8 ** (-1.0 / 6.0), rel=1e-14)


def test_scaled_spacetime_rejects_time_outside_unit_interval():
    with pytest.raises(DomainError):
        scaled_spacetime(1, ScaledPoint(2.0, 0.0))


def test_d_param():
    assert d_param(1) == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert d_param(64) == pytest.approx(0.5, rel=1e-14)
    assert d_param(10 ** 6) == pytest.approx(0.22360679775, rel=1e-10)
    for n in (1, 10, 100, 10 ** 6):
        assert d_param(n) ** 2 * 2 * n ** (1.0 / 6.0) == pytest.approx(1.0, rel=1e-12)


def test_sigma_tilde():
    assert sigma_tilde(TacnodeParams(lam=3.0, sigma=0.0)) == 0.0
    assert sigma_tilde(TacnodeParams(lam=1.0, sigma=1.0)) == pytest.approx(2 ** (2 / 3), rel=1e-14)
    assert sigma_tilde(TacnodeParams(lam=4.0, sigma=1.0)) == pytest.approx(4 ** (1 / 6) * 3 ** (2 / 3), rel=1e-14)


def test_reflect_params_at_lambda_one_only_flips_xi():
    params, pt = reflect_params(TacnodeParams(1.0, 0.4), ScaledPoint(0.3, 0.8))
    assert params == TacnodeParams(1.0, 0.4)
    assert (pt.tau, pt.xi) == (0.3, -0.8)


def test_reflect_params_is_involution():
    params, pt = TacnodeParams(2.0, 1.0), ScaledPoint(1.0, 1.0)
    back_params, back_pt = reflect_params(*reflect_params(params, pt))
    assert back_params.lam == pytest.approx(2.0, rel=1e-14)
    assert back_params.sigma == pytest.approx(1.0, rel=1e-14)
    assert (back_pt.tau, back_pt.xi) == pytest.approx((1.0, 1.0), rel=1e-14)


def test_sigma_tilde_invariant_under_reflection():
    params = TacnodeParams(3.0, 0.7)
    reflected, _ = reflect_params(params, ScaledPoint(0.0, 0.0))
    assert sigma_tilde(reflected) == pytest.approx(sigma_tilde(params), rel=1e-12)


def test_finite_config_from_tacnode_requires_integer_m():
    cfg = FiniteSystemConfig.from_tacnode(16, TacnodeParams(2.0, 0.0))
    assert (cfg.n, cfg.m) == (16, 32)
    assert cfg.a == pytest.approx(cfg.a2 - cfg.a1)
    with pytest.raises(DomainError):
        FiniteSystemConfig.from_tacnode(3, TacnodeParams(0.5, 0.0))


def test_finite_config_invariants():
    with pytest.raises(DomainError):
        FiniteSystemConfig(n=1, m=1, a1=1.0, a2=0.0, d=1.0)
    with pytest.raises(DomainError):
        FiniteSystemConfig(n=0, m=1, a1=-1.0, a2=1.0, d=1.0)
    with pytest.raises(DomainError):
        FiniteSystemConfig(n=1, m=1, a1=-1.0, a2=1.0, d=0.0)


def test_reflect_config_swaps_families():
    cfg = FiniteSystemConfig(n=2, m=4, a1=-1.5, a2=3.0, d=0.7)
    assert reflect_config(cfg) == FiniteSystemConfig(n=4, m=2, a1=-3.0, a2=1.5, d=0.7)


def test_envelope():
    TacnodeParams(20.0, 6.0).check_envelope()
    with pytest.raises(EnvelopeError):
        TacnodeParams(21.0, 0.0).check_envelope()
    with pytest.raises(EnvelopeError):
        ScaledPoint(0.0, 15.5).check_envelope()
    with pytest.raises(DomainError):
        TacnodeParams(-1.0, 0.0)


def test_finite_config_from_tacnode_logs_endpoints(caplog):
    with caplog.at_level(logging.DEBUG, logger="src.scaling.params"):
        FiniteSystemConfig.from_tacnode(4, TacnodeParams(4.0, 0.0))
    assert any("n=4, m=16, a1=-2, a2=4" in record.getMessage() for record in caplog.records)
