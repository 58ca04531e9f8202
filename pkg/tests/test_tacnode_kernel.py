"""
tacnode 극한 커널과 갭 확률 테스트
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import DomainError, EnvelopeError, WindowError
from src.kernel.tacnode import (
    GapWindow,
    KernelSettings,
    full_kernel,
    full_kernel_alt,
    gap_probability,
    interaction_term,
    is_probability,
    kernel_matrix,
    l_tac,
)
from src.scaling.params import ScaledPoint, TacnodeParams, reflect_params

FAST = KernelSettings(quad_order=80, cutoff=30.0, mu_order=80, mu_cutoff=30.0)


def test_settings_validation_and_doubling():
    assert KernelSettings().doubled() == KernelSettings(280, 80.0, 240, 80.0)
    with pytest.raises(DomainError):
        KernelSettings(quad_order=1)
    with pytest.raises(DomainError):
        KernelSettings(cutoff=0.0)


def test_two_representations_agree():
    params = TacnodeParams(lam=2.0, sigma=0.5)
    pt1, pt2 = ScaledPoint(0.3, -0.2), ScaledPoint(-0.1, 0.4)
    assert full_kernel(params, pt1, pt2) == pytest.approx(full_kernel_alt(params, pt1, pt2), abs=1e-7)
    assert full_kernel(params, pt2, pt1) == pytest.approx(full_kernel_alt(params, pt2, pt1), abs=1e-7)


def test_matrix_representations_agree_on_grid():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    xi = np.linspace(-1.0, 1.0, 5)
    assert_allclose(
        kernel_matrix(params, 0.0, xi, 0.0, xi, FAST),
        kernel_matrix(params, 0.0, xi, 0.0, xi, FAST, alt=True),
        atol=1e-7,
        rtol=0,
    )


def test_symmetric_case_reflection():
    params = TacnodeParams(lam=1.0, sigma=0.3)
    xi1 = np.array([-0.7, 0.1, 0.9])
    xi2 = np.array([0.4, -0.5])
    direct = kernel_matrix(params, 0.2, xi1, 0.5, xi2, FAST)
    mirrored = kernel_matrix(params, 0.2, -xi1, 0.5, -xi2, FAST)
    assert_allclose(direct, mirrored, atol=1e-9, rtol=0)


def test_reflection_covariance_general_lambda():
    params = TacnodeParams(lam=2.0, sigma=0.2)
    pt1, pt2 = ScaledPoint(0.1, 0.3), ScaledPoint(0.1, -0.4)
    r_params, r_pt1 = reflect_params(params, pt1)
    _, r_pt2 = reflect_params(params, pt2)
    # 𝕃^{1/λ, λ^{2/3}σ}(λ^{1/3}τ, -λ^{1/6}ξ, ...) = λ^{-1/6} 𝕃^{λ,σ}(τ, ξ, ...)
    reflected = kernel_matrix(r_params, r_pt1.tau, [r_pt1.xi], r_pt2.tau, [r_pt2.xi], FAST)[0, 0]
    direct = kernel_matrix(params, pt1.tau, [pt1.xi], pt2.tau, [pt2.xi], FAST)[0, 0]
    assert reflected == pytest.approx(params.lam ** (-1.0 / 6.0) * direct, abs=1e-8)


def test_gaussian_term_only_below_diagonal_in_time():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    xi = np.array([0.2])
    later = kernel_matrix(params, -0.3, xi, 0.3, xi, FAST)[0, 0]
    earlier = kernel_matrix(params, 0.3, xi, -0.3, xi, FAST)[0, 0]
    alt_later = kernel_matrix(params, -0.3, xi, 0.3, xi, FAST, alt=True)[0, 0]
    assert later == pytest.approx(alt_later, abs=1e-7)
    # 같은 시간에서는 가우스 항이 빠지고 값이 유한함
    same = kernel_matrix(params, 0.3, xi, 0.3, xi, FAST)[0, 0]
    assert np.isfinite(same) and np.isfinite(earlier)


def test_one_point_density_positive():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    xi = np.linspace(-2.0, 2.0, 9)
    diag = np.diag(kernel_matrix(params, 0.0, xi, 0.0, xi, FAST))
    assert np.all(diag > 0)
    assert_allclose(diag, diag[::-1], atol=1e-9, rtol=0)


def test_interaction_decays_with_separation():
    pt = ScaledPoint(0.0, 0.0)
    touching = abs(interaction_term(TacnodeParams(1.0, 0.0), pt, pt, FAST))
    separated = abs(interaction_term(TacnodeParams(1.0, 4.0), pt, pt, FAST))
    assert separated < touching


def test_l_tac_is_part_of_full_kernel():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    pt = ScaledPoint(0.0, 0.5)
    mirrored = ScaledPoint(0.0, -0.5)
    # λ = 1 이면 반사 항은 ξ → -ξ 의 L_tac
    assert full_kernel(params, pt, pt) == pytest.approx(l_tac(params, pt, pt) + l_tac(params, mirrored, mirrored), abs=1e-12)


def test_kernel_envelope():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    with pytest.raises(EnvelopeError):
        kernel_matrix(params, 0.0, [16.0], 0.0, [0.0])
    with pytest.raises(EnvelopeError):
        kernel_matrix(params, 5.5, [0.0], 0.0, [0.0])


def test_gap_window_validation():
    with pytest.raises(WindowError):
        GapWindow(0.0, 1.0, 1.0)
    with pytest.raises(WindowError):
        GapWindow(0.0, float("nan"), 1.0)


def test_gap_probability_empty_windows():
    assert gap_probability(TacnodeParams(1.0, 0.0), []) == 1.0


def test_gap_probability_is_monotone_in_window():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    inner = gap_probability(params, [GapWindow(0.0, -0.5, 0.5)], settings=FAST)
    outer = gap_probability(params, [GapWindow(0.0, -1.0, 1.0)], settings=FAST)
    assert 0.0 < outer < inner < 1.0
    assert is_probability(inner) and is_probability(outer)


def test_gap_probability_two_times_below_single_time():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    one = gap_probability(params, [GapWindow(0.0, -0.5, 0.5)], settings=FAST)
    two = gap_probability(params, [GapWindow(0.0, -0.5, 0.5), GapWindow(0.4, -0.5, 0.5)], settings=FAST)
    assert 0.0 < two < one


def test_gap_probability_ignores_window_order():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    windows = [GapWindow(0.4, -0.3, 0.6), GapWindow(-0.2, -0.5, 0.5)]
    forward = gap_probability(params, windows, settings=FAST)
    backward = gap_probability(params, windows[::-1], settings=FAST)
    assert forward == pytest.approx(backward, abs=1e-13)


def test_gap_probability_limits():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    windows = [GapWindow(float(t), -0.5, 0.5) for t in (-0.4, -0.2, 0.0, 0.2, 0.4)]
    with pytest.raises(EnvelopeError):
        gap_probability(params, windows)
    with pytest.raises(DomainError):
        gap_probability(params, windows[:1], order=10)


@pytest.mark.slow
def test_gap_probability_self_convergence():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    windows = [GapWindow(0.0, -1.0, 1.0)]
    base = gap_probability(params, windows)
    fine = gap_probability(params, windows, order=80, settings=KernelSettings().doubled())
    assert base == pytest.approx(fine, abs=1e-8)


@pytest.mark.slow
def test_full_kernel_self_convergence_on_grid():
    params = TacnodeParams(lam=1.0, sigma=0.0)
    xi = np.linspace(-2.0, 2.0, 9)
    for tau1, tau2 in ((0.0, 0.0), (-0.5, 0.5), (0.5, -0.5)):
        base = kernel_matrix(params, tau1, xi, tau2, xi)
        fine = kernel_matrix(params, tau1, xi, tau2, xi, KernelSettings().doubled())
        assert_allclose(base, fine, atol=1e-8, rtol=0)


POINT_PAIRS = [
    ((0.0, 0.0), (0.0, 0.0)),
    ((0.3, -0.2), (-0.1, 0.4)),
    ((-0.5, 1.0), (0.5, -1.0)),
]


@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("sigma", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("first, second", POINT_PAIRS)
def test_two_representations_agree_on_grid(lam, sigma, first, second):
    params = TacnodeParams(lam=lam, sigma=sigma)
    pairs = [(ScaledPoint(*first), ScaledPoint(*second)), (ScaledPoint(*second), ScaledPoint(*first))]
    for pt1, pt2 in pairs:
        assert full_kernel(params, pt1, pt2) == pytest.approx(full_kernel_alt(params, pt1, pt2), abs=1e-7)


def _reflection_cases(count=16, seed=20240611):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        lam = float(rng.uniform(0.5, 2.0))
        sigma = float(rng.uniform(-0.5, 0.5))
        tau1, tau2 = (float(v) for v in rng.uniform(-0.5, 0.5, size=2))
        xi1, xi2 = (float(v) for v in rng.uniform(-1.0, 1.0, size=2))
        cases.append((lam, sigma, tau1, xi1, tau2, xi2))
    return cases


@pytest.mark.slow
@pytest.mark.parametrize("lam, sigma, tau1, xi1, tau2, xi2", _reflection_cases())
def test_reflection_covariance_sampled(lam, sigma, tau1, xi1, tau2, xi2):
    params = TacnodeParams(lam=lam, sigma=sigma)
    pt1, pt2 = ScaledPoint(tau1, xi1), ScaledPoint(tau2, xi2)
    r_params, r_pt1 = reflect_params(params, pt1)
    _, r_pt2 = reflect_params(params, pt2)
    direct = full_kernel(params, pt1, pt2)
    assert direct == pytest.approx(lam ** (1.0 / 6.0) * full_kernel(r_params, r_pt1, r_pt2), abs=1e-7)
