"""
tacnode 극한 커널

두 가지 동치 표현(이중 적분형 L_tac, 단일 적분형 L̃_tac)으로 확장 커널 𝕃_tac 을 조립하고,
여러 시간 구간에 대한 갭 확률 det(I - 𝕃_tac)_{L²(E)} 를 계산합니다.

모든 내부 계산은 ξ 배열에 대해 벡터화되어 있으며, 시간 쌍마다 해 적용(resolvent solve)을
한 번만 수행합니다. (I - χK_Aiχ) 의 LU 는 (σ̃, 차수, 절단) 별로 캐시됩니다.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional

import numpy as np

from ..errors import DomainError, EnvelopeError, WindowError
from ..numerics.fredholm import DiscretizedOperator, discretize, fredholm_det, resolvent_apply
from ..numerics.quadrature import gauss_legendre
from ..scaling.params import TAU_MAX, XI_MAX, ScaledPoint, TacnodeParams, sigma_tilde
from ..special.functions import airy_ext, gauss_kernel
from .airy_operators import MU_CUTOFF, MU_ORDER, AuxKind, airy_kernel_closed, aux_matrix, default_mu_rule

logger = logging.getLogger(__name__)

MODULE = "tacnode_kernel"

MAX_GAP_TIMES = 4
MIN_GAP_ORDER = 20
PROBABILITY_SLACK = 1e-6


@dataclass(frozen=True)
class KernelSettings:
    """극한 커널의 구적 설정"""
    quad_order: int = 140
    cutoff: float = 40.0
    mu_order: int = MU_ORDER
    mu_cutoff: float = MU_CUTOFF

    def __post_init__(self):
        if self.quad_order < 2 or self.mu_order < 2:
            raise DomainError("구적 차수는 2 이상이어야 합니다", MODULE)
        if self.cutoff <= 0 or self.mu_cutoff <= 0:
            raise DomainError("절단 길이는 양수여야 합니다", MODULE)

    def doubled(self) -> "KernelSettings":
        """차수와 절단을 두 배로 (자기수렴 검사용)"""
        return KernelSettings(
            quad_order=2 * self.quad_order,
            cutoff=2 * self.cutoff,
            mu_order=2 * self.mu_order,
            mu_cutoff=2 * self.mu_cutoff,
        )


DEFAULT_SETTINGS = KernelSettings()


@dataclass(frozen=True)
class GapWindow:
    """갭 구간: 시간 τ 에서 ξ ∈ (lo, hi)"""
    time: float
    lo: float
    hi: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.time, self.lo, self.hi)):
            raise WindowError("갭 구간 값이 유한하지 않습니다", MODULE)
        if not self.lo < self.hi:
            raise WindowError(f"lo < hi 이어야 합니다: ({self.lo}, {self.hi})", MODULE)


@lru_cache(maxsize=32)
def resolvent_operator(sigma_tilde_value: float, order: int, cutoff: float) -> DiscretizedOperator:
    """χ_σ̃ K_Ai χ_σ̃ 의 Nyström 상 ((σ̃, σ̃ + cutoff) 위)"""
    logger.debug(f"Airy 연산자 이산화: σ̃={sigma_tilde_value:.6g}, order={order}, cutoff={cutoff}")
    rule = gauss_legendre(order, sigma_tilde_value, sigma_tilde_value + cutoff)
    return discretize(airy_kernel_closed, rule)


def _check_envelope(params: TacnodeParams, taus: Iterable[float], xis: Iterable[np.ndarray]):
    params.check_envelope()
    for tau in taus:
        if abs(tau) > TAU_MAX:
            raise EnvelopeError(f"|tau|={abs(tau)} > {TAU_MAX}", MODULE)
    for xi in xis:
        if np.size(xi) and np.max(np.abs(xi)) > XI_MAX:
            raise EnvelopeError(f"|xi|={np.max(np.abs(xi)):.6g} > {XI_MAX}", MODULE)


def _ext_kernel_matrix(tau1: float, tau2: float, x1: np.ndarray, x2: np.ndarray, settings: KernelSettings) -> np.ndarray:
    """K^{(-τ1,τ2)}(x1_i, x2_j) 행렬"""
    rule = default_mu_rule(float(min(x1.min(), x2.min())), settings.mu_order, settings.mu_cutoff)
    u = rule.nodes
    left = airy_ext(-tau1, x1[:, None] + u[None, :])
    right = airy_ext(tau2, x2[:, None] + u[None, :])
    return (left * rule.weights) @ right.T


def _mu_rule(xis: np.ndarray, settings: KernelSettings):
    return default_mu_rule(float(xis.min()), settings.mu_order, settings.mu_cutoff)


def _l_tac_matrix(lam, sigma, st, tau1, xi1, tau2, xi2, settings: KernelSettings) -> np.ndarray:
    """L_tac^{λ,σ}(τ1, ξ1_i, τ2, ξ2_j)"""
    op = resolvent_operator(st, settings.quad_order, settings.cutoff)
    x, w = op.nodes, op.weights
    c1 = (1.0 + lam ** -0.5) ** (1.0 / 3.0)
    s1 = sigma + xi1
    s2 = sigma + xi2

    kernel = _ext_kernel_matrix(tau1, tau2, s1, s2, settings)
    big_b1 = aux_matrix(AuxKind.B, lam, -tau1, s1, x, rule=_mu_rule(s1, settings))
    # B - b = -C
    minus_c2 = -aux_matrix(AuxKind.C, lam, tau2, s2, x, rule=_mu_rule(s2, settings))
    resolved = resolvent_apply(op, big_b1)
    return kernel + c1 * resolved.T @ (w[:, None] * minus_c2)


def _l_tilde_matrix(lam, sigma, st, tau1, xi1, tau2, xi2, settings: KernelSettings) -> np.ndarray:
    """L̃_tac^{λ,σ}(τ1, ξ1_i, τ2, ξ2_j) (단일 적분형)"""
    op = resolvent_operator(st, settings.quad_order, settings.cutoff)
    x, w = op.nodes, op.weights
    c1 = (1.0 + lam ** -0.5) ** (1.0 / 3.0)
    s1 = sigma + xi1
    s2 = sigma + xi2

    c_left = aux_matrix(AuxKind.C, lam, -tau1, s1, x, rule=_mu_rule(s1, settings))
    b_right = aux_matrix(AuxKind.LOWER_B, lam, tau2, s2, x)
    resolved = resolvent_apply(op, c_left)
    return c1 * resolved.T @ (w[:, None] * b_right)


def kernel_matrix(
    params: TacnodeParams,
    tau1: float,
    xi1,
    tau2: float,
    xi2,
    settings: Optional[KernelSettings] = None,
    alt: bool = False,
) -> np.ndarray:
    """
    𝕃_tac^{λ,σ}(τ1, ξ1_i, τ2, ξ2_j) 행렬

    Args:
        params: (λ, σ)
        tau1, tau2: 두 시간
        xi1, xi2: 공간 좌표 배열
        settings: 구적 설정
        alt: True 이면 단일 적분형(L̃) 조립 사용
    """
    settings = settings or DEFAULT_SETTINGS
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    _check_envelope(params, (tau1, tau2), (xi1, xi2))

    lam, sigma = params.lam, params.sigma
    st = sigma_tilde(params)
    part = _l_tilde_matrix if alt else _l_tac_matrix

    # 반사된 파라미터에서도 σ̃ 는 같으므로 같은 해 연산자를 공유
    l3 = lam ** (1.0 / 3.0)
    l6 = lam ** (1.0 / 6.0)
    value = part(lam, sigma, st, tau1, xi1, tau2, xi2, settings)
    value = value + l6 * part(
        1.0 / lam, lam ** (2.0 / 3.0) * sigma, st, l3 * tau1, -l6 * xi1, l3 * tau2, -l6 * xi2, settings
    )
    if tau1 < tau2:
        value = value - gauss_kernel(tau2 - tau1, xi1[:, None], xi2[None, :])
    return value


@lru_cache(maxsize=4096)
def _cached_value(lam, sigma, tau1, xi1, tau2, xi2, settings: KernelSettings, mode: str) -> float:
    params = TacnodeParams(lam=lam, sigma=sigma)
    if mode == "l_tac":
        _check_envelope(params, (tau1, tau2), (np.array([xi1]), np.array([xi2])))
        st = sigma_tilde(params)
        return float(_l_tac_matrix(lam, sigma, st, tau1, np.array([xi1]), tau2, np.array([xi2]), settings)[0, 0])
    return float(kernel_matrix(params, tau1, xi1, tau2, xi2, settings, alt=(mode == "alt"))[0, 0])


def l_tac(params: TacnodeParams, pt1: ScaledPoint, pt2: ScaledPoint, settings: Optional[KernelSettings] = None) -> float:
    """L_tac^{λ,σ}(τ1, ξ1, τ2, ξ2) (K^{(-τ1,τ2)} 항 + 해 스칼라곱 항)"""
    return _cached_value(params.lam, params.sigma, pt1.tau, pt1.xi, pt2.tau, pt2.xi, settings or DEFAULT_SETTINGS, "l_tac")


def full_kernel(params: TacnodeParams, pt1: ScaledPoint, pt2: ScaledPoint, settings: Optional[KernelSettings] = None) -> float:
    """𝕃_tac = -𝟙(τ1<τ2)p + L_tac^{λ,σ} + λ^{1/6} L_tac^{반사}"""
    return _cached_value(params.lam, params.sigma, pt1.tau, pt1.xi, pt2.tau, pt2.xi, settings or DEFAULT_SETTINGS, "full")


def full_kernel_alt(params: TacnodeParams, pt1: ScaledPoint, pt2: ScaledPoint, settings: Optional[KernelSettings] = None) -> float:
    """단일 적분형 L̃_tac 으로 조립한 𝕃_tac"""
    return _cached_value(params.lam, params.sigma, pt1.tau, pt1.xi, pt2.tau, pt2.xi, settings or DEFAULT_SETTINGS, "alt")


def interaction_term(params: TacnodeParams, pt1: ScaledPoint, pt2: ScaledPoint, settings: Optional[KernelSettings] = None) -> float:
    """L_tac 의 두 번째 항 (해 스칼라곱) 만"""
    settings = settings or DEFAULT_SETTINGS
    s1 = np.array([params.sigma + pt1.xi])
    s2 = np.array([params.sigma + pt2.xi])
    total = l_tac(params, pt1, pt2, settings)
    return total - float(_ext_kernel_matrix(pt1.tau, pt2.tau, s1, s2, settings)[0, 0])


def is_probability(value: float) -> bool:
    """[-1e-6, 1 + 1e-6] 안에 있는지"""
    return -PROBABILITY_SLACK <= value <= 1.0 + PROBABILITY_SLACK


def gap_probability(
    params: TacnodeParams,
    windows: List[GapWindow],
    order: int = 40,
    settings: Optional[KernelSettings] = None,
) -> float:
    """
    P(E 에 입자가 없음) = det(I - 𝕃_tac)_{L²(E)}

    구간은 시간 오름차순으로 정렬되며, 블록 (i, j) 는 τ_i 와 τ_j 를 잇는 커널입니다
    (-p 항은 τ_i < τ_j 인 위쪽 블록에만 들어감). 범위를 벗어난 값도 그대로 반환하고 경고만 남깁니다.
    """
    if order < MIN_GAP_ORDER:
        raise DomainError(f"order >= {MIN_GAP_ORDER} 이 필요합니다: {order}", MODULE)
    windows = sorted(windows, key=lambda window: window.time)
    if not windows:
        return 1.0
    times = {window.time for window in windows}
    if len(times) > MAX_GAP_TIMES:
        raise EnvelopeError(f"서로 다른 시간은 최대 {MAX_GAP_TIMES}개까지 지원합니다: {len(times)}", MODULE)

    settings = settings or DEFAULT_SETTINGS
    rules = [gauss_legendre(order, window.lo, window.hi) for window in windows]
    op = DiscretizedOperator.from_blocks(
        rules,
        lambda i, j: kernel_matrix(
            params, windows[i].time, rules[i].nodes, windows[j].time, rules[j].nodes, settings
        ),
    )
    value = fredholm_det(op)
    if not is_probability(value):
        logger.warning(f"갭 확률이 [0,1] 범위를 벗어났습니다: {value:.3e}")
    logger.debug(f"갭 확률 {value:.15g} (구간 {len(windows)}개, order={order})")
    return value
