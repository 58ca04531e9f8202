"""
파라미터와 스케일링

유한 시스템 (n, m, a1, a2, d) 과 tacnode 좌표 (τ, ξ) 를 잇는 정확한 스케일링 함수들.
모든 값은 생성 후 불변이며 함수는 모두 순수 함수입니다.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

from ..errors import DomainError, EnvelopeError

logger = logging.getLogger(__name__)

MODULE = "params_scaling"

# 극한 커널의 지원 범위
LAMBDA_RANGE = (1.0 / 20.0, 20.0)
SIGMA_MAX = 6.0
TAU_MAX = 5.0
XI_MAX = 15.0


def _require_finite(name: str, value: float):
    if not math.isfinite(value):
        raise DomainError(f"{name} 값이 유한하지 않습니다: {value}", MODULE)


def _require_n(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"{name}은(는) 정수여야 합니다: {n}", MODULE)
    if n < 1:
        raise DomainError(f"{name} >= 1 이어야 합니다: {n}", MODULE)
    return int(n)


@dataclass(frozen=True)
class TacnodeParams:
    """극한 과정의 파라미터 (λ: 곡률비, σ: 상호작용 세기)"""
    lam: float
    sigma: float

    def __post_init__(self):
        _require_finite("lambda", self.lam)
        _require_finite("sigma", self.sigma)
        if self.lam <= 0:
            raise DomainError(f"lambda > 0 이어야 합니다: {self.lam}", MODULE)

    def check_envelope(self):
        """λ ∈ [1/20, 20], |σ| ≤ 6 확인"""
        lo, hi = LAMBDA_RANGE
        if not (lo <= self.lam <= hi):
            raise EnvelopeError(f"lambda={self.lam} 가 지원 범위 [{lo}, {hi}] 밖입니다", MODULE)
        if abs(self.sigma) > SIGMA_MAX:
            raise EnvelopeError(f"|sigma|={abs(self.sigma)} > {SIGMA_MAX}", MODULE)


@dataclass(frozen=True)
class ScaledPoint:
    """tacnode 좌표의 시공간 점 (τ, ξ)"""
    tau: float
    xi: float

    def __post_init__(self):
        _require_finite("tau", self.tau)
        _require_finite("xi", self.xi)

    def check_envelope(self):
        if abs(self.tau) > TAU_MAX:
            raise EnvelopeError(f"|tau|={abs(self.tau)} > {TAU_MAX}", MODULE)
        if abs(self.xi) > XI_MAX:
            raise EnvelopeError(f"|xi|={abs(self.xi)} > {XI_MAX}", MODULE)


@dataclass(frozen=True)
class FiniteSystemConfig:
    """
    유한 브라운 시스템 설정

    n개의 경로는 a1 에서 출발해 a1 로 돌아오고, m개의 경로는 a2 에서 a2 로.
    d 는 Johansson 공식의 자유 파라미터입니다.
    """
    n: int
    m: int
    a1: float
    a2: float
    d: float

    def __post_init__(self):
        _require_n(self.n, "n")
        _require_n(self.m, "m")
        _require_finite("a1", self.a1)
        _require_finite("a2", self.a2)
        _require_finite("d", self.d)
        if not self.a1 < self.a2:
            raise DomainError(f"a1 < a2 이어야 합니다: a1={self.a1}, a2={self.a2}", MODULE)
        if self.d <= 0:
            raise DomainError(f"d > 0 이어야 합니다: {self.d}", MODULE)

    @property
    def a(self) -> float:
        return self.a2 - self.a1

    @property
    def lam(self) -> float:
        """m/n (tacnode 스케일링에서는 λ)"""
        return self.m / self.n

    @classmethod
    def from_tacnode(cls, n: int, params: TacnodeParams) -> "FiniteSystemConfig":
        """
        tacnode 스케일링으로 유한 시스템 구성

        m = λn 은 정확히 정수여야 합니다 (내림하지 않고 거부).
        """
        n = _require_n(n)
        m_real = params.lam * n
        m = round(m_real)
        if m < 1 or abs(m_real - m) > 1e-9 * max(1.0, m_real):
            raise DomainError(f"lambda*n = {m_real} 이 정수가 아닙니다", MODULE)
        a1, a2, _ = scaled_endpoints(n, params)
        logger.debug(f"유한 시스템 구성: n={n}, m={m}, a1={a1:.6g}, a2={a2:.6g}")
        return cls(n=n, m=m, a1=a1, a2=a2, d=d_param(n))


def scaled_endpoints(n: int, params: TacnodeParams) -> Tuple[float, float, float]:
    """
    출발/도착점 스케일링

    Returns:
        (a1, a2, a) with a1 = -(√n + σ/2 n^{-1/6}), a2 = √λ(√n + σ/2 n^{-1/6}), a = a2 - a1
    """
    n = _require_n(n)
    base = math.sqrt(n) + 0.5 * params.sigma * n ** (-1.0 / 6.0)
    a1 = -base
    a2 = math.sqrt(params.lam) * base
    return a1, a2, (1.0 + math.sqrt(params.lam)) * base


def scaled_spacetime(n: int, pt: ScaledPoint) -> Tuple[float, float]:
    """(τ, ξ) → (시간, 공간) = ((1 + τ n^{-1/3})/2, (ξ/2) n^{-1/6})"""
    n = _require_n(n)
    time = 0.5 * (1.0 + pt.tau * n ** (-1.0 / 3.0))
    if not (0.0 < time < 1.0):
        raise DomainError(
            f"스케일된 시간 {time} 이 (0,1) 밖입니다 (n={n}, tau={pt.tau})", MODULE
        )
    return time, 0.5 * pt.xi * n ** (-1.0 / 6.0)


def d_param(n: int) -> float:
    """d = n^{-1/12}/√2 (d² = n^{-1/6}/2 는 공간 스케일)"""
    n = _require_n(n)
    return n ** (-1.0 / 12.0) / math.sqrt(2.0)


def sigma_tilde(params: TacnodeParams) -> float:
    """σ̃ = λ^{1/6}(1+√λ)^{2/3}σ"""
    lam = params.lam
    return lam ** (1.0 / 6.0) * (1.0 + math.sqrt(lam)) ** (2.0 / 3.0) * params.sigma


def reflect_params(params: TacnodeParams, pt: ScaledPoint) -> Tuple[TacnodeParams, ScaledPoint]:
    """
    수평축 반사 대칭

    (λ, σ, τ, ξ) → (λ^{-1}, λ^{2/3}σ, λ^{1/3}τ, -λ^{1/6}ξ). σ̃ 는 불변입니다.
    """
    lam = params.lam
    reflected = TacnodeParams(lam=1.0 / lam, sigma=lam ** (2.0 / 3.0) * params.sigma)
    point = ScaledPoint(tau=lam ** (1.0 / 3.0) * pt.tau, xi=-(lam ** (1.0 / 6.0)) * pt.xi)
    return reflected, point


def reflect_config(cfg: FiniteSystemConfig) -> FiniteSystemConfig:
    """유한 시스템의 반사: n↔m, a1→-a2, a2→-a1 (u, v 의 부호는 호출자가 뒤집음)"""
    return FiniteSystemConfig(n=cfg.m, m=cfg.n, a1=-cfg.a2, a2=-cfg.a1, d=cfg.d)
