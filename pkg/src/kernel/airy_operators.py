"""
Airy 형 커널과 보조 함수

K_Ai, 확장 Airy 커널 K^{(α,β)}, 보조 함수 B, b, C, S 와 연산자 커널 T.
μ-적분은 모두 [0, cutoff] 위 Gauss-Legendre 규칙으로 계산합니다.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import DomainError
from ..numerics.quadrature import QuadratureRule, semi_infinite_rule
from ..special.functions import airy, airy_ext, airy_prime

logger = logging.getLogger(__name__)

MODULE = "airy_operators"

MU_ORDER = 120
MU_CUTOFF = 40.0
# 진동 영역(음의 ξ)에서는 꼬리가 늦게 시작하므로 절단을 늘림
MU_CUTOFF_NEGATIVE = 60.0
NEGATIVE_XI = -5.0


class AuxKind(str, Enum):
    """보조 함수 종류"""
    B = "B"
    LOWER_B = "b"
    C = "C"
    S = "S"


@dataclass(frozen=True)
class AiryFunctionSpec:
    """보조 함수 B/b/C/S 의 파라미터 (sigma 는 S 에서만 사용)"""
    kind: AuxKind
    lam: float
    tau: float
    xi: float
    sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AuxKind(self.kind))
        for name in ("lam", "tau", "xi", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} 값이 유한하지 않습니다", MODULE)
        if self.lam <= 0:
            raise DomainError(f"lambda > 0 이어야 합니다: {self.lam}", MODULE)


def default_mu_rule(xi: float = 0.0, order: int = MU_ORDER, cutoff: float = MU_CUTOFF) -> QuadratureRule:
    """
    μ-적분 기본 규칙 [0, cutoff]

    ξ < -5 이면 cutoff 를 60 이상으로 늘리고, 진동 파장 2π/√|ξ| 을 따라갈 수 있도록
    차수도 키웁니다.
    """
    if xi < NEGATIVE_XI:
        cutoff = max(cutoff, MU_CUTOFF_NEGATIVE)
        order = max(order, int(cutoff * math.sqrt(-xi) / 2.0) + 40)
        logger.debug(f"음의 ξ={xi:.4g}: μ 규칙을 [0, {cutoff:g}], {order}점으로 확장")
    return semi_infinite_rule(0.0, 1.0, order, cutoff_multiple=cutoff)


def airy_kernel(x, y, rule: Optional[QuadratureRule] = None):
    """K_Ai(x, y) = ∫₀^∞ Ai(x+u) Ai(y+u) du (구적)"""
    return airy_kernel_ext(0.0, 0.0, x, y, rule)


def airy_kernel_ext(alpha: float, beta: float, x, y, rule: Optional[QuadratureRule] = None):
    """K^{(α,β)}(x, y) = ∫₀^∞ Ai^{(α)}(x+u) Ai^{(β)}(y+u) du"""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    rule = rule or default_mu_rule(float(min(np.min(x), np.min(y))))
    u = rule.nodes
    left = airy_ext(alpha, x[..., None] + u)
    right = airy_ext(beta, y[..., None] + u)
    value = np.sum(left * right * rule.weights, axis=-1)
    return float(value) if value.ndim == 0 else value


def airy_kernel_closed(x, y):
    """
    닫힌 형태의 Airy 커널

    (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y), 대각선에서는 Ai'(x)² - x Ai(x)².
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ax, apx = airy(x), airy_prime(x)
    ay, apy = airy(y), airy_prime(y)
    diff = x - y
    near = np.abs(diff) < 1e-10 * (1.0 + np.abs(x))
    mid = 0.5 * (x + y)
    am, apm = airy(mid), airy_prime(mid)
    with np.errstate(divide="ignore", invalid="ignore"):
        off = (ax * apy - apx * ay) / np.where(near, 1.0, diff)
    value = np.where(near, apm * apm - mid * am * am, off)
    return float(value) if value.ndim == 0 else value


def aux_matrix(kind, lam: float, tau: float, xis, x, sigma: float = 0.0, rule: Optional[QuadratureRule] = None) -> np.ndarray:
    """
    여러 ξ 에 대한 보조 함수를 한 번에 계산

    Returns:
        (len(x), len(xis)) 배열, 열 j 는 ξ = xis[j] 인 함수의 x 위 값
    """
    kind = AuxKind(kind)
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c1 = (1.0 + lam ** -0.5) ** (1.0 / 3.0)
    c2 = (1.0 + math.sqrt(lam)) ** (1.0 / 3.0)

    if kind is AuxKind.LOWER_B:
        return lam ** (1.0 / 6.0) * airy_ext(
            lam ** (1.0 / 3.0) * tau, -(lam ** (1.0 / 6.0)) * xis[None, :] + c2 * x[:, None]
        )
    if kind is AuxKind.S:
        return airy_ext(tau, xis[None, :] - math.sqrt(lam) * sigma + c1 * x[:, None])

    rule = rule or default_mu_rule(float(np.min(xis)))
    mu = rule.nodes
    ai = airy(x[:, None] + mu[None, :])
    weighted = rule.weights[:, None] * airy_ext(tau, xis[None, :] + c1 * mu[:, None])
    big_b = ai @ weighted
    if kind is AuxKind.B:
        return big_b
    return aux_matrix(AuxKind.LOWER_B, lam, tau, xis, x) - big_b


def eval_aux(spec: AiryFunctionSpec, x, rule: Optional[QuadratureRule] = None):
    """B/b/C/S^λ_{τ,ξ}(x) 평가"""
    values = aux_matrix(spec.kind, spec.lam, spec.tau, [spec.xi], x, spec.sigma, rule)[:, 0]
    return float(values[0]) if np.ndim(x) == 0 else values


def t_kernel(sigma_tilde: float, x, y):
    """T(x, y) = Ai(x + y - σ̃), x, y ≥ σ̃"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < sigma_tilde) or np.any(y < sigma_tilde):
        raise DomainError(f"T 는 x, y >= σ̃ ({sigma_tilde}) 에서만 정의됩니다", MODULE)
    return airy(x + y - sigma_tilde)
