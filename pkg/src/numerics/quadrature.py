"""
구적법 규칙

유한 구간/지수 감쇠하는 반무한 구간용 Gauss-Legendre 규칙과,
복소 경로(원, 절단된 수직선, π/3 쐐기)의 이산화.
"""
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from ..errors import DomainError

MODULE = "quadrature"

# e^{-36} < 1e-15: 지수 꼬리를 무시해도 되는 배수
DEFAULT_CUTOFF_MULTIPLE = 36.0


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """실수 구적 규칙 (노드는 순증가, 가중치는 양수)"""
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise DomainError("노드와 가중치의 길이가 다릅니다", MODULE)
        if np.any(weights <= 0):
            raise DomainError("가중치는 양수여야 합니다", MODULE)
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("노드는 순증가해야 합니다", MODULE)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """∫ f 를 규칙으로 근사 (f 는 벡터화되어 있어야 함)"""
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True, eq=False)
class ContourRule:
    """
    복소 경로 규칙

    가중치에는 국소 선소 dz 가 포함되고, 1/(2πi) 는 포함되지 않습니다.
    """
    nodes: np.ndarray
    weights: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        weights = np.asarray(self.weights, dtype=complex)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise DomainError("경로 노드와 가중치의 길이가 다릅니다", MODULE)
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise DomainError("경로 노드/가중치가 유한하지 않습니다", MODULE)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        """∫ f(z) dz (2πi 로 나누지 않음)"""
        return complex(np.dot(self.weights, f(self.nodes)))

    def distance_to(self, other: "ContourRule") -> float:
        """두 경로 노드 사이 최소 거리"""
        return float(np.min(np.abs(self.nodes[:, None] - other.nodes[None, :])))


def gauss_legendre(order: int, lo: float, hi: float) -> QuadratureRule:
    """[lo, hi] 로 옮긴 order 점 Gauss-Legendre 규칙 (2·order-1 차까지 정확)"""
    if order < 2:
        raise DomainError(f"order >= 2 가 필요합니다: {order}", MODULE)
    if not lo < hi:
        raise DomainError(f"lo < hi 가 필요합니다: [{lo}, {hi}]", MODULE)
    x, w = legendre.leggauss(order)
    half = 0.5 * (hi - lo)
    return QuadratureRule(nodes=lo + half * (x + 1.0), weights=half * w)


def semi_infinite_rule(
    origin: float,
    decay_scale: float,
    order: int,
    cutoff_multiple: float = DEFAULT_CUTOFF_MULTIPLE,
) -> QuadratureRule:
    """
    [origin, ∞) 근사용 규칙

    e^{-x/decay_scale} 로 감쇠하는 피적분함수를 가정하고
    [origin, origin + cutoff_multiple·decay_scale] 에서 Gauss-Legendre 를 씁니다.
    """
    if decay_scale <= 0 or cutoff_multiple <= 0:
        raise DomainError("decay_scale, cutoff_multiple 은 양수여야 합니다", MODULE)
    return gauss_legendre(order, origin, origin + cutoff_multiple * decay_scale)


def circle_contour(center: complex, radius: float, order: int) -> ContourRule:
    """
    반시계 방향 원 (주기 사다리꼴 규칙)

    z_k = center + r e^{2πik/N}, 가중치 (2πi r/N) e^{2πik/N}
    """
    if order < 8:
        raise DomainError(f"원 경로 order >= 8 이 필요합니다: {order}", MODULE)
    if not radius > 0:
        raise DomainError(f"반지름은 양수여야 합니다: {radius}", MODULE)
    phase = np.exp(2j * math.pi * np.arange(order) / order)
    return ContourRule(
        nodes=center + radius * phase,
        weights=(2j * math.pi * radius / order) * phase,
        label=f"circle(c={center}, r={radius:.6g})",
    )


def line_contour(
    anchor: float,
    half_height: float,
    order: int,
    tilt: float = 0.0,
    direction: int = 1,
) -> ContourRule:
    """
    위쪽 방향의 절단된 수직선 또는 π/3 쐐기

    Args:
        anchor: 실축과 만나는 점
        half_height: 수직선의 반 높이 / 쐐기 각 반직선의 길이
        order: 노드 수 (쐐기는 반직선마다 order//2)
        tilt: 0 (수직선) 또는 π/3 (쐐기)
        direction: 쐐기가 열리는 방향, +1 이면 오른쪽, -1 이면 왼쪽
    """
    if order < 8:
        raise DomainError(f"직선 경로 order >= 8 이 필요합니다: {order}", MODULE)
    if not half_height > 0:
        raise DomainError(f"half_height 는 양수여야 합니다: {half_height}", MODULE)
    if tilt == 0.0:
        rule = gauss_legendre(order, -half_height, half_height)
        return ContourRule(
            nodes=anchor + 1j * rule.nodes,
            weights=1j * rule.weights,
            label=f"line(Re={anchor:.6g})",
        )
    if not math.isclose(tilt, math.pi / 3):
        raise DomainError(f"tilt 는 0 또는 π/3 만 지원합니다: {tilt}", MODULE)
    if direction not in (1, -1):
        raise DomainError(f"direction 은 ±1 이어야 합니다: {direction}", MODULE)

    theta = math.pi / 3 if direction == 1 else 2 * math.pi / 3
    ray = gauss_legendre(order // 2, 0.0, half_height)
    up = np.exp(1j * theta)
    down = np.exp(-1j * theta)
    # 아래 반직선은 바깥에서 anchor 로 들어오므로 선소의 부호가 바뀜
    nodes = np.concatenate([anchor + ray.nodes[::-1] * down, anchor + ray.nodes * up])
    weights = np.concatenate([-down * ray.weights[::-1], up * ray.weights])
    return ContourRule(nodes=nodes, weights=weights, label=f"wedge(Re={anchor:.6g}, dir={direction})")


def default_half_height(s: float, t: float) -> float:
    """iℝ 절단 높이: 10/√(τ/(2(1-τ))), τ = min(s,t), 최소 20"""
    tmin = min(s, t)
    return max(20.0, 10.0 / math.sqrt(tmin / (2.0 * (1.0 - tmin))))
