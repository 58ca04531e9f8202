"""
Fredholm 행렬식 엔진

적분 연산자를 Nyström 방식으로 이산화하고 (대칭 √w 가중),
det(I - K), 해(resolvent) 적용, Tracy-Widom F2 를 계산합니다.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..errors import EnvelopeError, NumericError, SingularOperatorError
from ..kernel.airy_operators import airy_kernel_closed
from .quadrature import QuadratureRule, gauss_legendre

logger = logging.getLogger(__name__)

MODULE = "fredholm"

# LU 의 상대 피벗이 이보다 작으면 특이 연산자로 판단
SINGULAR_PIVOT = 1e-13
TW2_RANGE = (-8.0, 8.0)


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """
    적분 연산자의 Nyström 상 (matrix[i, j] = √w_i k(x_i, x_j) √w_j)

    확장 커널(여러 시간)은 규칙 여러 개를 이어 붙인 블록 행렬로 표현합니다.
    LU 분해는 처음 필요할 때 한 번만 계산되어 보관됩니다.
    """
    matrix: np.ndarray
    rules: Tuple[QuadratureRule, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        size = sum(len(rule) for rule in self.rules)
        if matrix.shape != (size, size):
            raise NumericError(
                f"행렬 크기 {matrix.shape} 가 노드 수 {size} 와 맞지 않습니다", MODULE
            )
        if not np.all(np.isfinite(matrix)):
            raise NumericError("커널 값에 NaN/무한대가 있습니다", MODULE)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def rule(self) -> QuadratureRule:
        if len(self.rules) != 1:
            raise NumericError("블록 연산자에는 단일 규칙이 없습니다", MODULE)
        return self.rules[0]

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([rule.nodes for rule in self.rules])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([rule.weights for rule in self.rules])

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _lu(self):
        identity_minus = np.eye(len(self)) - self.matrix
        return linalg.lu_factor(identity_minus, check_finite=False)

    @property
    def relative_pivot(self) -> float:
        """LU 대각 성분의 min/max 절댓값 비 (0 이면 특이)"""
        if len(self) == 0:
            return 1.0
        diag = np.abs(np.diag(self._lu[0]))
        top = diag.max()
        return float(diag.min() / top) if top > 0 else 0.0

    @classmethod
    def from_kernel_matrix(cls, values: np.ndarray, rule: QuadratureRule) -> "DiscretizedOperator":
        """노드 위 커널 값 k(x_i, x_j) 로부터 구성"""
        sw = rule.sqrt_weights
        return cls(matrix=sw[:, None] * np.asarray(values, dtype=float) * sw[None, :], rules=(rule,))

    @classmethod
    def from_blocks(
        cls,
        rules: Sequence[QuadratureRule],
        block: Callable[[int, int], np.ndarray],
    ) -> "DiscretizedOperator":
        """
        블록 Nyström 행렬 구성

        Args:
            rules: 블록별 구적 규칙
            block: (i, j) -> 규칙 i 의 노드 × 규칙 j 의 노드 위 커널 값
        """
        rules = tuple(rules)
        sizes = [len(rule) for rule in rules]
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        matrix = np.zeros((offsets[-1], offsets[-1]))
        for i, ri in enumerate(rules):
            for j, rj in enumerate(rules):
                values = np.asarray(block(i, j), dtype=float)
                if values.shape != (len(ri), len(rj)):
                    raise NumericError(f"블록 ({i},{j}) 크기가 잘못되었습니다: {values.shape}", MODULE)
                matrix[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = (
                    ri.sqrt_weights[:, None] * values * rj.sqrt_weights[None, :]
                )
        return cls(matrix=matrix, rules=rules)


def discretize(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], rule: QuadratureRule) -> DiscretizedOperator:
    """
    커널 함수를 규칙 위에서 이산화

    kernel 은 브로드캐스팅되는 (x[:, None], y[None, :]) 인자를 받아야 합니다.
    """
    x = rule.nodes
    values = np.broadcast_to(np.asarray(kernel(x[:, None], x[None, :]), dtype=float), (len(x), len(x)))
    if not np.all(np.isfinite(values)):
        raise NumericError("커널 값에 NaN/무한대가 있습니다", MODULE)
    return DiscretizedOperator.from_kernel_matrix(values, rule)


def fredholm_det(op: DiscretizedOperator) -> float:
    """det(I - K) (부분 피벗 LU)"""
    if len(op) == 0:
        return 1.0
    lu, piv = op._lu
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    diag = np.diag(lu)
    # 곱이 언더플로하지 않도록 로그로 누적
    with np.errstate(divide="ignore"):
        log_abs = np.sum(np.log(np.abs(diag)))
    sign = (-1.0) ** swaps * np.prod(np.sign(diag))
    value = float(sign * np.exp(log_abs))
    if not np.isfinite(value):
        raise NumericError("행렬식 계산 중 유한하지 않은 값이 나왔습니다", MODULE)
    return value


def resolvent_apply(
    op: DiscretizedOperator,
    rhs: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]],
) -> np.ndarray:
    """
    (I - K)^{-1} f 의 노드 값

    Args:
        op: 이산화된 연산자
        rhs: 노드 위 값 (N 또는 N×k 배열) 또는 벡터화된 함수

    Returns:
        2종 적분방정식의 Nyström 해 (rhs 와 같은 모양)
    """
    values = rhs(op.nodes) if callable(rhs) else rhs
    values = np.asarray(values, dtype=float)
    if values.shape[0] != len(op):
        raise NumericError(f"rhs 길이 {values.shape[0]} 가 노드 수 {len(op)} 와 다릅니다", MODULE)
    if len(op) == 0:
        return values.copy()

    pivot = op.relative_pivot
    if pivot < SINGULAR_PIVOT:
        raise SingularOperatorError(
            f"I - K 가 특이합니다 (상대 피벗 {pivot:.3e} < {SINGULAR_PIVOT:g})", MODULE
        )
    sw = op.sqrt_weights
    scale = sw if values.ndim == 1 else sw[:, None]
    solution = linalg.lu_solve(op._lu, scale * values, check_finite=False)
    if not np.all(np.isfinite(solution)):
        raise NumericError("해 적용 결과가 유한하지 않습니다", MODULE)
    return solution / scale


def tracy_widom_f2(s: float, order: int = 140, cutoff: float = 40.0, rule: Optional[QuadratureRule] = None) -> float:
    """
    F2(s) = det(I - χ_s K_Ai χ_s)_{L²((s,∞))}

    (s, s + cutoff) 위 Gauss-Legendre Nyström 으로 계산합니다.
    """
    lo, hi = TW2_RANGE
    if not (lo <= s <= hi):
        raise EnvelopeError(f"F2 는 s ∈ [{lo}, {hi}] 에서만 지원합니다: {s}", MODULE)
    rule = rule or gauss_legendre(order, s, s + cutoff)
    value = fredholm_det(discretize(airy_kernel_closed, rule))
    logger.debug(f"F2({s}) = {value:.15g} (order={len(rule)})")
    return value
