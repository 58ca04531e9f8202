"""
유한 n Johansson 커널

두 가족 (n개, m개) 의 비충돌 브라운 다리의 상관 커널 𝕃_{n,m} 을 복소 경로 적분으로
계산하고, tacnode 스케일링 아래에서 극한 커널로의 수렴을 측정합니다.

적분 경로:
    - D_{a1}, D_{a2}: a1, a2 를 감싸는 반시계 방향 원 (주기 사다리꼴 규칙)
    - 지수 1 의 수직선은 D_{a1} 의 오른쪽, 지수 2 의 수직선은 D_{a2} 의 왼쪽
    - "saddle" 정책은 이중 임계점을 지나는 가파른 하강 경로를 살짝 비켜 놓은 것이고,
      "small" 정책은 작은 반지름 원과 iℝ 을 그대로 씁니다 (작은 n 검증용).

모든 피적분함수는 복소 로그 합의 exp 로 계산하며, 행렬곱 전에 행/열마다 실수부
최댓값을 빼서 오버플로를 피합니다. L²((1,∞)) 위 스칼라곱은 x = 1 + κx̃ 치환 후
Nyström 으로 계산합니다.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..errors import ContourCollisionError, DomainError, EnvelopeError, NumericError, SingularOperatorError
from ..numerics.fredholm import DiscretizedOperator, fredholm_det, resolvent_apply
from ..numerics.quadrature import (
    ContourRule,
    QuadratureRule,
    circle_contour,
    default_half_height,
    gauss_legendre,
    line_contour,
)
from ..scaling.params import (
    FiniteSystemConfig,
    ScaledPoint,
    TacnodeParams,
    d_param,
    scaled_spacetime,
)
from ..special.functions import brownian_q
from ..utils.parallel import ordered_map
from .tacnode import KernelSettings, full_kernel

logger = logging.getLogger(__name__)

MODULE = "finite_kernel"

MAX_N = 256
COLLISION_DISTANCE = 1e-9
# 허수부 잔차: 보고 기준 / 실패 기준
IMAG_WARN = 1e-8
IMAG_FAIL = 1e-4
DET_FLOOR = 1e-12
NYSTROM_CUTOFF = 40.0
TWO_PI_I = 2j * math.pi


class ContourPolicy(str, Enum):
    SADDLE = "saddle"
    SMALL = "small"


class ScalarMode(str, Enum):
    """L² 스칼라곱 계산 방식"""
    RESOLVENT = "resolvent"
    DET_RATIO = "det_ratio"


@dataclass(frozen=True)
class FiniteSettings:
    """유한 n 커널의 구적/경로 설정"""
    nystrom_order: int = 100
    circle_order: int = 256
    line_order: int = 400
    policy: ContourPolicy = ContourPolicy.SADDLE
    tilt: float = 0.0
    scalar_mode: ScalarMode = ScalarMode.RESOLVENT

    def __post_init__(self):
        object.__setattr__(self, "policy", ContourPolicy(self.policy))
        object.__setattr__(self, "scalar_mode", ScalarMode(self.scalar_mode))
        if self.nystrom_order < 30:
            raise DomainError(f"nystrom_order >= 30 이 필요합니다: {self.nystrom_order}", MODULE)

    def doubled(self) -> "FiniteSettings":
        """경로 차수를 두 배로"""
        return FiniteSettings(
            nystrom_order=self.nystrom_order,
            circle_order=2 * self.circle_order,
            line_order=2 * self.line_order,
            policy=self.policy,
            tilt=self.tilt,
            scalar_mode=self.scalar_mode,
        )


DEFAULT_FINITE = FiniteSettings()


@dataclass(frozen=True, eq=False)
class ContourSet:
    """두 지수에 필요한 모든 경로"""
    circle1: ContourRule
    circle2: ContourRule
    line1: ContourRule
    line2: ContourRule
    shift: float
    half_height: float
    line_order: int
    policy: ContourPolicy

    def for_index(self, index: int) -> Tuple[ContourRule, ContourRule, ContourRule]:
        """(자기 원, 상대 원, 직선)"""
        if index == 1:
            return self.circle1, self.circle2, self.line1
        return self.circle2, self.circle1, self.line2

    def line_anchor(self, index: int) -> float:
        return self.shift if index == 1 else -self.shift


@dataclass(frozen=True)
class _Family:
    """지수 i 의 역할 배치 (자기 극점 own, 상대 극점 other, 부호 eps)"""
    index: int
    own: float
    other: float
    n_own: int
    n_other: int
    eps: int
    a: float
    d: float

    @classmethod
    def of(cls, index: int, cfg: FiniteSystemConfig) -> "_Family":
        if index == 1:
            return cls(1, cfg.a1, cfg.a2, cfg.n, cfg.m, 1, cfg.a, cfg.d)
        if index == 2:
            return cls(2, cfg.a2, cfg.a1, cfg.m, cfg.n, -1, cfg.a, cfg.d)
        raise DomainError(f"index 는 1 또는 2 여야 합니다: {index}", MODULE)


@dataclass(frozen=True)
class FiniteKernelResult:
    """커널 행렬과 진단 정보"""
    values: np.ndarray
    imag_residue: float
    det_m0: Tuple[float, float]


def _check_config(cfg: FiniteSystemConfig):
    if not (cfg.a1 < 0.0 < cfg.a2):
        raise EnvelopeError(
            f"a1 < 0 < a2 가 필요합니다 (iℝ 이 두 원을 분리해야 함): a1={cfg.a1}, a2={cfg.a2}", MODULE
        )
    if max(cfg.n, cfg.m) > MAX_N:
        raise EnvelopeError(f"n, m <= {MAX_N} 만 지원합니다: n={cfg.n}, m={cfg.m}", MODULE)


def _check_times(*times: float):
    for value in times:
        if not (0.0 < value < 1.0):
            raise DomainError(f"시간 {value} 는 (0,1) 안에 있어야 합니다", MODULE)


def contour_shift(cfg: FiniteSystemConfig) -> float:
    """h = min(½·min(|a1|,a2)^{1/3}, ½·min(|a1|,a2))"""
    base = min(abs(cfg.a1), cfg.a2)
    return min(0.5 * base ** (1.0 / 3.0), 0.5 * base)


def build_contours(
    cfg: FiniteSystemConfig,
    s: float,
    t: float,
    settings: Optional[FiniteSettings] = None,
) -> ContourSet:
    """정책에 따라 원/직선 경로 구성 (차수는 n+m 에 비례해 하한을 둠)"""
    settings = settings or DEFAULT_FINITE
    _check_config(cfg)
    _check_times(s, t)

    if settings.policy is ContourPolicy.SADDLE:
        shift = contour_shift(cfg)
        r1 = abs(cfg.a1) - shift
        r2 = cfg.a2 - shift
    else:
        shift = 0.0
        r1 = min(abs(cfg.a1), cfg.a) / 4.0
        r2 = min(cfg.a2, cfg.a) / 4.0

    circle_order = max(settings.circle_order, 8 * (cfg.n + cfg.m))
    line_order = max(settings.line_order, 4 * (cfg.n + cfg.m))
    half_height = max(default_half_height(s, t), 2.0 * max(abs(cfg.a1), cfg.a2))
    wedge_height = half_height * math.sqrt(2.0) if settings.tilt else half_height

    contours = ContourSet(
        circle1=circle_contour(cfg.a1, r1, circle_order),
        circle2=circle_contour(cfg.a2, r2, circle_order),
        line1=line_contour(shift, wedge_height, line_order, settings.tilt, direction=1),
        line2=line_contour(-shift, wedge_height, line_order, settings.tilt, direction=-1),
        shift=shift,
        half_height=half_height,
        line_order=line_order,
        policy=settings.policy,
    )
    check_contours(contours)
    logger.debug(
        f"경로 구성: policy={settings.policy.value}, h={shift:.4g}, r1={r1:.4g}, r2={r2:.4g}, "
        f"원 {circle_order}점, 직선 {line_order}점, H={half_height:.4g}"
    )
    return contours


def check_contours(contours: ContourSet):
    """코시 분모로 짝지어지는 경로끼리의 최소 거리 확인"""
    pairs = (
        ("D_a1/line1", contours.circle1, contours.line1),
        ("D_a2/line2", contours.circle2, contours.line2),
        ("D_a1/D_a2", contours.circle1, contours.circle2),
    )
    for name, first, second in pairs:
        distance = first.distance_to(second)
        if distance < COLLISION_DISTANCE:
            raise ContourCollisionError(f"경로 {name} 가 너무 가깝습니다: {distance:.3e}", MODULE)


def nystrom_rule(cfg: FiniteSystemConfig, order: int) -> QuadratureRule:
    """L²((1,∞)) 규칙: x = 1 + κx̃, x̃ ∈ [0, 40], κ = n^{-2/3} λ^{-1/6} (1+√λ)^{-2/3}"""
    lam = cfg.lam
    kappa = cfg.n ** (-2.0 / 3.0) * lam ** (-1.0 / 6.0) * (1.0 + math.sqrt(lam)) ** (-2.0 / 3.0)
    base = gauss_legendre(order, 0.0, NYSTROM_CUTOFF)
    return QuadratureRule(nodes=1.0 + kappa * base.nodes, weights=kappa * base.weights)


def _shifted_exp(logs: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """exp(logs - shift), shift 는 axis 방향 실수부 최댓값"""
    shift = np.max(logs.real, axis=axis, keepdims=True)
    values = np.exp(logs - shift)
    return values, np.squeeze(shift, axis=axis)


def _rescale(values: np.ndarray, exponent: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = values * np.exp(exponent)
    if not np.all(np.isfinite(out)):
        raise NumericError("경로 적분 값이 배정밀도 범위를 넘었습니다", MODULE)
    return out


def _log1m(z: np.ndarray, pole: float) -> np.ndarray:
    """log(1 - z/pole), 주 가지 (정수 거듭제곱에만 쓰이므로 가지는 무관)"""
    with np.errstate(divide="ignore"):
        return np.log(1.0 - z / pole)


def _log_f(fam: _Family, z: np.ndarray, s: float, us: np.ndarray) -> np.ndarray:
    """자기 원 위 z-인자: (1-z/own)^{-n_own} exp(-sz²/(2(1-s)) - own z + uz/(1-s))"""
    base = -fam.n_own * _log1m(z, fam.own) - s * z * z / (2.0 * (1.0 - s)) - fam.own * z
    return base[:, None] + z[:, None] * us[None, :] / (1.0 - s)


def _log_g(fam: _Family, w: np.ndarray, t: float, vs: np.ndarray) -> np.ndarray:
    """직선 위 w-인자: (1-w/own)^{n_own} exp(tw²/(2(1-t)) + own w - vw/(1-t))"""
    base = fam.n_own * _log1m(w, fam.own) + t * w * w / (2.0 * (1.0 - t)) + fam.own * w
    return base[:, None] - w[:, None] * vs[None, :] / (1.0 - t)


def _log_p(fam: _Family, z: np.ndarray) -> np.ndarray:
    """자기 원 위: (1-z/other)^{n_other} (1-z/own)^{-n_own}"""
    return fam.n_other * _log1m(z, fam.other) - fam.n_own * _log1m(z, fam.own)


def _log_q(fam: _Family, w: np.ndarray) -> np.ndarray:
    """상대 원 위: (1-w/own)^{n_own} (1-w/other)^{-n_other}"""
    return fam.n_own * _log1m(w, fam.own) - fam.n_other * _log1m(w, fam.other)


def _a_values(fam, own_c: ContourRule, line: ContourRule, s, us, t, vs) -> np.ndarray:
    """𝒜^i 를 (u, v) 격자에서"""
    z, wz = own_c.nodes, own_c.weights
    w, ww = line.nodes, line.weights
    f_vals, f_shift = _shifted_exp(_log_f(fam, z, s, us), axis=0)
    g_vals, g_shift = _shifted_exp(_log_g(fam, w, t, vs), axis=0)
    cauchy = 1.0 / (w[None, :] - z[:, None])
    const = fam.d ** 2 / (TWO_PI_I ** 2 * math.sqrt((1.0 - s) * (1.0 - t)))
    core = (wz[:, None] * f_vals).T @ cauchy @ (ww[:, None] * g_vals)
    return const * _rescale(core, f_shift[:, None] + g_shift[None, :])


def _b_values(fam, own_c: ContourRule, line: ContourRule, t, vs, xs) -> np.ndarray:
    """ℬ^i_{t,v}(x) 를 (x, v) 격자에서"""
    z, wz = own_c.nodes, own_c.weights
    w, ww = line.nodes, line.weights
    g_vals, g_shift = _shifted_exp(_log_g(fam, w, t, vs), axis=0)
    inner = (1.0 / (z[:, None] - w[None, :])) @ (ww[:, None] * g_vals)
    e_vals, e_shift = _shifted_exp(_log_p(fam, z)[None, :] + fam.eps * fam.a * xs[:, None] * z[None, :], axis=1)
    const = fam.d * math.sqrt(fam.a) / (TWO_PI_I ** 2 * math.sqrt(1.0 - t))
    core = (e_vals * wz[None, :]) @ inner
    return const * _rescale(core, e_shift[:, None] + g_shift[None, :])


def _beta_anchor(fam: _Family, alpha: float, slope: np.ndarray, fallback: float) -> np.ndarray:
    """
    β 피적분함수의 실축 위 극소점 (수직선의 위치)

    g(w) = n_other log(1-w/other) + αw² + slope·w 의 임계점은
    2αw² + (slope - 2α·other)w + (n_other - slope·other) = 0 의 근입니다.
    """
    lin = slope - 2.0 * alpha * fam.other
    const = fam.n_other - slope * fam.other
    disc = lin * lin - 8.0 * alpha * const
    pick = -1.0 if fam.own < fam.other else 1.0
    root = (-lin + pick * np.sqrt(np.maximum(disc, 0.0))) / (4.0 * alpha)
    anchor = np.where(disc >= 0.0, root, -lin / (4.0 * alpha))
    wrong_side = (anchor - fam.other) * (fam.own - fam.other) <= 0.0
    return np.where(wrong_side, fallback, anchor)


def _beta_values(fam, contours: ContourSet, t, vs, xs) -> np.ndarray:
    """
    β^i_{t,v}(x) 를 (x, v) 격자에서

    피적분함수가 전해석이므로 (x, v) 마다 극소점을 지나는 수직선을 따로 씁니다.
    """
    alpha = t / (2.0 * (1.0 - t))
    ys = gauss_legendre(contours.line_order, -contours.half_height, contours.half_height)
    const = fam.d * math.sqrt(fam.a) / (TWO_PI_I * math.sqrt(1.0 - t))
    out = np.empty((len(xs), len(vs)), dtype=complex)
    for j, v in enumerate(vs):
        slope = fam.own - v / (1.0 - t) + fam.eps * fam.a * xs
        anchor = _beta_anchor(fam, alpha, slope, contours.line_anchor(fam.index))
        w = anchor[:, None] + 1j * ys.nodes[None, :]
        logs = fam.n_other * _log1m(w, fam.other) + alpha * w * w + slope[:, None] * w
        vals, shift = _shifted_exp(logs, axis=1)
        out[:, j] = _rescale(vals @ (1j * ys.weights), shift)
    return const * out


def _c_values(fam, own_c: ContourRule, other_c: ContourRule, s, us, ys) -> np.ndarray:
    """𝒞^i_{s,u}(y) 를 (y, u) 격자에서"""
    z, wz = own_c.nodes, own_c.weights
    w, ww = other_c.nodes, other_c.weights
    f_vals, f_shift = _shifted_exp(_log_f(fam, z, s, us), axis=0)
    inner = fam.eps * (1.0 / (w[:, None] - z[None, :])) @ (wz[:, None] * f_vals)
    e_vals, e_shift = _shifted_exp(_log_q(fam, w)[None, :] - fam.eps * fam.a * ys[:, None] * w[None, :], axis=1)
    const = fam.d * math.sqrt(fam.a) / (TWO_PI_I ** 2 * math.sqrt(1.0 - s))
    core = (e_vals * ww[None, :]) @ inner
    return const * _rescale(core, e_shift[:, None] + f_shift[None, :])


def _m0_values(fam, own_c: ContourRule, other_c: ContourRule, xs, ys) -> np.ndarray:
    """M0^i(x, y)"""
    z, wz = own_c.nodes, own_c.weights
    w, ww = other_c.nodes, other_c.weights
    ez, ez_shift = _shifted_exp(_log_p(fam, z)[None, :] + fam.eps * fam.a * xs[:, None] * z[None, :], axis=1)
    ew, ew_shift = _shifted_exp(_log_q(fam, w)[None, :] - fam.eps * fam.a * ys[:, None] * w[None, :], axis=1)
    cauchy = fam.eps / (z[:, None] - w[None, :])
    core = (ez * wz[None, :]) @ cauchy @ (ew * ww[None, :]).T
    return fam.a / TWO_PI_I ** 2 * _rescale(core, ez_shift[:, None] + ew_shift[None, :])


def _imag_residue(values: np.ndarray) -> float:
    scale = np.max(np.abs(values)) if values.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(values.imag)) / scale)


def _contours_for(cfg, s, t, contours: Optional[ContourSet], settings: Optional[FiniteSettings]) -> ContourSet:
    if contours is None:
        return build_contours(cfg, s, t, settings)
    _check_config(cfg)
    _check_times(s, t)
    check_contours(contours)
    return contours


def ingredient_A(
    index: int,
    cfg: FiniteSystemConfig,
    s: float,
    u: float,
    t: float,
    v: float,
    contours: Optional[ContourSet] = None,
    settings: Optional[FiniteSettings] = None,
    keep_complex: bool = False,
):
    """𝒜^i_{s,u,t,v} (keep_complex 이면 실수부를 취하기 전의 값)"""
    fam = _Family.of(index, cfg)
    contours = _contours_for(cfg, s, t, contours, settings)
    own_c, _, line = contours.for_index(index)
    value = complex(_a_values(fam, own_c, line, s, np.array([u]), t, np.array([v]))[0, 0])
    return value if keep_complex else value.real


def ingredient_BbetaCM(
    index: int,
    which: str,
    cfg: FiniteSystemConfig,
    s: float,
    u: float,
    t: float,
    v: float,
    x: float,
    y: Optional[float] = None,
    contours: Optional[ContourSet] = None,
    settings: Optional[FiniteSettings] = None,
    keep_complex: bool = False,
):
    """
    ℬ^i_{t,v}(x), β^i_{t,v}(x), 𝒞^i_{s,u}(x), M0^i(x, y) 중 하나

    Args:
        which: "B", "beta", "C", "M0"
        x, y: L²((1,∞)) 의 점 (y 는 M0 에만)
    """
    if x < 1.0 or (y is not None and y < 1.0):
        raise DomainError(f"x, y >= 1 이어야 합니다: x={x}, y={y}", MODULE)
    fam = _Family.of(index, cfg)
    contours = _contours_for(cfg, s, t, contours, settings)
    own_c, other_c, line = contours.for_index(index)
    xs = np.array([float(x)])
    if which == "B":
        value = _b_values(fam, own_c, line, t, np.array([v]), xs)
    elif which == "beta":
        value = _beta_values(fam, contours, t, np.array([v]), xs)
    elif which == "C":
        value = _c_values(fam, own_c, other_c, s, np.array([u]), xs)
    elif which == "M0":
        if y is None:
            raise DomainError("M0 에는 y 가 필요합니다", MODULE)
        value = _m0_values(fam, own_c, other_c, xs, np.array([float(y)]))
    else:
        raise DomainError(f"알 수 없는 성분: {which}", MODULE)
    result = complex(value[0, 0])
    return result if keep_complex else result.real


def _det_ratio_scalar(op: DiscretizedOperator, f_vals: np.ndarray, c_vals: np.ndarray, det: float) -> np.ndarray:
    """⟨𝒞, (1-M0)^{-1}(ℬ+β)⟩ = det(I - M0 + (ℬ+β)⊗𝒞) / det(I - M0) - 1"""
    sw = op.sqrt_weights
    base = np.eye(len(op)) - op.matrix
    out = np.empty((c_vals.shape[1], f_vals.shape[1]))
    for i in range(c_vals.shape[1]):
        for j in range(f_vals.shape[1]):
            updated = base + np.outer(sw * f_vals[:, j], sw * c_vals[:, i])
            out[i, j] = linalg.det(updated) / det - 1.0
    return out


def _index_contribution(fam: _Family, contours: ContourSet, rule: QuadratureRule, s, us, t, vs, settings: FiniteSettings):
    """d^{-2}𝒜^i + d^{-2}⟨ℬ^i + β^i, (1 - M0^i)^{-1}𝒞^i⟩ 와 진단값"""
    own_c, other_c, line = contours.for_index(fam.index)
    xs = rule.nodes
    a_vals = _a_values(fam, own_c, line, s, us, t, vs)
    f_vals = _b_values(fam, own_c, line, t, vs, xs) + _beta_values(fam, contours, t, vs, xs)
    c_vals = _c_values(fam, own_c, other_c, s, us, xs)
    m0 = _m0_values(fam, own_c, other_c, xs, xs)
    residue = max(_imag_residue(part) for part in (a_vals, f_vals, c_vals, m0))

    op = DiscretizedOperator.from_kernel_matrix(m0.real, rule)
    det = fredholm_det(op)
    if det <= DET_FLOOR:
        raise SingularOperatorError(
            f"det(I - M0^{fam.index}) = {det:.3e} <= {DET_FLOOR:g}: 구적이 실패했습니다", MODULE
        )
    if settings.scalar_mode is ScalarMode.RESOLVENT:
        resolved = resolvent_apply(op, f_vals.real)
        scalar = (rule.weights[:, None] * c_vals.real).T @ resolved
    else:
        scalar = _det_ratio_scalar(op, f_vals.real, c_vals.real, det)
    return (a_vals.real + scalar) / fam.d ** 2, residue, det


def finite_kernel_matrix(
    cfg: FiniteSystemConfig,
    s: float,
    us,
    t: float,
    vs,
    settings: Optional[FiniteSettings] = None,
    contours: Optional[ContourSet] = None,
) -> FiniteKernelResult:
    """
    𝕃_{n,m}(s, u_i, t, v_j) 행렬

    허수부 잔차가 1e-8 을 넘으면 경고하고, 1e-4 를 넘으면 NumericError 를 냅니다.
    """
    settings = settings or DEFAULT_FINITE
    us = np.atleast_1d(np.asarray(us, dtype=float))
    vs = np.atleast_1d(np.asarray(vs, dtype=float))
    contours = _contours_for(cfg, s, t, contours, settings)
    rule = nystrom_rule(cfg, settings.nystrom_order)

    values = -np.asarray(brownian_q(s, us[:, None], t, vs[None, :]), dtype=float)
    residues = []
    dets = []
    for index in (1, 2):
        part, residue, det = _index_contribution(_Family.of(index, cfg), contours, rule, s, us, t, vs, settings)
        values = values + part
        residues.append(residue)
        dets.append(det)

    residue = max(residues)
    if residue > IMAG_FAIL:
        raise NumericError(f"허수부 잔차 {residue:.3e} 가 너무 큽니다 (경로 구적 실패)", MODULE)
    if residue > IMAG_WARN:
        logger.warning(f"허수부 잔차 {residue:.3e} > {IMAG_WARN:g} (n={cfg.n}, m={cfg.m})")
    return FiniteKernelResult(values=values, imag_residue=residue, det_m0=(dets[0], dets[1]))


def finite_kernel_eval(
    cfg: FiniteSystemConfig,
    s: float,
    u: float,
    t: float,
    v: float,
    nystrom_order: Optional[int] = None,
    settings: Optional[FiniteSettings] = None,
    contours: Optional[ContourSet] = None,
) -> float:
    """𝕃_{n,m}(s, u, t, v)"""
    settings = settings or DEFAULT_FINITE
    if nystrom_order is not None:
        settings = FiniteSettings(
            nystrom_order=nystrom_order,
            circle_order=settings.circle_order,
            line_order=settings.line_order,
            policy=settings.policy,
            tilt=settings.tilt,
            scalar_mode=settings.scalar_mode,
        )
    result = finite_kernel_matrix(cfg, s, [u], t, [v], settings, contours)
    return float(result.values[0, 0])


def scaled_finite_kernel(
    n: int,
    params: TacnodeParams,
    pt1: ScaledPoint,
    pt2: ScaledPoint,
    settings: Optional[FiniteSettings] = None,
) -> float:
    """d²·𝕃_{n,λn}(s, u, t, v), (s, u), (t, v) 는 tacnode 스케일링으로부터"""
    cfg = FiniteSystemConfig.from_tacnode(n, params)
    s, u = scaled_spacetime(n, pt1)
    t, v = scaled_spacetime(n, pt2)
    return d_param(n) ** 2 * finite_kernel_eval(cfg, s, u, t, v, settings=settings)


def finite_gap_probability(
    cfg: FiniteSystemConfig,
    time: float,
    lo: float,
    hi: float,
    order: int = 40,
    settings: Optional[FiniteSettings] = None,
) -> float:
    """유한 n 갭 확률 det(I - 𝕃_{n,m})_{L²((lo,hi))} (시간 하나)"""
    if not lo < hi:
        raise DomainError(f"lo < hi 이어야 합니다: ({lo}, {hi})", MODULE)
    rule = gauss_legendre(order, lo, hi)
    result = finite_kernel_matrix(cfg, time, rule.nodes, time, rule.nodes, settings)
    return fredholm_det(DiscretizedOperator.from_kernel_matrix(result.values, rule))


def one_point_density(
    cfg: FiniteSystemConfig,
    time: float,
    us,
    settings: Optional[FiniteSettings] = None,
) -> np.ndarray:
    """𝕃_{n,m}(t, u, t, u): 시간 t 의 입자 밀도 (적분하면 n+m)"""
    us = np.atleast_1d(np.asarray(us, dtype=float))
    result = finite_kernel_matrix(cfg, time, us, time, us, settings)
    return np.diag(result.values).copy()


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    m: int
    finite: float
    limit: float
    err: float


@dataclass(frozen=True)
class ConvergenceReport:
    """n 오름차순 행과 log-log 기울기 (행이 하나면 None)"""
    rows: Tuple[ConvergenceRow, ...]
    slope: Optional[float]


def fitted_slope(ns: Sequence[int], errs: Sequence[float]) -> Optional[float]:
    """log err 대 log n 최소제곱 기울기"""
    if len(ns) < 2 or min(errs) <= 0.0:
        return None
    slope, _ = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(errs)), 1)
    return float(slope)


def convergence_report(
    n_list: Sequence[int],
    params: TacnodeParams,
    pt1: ScaledPoint,
    pt2: ScaledPoint,
    settings: Optional[FiniteSettings] = None,
    kernel_settings: Optional[KernelSettings] = None,
    threads: int = 1,
) -> ConvergenceReport:
    """
    err(n) = |d²𝕃_{n,λn} - 𝕃_tac| 표

    n 마다 독립적으로 계산하므로 스레드 수와 무관하게 같은 결과를 냅니다.
    """
    ns = sorted(set(int(n) for n in n_list))
    if not ns:
        raise DomainError("n 목록이 비어 있습니다", MODULE)
    if len(ns) != len(n_list):
        raise DomainError(f"n 목록에 중복이 있습니다: {list(n_list)}", MODULE)
    configs = [FiniteSystemConfig.from_tacnode(n, params) for n in ns]

    limit = full_kernel(params, pt1, pt2, kernel_settings)
    logger.info(f"수렴 측정 시작: n={ns}, 극한값 {limit:.10g}")
    finite_values = ordered_map(lambda n: scaled_finite_kernel(n, params, pt1, pt2, settings), ns, threads)

    rows: List[ConvergenceRow] = []
    for cfg, value in zip(configs, finite_values):
        row = ConvergenceRow(n=cfg.n, m=cfg.m, finite=value, limit=limit, err=abs(value - limit))
        logger.info(f"n={row.n:4d} m={row.m:4d} err={row.err:.3e}")
        rows.append(row)
    slope = fitted_slope([row.n for row in rows], [row.err for row in rows])
    return ConvergenceReport(rows=tuple(rows), slope=slope)
