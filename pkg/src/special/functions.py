"""
특수함수

Airy 함수와 그 도함수, 확장 Airy 함수, 가우스 커널 p, 켤레 브라운 커널 q.
모두 numpy 배열을 받아 브로드캐스팅하며, 스칼라 입력에는 float 를 돌려줍니다.
"""
import math

import numpy as np
from scipy import special

from ..errors import DomainError, RangeError

MODULE = "special_functions"

# exp() 가 넘치기 직전의 지수
MAX_EXPONENT = 709.78


def _as_array(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} 에 NaN/무한대가 있습니다", MODULE)
    return arr


def _out(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def airy(x):
    """Ai(x)"""
    ai, _, _, _ = special.airy(_as_array("x", x))
    return _out(ai)


def airy_prime(x):
    """Ai'(x)"""
    _, aip, _, _ = special.airy(_as_array("x", x))
    return _out(aip)


def log_abs_airy(z):
    """
    (log|Ai(z)|, sign Ai(z))

    양의 인자에서는 지수 스케일된 airye 를 써서 언더플로 없이 로그를 구합니다.
    영점에서는 (-inf, 0).
    """
    z = _as_array("z", z)
    log_abs = np.empty_like(z)
    sign = np.empty_like(z)

    pos = z > 0
    if np.any(pos):
        zp = z[pos]
        scaled, _, _, _ = special.airye(zp)
        log_abs[pos] = np.log(scaled) - (2.0 / 3.0) * zp ** 1.5
        sign[pos] = 1.0
    neg = ~pos
    if np.any(neg):
        ai, _, _, _ = special.airy(z[neg])
        with np.errstate(divide="ignore"):
            log_abs[neg] = np.log(np.abs(ai))
        sign[neg] = np.sign(ai)
    return log_abs, sign


def airy_ext(s, x):
    """
    확장 Airy 함수 Ai^{(s)}(x) = e^{(2/3)s³ + xs} Ai(s² + x)

    항상 로그 공간에서 계산합니다: sign·exp((2/3)s³ + xs + log|Ai(s²+x)|).
    """
    s = _as_array("s", s)
    x = _as_array("x", x)
    s, x = np.broadcast_arrays(s, x)
    log_abs, sign = log_abs_airy(s * s + x)
    exponent = (2.0 / 3.0) * s ** 3 + x * s + log_abs
    finite = np.isfinite(exponent)
    if np.any(exponent[finite] > MAX_EXPONENT):
        raise RangeError(
            f"확장 Airy 지수가 범위를 넘었습니다 (최대 {np.max(exponent[finite]):.1f})", MODULE
        )
    with np.errstate(under="ignore"):
        value = np.where(finite, sign * np.exp(np.where(finite, exponent, 0.0)), 0.0)
    return _out(value)


def gauss_kernel(t, x, y):
    """p(t;x,y) = (4πt)^{-1/2} exp(-(y-x)²/(4t))"""
    t = _as_array("t", t)
    if np.any(t <= 0):
        raise DomainError("gauss_kernel 은 t > 0 이 필요합니다", MODULE)
    x = _as_array("x", x)
    y = _as_array("y", y)
    return _out(np.exp(-((y - x) ** 2) / (4.0 * t)) / np.sqrt(4.0 * math.pi * t))


def brownian_q(s: float, u, t: float, v):
    """
    켤레 브라운 커널

    q(s,u,t,v) = (2π(t-s))^{-1/2} exp(-(u-v)²/(2(t-s)) + u²/(2(1-s)) - v²/(2(1-t))) 𝟙(s<t)
    """
    for name, value in (("s", s), ("t", t)):
        if not (0.0 < value < 1.0):
            raise DomainError(f"{name}={value} 는 (0,1) 안에 있어야 합니다", MODULE)
    u = _as_array("u", u)
    v = _as_array("v", v)
    u, v = np.broadcast_arrays(u, v)
    if s >= t:
        return _out(np.zeros(u.shape))
    dt = t - s
    exponent = -((u - v) ** 2) / (2.0 * dt) + u * u / (2.0 * (1.0 - s)) - v * v / (2.0 * (1.0 - t))
    return _out(np.exp(exponent) / math.sqrt(2.0 * math.pi * dt))
