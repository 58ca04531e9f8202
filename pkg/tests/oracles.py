"""
테스트용 독립 기준값 (라이브러리 구현을 쓰지 않음)
"""
import numpy as np

AI0 = 0.355028053887817239
AIP0 = -0.258819403792806798


def airy_series(x: float, terms: int = 60) -> float:
    """Maclaurin 급수 Ai(x) = Ai(0) f(x) + Ai'(0) g(x) (|x| <= 5 에서 사용)"""
    f_term, g_term = 1.0, x
    f_sum, g_sum = 0.0, 0.0
    cube = x ** 3
    for k in range(terms):
        f_sum += f_term
        g_sum += g_term
        f_term *= cube / ((3 * k + 2) * (3 * k + 3))
        g_term *= cube / ((3 * k + 3) * (3 * k + 4))
    return AI0 * f_sum + AIP0 * g_sum


def neumann_series(matrix: np.ndarray, rhs: np.ndarray, terms: int) -> np.ndarray:
    """Σ_{r<=terms} K^r f"""
    total = rhs.copy()
    current = rhs.copy()
    for _ in range(terms):
        current = matrix @ current
        total = total + current
    return total
