"""
Fredholm 행렬식 엔진 테스트
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import EnvelopeError, NumericError, SingularOperatorError
from src.kernel.airy_operators import airy_kernel_closed
from src.numerics.fredholm import (
    DiscretizedOperator,
    discretize,
    fredholm_det,
    resolvent_apply,
    tracy_widom_f2,
)
from src.numerics.quadrature import gauss_legendre
from src.special.functions import airy
from tests.oracles import neumann_series


@pytest.fixture
def unit_rule():
    return gauss_legendre(40, 0.0, 1.0)


def f(x):
    return np.cos(x)


def g(x):
    return x * x


def test_zero_kernel(unit_rule):
    op = discretize(lambda x, y: 0.0 * x * y, unit_rule)
    assert np.all(op.matrix == 0.0)
    assert fredholm_det(op) == 1.0
    rhs = f(unit_rule.nodes)
    assert_allclose(resolvent_apply(op, rhs), rhs, rtol=1e-15)


def test_rank_one_kernel(unit_rule):
    op = discretize(lambda x, y: f(x) * g(y), unit_rule)
    sw = unit_rule.sqrt_weights
    assert_allclose(op.matrix, np.outer(sw * f(unit_rule.nodes), sw * g(unit_rule.nodes)), rtol=1e-14)
    inner = np.sum(unit_rule.weights * f(unit_rule.nodes) * g(unit_rule.nodes))
    assert fredholm_det(op) == pytest.approx(1.0 - inner, rel=1e-12)


def test_rank_one_resolvent_geometric_series(unit_rule):
    x = unit_rule.nodes
    inner = np.sum(unit_rule.weights * f(x) * g(x))
    # ⟨f, g⟩ = 1/2 이 되도록 g 를 정규화
    scale = 0.5 / inner
    op = discretize(lambda a, b: f(a) * scale * g(b), unit_rule)
    assert_allclose(resolvent_apply(op, f), 2.0 * f(x), rtol=1e-12)


def test_airy_kernel_matrix_symmetric():
    op = discretize(airy_kernel_closed, gauss_legendre(100, 0.0, 40.0))
    assert_allclose(op.matrix, op.matrix.T, atol=1e-12, rtol=0)


def test_resolvent_matches_neumann_series():
    rule = gauss_legendre(100, 0.0, 40.0)
    op = discretize(airy_kernel_closed, rule)
    rhs = airy(rule.nodes)
    solved = resolvent_apply(op, rhs)
    sw = rule.sqrt_weights
    expected = neumann_series(op.matrix, sw * rhs, 40) / sw
    assert_allclose(solved, expected, atol=1e-6, rtol=0)


def test_resolvent_reproduces_rhs(unit_rule):
    op = discretize(lambda x, y: 0.3 * np.exp(-(x - y) ** 2), unit_rule)
    rhs = f(unit_rule.nodes)
    solution = resolvent_apply(op, rhs)
    sw = unit_rule.sqrt_weights
    assert_allclose((np.eye(len(op)) - op.matrix) @ (sw * solution), sw * rhs, atol=1e-9)


def test_resolvent_accepts_several_columns(unit_rule):
    op = discretize(lambda x, y: 0.2 * x * y, unit_rule)
    rhs = np.stack([f(unit_rule.nodes), g(unit_rule.nodes)], axis=1)
    together = resolvent_apply(op, rhs)
    assert_allclose(together[:, 1], resolvent_apply(op, rhs[:, 1]), rtol=1e-13)


def test_singular_operator_detected():
    rule = gauss_legendre(10, 0.0, 1.0)
    sw = rule.sqrt_weights
    # 노드 위 단위 벡터 방향으로 고윳값 1 을 가지는 rank-one 행렬
    vec = sw / np.linalg.norm(sw)
    op = DiscretizedOperator(matrix=np.outer(vec, vec), rules=(rule,))
    assert abs(fredholm_det(op)) < 1e-13
    with pytest.raises(SingularOperatorError):
        resolvent_apply(op, np.ones(10))


def test_non_finite_kernel_rejected(unit_rule):
    with pytest.raises(NumericError):
        discretize(lambda x, y: 1.0 / (x - y), unit_rule)


def test_block_operator_matches_single_block():
    rules = (gauss_legendre(20, 0.0, 1.0), gauss_legendre(20, 1.0, 2.0))
    kernel = lambda x, y: 0.4 * np.exp(-(x - y) ** 2)
    blocks = DiscretizedOperator.from_blocks(rules, lambda i, j: kernel(rules[i].nodes[:, None], rules[j].nodes[None, :]))
    merged = discretize(kernel, gauss_legendre(60, 0.0, 2.0))
    assert fredholm_det(blocks) == pytest.approx(fredholm_det(merged), abs=1e-12)


def test_tracy_widom_right_tail():
    assert tracy_widom_f2(8.0) == pytest.approx(1.0, abs=1e-10)


def test_tracy_widom_at_zero():
    assert tracy_widom_f2(0.0) == pytest.approx(0.9694, abs=5e-4)


@pytest.mark.parametrize("s", [0.0, -2.0])
def test_tracy_widom_stable_under_doubling(s):
    assert tracy_widom_f2(s) == pytest.approx(tracy_widom_f2(s, order=280, cutoff=80.0), abs=1e-6)


def test_tracy_widom_monotone():
    grid = np.linspace(-8.0, 8.0, 17)
    values = np.array([tracy_widom_f2(s) for s in grid])
    assert values[0] > 0.0
    # 1 - F2(7) 은 1e-14 정도라 마지막 칸만 반올림 한계에 걸림
    assert np.all(np.diff(values[:-1]) > 0)
    assert values[-1] >= values[-2]
    assert 0.0 < tracy_widom_f2(-2.0) < tracy_widom_f2(0.0)


def test_tracy_widom_envelope():
    with pytest.raises(EnvelopeError):
        tracy_widom_f2(9.0)


@pytest.mark.parametrize("st", [-2.0, 0.0, 2.0])
def test_airy_determinant_self_convergence(st):
    coarse = fredholm_det(discretize(airy_kernel_closed, gauss_legendre(100, st, st + 40.0)))
    fine = fredholm_det(discretize(airy_kernel_closed, gauss_legendre(200, st, st + 40.0)))
    assert abs(coarse - fine) <= 1e-9
