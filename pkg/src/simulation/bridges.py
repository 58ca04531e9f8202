"""
비충돌 브라운 다리 시뮬레이터

두 가족 (a1 → a1 의 n개, a2 → a2 의 m개) 의 비충돌 브라운 다리를 정확하게 샘플링합니다.

제안 분포:
    가족마다 에르미트 행렬 브라운 다리의 고윳값 과정. 같은 점에서 출발/도착하는
    가족 내부 비충돌 다리의 법칙과 정확히 같습니다.
수락 확률:
    격자 구간마다 Karlin-McGregor 비 det(전체) / (det(가족1)·det(가족2)) 의 곱.
    첫/마지막 구간은 한 점에서 모이는 극한 (단항식 × 가우스) 을 씁니다.
    두 경로만 있으면 구간 비는 1 - exp(-g_left·g_right/Δt) 입니다.

제안은 1024개 블록 단위로 만들고, 블록마다 Philox 부분 스트림을 씁니다.
블록은 순서대로 모으므로 스레드 수와 무관하게 같은 앙상블이 나옵니다.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import AcceptanceError, DomainError, EnvelopeError, WindowError
from ..scaling.params import FiniteSystemConfig
from ..utils.parallel import ordered_map

logger = logging.getLogger(__name__)

MODULE = "bridge_simulator"

BLOCK_SIZE = 1024
MAX_PATHS = 8
MAX_EXPONENT = 700.0
SEED_LIMIT = 2 ** 64
DEFAULT_MAX_PROPOSALS = 10_000_000


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    수락된 샘플

    paths[s, p, k] 는 샘플 s 의 경로 p (0..n+m-1) 의 time_grid[k] 위 값.
    """
    time_grid: np.ndarray
    paths: np.ndarray
    group_sizes: Tuple[int, int]
    samples_proposed: int

    @property
    def count(self) -> int:
        return self.paths.shape[0]

    def time_index(self, time: float) -> int:
        """격자 시간의 인덱스 (격자 위가 아니면 DomainError)"""
        hits = np.flatnonzero(np.isclose(self.time_grid, time, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise DomainError(f"시간 {time} 이 격자 위에 있지 않습니다", MODULE)
        return int(hits[0])


@dataclass(frozen=True)
class GapEstimate:
    """갭 확률 추정 (stderr = √(p(1-p)/accepted))"""
    p_hat: float
    stderr: float
    samples_accepted: int
    samples_proposed: int


@dataclass(frozen=True)
class AcceptanceEstimate:
    """수락률 추정 (stderr = √(r(1-r)/proposed))"""
    rate: float
    stderr: float
    accepted: int
    proposed: int


def _check(cfg: FiniteSystemConfig, grid_steps: int, seed: int):
    if cfg.n + cfg.m > MAX_PATHS:
        raise EnvelopeError(f"n + m <= {MAX_PATHS} 만 지원합니다: n={cfg.n}, m={cfg.m}", MODULE)
    if grid_steps < 2:
        raise DomainError(f"grid_steps >= 2 이어야 합니다: {grid_steps}", MODULE)
    if isinstance(seed, bool) or int(seed) != seed or not (0 <= seed < SEED_LIMIT):
        raise DomainError(f"seed 는 [0, 2^64) 의 정수여야 합니다: {seed}", MODULE)


def time_grid(grid_steps: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, grid_steps + 1)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(int(seed), spawn_key=(block,))
    return np.random.Generator(np.random.Philox(sequence))


def _hermitian_bridge_eigenvalues(rng: np.random.Generator, size: int, k: int, grid_steps: int) -> np.ndarray:
    """
    k×k 에르미트 브라운 다리의 내부 격자 시간 고윳값

    Returns:
        (size, grid_steps-1, k) 오름차순 고윳값
    """
    dt = 1.0 / grid_steps
    real = rng.standard_normal((size, grid_steps, k, k)) * math.sqrt(dt)
    imag = rng.standard_normal((size, grid_steps, k, k)) * math.sqrt(dt)
    if k == 1:
        walk = np.cumsum(real[..., 0, 0], axis=1)
        times = np.arange(1, grid_steps) * dt
        bridge = walk[:, :-1] - times[None, :] * walk[:, -1:]
        return bridge[..., None]

    walk_re = np.cumsum(real, axis=1)
    walk_im = np.cumsum(imag, axis=1)
    times = (np.arange(1, grid_steps) * dt)[None, :, None, None]
    bridge_re = walk_re[:, :-1] - times * walk_re[:, -1:]
    bridge_im = walk_im[:, :-1] - times * walk_im[:, -1:]
    upper = (np.triu(bridge_re, 1) + 1j * np.triu(bridge_im, 1)) / math.sqrt(2.0)
    diagonal = np.einsum("...ii->...i", bridge_re)
    matrix = upper + np.conj(np.swapaxes(upper, -1, -2))
    matrix = matrix + np.einsum("...i,ij->...ij", diagonal, np.eye(k))
    return np.linalg.eigvalsh(matrix)


def _safe_exp(exponent: np.ndarray) -> np.ndarray:
    return np.exp(np.minimum(exponent, MAX_EXPONENT))


def _ratio(matrix: np.ndarray, n: int) -> np.ndarray:
    """det(전체) / (det(앞 n×n) det(뒤 블록)), (B, N, N) 배치"""
    total = np.linalg.det(matrix)
    first = np.linalg.det(matrix[:, :n, :n])
    second = np.linalg.det(matrix[:, n:, n:])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = total / (first * second)
    return np.where(np.isfinite(ratio), ratio, 0.0)


def _interior_ratio(left: np.ndarray, right: np.ndarray, n: int, dt: float) -> np.ndarray:
    """내부 구간: E_ij = exp(((x_i-y_i)² - (x_i-y_j)²)/(2Δ))"""
    diag = (left - right) ** 2
    cross = (left[:, :, None] - right[:, None, :]) ** 2
    return _ratio(_safe_exp((diag[:, :, None] - cross) / (2.0 * dt)), n)


def _endpoint_ratio(values: np.ndarray, cfg: FiniteSystemConfig, dt: float) -> np.ndarray:
    """
    한 점으로 모이는 첫/마지막 구간

    M[(g,k), j] = ((y_j - a_g)/√Δ)^k exp(((y_j - a_{g(j)})² - (y_j - a_g)²)/(2Δ))
    """
    centers = np.array([cfg.a1] * cfg.n + [cfg.a2] * cfg.m)
    powers = np.concatenate([np.arange(cfg.n), np.arange(cfg.m)])
    own = (values - centers[None, :]) ** 2
    offset = (values[:, None, :] - centers[None, :, None]) / math.sqrt(dt)
    exponent = (own[:, None, :] - offset ** 2 * dt) / (2.0 * dt)
    matrix = offset ** powers[None, :, None] * _safe_exp(exponent)
    return _ratio(matrix, cfg.n)


def _propose_block(cfg: FiniteSystemConfig, grid_steps: int, seed: int, block: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    제안 한 블록

    Returns:
        (수락 여부 (BLOCK_SIZE,), 내부 격자 값 (BLOCK_SIZE, n+m, grid_steps-1))
    """
    rng = _block_generator(seed, block)
    dt = 1.0 / grid_steps
    first = _hermitian_bridge_eigenvalues(rng, BLOCK_SIZE, cfg.n, grid_steps) + cfg.a1
    second = _hermitian_bridge_eigenvalues(rng, BLOCK_SIZE, cfg.m, grid_steps) + cfg.a2
    uniforms = rng.random(BLOCK_SIZE)

    values = np.concatenate([first, second], axis=2)
    ordered = np.all(first[:, :, -1] < second[:, :, 0], axis=1)

    weight = _endpoint_ratio(values[:, 0, :], cfg, dt) * _endpoint_ratio(values[:, -1, :], cfg, dt)
    for k in range(grid_steps - 2):
        weight = weight * _interior_ratio(values[:, k, :], values[:, k + 1, :], cfg.n, dt)
    weight = np.clip(np.where(ordered, weight, 0.0), 0.0, 1.0)
    accepted = ordered & (uniforms < weight)
    return accepted, np.swapaxes(values, 1, 2)


def _full_paths(cfg: FiniteSystemConfig, interior: np.ndarray) -> np.ndarray:
    """양 끝점 (a_g) 을 붙인 (샘플, 경로, 시간) 배열"""
    ends = np.array([cfg.a1] * cfg.n + [cfg.a2] * cfg.m)
    edge = np.broadcast_to(ends[None, :, None], (interior.shape[0], ends.size, 1))
    return np.concatenate([edge, interior, edge], axis=2)


def sample_bridges(
    cfg: FiniteSystemConfig,
    grid_steps: int,
    count: int,
    seed: int,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    threads: int = 1,
) -> PathEnsemble:
    """
    비충돌 조건부 브라운 다리 count 개

    Raises:
        AcceptanceError: max_proposals 안에서 count 개를 얻지 못함
    """
    _check(cfg, grid_steps, seed)
    if count < 1:
        raise DomainError(f"count >= 1 이어야 합니다: {count}", MODULE)
    if max_proposals < 1:
        raise DomainError(f"max_proposals >= 1 이어야 합니다: {max_proposals}", MODULE)

    collected: List[np.ndarray] = []
    accepted_total = 0
    proposed = 0
    block = 0
    n_blocks = math.ceil(max_proposals / BLOCK_SIZE)
    while block < n_blocks and accepted_total < count:
        batch = list(range(block, min(block + threads, n_blocks)))
        results = ordered_map(lambda b: _propose_block(cfg, grid_steps, seed, b), batch, threads)
        for b, (accepted, values) in zip(batch, results):
            usable = min(BLOCK_SIZE, max_proposals - b * BLOCK_SIZE)
            hits = np.flatnonzero(accepted[:usable])
            needed = count - accepted_total
            if hits.size >= needed:
                hits = hits[:needed]
                proposed = b * BLOCK_SIZE + int(hits[-1]) + 1
            else:
                proposed = b * BLOCK_SIZE + usable
            collected.append(values[hits])
            accepted_total += hits.size
            if accepted_total >= count:
                break
        block = batch[-1] + 1

    if accepted_total < count:
        rate = accepted_total / max(proposed, 1)
        raise AcceptanceError(
            f"{proposed}회 제안에서 {accepted_total}/{count}개만 수락되었습니다 (수락률 {rate:.3e})", MODULE
        )
    logger.info(f"샘플링 완료: {count}개 수락 / {proposed}회 제안 (수락률 {count / proposed:.4f})")
    paths = _full_paths(cfg, np.concatenate(collected, axis=0))
    return PathEnsemble(
        time_grid=time_grid(grid_steps),
        paths=paths,
        group_sizes=(cfg.n, cfg.m),
        samples_proposed=proposed,
    )


def empirical_gap(ensemble: PathEnsemble, time: float, lo: float, hi: float) -> GapEstimate:
    """시간 time 에 (lo, hi) 안에 경로가 하나도 없는 샘플의 비율"""
    if not lo < hi:
        raise WindowError(f"lo < hi 이어야 합니다: ({lo}, {hi})", MODULE)
    index = ensemble.time_index(time)
    values = ensemble.paths[:, :, index]
    empty = ~np.any((values > lo) & (values < hi), axis=1)
    accepted = ensemble.count
    p_hat = float(np.mean(empty))
    return GapEstimate(
        p_hat=p_hat,
        stderr=math.sqrt(p_hat * (1.0 - p_hat) / accepted),
        samples_accepted=accepted,
        samples_proposed=ensemble.samples_proposed,
    )


def acceptance_probability(
    cfg: FiniteSystemConfig,
    grid_steps: int,
    proposals: int,
    seed: int,
    threads: int = 1,
) -> AcceptanceEstimate:
    """제안 proposals 회의 수락률 (무충돌 확률의 추정)"""
    _check(cfg, grid_steps, seed)
    if proposals < 1:
        raise DomainError(f"proposals >= 1 이어야 합니다: {proposals}", MODULE)
    blocks = range(math.ceil(proposals / BLOCK_SIZE))
    results = ordered_map(lambda b: _propose_block(cfg, grid_steps, seed, b)[0], blocks, threads)
    accepted = sum(
        int(np.count_nonzero(hits[: min(BLOCK_SIZE, proposals - b * BLOCK_SIZE)]))
        for b, hits in zip(blocks, results)
    )
    rate = accepted / proposals
    logger.info(f"수락률 {rate:.5f} ({accepted}/{proposals})")
    return AcceptanceEstimate(
        rate=rate,
        stderr=math.sqrt(rate * (1.0 - rate) / proposals),
        accepted=accepted,
        proposed=proposals,
    )


def analytic_pair_acceptance(gap: float) -> float:
    """두 경로 (0 → 0, c → c) 의 무충돌 확률 1 - e^{-c²}"""
    return -math.expm1(-gap * gap)
