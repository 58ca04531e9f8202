"""
스레드 병렬 실행

결과는 항상 입력 순서대로 돌려주므로 스레드 수와 무관하게 같은 출력이 나옵니다.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from ..errors import DomainError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    func 를 items 에 적용 (입력 순서 유지)

    Args:
        func: 적용할 함수
        items: 입력
        threads: 작업 스레드 수 (1 이면 순차 실행)
    """
    if threads < 1:
        raise DomainError(f"threads >= 1 이어야 합니다: {threads}", "cli")
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(threads, len(items))
    logger.debug(f"{len(items)}개 작업을 {workers}개 스레드로 실행")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
