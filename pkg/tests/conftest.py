"""
공용 pytest 픽스처
"""
import sys
from pathlib import Path

import pytest

# src 모듈 import를 위한 경로 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.scaling.params import FiniteSystemConfig, ScaledPoint, TacnodeParams


@pytest.fixture
def symmetric_params():
    return TacnodeParams(lam=1.0, sigma=0.0)


@pytest.fixture
def origin():
    return ScaledPoint(tau=0.0, xi=0.0)


@pytest.fixture
def small_cfg():
    """n = m = 2, a1 = -2, a2 = 2"""
    return FiniteSystemConfig(n=2, m=2, a1=-2.0, a2=2.0, d=1.0)


@pytest.fixture
def medium_cfg():
    """n = m = 4, a1 = -2, a2 = 2"""
    return FiniteSystemConfig(n=4, m=4, a1=-2.0, a2=2.0, d=1.0)
