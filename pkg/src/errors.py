"""
툴킷 공통 예외

모든 예외는 TacnodeError를 상속하고, 대응하는 내장 예외도 함께 상속하므로
호출하는 쪽에서는 어느 쪽으로든 잡을 수 있습니다.
module 속성에는 실패한 모듈 계약 이름이 들어갑니다 (CLI 진단 메시지용).
"""
from typing import Optional


class TacnodeError(Exception):
    """툴킷 예외의 공통 부모"""

    default_module = "toolkit"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        self.module = module or self.default_module

    def diagnostic(self) -> str:
        """CLI stderr 출력용 한 줄 진단"""
        return f"[{self.module}] {self}"


class DomainError(TacnodeError, ValueError):
    """사전조건(정의역) 위반"""


class EnvelopeError(DomainError):
    """지원 범위(envelope) 밖의 파라미터"""


class WindowError(DomainError):
    """잘못된 갭 구간 (lo >= hi 등)"""


class RangeError(TacnodeError, OverflowError):
    """지수 범위 초과"""


class NumericError(TacnodeError, ArithmeticError):
    """유한하지 않은 중간값 등 수치 실패"""


class SingularOperatorError(NumericError):
    """I - K 가 (수치적으로) 특이함"""


class ContourCollisionError(NumericError):
    """적분 경로끼리 너무 가까움"""


class AcceptanceError(TacnodeError, RuntimeError):
    """기각 샘플러가 제안 한도 안에서 충분한 샘플을 얻지 못함"""


class ConfigError(TacnodeError, ValueError):
    """설정 파일/환경 변수 오류"""

    default_module = "cli"
