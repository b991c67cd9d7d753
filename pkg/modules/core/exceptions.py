"""
수치 계산 모듈 공통 예외
입력 오류(종료 코드 2)와 수치 실패(종료 코드 1)를 구분한다.
"""

from typing import Optional


class FieldModelError(ValueError):
    """물리 파라미터/격자 입력 오류의 기본 클래스"""


class ShapeError(FieldModelError):
    """배열 차원 또는 모드 수 불일치"""


class ResolutionError(FieldModelError):
    """격자 해상도로 표현할 수 없는 요청 (모드 수 초과, 불안정한 스텐실 등)"""


class EnumerationLimitError(FieldModelError):
    """정수쌍 후보 수가 안전 한도를 넘음"""


class ScenarioConfigError(FieldModelError):
    """시나리오 설정 파일 오류 - 문제가 된 키를 함께 보관"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ConvergenceError(RuntimeError):
    """외삽/적분이 요구 정밀도로 수렴하지 않음"""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
