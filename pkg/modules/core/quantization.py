"""
측정 유도 양자화 계산기

- 시간 진동수 양자화 ω = n_t π / Δt
- 콤프턴 주기 한계 Δt ≤ n_t π ħ / (mc²)
- 정수쌍 (n_x, n_t) 결합 제약 탐색 및 Δt 스캔 통계
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from modules.core.exceptions import EnumerationLimitError, FieldModelError
from modules.core.field_model import FieldParams
from modules.utils.config_manager import get_config

logger = logging.getLogger(__name__)


class ConstraintForm(Enum):
    """
    결합 제약식의 두 가지 형태

    DISPERSION_CONSISTENT: n_t²L² − n_x²c²Δt² − (mc²/πħ)²L²Δt² = 0 (분산관계 대입 결과)
    PAPER_LITERAL: n_x² 항의 부호를 뒤집은 형태
    """

    DISPERSION_CONSISTENT = "dispersion"
    PAPER_LITERAL = "paper"

    @classmethod
    def parse(cls, value) -> "ConstraintForm":
        if isinstance(value, cls):
            return value
        for form in cls:
            if form.value == str(value).strip().lower():
                return form
        raise FieldModelError(f"알 수 없는 제약식 형태: {value} (dispersion|paper)")


@dataclass(frozen=True)
class AdmissiblePair:
    n_x: int
    n_t: int
    residual: float

    def frequency(self, delta_t: float) -> float:
        """함의된 시간 진동수 n_t π / Δt"""
        return self.n_t * math.pi / delta_t

    def wavenumber(self, length: float) -> float:
        """함의된 파수 n_x π / L"""
        return self.n_x * math.pi / length


@dataclass(frozen=True, eq=False)
class DtScanReport:
    delta_t_values: np.ndarray
    solution_counts: np.ndarray
    admissible_fraction: float
    tolerance: float
    form: ConstraintForm

    @property
    def unique_fraction(self) -> float:
        """해가 있는 Δt 중 정수쌍이 정확히 하나인 비율 (해가 없으면 0)"""
        admissible = self.solution_counts > 0
        if not np.any(admissible):
            return 0.0
        return float(np.count_nonzero(self.solution_counts == 1) / np.count_nonzero(admissible))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"delta_t": self.delta_t_values, "solution_count": self.solution_counts.astype(int)}
        )


def quantized_frequencies(delta_t: float, n_max: int) -> np.ndarray:
    """ω_n = nπ/Δt (n = 1..n_max)"""
    if not delta_t > 0:
        raise FieldModelError(f"delta_t 는 양수여야 합니다: {delta_t}")
    if int(n_max) != n_max or n_max < 1:
        raise FieldModelError(f"n_max 는 1 이상의 정수여야 합니다: {n_max}")
    return np.arange(1, int(n_max) + 1) * math.pi / delta_t


def compton_bound(params: FieldParams, n_t: int) -> Optional[float]:
    """
    진동수 모드 n_t 가 ω ≥ mc²/ħ 를 만족할 수 있는 최대 Δt

    질량이 0 이면 한계가 없으므로 None 을 반환한다.
    """
    if int(n_t) != n_t or n_t < 1:
        raise FieldModelError(f"n_t 는 1 이상의 정수여야 합니다: {n_t}")
    if params.mass == 0:
        return None
    return int(n_t) * math.pi / params.compton_frequency


def _constraint_scales(params: FieldParams, length: float, delta_t: float) -> Tuple[float, float, float]:
    """(r², C, 정규화 계수) - r = cΔt/L, C = (mc²Δt/πħ)²"""
    r2 = (params.speed_of_light * delta_t / length) ** 2
    compton_term = (params.compton_frequency * delta_t / math.pi) ** 2
    return r2, compton_term, max(1.0, compton_term)


def constraint_residual(
    params: FieldParams,
    length: float,
    delta_t: float,
    n_x,
    n_t,
    form: ConstraintForm = ConstraintForm.DISPERSION_CONSISTENT,
) -> np.ndarray:
    """정규화된 제약 잔차 |R| / (L²·max(1, C)) - 직접 대입 검증용"""
    r2, compton_term, norm = _constraint_scales(params, length, delta_t)
    n_x = np.asarray(n_x, dtype=float)
    n_t = np.asarray(n_t, dtype=float)
    sign = -1.0 if form is ConstraintForm.DISPERSION_CONSISTENT else 1.0
    return np.abs(n_t ** 2 + sign * r2 * n_x ** 2 - compton_term) / norm


def _validate_search(length: float, delta_t: float, tolerance: float):
    if not (math.isfinite(length) and length > 0):
        raise FieldModelError(f"length 는 양수여야 합니다: {length}")
    if not (math.isfinite(delta_t) and delta_t > 0):
        raise FieldModelError(f"delta_t 는 양수여야 합니다: {delta_t}")
    if not (math.isfinite(tolerance) and tolerance > 0):
        raise FieldModelError(f"tolerance 는 양수여야 합니다: {tolerance}")


def _enumerate_pairs(
    params: FieldParams,
    length: float,
    delta_t: float,
    tolerance: float,
    form: ConstraintForm,
    max_mode: int,
    candidate_limit: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """허용 정수쌍을 (n_x, n_t, residual) 배열로 반환 - n_x, n_t 오름차순"""
    r2, compton_term, norm = _constraint_scales(params, length, delta_t)
    slack = tolerance * norm

    if form is ConstraintForm.PAPER_LITERAL:
        # n_t² = C − r² n_x² ≥ 1 이어야 하므로 n_x 는 제약식 자체로 유한하다
        nx_bound = int(math.floor(math.sqrt((compton_term + slack) / r2)))
        nx_max = min(max_mode, nx_bound)
        sign = 1.0
    else:
        nx_max = max_mode
        sign = -1.0

    empty = (np.empty(0, dtype=int), np.empty(0, dtype=int), np.empty(0))
    if nx_max < 1:
        return empty

    n_x = np.arange(1, nx_max + 1)
    target = compton_term + sign * r2 * n_x.astype(float) ** 2
    upper = target + slack
    valid = upper >= 1.0
    if not np.any(valid):
        return empty
    n_x = n_x[valid]
    target = target[valid]

    low = np.maximum(1, np.floor(np.sqrt(np.maximum(0.0, target - slack))).astype(int))
    high = np.ceil(np.sqrt(target + slack)).astype(int)
    width = np.maximum(0, high - low + 1)

    total = int(width.sum())
    if total > candidate_limit:
        raise EnumerationLimitError(
            f"후보 정수쌍 {total}개가 안전 한계 {candidate_limit}개를 초과합니다"
        )
    if total == 0:
        return empty

    offsets = np.arange(int(width.max()))
    candidates = low[:, None] + offsets[None, :]
    inside = offsets[None, :] < width[:, None]
    residual = constraint_residual(params, length, delta_t, n_x[:, None], candidates, form)
    accepted = inside & (residual <= tolerance)

    rows, cols = np.nonzero(accepted)
    return n_x[rows], candidates[rows, cols], residual[rows, cols]


def find_admissible_pairs(
    params: FieldParams,
    length: float,
    delta_t: float,
    tolerance: Optional[float] = None,
    form: Optional[ConstraintForm] = None,
    max_mode: Optional[int] = None,
) -> List[AdmissiblePair]:
    """
    결합 제약을 만족하는 정수쌍 (n_x, n_t) 전수 탐색

    Args:
        params: 장 파라미터
        length: 상자 길이 L
        delta_t: IBC-FBC 시간 간격
        tolerance: 정규화 잔차 허용오차 (기본: 설정값)
        form: 제약식 형태 (기본: 설정값)
        max_mode: n_x 상한 (기본: 설정값)

    Returns:
        List[AdmissiblePair]: 빈 목록도 정상 결과
    """
    config = get_config()
    tolerance = config.get_pair_tolerance() if tolerance is None else tolerance
    max_mode = config.get_max_mode() if max_mode is None else int(max_mode)
    form = ConstraintForm.parse(config.get_constraint_form() if form is None else form)
    _validate_search(length, delta_t, tolerance)

    n_x, n_t, residual = _enumerate_pairs(
        params, length, delta_t, tolerance, form, max_mode, config.get_candidate_limit()
    )
    pairs = [AdmissiblePair(int(a), int(b), float(r)) for a, b, r in zip(n_x, n_t, residual)]
    logger.debug(f"Δt={delta_t:.12g}: 허용 정수쌍 {len(pairs)}개 ({form.value})")
    return pairs


def scan_delta_t(
    params: FieldParams,
    length: float,
    dt_min: float,
    dt_max: float,
    steps: int,
    tolerance: Optional[float] = None,
    form: Optional[ConstraintForm] = None,
    max_mode: Optional[int] = None,
) -> DtScanReport:
    """균일 간격 Δt 표본마다 허용 정수쌍 수를 세고 허용 비율을 계산"""
    if not (0 < dt_min < dt_max):
        raise FieldModelError(f"0 < dt_min < dt_max 이어야 합니다: [{dt_min}, {dt_max}]")
    if int(steps) != steps or steps < 2:
        raise FieldModelError(f"steps 는 2 이상의 정수여야 합니다: {steps}")

    config = get_config()
    tolerance = config.get_pair_tolerance() if tolerance is None else tolerance
    max_mode = config.get_max_mode() if max_mode is None else int(max_mode)
    candidate_limit = config.get_candidate_limit()
    form = ConstraintForm.parse(config.get_constraint_form() if form is None else form)
    _validate_search(length, dt_min, tolerance)

    delta_t_values = np.linspace(dt_min, dt_max, int(steps))
    counts = np.array(
        [
            _enumerate_pairs(params, length, dt, tolerance, form, max_mode, candidate_limit)[0].size
            for dt in delta_t_values
        ],
        dtype=int,
    )
    fraction = float(np.count_nonzero(counts) / counts.size)
    logger.info(
        f"Δt 스캔 [{dt_min}, {dt_max}] x {steps}: 허용 비율 {fraction:.6f} (tolerance={tolerance:g})"
    )
    return DtScanReport(
        delta_t_values=delta_t_values,
        solution_counts=counts,
        admissible_fraction=fraction,
        tolerance=float(tolerance),
        form=form,
    )


def tolerance_sweep(
    params: FieldParams,
    length: float,
    dt_min: float,
    dt_max: float,
    steps: int,
    tolerances: Sequence[float],
    form: Optional[ConstraintForm] = None,
    max_mode: Optional[int] = None,
) -> Tuple[List[DtScanReport], float]:
    """
    여러 허용오차로 스캔하고 log(허용 비율) vs log(tolerance) 기울기를 적합

    허용 비율이 0 인 항목이 있으면 기울기는 nan.
    """
    reports = [
        scan_delta_t(params, length, dt_min, dt_max, steps, tol, form, max_mode)
        for tol in sorted(tolerances)
    ]
    fractions = np.array([report.admissible_fraction for report in reports])
    if len(reports) < 2 or np.any(fractions <= 0):
        logger.warning("⚠️ 기울기 적합 불가: 허용 비율 0 또는 허용오차 1개")
        return reports, math.nan

    log_tol = np.log([report.tolerance for report in reports])
    slope = float(np.polyfit(log_tol, np.log(fractions), 1)[0])
    logger.info(f"허용오차 스윕 기울기: {slope:.3f}")
    return reports, slope
