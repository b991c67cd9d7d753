"""
두 시각 경계값 문제 (IBC + FBC) 솔버

φ(x, t₀) 와 φ(x, t_f) 가 모두 주어진 공동 내 클라인-고든 장을 사인 모드별로 풀고,
각 모드를 Unique / Degenerate / Infeasible 로 분류한 뒤 내부 장을 재구성(역추정)한다.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.fft import dst

from modules.core.exceptions import FieldModelError, ResolutionError, ShapeError
from modules.core.field_model import CavityGrid, FieldGrid, FieldParams, Mode, make_mode
from modules.utils.config_manager import get_config

logger = logging.getLogger(__name__)


class BvpClassification(Enum):
    UNIQUE = "unique"
    DEGENERATE = "degenerate"
    INFEASIBLE = "infeasible"


class Spectrum(Enum):
    """모드 진동수 선택: 연속 분산관계 또는 이산 스텐실 고유진동수"""

    CONTINUUM = "continuum"
    STENCIL = "stencil"


@dataclass(frozen=True)
class BvpTolerances:
    resonance: float = 1e-9
    compatibility: float = 1e-9

    @classmethod
    def from_config(cls) -> "BvpTolerances":
        values = get_config().get_bvp_tolerances()
        return cls(resonance=values["resonance"], compatibility=values["compatibility"])


@dataclass(frozen=True, eq=False)
class BoundarySlice:
    """경계 시각의 사인 급수 계수 (coefficients[j] ↔ 모드 n_x = j+1)"""

    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.ndim != 1 or coefficients.size == 0:
            raise ShapeError(f"계수는 비어 있지 않은 1차원 배열이어야 합니다: shape={coefficients.shape}")
        if not np.all(np.isfinite(coefficients)):
            raise FieldModelError("계수에 유한하지 않은 값이 있습니다")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n_modes(self) -> int:
        return int(self.coefficients.size)

    def synthesize(self, grid: CavityGrid) -> np.ndarray:
        """내부 공간 샘플에서 사인 급수 값 (decompose_profile 의 역변환)"""
        basis = sine_basis(grid, self.n_modes)
        return (self.coefficients @ basis)[1:-1]


@dataclass(frozen=True)
class ModeBvpSolution:
    """
    모드별 해 a(t) = A·cos(ω(t−t₀)) + B·sin(ω(t−t₀))

    Degenerate 이면 B 는 자유 파라미터 (대표값 0), Infeasible 이면 mismatch 에
    |β − (−1)^{n_t} α| 를 기록한다.
    """

    mode: Mode
    classification: BvpClassification
    coeff_cos: float
    coeff_sin: float
    free_parameter: bool = False
    mismatch: float = 0.0
    resonance_index: Optional[int] = None

    def amplitude(self, t_rel) -> np.ndarray:
        """t₀ 기준 상대 시간에서의 진폭"""
        phase = self.mode.frequency * np.asarray(t_rel, dtype=float)
        return self.coeff_cos * np.cos(phase) + self.coeff_sin * np.sin(phase)


@dataclass(frozen=True, eq=False)
class FieldSolution:
    field: FieldGrid
    mode_solutions: Tuple[ModeBvpSolution, ...]
    feasible: bool
    kge_residual_max: float

    def retrodict(self, t: float) -> np.ndarray:
        """두 경계 사이 임의 시각 t 의 공간 분포 (벽 포함)"""
        grid = self.field.grid
        t_rel = t - grid.t_start
        if not -1e-12 * grid.delta_t <= t_rel <= grid.delta_t * (1 + 1e-12):
            raise FieldModelError(f"t 가 [t₀, t_f] 범위를 벗어났습니다: {t}")
        amplitudes = np.array([float(sol.amplitude(t_rel)) for sol in self.mode_solutions])
        return amplitudes @ sine_basis(grid, len(self.mode_solutions))

    def mode_table(self) -> pd.DataFrame:
        """모드별 분류 요약"""
        rows = [
            {
                "n_x": sol.mode.n_x,
                "frequency": sol.mode.frequency,
                "classification": sol.classification.value,
                "coeff_cos": sol.coeff_cos,
                "coeff_sin": sol.coeff_sin,
                "free_parameter": sol.free_parameter,
                "mismatch": sol.mismatch,
                "resonance_index": sol.resonance_index,
            }
            for sol in self.mode_solutions
        ]
        return pd.DataFrame(rows)


def sine_basis(grid: CavityGrid, n_modes: int) -> np.ndarray:
    """(n_modes, n_space+2) 사인 기저 - 벽 열은 정확히 0"""
    j = np.arange(grid.n_space + 2)
    n = np.arange(1, n_modes + 1)
    basis = np.sin(np.pi * np.outer(n, j) / (grid.n_space + 1))
    basis[:, 0] = 0.0
    basis[:, -1] = 0.0
    return basis


def decompose_profile(samples, grid: CavityGrid, n_modes: int) -> BoundarySlice:
    """내부 공간 샘플을 이산 사인 변환(DST-I)으로 모드 계수로 분해"""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size != grid.n_space:
        raise ShapeError(f"샘플 수는 n_space={grid.n_space} 이어야 합니다: {samples.shape}")
    if int(n_modes) != n_modes or n_modes < 1:
        raise FieldModelError(f"n_modes 는 1 이상의 정수여야 합니다: {n_modes}")
    if n_modes > grid.n_space:
        raise ResolutionError(f"n_modes={n_modes} 가 공간 샘플 수 {grid.n_space} 보다 큽니다")

    coefficients = dst(samples, type=1) / (grid.n_space + 1)
    return BoundarySlice(coefficients[: int(n_modes)])


def stencil_mode(params: FieldParams, grid: CavityGrid, n_x: int) -> Mode:
    """
    이산 KGE 스텐실의 정확한 고유진동수를 갖는 모드

    공간 2차 차분의 고유값 (2 sin(kh/2)/h)² 와 시간 도약 조건
    sin(θ/2) = Ωδ/2 로부터 ω = θ/δ.
    """
    mode = make_mode(params, grid, n_x)
    c = params.speed_of_light
    spatial = 2.0 * math.sin(mode.wavenumber * grid.h / 2.0) / grid.h
    omega_grid = math.hypot(c * spatial, params.compton_frequency)
    half = omega_grid * grid.delta / 2.0
    if half > 1.0:
        raise ResolutionError(
            f"시간 간격이 스텐실 안정 한계를 넘습니다 (Ωδ/2={half:.4f} > 1, n_x={n_x})"
        )
    theta = 2.0 * math.asin(half)
    return Mode(n_x=mode.n_x, wavenumber=mode.wavenumber, frequency=theta / grid.delta)


def solve_mode_bvp(
    mode: Mode,
    alpha: float,
    beta: float,
    delta_t: float,
    tolerances: Optional[BvpTolerances] = None,
) -> ModeBvpSolution:
    """
    모드 진폭 ä + ω²a = 0 의 두 시각 경계값 문제

    Args:
        mode: 공동 모드
        alpha: a(t₀)
        beta: a(t_f)
        delta_t: t_f − t₀
        tolerances: 공명/양립 허용오차
    """
    if mode.frequency < 0:
        raise FieldModelError(f"모드 진동수는 0 이상이어야 합니다: {mode.frequency}")
    if delta_t <= 0:
        raise FieldModelError(f"delta_t 는 양수여야 합니다: {delta_t}")
    tol = tolerances or BvpTolerances.from_config()

    phase = mode.frequency * delta_t
    s = math.sin(phase)
    c = math.cos(phase)

    if abs(s) > tol.resonance:
        return ModeBvpSolution(
            mode=mode,
            classification=BvpClassification.UNIQUE,
            coeff_cos=float(alpha),
            coeff_sin=(beta - alpha * c) / s,
        )

    n_t = int(round(phase / math.pi))
    sign = -1.0 if n_t % 2 else 1.0
    mismatch = abs(beta - sign * alpha)

    if mismatch <= tol.compatibility:
        logger.debug(f"모드 n_x={mode.n_x}: 공명(n_t={n_t}) - 양립 경계, B 자유")
        return ModeBvpSolution(
            mode=mode,
            classification=BvpClassification.DEGENERATE,
            coeff_cos=float(alpha),
            coeff_sin=0.0,
            free_parameter=True,
            mismatch=mismatch,
            resonance_index=n_t,
        )

    logger.debug(f"모드 n_x={mode.n_x}: 공명(n_t={n_t}) - 불일치 {mismatch:.3e}")
    return ModeBvpSolution(
        mode=mode,
        classification=BvpClassification.INFEASIBLE,
        coeff_cos=float(alpha),
        coeff_sin=0.0,
        mismatch=mismatch,
        resonance_index=n_t,
    )


def kge_residual(field_grid: FieldGrid, params: FieldParams) -> float:
    """내부 샘플에서 |δ_t²φ − c²δ_x²φ + (mc²/ħ)²φ| 의 최대값"""
    phi = field_grid.values
    if phi.ndim != 2 or phi.shape[0] < 3 or phi.shape[1] < 3:
        raise ShapeError(f"각 방향으로 내부 샘플이 1개 이상 필요합니다: {phi.shape}")
    grid = field_grid.grid
    interior = phi[1:-1, 1:-1]
    d2t = (phi[2:, 1:-1] - 2.0 * interior + phi[:-2, 1:-1]) / grid.delta ** 2
    d2x = (phi[1:-1, 2:] - 2.0 * interior + phi[1:-1, :-2]) / grid.h ** 2
    residual = d2t - params.speed_of_light ** 2 * d2x + params.compton_frequency ** 2 * interior
    return float(np.max(np.abs(residual)))


def solve_field_bvp(
    params: FieldParams,
    grid: CavityGrid,
    initial: BoundarySlice,
    final: BoundarySlice,
    tolerances: Optional[BvpTolerances] = None,
    spectrum: Spectrum = Spectrum.CONTINUUM,
) -> FieldSolution:
    """모드별 BVP 를 풀어 φ(x, t) = Σ a_n(t) sin(nπx/L) 를 격자 위에 합성"""
    if initial.n_modes != final.n_modes:
        raise ShapeError(f"IBC/FBC 모드 수 불일치: {initial.n_modes} != {final.n_modes}")
    if initial.n_modes > grid.n_space:
        raise ResolutionError(f"모드 수 {initial.n_modes} 가 공간 샘플 수 {grid.n_space} 보다 큽니다")
    tol = tolerances or BvpTolerances.from_config()
    mode_factory = stencil_mode if spectrum is Spectrum.STENCIL else make_mode

    solutions: List[ModeBvpSolution] = []
    for index in range(initial.n_modes):
        mode = mode_factory(params, grid, index + 1)
        solutions.append(
            solve_mode_bvp(mode, initial.coefficients[index], final.coefficients[index], grid.delta_t, tol)
        )

    t_rel = grid.relative_times()
    amplitudes = np.column_stack([sol.amplitude(t_rel) for sol in solutions])
    values = amplitudes @ sine_basis(grid, initial.n_modes)
    field_grid = FieldGrid(values, grid)

    infeasible = [sol for sol in solutions if sol.classification is BvpClassification.INFEASIBLE]
    degenerate = [sol for sol in solutions if sol.classification is BvpClassification.DEGENERATE]
    residual = kge_residual(field_grid, params)

    if infeasible:
        logger.warning(
            f"⚠️ 해 없음 모드 {len(infeasible)}개: "
            + ", ".join(f"n_x={sol.mode.n_x}(mismatch={sol.mismatch:.3e})" for sol in infeasible)
        )
    if degenerate:
        logger.info(f"공명 양립 모드 {len(degenerate)}개 - 자유 진폭 B=0 대표값 사용")
    logger.info(f"장 BVP 완료: 모드 {len(solutions)}개, KGE 잔차 {residual:.3e}")

    return FieldSolution(
        field=field_grid,
        mode_solutions=tuple(solutions),
        feasible=not infeasible,
        kge_residual_max=residual,
    )


def solve_field_bvp_direct(
    params: FieldParams,
    grid: CavityGrid,
    initial: BoundarySlice,
    final: BoundarySlice,
) -> FieldGrid:
    """
    이산 KGE 스텐실을 밀집 선형계로 직접 풀이 (작은 격자 기준해)

    미지수는 내부 샘플 φ[i, j] (i=1..n_time, j=1..n_space) 이고, 경계 행은
    IBC/FBC 사인 급수 합성값, 벽은 0.
    """
    n_t, n_x = grid.n_time, grid.n_space
    if n_t * n_x > 4096:
        logger.warning(f"밀집 행렬 크기가 큽니다: {n_t * n_x} 미지수")

    first_row = np.zeros(n_x + 2)
    last_row = np.zeros(n_x + 2)
    first_row[1:-1] = initial.synthesize(grid)
    last_row[1:-1] = final.synthesize(grid)

    inv_dt2 = 1.0 / grid.delta ** 2
    inv_h2 = params.speed_of_light ** 2 / grid.h ** 2
    diagonal = -2.0 * inv_dt2 + 2.0 * inv_h2 + params.compton_frequency ** 2

    size = n_t * n_x
    matrix = np.zeros((size, size))
    rhs = np.zeros(size)

    def index(i, j):
        return (i - 1) * n_x + (j - 1)

    for i in range(1, n_t + 1):
        for j in range(1, n_x + 1):
            row = index(i, j)
            matrix[row, row] = diagonal
            if j > 1:
                matrix[row, index(i, j - 1)] = -inv_h2
            if j < n_x:
                matrix[row, index(i, j + 1)] = -inv_h2
            if i > 1:
                matrix[row, index(i - 1, j)] = inv_dt2
            else:
                rhs[row] -= inv_dt2 * first_row[j]
            if i < n_t:
                matrix[row, index(i + 1, j)] = inv_dt2
            else:
                rhs[row] -= inv_dt2 * last_row[j]

    interior = np.linalg.solve(matrix, rhs).reshape(n_t, n_x)
    values = np.zeros(grid.shape)
    values[0] = first_row
    values[-1] = last_row
    values[1:-1, 1:-1] = interior
    return FieldGrid(values, grid)
