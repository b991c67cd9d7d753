"""
클라인-고든 장 기본 모델
물리 파라미터, 공동(cavity) 격자, 분산관계, 모드 관리, 운동량 밀도 관측량

내부 계산은 자연단위(c = ħ = 1)를 기준으로 한다. SI 입력은 FieldParams.from_si 로
한 번만 변환한다 (질량 → 역길이 m·c/ħ, 시간 → 길이 c·t).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import constants

from modules.core.exceptions import FieldModelError, ShapeError

logger = logging.getLogger(__name__)

# CODATA 값 (scipy.constants): c = 299792458 m/s, ħ = 1.05457182e-34 J·s
SPEED_OF_LIGHT_SI = constants.c
HBAR_SI = constants.hbar

ArrayLike = Union[float, np.ndarray]


def natural_time_from_si(seconds: float) -> float:
    """SI 시간(초)을 자연단위 시간(빛이 진행한 거리, m)으로 변환"""
    return seconds * SPEED_OF_LIGHT_SI


def si_seconds(natural_time: float) -> float:
    """자연단위 시간(m)을 초로 변환"""
    return natural_time / SPEED_OF_LIGHT_SI


@dataclass(frozen=True)
class FieldParams:
    """질량과 단위 규약 (분산관계를 결정)"""

    mass: float = 0.0
    speed_of_light: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "speed_of_light", "hbar"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise FieldModelError(f"{name} 값이 유한하지 않습니다: {value}")
        if self.mass < 0:
            raise FieldModelError(f"mass 는 0 이상이어야 합니다: {self.mass}")
        if self.speed_of_light <= 0:
            raise FieldModelError(f"speed_of_light 는 양수여야 합니다: {self.speed_of_light}")
        if self.hbar <= 0:
            raise FieldModelError(f"hbar 는 양수여야 합니다: {self.hbar}")
        if not math.isfinite(self.compton_frequency):
            raise FieldModelError("콤프턴 각진동수 mc²/ħ 가 유한하지 않습니다")

    @classmethod
    def from_si(cls, mass_kg: float) -> "FieldParams":
        """SI 질량(kg)을 자연단위 파라미터로 변환"""
        if mass_kg < 0:
            raise FieldModelError(f"mass 는 0 이상이어야 합니다: {mass_kg}")
        return cls(mass=mass_kg * SPEED_OF_LIGHT_SI / HBAR_SI)

    @property
    def compton_frequency(self) -> float:
        """정지 각진동수 mc²/ħ"""
        return self.mass * self.speed_of_light ** 2 / self.hbar

    def compton_period(self) -> Optional[float]:
        """콤프턴 주기 h/(mc²) - 질량이 0이면 None"""
        if self.mass == 0:
            return None
        return 2.0 * math.pi / self.compton_frequency


@dataclass(frozen=True)
class CavityGrid:
    """상자 길이, IBC-FBC 시간 간격, 내부 샘플 수"""

    length: float
    delta_t: float
    n_space: int
    n_time: int
    t_start: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise FieldModelError(f"length 는 양수여야 합니다: {self.length}")
        if not (math.isfinite(self.delta_t) and self.delta_t > 0):
            raise FieldModelError(f"delta_t 는 양수여야 합니다: {self.delta_t}")
        if int(self.n_space) != self.n_space or self.n_space < 2:
            raise FieldModelError(f"n_space 는 2 이상의 정수여야 합니다: {self.n_space}")
        if int(self.n_time) != self.n_time or self.n_time < 2:
            raise FieldModelError(f"n_time 은 2 이상의 정수여야 합니다: {self.n_time}")

    @property
    def h(self) -> float:
        """공간 간격"""
        return self.length / (self.n_space + 1)

    @property
    def delta(self) -> float:
        """시간 간격"""
        return self.delta_t / (self.n_time + 1)

    @property
    def shape(self):
        return (self.n_time + 2, self.n_space + 2)

    def x_coordinates(self) -> np.ndarray:
        """벽(x=0, x=L)을 포함한 공간 좌표"""
        return np.linspace(0.0, self.length, self.n_space + 2)

    def relative_times(self) -> np.ndarray:
        """t₀ 기준 상대 시간 (첫 값 0, 마지막 값 Δt)"""
        return np.linspace(0.0, self.delta_t, self.n_time + 2)

    def t_coordinates(self) -> np.ndarray:
        """경계 행을 포함한 절대 시간 좌표"""
        return self.t_start + self.relative_times()


@dataclass(frozen=True)
class Mode:
    """사인 기저 공간 모드 sin(n_x π x / L)"""

    n_x: int
    wavenumber: float
    frequency: float

    @property
    def period(self) -> float:
        if self.frequency == 0:
            return math.inf
        return 2.0 * math.pi / self.frequency


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """φ(t, x) 샘플 - 경계 행/열 포함, (시간, 공간) 인덱스"""

    values: np.ndarray
    grid: CavityGrid = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ShapeError(f"격자 크기 불일치: {values.shape} != {self.grid.shape}")
        if np.any(values[:, 0] != 0.0) or np.any(values[:, -1] != 0.0):
            raise FieldModelError("벽(x=0, x=L)에서 φ 는 정확히 0 이어야 합니다")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def time_reversed(self) -> "FieldGrid":
        """시간 순서를 뒤집은 격자 (t → t₀ + t_f − t)"""
        return FieldGrid(self.values[::-1, :].copy(), self.grid)


def dispersion(params: FieldParams, k: ArrayLike) -> ArrayLike:
    """분산관계 ω(k) = sqrt(c²k² + m²c⁴/ħ²)"""
    omega = np.hypot(params.speed_of_light * np.asarray(k, dtype=float), params.compton_frequency)
    if omega.ndim == 0:
        return float(omega)
    return omega


def make_mode(params: FieldParams, grid: CavityGrid, n_x: int) -> Mode:
    """공동 모드 생성: k = n_x π / L, ω = ω(k)"""
    if int(n_x) != n_x or n_x < 1:
        raise FieldModelError(f"n_x 는 1 이상의 정수여야 합니다 (0 모드는 φ≡0): {n_x}")
    k = int(n_x) * math.pi / grid.length
    return Mode(n_x=int(n_x), wavenumber=k, frequency=dispersion(params, k))


def momentum_density(field_grid: FieldGrid, time_index: int, space_index: int) -> float:
    """
    운동량 밀도 T^{0x} ∝ φ̇ ∂φ/∂x (양의 상수배 1 규약)

    Args:
        field_grid: 장 격자
        time_index: 내부 시간 인덱스 (1..n_time)
        space_index: 내부 공간 인덱스 (1..n_space)
    """
    grid = field_grid.grid
    if not 1 <= time_index <= grid.n_time:
        raise IndexError(f"시간 인덱스 범위 초과: {time_index} (1..{grid.n_time})")
    if not 1 <= space_index <= grid.n_space:
        raise IndexError(f"공간 인덱스 범위 초과: {space_index} (1..{grid.n_space})")

    phi = field_grid.values
    phi_t = (phi[time_index + 1, space_index] - phi[time_index - 1, space_index]) / (2.0 * grid.delta)
    phi_x = (phi[time_index, space_index + 1] - phi[time_index, space_index - 1]) / (2.0 * grid.h)
    return float(phi_t * phi_x)


def momentum_density_map(field_grid: FieldGrid) -> np.ndarray:
    """내부 전체 샘플의 운동량 밀도 (n_time × n_space)"""
    grid = field_grid.grid
    phi = field_grid.values
    phi_t = (phi[2:, 1:-1] - phi[:-2, 1:-1]) / (2.0 * grid.delta)
    phi_x = (phi[1:-1, 2:] - phi[1:-1, :-2]) / (2.0 * grid.h)
    return phi_t * phi_x
