"""
격자 경로적분 결합확률 계산기

자유장은 사인 모드별로 분리되므로 모드 하나의 진폭 a(t) 에 대한 이산 작용
S = Σ_j [ (a_{j+1} − a_j)²/(2δ) − δω²V_j ] 를 내부 값 x 의 이차형식
½xᵀMx + bᵀx + s₀ 로 쓰고, 프레넬 적분을 행렬식과 고유값 부호수로 정확히 계산한다.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal

from modules.core.exceptions import ConvergenceError, FieldModelError, ShapeError
from modules.core.field_model import CavityGrid, FieldParams, Mode, make_mode
from modules.core.two_time_bvp import BoundarySlice
from modules.utils.config_manager import get_config

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class LatticeScheme(Enum):
    """퍼텐셜 항 이산화: 양 끝점 평균(TRAPEZOID) 또는 중점(MIDPOINT)"""

    TRAPEZOID = "trapezoid"
    MIDPOINT = "midpoint"

    @classmethod
    def parse(cls, value) -> "LatticeScheme":
        if isinstance(value, cls):
            return value
        for scheme in cls:
            if scheme.value == str(value).strip().lower():
                return scheme
        raise FieldModelError(f"알 수 없는 격자 방식: {value} (trapezoid|midpoint)")


@dataclass(frozen=True)
class LatticeActionSpec:
    mode: Mode
    n_slices: int
    delta: float
    alpha: float
    beta: float
    scheme: LatticeScheme = LatticeScheme.TRAPEZOID
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.n_slices) != self.n_slices or self.n_slices < 1:
            raise FieldModelError(f"n_slices 는 1 이상의 정수여야 합니다: {self.n_slices}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise FieldModelError(f"delta 는 양수여야 합니다: {self.delta}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise FieldModelError("경계 진폭이 유한하지 않습니다")
        if not self.hbar > 0:
            raise FieldModelError(f"hbar 는 양수여야 합니다: {self.hbar}")

    @classmethod
    def from_interval(
        cls,
        mode: Mode,
        delta_t: float,
        n_slices: int,
        alpha: float,
        beta: float,
        scheme: LatticeScheme = LatticeScheme.TRAPEZOID,
        hbar: float = 1.0,
    ) -> "LatticeActionSpec":
        if not delta_t > 0:
            raise FieldModelError(f"delta_t 는 양수여야 합니다: {delta_t}")
        return cls(
            mode=mode,
            n_slices=int(n_slices),
            delta=delta_t / (int(n_slices) + 1),
            alpha=float(alpha),
            beta=float(beta),
            scheme=LatticeScheme.parse(scheme),
            hbar=hbar,
        )

    @property
    def delta_t(self) -> float:
        return self.delta * (self.n_slices + 1)

    @property
    def omega(self) -> float:
        return self.mode.frequency

    def with_endpoints(self, alpha: float, beta: float) -> "LatticeActionSpec":
        return LatticeActionSpec(self.mode, self.n_slices, self.delta, alpha, beta, self.scheme, self.hbar)


@dataclass(frozen=True)
class JointProbability:
    """
    결합확률 진폭 Z

    magnitude² 가 보고되는 확률 가중치이다. 특이 커널에서 양립 불가한 경계면
    magnitude = 0, classical_action = None.
    """

    magnitude: float
    phase: float
    classical_action: Optional[float]
    kernel_rank_deficiency: int = 0
    compatibility_residual: float = 0.0
    diagnostics: Dict = field(default_factory=dict, compare=False)

    @property
    def probability(self) -> float:
        return self.magnitude ** 2


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """S(x) = ½xᵀMx + bᵀx + s₀ (M 은 대각/부대각으로 저장)"""

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    linear: np.ndarray
    constant: float

    def matrix(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )

    def evaluate(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.matrix() @ x + self.linear @ x + self.constant)


@dataclass(frozen=True, eq=False)
class StationaryPhaseReport:
    stationary_point_exists: bool
    family_dimension: int
    classical_action: Optional[float]
    weight_ratio: float
    classical_path: Optional[np.ndarray]
    shell_endpoints: Tuple[float, float]


@dataclass(frozen=True)
class FieldJointProbability:
    """모드별 결합확률과 그 곱 (자유장 분리)"""

    modes: Tuple[JointProbability, ...]
    magnitude: float
    phase: float
    kernel_rank_deficiency: int
    compatibility_residual: float

    @property
    def probability(self) -> float:
        return self.magnitude ** 2


def _wrap_phase(phase: float) -> float:
    """(−π, π] 로 정규화"""
    wrapped = math.remainder(phase, TWO_PI)
    return math.pi if wrapped == -math.pi else wrapped


def _link_coefficients(spec: LatticeActionSpec) -> Tuple[float, float]:
    """링크 작용 ℓ(u, v) = (P/2)(u² + v²) − B·u·v 의 (P, B)"""
    delta, omega2 = spec.delta, spec.omega ** 2
    if spec.scheme is LatticeScheme.MIDPOINT:
        return 1.0 / delta - delta * omega2 / 4.0, 1.0 / delta + delta * omega2 / 4.0
    return 1.0 / delta - delta * omega2 / 2.0, 1.0 / delta


def lattice_action(spec: LatticeActionSpec, interior) -> float:
    """경계 α, β 와 내부 값으로 이산 작용 계산"""
    interior = np.asarray(interior, dtype=float)
    if interior.ndim != 1 or interior.size != spec.n_slices:
        raise ShapeError(f"내부 값 개수는 n_slices={spec.n_slices} 이어야 합니다: {interior.shape}")

    path = np.concatenate(([spec.alpha], interior, [spec.beta]))
    left, right = path[:-1], path[1:]
    kinetic = (right - left) ** 2 / (2.0 * spec.delta)
    if spec.scheme is LatticeScheme.MIDPOINT:
        potential = ((left + right) / 2.0) ** 2 / 2.0
    else:
        potential = (left ** 2 + right ** 2) / 4.0
    return float(np.sum(kinetic - spec.delta * spec.omega ** 2 * potential))


def lattice_quadratic_form(spec: LatticeActionSpec) -> QuadraticForm:
    """이산 작용의 삼중대각 이차형식 (M, b, s₀)"""
    p, b = _link_coefficients(spec)
    n = spec.n_slices
    linear = np.zeros(n)
    linear[0] -= b * spec.alpha
    linear[-1] -= b * spec.beta
    return QuadraticForm(
        diagonal=np.full(n, 2.0 * p),
        off_diagonal=np.full(n - 1, -b),
        linear=linear,
        constant=0.5 * p * (spec.alpha ** 2 + spec.beta ** 2),
    )


def _eigensystem(form: QuadraticForm) -> Tuple[np.ndarray, np.ndarray]:
    if form.diagonal.size == 1:
        return form.diagonal.copy(), np.ones((1, 1))
    return eigh_tridiagonal(form.diagonal, form.off_diagonal)


def lattice_resonant_frequency(delta_t: float, n_slices: int, n_t: int, scheme=LatticeScheme.TRAPEZOID) -> float:
    """M 이 정확히 특이해지는 ω (이산 공명 n_t)"""
    scheme = LatticeScheme.parse(scheme)
    if not 1 <= n_t <= n_slices:
        raise FieldModelError(f"n_t 는 1..n_slices 범위여야 합니다: {n_t}")
    delta = delta_t / (n_slices + 1)
    half_angle = n_t * math.pi / (2.0 * (n_slices + 1))
    if scheme is LatticeScheme.MIDPOINT:
        return 2.0 * math.tan(half_angle) / delta
    return 2.0 * math.sin(half_angle) / delta


def lattice_frequency(spec: LatticeActionSpec) -> float:
    """이산 고전 경로의 유효 진동수 θ/δ (cos θ = P/B)"""
    _, b = _link_coefficients(spec)
    # 두 방식 모두 B − P = δω²/2
    half_sin2 = spec.delta * spec.omega ** 2 / (4.0 * b)
    if half_sin2 > 1.0:
        raise FieldModelError(f"격자 간격이 너무 큽니다: ωδ={spec.omega * spec.delta:.4f}")
    return 2.0 * math.asin(math.sqrt(half_sin2)) / spec.delta


def _log_normalization(spec: LatticeActionSpec) -> Tuple[float, float]:
    """링크마다 (B/(2πiħ))^{1/2} 인 정규화 상수의 (log 크기, 위상)"""
    _, b = _link_coefficients(spec)
    links = spec.n_slices + 1
    return 0.5 * links * math.log(abs(b) / (TWO_PI * spec.hbar)), -links * math.pi / 4.0


def joint_probability_exact(
    spec: LatticeActionSpec,
    singularity_tolerance: Optional[float] = None,
    compatibility_tolerance: Optional[float] = None,
) -> JointProbability:
    """
    가우스-프레넬 적분의 정확한 값

    M 이 정칙이면 |Z| = C_N (2πħ)^{N/2} |det M|^{-1/2}, 위상은 링크 정규화 위상
    + π/4·signature(M) + S_cl/ħ. 특이하면 b 의 영공간 성분으로 양립 여부를 판정한다.
    """
    config = get_config()
    sing_tol = config.get_singularity_tolerance() if singularity_tolerance is None else singularity_tolerance
    compat_tol = (
        config.get_compatibility_tolerance() if compatibility_tolerance is None else compatibility_tolerance
    )

    form = lattice_quadratic_form(spec)
    eigenvalues, vectors = _eigensystem(form)
    scale = float(np.max(np.abs(eigenvalues)))
    threshold = sing_tol * scale
    magnitudes = np.abs(eigenvalues)
    singular = magnitudes <= threshold
    ambiguous = bool(np.any((magnitudes >= threshold / 10.0) & (magnitudes <= threshold * 10.0)))
    if ambiguous:
        logger.warning(f"⚠️ 특이 판정 모호: 고유값이 허용오차 {threshold:.3e} 의 10배 이내")

    rank_deficiency = int(np.count_nonzero(singular))
    projection = vectors.T @ form.linear
    log_norm, norm_phase = _log_normalization(spec)
    diagnostics = {
        "min_abs_eigenvalue": float(magnitudes.min()),
        "max_abs_eigenvalue": scale,
        "singularity_threshold": threshold,
        "rank_ambiguous": ambiguous,
    }

    compatibility_residual = 0.0
    if rank_deficiency:
        null_component = float(np.linalg.norm(projection[singular]))
        b_norm = float(np.linalg.norm(form.linear))
        if null_component > compat_tol * b_norm:
            logger.info(f"특이 커널 - 경계 양립 불가 (잔차 {null_component:.3e}): 확률 0")
            return JointProbability(
                magnitude=0.0,
                phase=0.0,
                classical_action=None,
                kernel_rank_deficiency=rank_deficiency,
                compatibility_residual=null_component,
                diagnostics=diagnostics,
            )
        diagnostics["null_space_dimension"] = rank_deficiency

    regular = ~singular
    reg_values = eigenvalues[regular]
    n_regular = int(reg_values.size)
    log_magnitude = log_norm + 0.5 * n_regular * math.log(TWO_PI * spec.hbar) - 0.5 * float(
        np.sum(np.log(np.abs(reg_values)))
    )
    classical_action = form.constant - 0.5 * float(np.sum(projection[regular] ** 2 / reg_values))
    signature = int(np.count_nonzero(reg_values > 0) - np.count_nonzero(reg_values < 0))
    phase = norm_phase + math.pi * signature / 4.0 + classical_action / spec.hbar

    result = JointProbability(
        magnitude=math.exp(log_magnitude),
        phase=_wrap_phase(phase),
        classical_action=classical_action,
        kernel_rank_deficiency=rank_deficiency,
        compatibility_residual=compatibility_residual,
        diagnostics=diagnostics,
    )
    logger.debug(
        f"격자 경로적분 N={spec.n_slices}: |Z|={result.magnitude:.6e}, rank 결손 {rank_deficiency}"
    )
    return result


def harmonic_propagator(
    omega: float, delta_t: float, alpha: float, beta: float, hbar: float = 1.0
) -> JointProbability:
    """
    연속 조화진동자 전파자 (해석해 기준)

    |K|² = ω/(2πħ|sin ωΔt|), S_cl = ω((α²+β²)cos ωΔt − 2αβ)/(2 sin ωΔt),
    위상에는 ωΔt 가 π 를 지날 때마다 −π/2 를 더한다.
    """
    if omega < 0 or delta_t <= 0 or hbar <= 0:
        raise FieldModelError("omega ≥ 0, delta_t > 0, hbar > 0 이어야 합니다")
    if omega == 0:
        magnitude = math.sqrt(1.0 / (TWO_PI * hbar * delta_t))
        action = (beta - alpha) ** 2 / (2.0 * delta_t)
        return JointProbability(magnitude, _wrap_phase(-math.pi / 4.0 + action / hbar), action)

    angle = omega * delta_t
    s = math.sin(angle)
    if s == 0.0:
        raise FieldModelError(f"공명 조건 ωΔt={angle} 에서 전파자가 발산합니다")
    magnitude = math.sqrt(omega / (TWO_PI * hbar * abs(s)))
    action = omega * ((alpha ** 2 + beta ** 2) * math.cos(angle) - 2.0 * alpha * beta) / (2.0 * s)
    caustics = math.floor(angle / math.pi)
    phase = -math.pi / 4.0 - caustics * math.pi / 2.0 + action / hbar
    return JointProbability(magnitude, _wrap_phase(phase), action)


def _shell_endpoints(spec: LatticeActionSpec, null_vectors: np.ndarray) -> Tuple[float, float]:
    """영공간 양립 조건 α·v₁ + β·v_N = 0 위로 경계값을 최소제곱 사영"""
    constraint = np.column_stack([null_vectors[0], null_vectors[-1]])
    endpoints = np.array([spec.alpha, spec.beta])
    correction = np.linalg.lstsq(constraint, constraint @ endpoints, rcond=None)[0]
    projected = endpoints - correction
    return float(projected[0]), float(projected[1])


def stationary_phase_report(
    spec: LatticeActionSpec, singularity_tolerance: Optional[float] = None
) -> StationaryPhaseReport:
    """
    정류점 존재 여부와 가중치 비율 |Z|²(주어진 경계)/|Z|²(고전 껍질 위 경계)

    정칙 커널은 항상 정류점이 있어 비율 1, 특이 커널은 양립이면 1차원 가족(비율 1),
    양립 불가면 정류점이 없고 비율 0.
    """
    sing_tol = get_config().get_singularity_tolerance() if singularity_tolerance is None else singularity_tolerance
    exact = joint_probability_exact(spec, sing_tol)
    form = lattice_quadratic_form(spec)
    eigenvalues, vectors = _eigensystem(form)
    threshold = sing_tol * float(np.max(np.abs(eigenvalues)))
    singular = np.abs(eigenvalues) <= threshold

    if not np.any(singular):
        path = np.linalg.solve(form.matrix(), -form.linear)
        return StationaryPhaseReport(True, 0, exact.classical_action, 1.0, path, (spec.alpha, spec.beta))

    shell = _shell_endpoints(spec, vectors[:, singular])
    shell_result = joint_probability_exact(spec.with_endpoints(*shell), sing_tol)
    ratio = exact.probability / shell_result.probability if shell_result.probability > 0 else 0.0

    if exact.classical_action is None:
        logger.info("정류점 없음 - 경계가 고전 껍질 밖에 있음")
        return StationaryPhaseReport(False, 0, None, ratio, None, shell)

    path = -np.linalg.pinv(form.matrix(), rcond=sing_tol) @ form.linear
    return StationaryPhaseReport(
        True, int(np.count_nonzero(singular)), exact.classical_action, ratio, path, shell
    )


def _regulated_integral(
    spec: LatticeActionSpec,
    center: np.ndarray,
    epsilon: float,
    nodes: np.ndarray,
    weights: np.ndarray,
    decay: float,
) -> complex:
    """∫ exp(iS/ħ − ε|x − x*|²) dx 를 전달행렬 방식 중첩 가우스-르장드르로 계산"""
    p, b = _link_coefficients(spec)
    half_width = math.sqrt(decay / epsilon)
    offsets = half_width * nodes
    damped = half_width * weights * np.exp(-epsilon * offsets ** 2)

    def link_phase(u, v):
        return np.exp(1j * (0.5 * p * (u ** 2 + v ** 2) - b * u * v) / spec.hbar)

    positions = center[0] + offsets
    state = link_phase(spec.alpha, positions) * damped
    for j in range(1, spec.n_slices):
        following = center[j] + offsets
        state = (state @ link_phase(positions[:, None], following[None, :])) * damped
        positions = following
    return complex(np.sum(state * link_phase(positions, spec.beta)))


def joint_probability_bruteforce(
    spec: LatticeActionSpec,
    epsilon: Optional[float] = None,
    nodes: Optional[int] = None,
    decay: Optional[float] = None,
    tolerance: Optional[float] = None,
) -> JointProbability:
    """
    정규화 인자 e^{−ε|x−x*|²} 를 넣은 직접 구적과 ε→0 외삽

    정류점 x* 를 중심으로 ε_k = σ·2^k (k = 0..N+1) 에서 Z_k 를 구하고,
    Z^{-2} 가 ε 의 N 차 다항식임을 이용해 두 보간(하위 N+1 개, 상위 N+1 개)의
    ε=0 값을 비교한다. N=1 이면 선형 리처드슨 외삽과 같다.

    기본 사다리는 고정 수열 ε = 10⁻¹…10⁻⁴ 가 아니라 σ = 1/(δħ) 의 배수이다.
    epsilon 인수 또는 설정 path_integral.bruteforce.epsilon 으로 σ 를 지정할 수 있다.
    """
    settings = get_config().get_bruteforce_settings()
    if spec.n_slices > settings["max_slices"]:
        raise FieldModelError(
            f"직접 구적은 n_slices ≤ {settings['max_slices']} 에서만 지원합니다 "
            f"(비용 ∝ nodes^(N+1), 요청 N={spec.n_slices})"
        )
    nodes = int(settings["nodes"] if nodes is None else nodes)
    decay = float(settings["decay"] if decay is None else decay)
    tolerance = float(settings["tolerance"] if tolerance is None else tolerance)
    epsilon = settings.get("epsilon") if epsilon is None else epsilon
    base = float(epsilon) if epsilon else 1.0 / (spec.delta * spec.hbar)
    if not base > 0:
        raise FieldModelError(f"epsilon 은 양수여야 합니다: {epsilon}")

    form = lattice_quadratic_form(spec)
    center = np.linalg.lstsq(form.matrix(), -form.linear, rcond=None)[0]
    gl_nodes, gl_weights = leggauss(nodes)
    log_norm, norm_phase = _log_normalization(spec)
    normalization = math.exp(log_norm) * complex(math.cos(norm_phase), math.sin(norm_phase))

    n = spec.n_slices
    levels = 2.0 ** np.arange(n + 2)
    values = np.array(
        [
            normalization * _regulated_integral(spec, center, base * level, gl_nodes, gl_weights, decay)
            for level in levels
        ]
    )
    inverse_square = values ** -2

    lower = np.linalg.solve(np.vander(levels[: n + 1], n + 1), inverse_square[: n + 1])
    upper = np.linalg.solve(np.vander(levels[1:], n + 1), inverse_square[1:])
    estimate, check = lower[-1], upper[-1]
    difference = abs(estimate - check) / abs(estimate)
    diagnostics = {
        "epsilon_levels": (base * levels).tolist(),
        "relative_difference": float(difference),
        "nodes": nodes,
    }
    if not difference <= tolerance:
        raise ConvergenceError(
            f"ε 외삽이 수렴하지 않았습니다 (상대 차이 {difference:.3e} > {tolerance:.1e})",
            diagnostics=diagnostics,
        )

    # Z(0) = Z(ε_ref)·Π((ε_ref − r_k)/(−r_k))^{1/2}, 근 r_k 는 허수축 위
    reference = levels[n]
    roots = np.roots(lower)
    phase = float(np.angle(values[n])) + 0.5 * float(
        np.sum(np.angle((reference - roots) / (-roots)))
    )
    magnitude = abs(estimate) ** -0.5
    logger.debug(f"직접 구적 N={n}: |Z|={magnitude:.6e}, 외삽 차이 {difference:.2e}")
    return JointProbability(
        magnitude=float(magnitude),
        phase=_wrap_phase(phase),
        classical_action=None,
        diagnostics=diagnostics,
    )


def joint_probability_field(
    params: FieldParams,
    grid: CavityGrid,
    initial: BoundarySlice,
    final: BoundarySlice,
    n_slices: int,
    scheme: LatticeScheme = LatticeScheme.TRAPEZOID,
) -> FieldJointProbability:
    """다중 모드 장의 결합확률 - 모드별 결과의 곱"""
    if initial.n_modes != final.n_modes:
        raise ShapeError(f"IBC/FBC 모드 수 불일치: {initial.n_modes} != {final.n_modes}")

    results: List[JointProbability] = []
    for index in range(initial.n_modes):
        spec = LatticeActionSpec.from_interval(
            make_mode(params, grid, index + 1),
            grid.delta_t,
            n_slices,
            initial.coefficients[index],
            final.coefficients[index],
            scheme,
            params.hbar,
        )
        results.append(joint_probability_exact(spec))

    log_magnitude = 0.0
    for result in results:
        if result.magnitude == 0.0:
            log_magnitude = -math.inf
            break
        log_magnitude += math.log(result.magnitude)

    return FieldJointProbability(
        modes=tuple(results),
        magnitude=math.exp(log_magnitude) if math.isfinite(log_magnitude) else 0.0,
        phase=_wrap_phase(sum(result.phase for result in results)),
        kernel_rank_deficiency=sum(result.kernel_rank_deficiency for result in results),
        compatibility_residual=max(result.compatibility_residual for result in results),
    )
