"""모듈 간 일관성: 양자화 정수쌍 ⇔ BVP 공명 ⇔ 경로적분 커널 특이성"""

import math

import pytest

from modules.core.field_model import CavityGrid, FieldParams, make_mode
from modules.core.path_integral import (
    LatticeActionSpec,
    LatticeScheme,
    harmonic_propagator,
    joint_probability_exact,
)
from modules.core.quantization import find_admissible_pairs
from modules.core.two_time_bvp import BoundarySlice, BvpClassification, BvpTolerances, solve_field_bvp

# N=256 사다리꼴 격자에서 n_t=1 연속 공명의 상대 고유값은 약 4.65e-10
SINGULARITY_TOLERANCE = 1e-9


def build_case(rng, compton_of, r_range=(0.2, 0.9)):
    """r = Δt/L 과 C(r) 로 질량을 정해 ω_nΔt = π·sqrt(n²r² + C) 가 되게 한다"""
    r = rng.uniform(*r_range)
    length = rng.uniform(0.5, 2.0)
    delta_t = r * length
    compton_term = compton_of(r)
    params = FieldParams(mass=math.pi * math.sqrt(compton_term) / delta_t)
    grid = CavityGrid(length=length, delta_t=delta_t, n_space=8, n_time=15)
    alpha, beta = rng.uniform(-1.0, 1.0, size=2)
    return params, grid, alpha, beta


def fundamental_views(params, grid, alpha, beta):
    pairs = find_admissible_pairs(params, grid.length, grid.delta_t, 1e-9, max_mode=50)
    solution = solve_field_bvp(
        params,
        grid,
        BoundarySlice([alpha]),
        BoundarySlice([beta]),
        BvpTolerances(resonance=1e-9, compatibility=1e-9),
    )
    mode = make_mode(params, grid, 1)
    spec = LatticeActionSpec.from_interval(mode, grid.delta_t, 256, alpha, beta, LatticeScheme.TRAPEZOID)
    joint = joint_probability_exact(spec, singularity_tolerance=SINGULARITY_TOLERANCE)
    return pairs, solution.mode_solutions[0], joint


class TestResonanceAgreement:
    def test_resonant_configurations(self, rng):
        for _ in range(25):
            params, grid, alpha, beta = build_case(rng, lambda r: 1.0 - r ** 2)
            pairs, mode_solution, joint = fundamental_views(params, grid, alpha, beta)

            assert (1, 1) in {(p.n_x, p.n_t) for p in pairs}
            assert mode_solution.classification is not BvpClassification.UNIQUE
            assert mode_solution.resonance_index == 1
            assert joint.kernel_rank_deficiency == 1
            assert joint.diagnostics["rank_ambiguous"]

    def test_non_resonant_configurations(self, rng):
        for _ in range(25):
            s = rng.uniform(1.2, 3.8)
            params, grid, alpha, beta = build_case(rng, lambda r, s=s: s - r ** 2)
            pairs, mode_solution, joint = fundamental_views(params, grid, alpha, beta)

            assert all(p.n_x != 1 for p in pairs)
            assert mode_solution.classification is BvpClassification.UNIQUE
            assert joint.kernel_rank_deficiency == 0

            oracle = harmonic_propagator(mode_solution.mode.frequency, grid.delta_t, alpha, beta)
            assert joint.magnitude == pytest.approx(oracle.magnitude, rel=1e-2)

    def test_resonant_compatibility_matches_bvp(self, rng):
        # α = −β 는 n_t=1 공명에서 양립 (a(t_f) = −a(t₀))
        for _ in range(10):
            params, grid, alpha, _ = build_case(rng, lambda r: 1.0 - r ** 2)
            _, mode_solution, joint = fundamental_views(params, grid, alpha, -alpha)
            assert mode_solution.classification is BvpClassification.DEGENERATE
            assert joint.kernel_rank_deficiency == 1
            assert joint.magnitude > 0

    def test_second_mode_resonance(self, rng):
        # C = 1 − 4r²: (n_x=2, n_t=1) 허용, 모드 1 은 ω₁Δt = π·sqrt(1 − 3r²) 로 비공명
        for _ in range(10):
            params, grid, alpha, beta = build_case(rng, lambda r: 1.0 - 4.0 * r ** 2, r_range=(0.2, 0.45))
            pairs = find_admissible_pairs(params, grid.length, grid.delta_t, 1e-9, max_mode=50)
            solution = solve_field_bvp(
                params,
                grid,
                BoundarySlice([0.3, alpha]),
                BoundarySlice([-0.2, beta]),
                BvpTolerances(resonance=1e-9, compatibility=1e-9),
            )
            first, second = solution.mode_solutions

            assert (2, 1) in {(p.n_x, p.n_t) for p in pairs}
            assert all(p.n_x != 1 for p in pairs)
            assert first.classification is BvpClassification.UNIQUE
            assert second.classification is not BvpClassification.UNIQUE
            assert second.resonance_index == 1

            for mode, deficiency in ((make_mode(params, grid, 1), 0), (make_mode(params, grid, 2), 1)):
                spec = LatticeActionSpec.from_interval(
                    mode, grid.delta_t, 256, alpha, beta, LatticeScheme.TRAPEZOID
                )
                joint = joint_probability_exact(spec, singularity_tolerance=SINGULARITY_TOLERANCE)
                assert joint.kernel_rank_deficiency == deficiency
