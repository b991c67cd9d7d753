"""quantization: 진동수 양자화, 콤프턴 한계, 정수쌍 탐색, Δt 스캔"""

import json
import math

import numpy as np
import pytest

from modules.core.exceptions import EnumerationLimitError, FieldModelError
from modules.core.field_model import FieldParams, natural_time_from_si, si_seconds
from modules.core.quantization import (
    ConstraintForm,
    compton_bound,
    constraint_residual,
    find_admissible_pairs,
    quantized_frequencies,
    scan_delta_t,
    tolerance_sweep,
)
from modules.utils.config_manager import get_config, reset_config


def brute_force_pairs(params, length, delta_t, tolerance, form, limit=100):
    n_x, n_t = np.meshgrid(np.arange(1, limit + 1), np.arange(1, limit + 1), indexing="ij")
    residual = constraint_residual(params, length, delta_t, n_x, n_t, form)
    mask = residual <= tolerance
    return sorted(zip(n_x[mask].tolist(), n_t[mask].tolist()))


class TestQuantizedFrequencies:
    def test_unit_spacing(self):
        np.testing.assert_allclose(quantized_frequencies(math.pi, 3), [1.0, 2.0, 3.0], rtol=1e-15)

    def test_single(self):
        np.testing.assert_allclose(quantized_frequencies(1.0, 1), [math.pi])

    def test_half_steps(self):
        expected = [math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi]
        np.testing.assert_allclose(quantized_frequencies(2.0, 4), expected, rtol=1e-15)

    def test_rejects_bad_input(self):
        with pytest.raises(FieldModelError):
            quantized_frequencies(0.0, 3)
        with pytest.raises(FieldModelError):
            quantized_frequencies(1.0, 0)


class TestComptonBound:
    def test_natural_units(self):
        params = FieldParams(mass=math.pi)
        assert compton_bound(params, 1) == pytest.approx(1.0)
        assert compton_bound(params, 7) == pytest.approx(7.0)

    def test_massless_has_no_bound(self):
        assert compton_bound(FieldParams(), 3) is None

    def test_electron_order_of_magnitude(self):
        params = FieldParams.from_si(9.1093837015e-31)
        seconds = si_seconds(compton_bound(params, 1))
        # πħ/(mc²) ≈ 4.05e-21 s
        assert 1e-21 < seconds < 1e-20
        assert seconds == pytest.approx(4.0466e-21, rel=1e-3)


class TestFindAdmissiblePairs:
    def test_laser_cavity_identity(self):
        params = FieldParams()
        pairs = find_admissible_pairs(params, 1.0, 1.0, 1e-9, max_mode=200)
        assert [(p.n_x, p.n_t) for p in pairs] == [(n, n) for n in range(1, 201)]
        for pair in pairs:
            assert pair.frequency(1.0) == pytest.approx(pair.n_x * math.pi, rel=1e-12)

    def test_unique_pair(self):
        params = FieldParams(mass=3 * math.pi)
        pairs = find_admissible_pairs(params, 1.0, 1.0, 1e-9)
        assert [(p.n_x, p.n_t) for p in pairs] == [(4, 5)]
        assert brute_force_pairs(params, 1.0, 1.0, 1e-9, ConstraintForm.DISPERSION_CONSISTENT) == [(4, 5)]

    def test_literal_sign_branch(self):
        params = FieldParams(mass=5 * math.pi)
        pairs = find_admissible_pairs(params, 1.0, 1.0, 1e-9, ConstraintForm.PAPER_LITERAL)
        assert [(p.n_x, p.n_t) for p in pairs] == [(3, 4), (4, 3)]
        assert brute_force_pairs(params, 1.0, 1.0, 1e-9, ConstraintForm.PAPER_LITERAL) == [(3, 4), (4, 3)]

    def test_form_parsed_from_string(self):
        params = FieldParams(mass=5 * math.pi)
        assert len(find_admissible_pairs(params, 1.0, 1.0, 1e-9, "paper")) == 2
        with pytest.raises(FieldModelError):
            find_admissible_pairs(params, 1.0, 1.0, 1e-9, "sideways")

    def test_form_defaults_to_config(self, tmp_path):
        params = FieldParams(mass=5 * math.pi)
        # n_t² − n_x² = 25 의 유일한 양의 해
        assert [(p.n_x, p.n_t) for p in find_admissible_pairs(params, 1.0, 1.0, 1e-9)] == [(12, 13)]

        path = tmp_path / "solver.json"
        path.write_text(json.dumps({"quantization": {"constraint_form": "paper"}}), encoding="utf-8")
        reset_config(path)
        pairs = find_admissible_pairs(params, 1.0, 1.0, 1e-9)
        assert [(p.n_x, p.n_t) for p in pairs] == [(3, 4), (4, 3)]
        assert scan_delta_t(params, 1.0, 0.9, 1.1, 3, 1e-9).form is ConstraintForm.PAPER_LITERAL
        assert find_admissible_pairs(params, 1.0, 1.0, 1e-9, "dispersion")[0].n_x == 12

    def test_matches_brute_force_on_random_inputs(self, rng):
        for _ in range(30):
            params = FieldParams(mass=rng.uniform(0, 20))
            length = rng.uniform(0.5, 2.0)
            delta_t = rng.uniform(0.5, 2.0)
            tolerance = 10.0 ** rng.uniform(-4, -1)
            for form in ConstraintForm:
                found = find_admissible_pairs(params, length, delta_t, tolerance, form, max_mode=100)
                expected = [
                    pair
                    for pair in brute_force_pairs(params, length, delta_t, tolerance, form, limit=500)
                    if pair[0] <= 100
                ]
                assert [(p.n_x, p.n_t) for p in found] == expected

    def test_residuals_recheckable(self):
        # (n_x, n_t) = (2, 5) 가 정확히 허용되도록 질량 선택
        compton_term = 25.0 - (0.9 / 1.3) ** 2 * 4.0
        params = FieldParams(mass=math.pi * math.sqrt(compton_term) / 0.9)
        pairs = find_admissible_pairs(params, 1.3, 0.9, 1e-3, max_mode=300)
        assert pairs
        for pair in pairs:
            direct = float(constraint_residual(params, 1.3, 0.9, pair.n_x, pair.n_t))
            assert direct == pytest.approx(pair.residual)
            assert pair.residual <= 1e-3

    def test_monotone_in_tolerance(self, rng):
        params = FieldParams(mass=4.1)
        previous = set()
        for tolerance in (1e-6, 1e-4, 1e-3, 1e-2, 1e-1):
            current = {(p.n_x, p.n_t) for p in find_admissible_pairs(params, 1.0, 1.7, tolerance)}
            assert previous <= current
            previous = current

    def test_compton_bound_holds(self, rng):
        checked = 0
        for _ in range(100):
            n_x = int(rng.integers(1, 6))
            n_t = int(rng.integers(n_x + 1, n_x + 8))
            length = rng.uniform(0.5, 3.0)
            delta_t = length * rng.uniform(0.2, 1.0)
            # n_t² − (Δt/L)² n_x² = (μΔt/π)² 가 되도록 질량 선택
            compton_term = n_t ** 2 - (delta_t / length) ** 2 * n_x ** 2
            if compton_term <= 0:
                continue
            params = FieldParams(mass=math.pi * math.sqrt(compton_term) / delta_t)
            pairs = find_admissible_pairs(params, length, delta_t, 1e-9, max_mode=200)
            assert (n_x, n_t) in {(p.n_x, p.n_t) for p in pairs}
            for pair in pairs:
                assert delta_t <= compton_bound(params, pair.n_t) * (1 + 1e-9)
            checked += 1
        assert checked > 50

    def test_enumeration_limit(self):
        config = get_config()
        config.solver_config["quantization"]["candidate_limit"] = 10
        with pytest.raises(EnumerationLimitError):
            find_admissible_pairs(FieldParams(), 1.0, 1.0, 1e-9, max_mode=100)

    def test_empty_result_is_valid(self):
        assert find_admissible_pairs(FieldParams(mass=3 * math.pi), 1.0, 1.013, 1e-9) == []

    def test_si_scale_inputs(self):
        # 전자 질량, L = 1 nm, Δt 를 (n_x, n_t) = (1, 2) 공명에 맞춤
        params = FieldParams.from_si(9.1093837015e-31)
        length = 1e-9
        # r² n_x² + C = n_t² → Δt²(π²/L² + μ²)/π² = 4
        delta_t = 2.0 * math.pi / math.hypot(math.pi / length, params.compton_frequency)
        pairs = find_admissible_pairs(params, length, delta_t, 1e-9, max_mode=10)
        assert (1, 2) in {(p.n_x, p.n_t) for p in pairs}
        assert si_seconds(delta_t) < 1e-20
        assert natural_time_from_si(si_seconds(delta_t)) == pytest.approx(delta_t)


class TestScanDeltaT:
    def test_scarcity(self):
        report = scan_delta_t(FieldParams(mass=3 * math.pi), 1.0, 0.9, 1.1, 10001, 1e-9)
        assert report.solution_counts.size == 10001
        assert report.admissible_fraction < 0.01
        assert report.admissible_fraction == np.count_nonzero(report.solution_counts) / 10001

    def test_massless_generic_points_empty(self):
        report = scan_delta_t(FieldParams(), 1.0, 0.9137, 0.9142, 11, 1e-12, max_mode=50)
        assert report.admissible_fraction == 0.0
        assert report.unique_fraction == 0.0

    def test_minimal_scan(self):
        report = scan_delta_t(FieldParams(mass=1.0), 1.0, 0.5, 1.5, 2, 1e-9)
        assert report.form is ConstraintForm.DISPERSION_CONSISTENT
        frame = report.to_frame()
        assert list(frame.columns) == ["delta_t", "solution_count"]
        assert len(frame) == 2

    def test_invalid_window(self):
        with pytest.raises(FieldModelError):
            scan_delta_t(FieldParams(), 1.0, 1.1, 0.9, 10, 1e-9)
        with pytest.raises(FieldModelError):
            scan_delta_t(FieldParams(), 1.0, 0.9, 1.1, 1, 1e-9)

    def test_tolerance_slope_is_linear(self):
        reports, slope = tolerance_sweep(
            FieldParams(mass=3 * math.pi), 1.0, 0.9, 1.1, 20001, [1e-3, 1e-4, 1e-5]
        )
        fractions = [report.admissible_fraction for report in reports]
        assert fractions == sorted(fractions)
        assert slope == pytest.approx(1.0, abs=0.3)
