"""field_model: 파라미터, 분산관계, 모드, 운동량 밀도"""

import math

import numpy as np
import pytest

from modules.core.exceptions import FieldModelError, ShapeError
from modules.core.field_model import (
    CavityGrid,
    FieldGrid,
    FieldParams,
    dispersion,
    make_mode,
    momentum_density,
    momentum_density_map,
    natural_time_from_si,
    si_seconds,
)


class TestFieldParams:
    def test_defaults_are_natural_units(self):
        params = FieldParams()
        assert params.speed_of_light == 1.0
        assert params.hbar == 1.0
        assert params.compton_frequency == 0.0
        assert params.compton_period() is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mass": -1.0},
            {"speed_of_light": 0.0},
            {"hbar": -2.0},
            {"mass": math.inf},
            {"mass": 1e300, "speed_of_light": 1e10},
        ],
    )
    def test_invalid_values_rejected(self, kwargs):
        with pytest.raises(FieldModelError):
            FieldParams(**kwargs)

    def test_compton_frequency_and_period(self):
        params = FieldParams(mass=2.0, speed_of_light=3.0, hbar=0.5)
        assert params.compton_frequency == pytest.approx(36.0)
        assert params.compton_period() == pytest.approx(2.0 * math.pi / 36.0)

    def test_from_si_electron(self):
        params = FieldParams.from_si(9.1093837015e-31)
        # m·c/ħ: 역 환산 콤프턴 파장 (1/m)
        assert params.mass == pytest.approx(2.5896e12, rel=1e-3)
        assert si_seconds(params.compton_period()) == pytest.approx(8.0933e-21, rel=1e-3)

    def test_si_time_round_trip(self):
        assert si_seconds(natural_time_from_si(3.5e-9)) == pytest.approx(3.5e-9, rel=1e-15)


class TestCavityGrid:
    def test_spacings(self, small_grid):
        assert small_grid.h == pytest.approx(1.0 / 9.0)
        assert small_grid.delta == pytest.approx(1.0 / 16.0)
        assert small_grid.shape == (17, 10)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"length": 0.0, "delta_t": 1.0, "n_space": 4, "n_time": 4},
            {"length": 1.0, "delta_t": -1.0, "n_space": 4, "n_time": 4},
            {"length": 1.0, "delta_t": 1.0, "n_space": 1, "n_time": 4},
            {"length": 1.0, "delta_t": 1.0, "n_space": 4, "n_time": 2.5},
        ],
    )
    def test_invalid_grid_rejected(self, kwargs):
        with pytest.raises(FieldModelError):
            CavityGrid(**kwargs)

    def test_coordinates_include_boundaries(self):
        grid = CavityGrid(length=2.0, delta_t=0.7, n_space=5, n_time=6, t_start=3.0)
        x = grid.x_coordinates()
        t = grid.t_coordinates()
        assert x[0] == 0.0 and x[-1] == 2.0
        assert t[0] == 3.0
        assert t[-1] == pytest.approx(3.7, abs=1e-15)
        assert len(t) == 8


class TestDispersion:
    @pytest.mark.parametrize(
        "mass, k, expected",
        [(0.0, 2.0, 2.0), (1.0, 0.0, 1.0), (3.0, 4.0, 5.0)],
    )
    def test_closed_form(self, mass, k, expected):
        assert dispersion(FieldParams(mass=mass), k) == pytest.approx(expected, rel=1e-15)

    def test_even_and_bounded_below(self, rng):
        params = FieldParams(mass=1.7, speed_of_light=2.0)
        k = rng.uniform(-50, 50, size=200)
        omega = dispersion(params, k)
        np.testing.assert_array_equal(omega, dispersion(params, -k))
        assert np.all(omega >= params.compton_frequency)
        assert np.all(omega > params.compton_frequency)

    def test_monotone_in_abs_k(self):
        params = FieldParams(mass=0.4)
        omega = dispersion(params, np.linspace(0, 30, 301))
        assert np.all(np.diff(omega) >= 0)


class TestMakeMode:
    def test_massless_fundamental(self):
        mode = make_mode(FieldParams(), CavityGrid(1.0, 1.0, 4, 4), 1)
        assert mode.wavenumber == pytest.approx(math.pi)
        assert mode.frequency == pytest.approx(math.pi)

    def test_wavenumber_definition(self):
        mode = make_mode(FieldParams(), CavityGrid(2.0, 1.0, 4, 4), 3)
        assert mode.wavenumber == pytest.approx(1.5 * math.pi)

    def test_pythagorean_mode(self):
        mode = make_mode(FieldParams(mass=3 * math.pi), CavityGrid(1.0, 1.0, 4, 4), 4)
        assert mode.wavenumber == pytest.approx(4 * math.pi)
        assert mode.frequency == pytest.approx(5 * math.pi, rel=1e-14)

    def test_zero_mode_rejected(self):
        with pytest.raises(FieldModelError):
            make_mode(FieldParams(), CavityGrid(1.0, 1.0, 4, 4), 0)

    def test_mass_shell_invariant(self, rng):
        for _ in range(50):
            params = FieldParams(mass=rng.uniform(0, 10), speed_of_light=rng.uniform(0.5, 2.0))
            grid = CavityGrid(rng.uniform(0.1, 5.0), 1.0, 4, 4)
            mode = make_mode(params, grid, int(rng.integers(1, 40)))
            shell = mode.frequency ** 2 - (params.speed_of_light * mode.wavenumber) ** 2
            assert shell == pytest.approx(params.compton_frequency ** 2, rel=1e-12, abs=1e-9)


def mode_field(grid: CavityGrid, omega: float, k: float) -> FieldGrid:
    t = grid.relative_times()[:, None]
    x = grid.x_coordinates()[None, :]
    values = np.cos(omega * t) * np.sin(k * x)
    values[:, 0] = 0.0
    values[:, -1] = 0.0
    return FieldGrid(values, grid)


class TestFieldGrid:
    def test_shape_checked(self, small_grid):
        with pytest.raises(ShapeError):
            FieldGrid(np.zeros((3, 3)), small_grid)

    def test_walls_must_vanish(self, small_grid):
        values = np.zeros(small_grid.shape)
        values[4, 0] = 1e-3
        with pytest.raises(FieldModelError):
            FieldGrid(values, small_grid)

    def test_values_are_read_only(self, small_grid):
        field_grid = FieldGrid(np.zeros(small_grid.shape), small_grid)
        with pytest.raises(ValueError):
            field_grid.values[1, 1] = 2.0


class TestMomentumDensity:
    def test_static_field_is_zero(self, small_grid, rng):
        row = np.zeros(small_grid.n_space + 2)
        row[1:-1] = rng.normal(size=small_grid.n_space)
        field_grid = FieldGrid(np.tile(row, (small_grid.n_time + 2, 1)), small_grid)
        assert momentum_density(field_grid, 3, 4) == 0.0
        assert np.all(momentum_density_map(field_grid) == 0.0)

    def test_uniform_interior_is_zero(self, small_grid):
        values = np.zeros(small_grid.shape)
        values[:, 1:-1] = np.linspace(0, 1, small_grid.n_time + 2)[:, None]
        field_grid = FieldGrid(values, small_grid)
        assert momentum_density(field_grid, 5, 4) == 0.0

    def test_out_of_range_index(self, small_grid):
        field_grid = FieldGrid(np.zeros(small_grid.shape), small_grid)
        with pytest.raises(IndexError):
            momentum_density(field_grid, 0, 3)
        with pytest.raises(IndexError):
            momentum_density(field_grid, 3, small_grid.n_space + 1)

    def test_matches_analytic_product(self):
        grid = CavityGrid(length=1.0, delta_t=1.0, n_space=199, n_time=199)
        k, omega = math.pi, math.sqrt(math.pi ** 2 + 1.0)
        field_grid = mode_field(grid, omega, k)
        i, j = 60, 40
        t = grid.relative_times()[i]
        x = grid.x_coordinates()[j]
        expected = (-omega * math.sin(omega * t) * math.sin(k * x)) * (math.cos(omega * t) * k * math.cos(k * x))
        assert momentum_density(field_grid, i, j) == pytest.approx(expected, rel=1e-3)

    def test_time_reversal_negates(self, small_grid):
        field_grid = mode_field(small_grid, 2.3, math.pi)
        forward = momentum_density_map(field_grid)
        backward = momentum_density_map(field_grid.time_reversed())
        np.testing.assert_array_equal(backward[::-1, :], -forward)
