"""Unit тесты энтропии, флуктуаций и энтропии Гиббса."""
import math

import numpy as np
import pytest

from services.equilibrium import (
    EXACT_GIBBS_9,
    GROUND_STATE_GIBBS,
    REFERENCE_GIBBS,
    default_grid,
    displacement_ratio_quadrature,
    entropy_curvature,
    entropy_field,
    fluctuation_density,
    fluctuation_model,
    gibbs_entropy,
    ho_gibbs_entropy,
    mean_square_displacement,
    metastability_delta,
    momentum_dispersion_entropy,
    reference_tolerance,
    table2_report_async,
    table2_rows,
    table2_solver_crosscheck,
    uncertainty_product,
)
from services.errors import DomainError, FlatDirection, InvalidArgument
from services.numerics import Field, make_uniform_grid


@pytest.fixture
def gaussian_rho():
    """Гауссова плотность с σ² = 0.64"""
    grid = make_uniform_grid(-4.0, 4.0, 161)
    sigma2 = 0.64
    return Field(grid, np.exp(-grid.points ** 2 / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2))


# ===== ТЕСТЫ ЭНТРОПИИ И ФЛУКТУАЦИЙ =====

def test_entropy_roundtrip(gaussian_rho):
    """Тест: exp(S/k) восстанавливает ρ"""
    entropy = entropy_field(gaussian_rho, k=2.0)
    assert np.allclose(entropy.density().values, gaussian_rho.values, rtol=1e-12)


def test_entropy_requires_positive_density():
    """Тест отказа для плотности с нулями"""
    grid = make_uniform_grid(-1.0, 1.0, 11)
    with pytest.raises(DomainError):
        entropy_field(Field(grid, np.abs(grid.points)))
    with pytest.raises(InvalidArgument):
        entropy_field(Field(grid, np.ones(11)), k=0.0)


def test_entropy_window(gaussian_rho):
    """Тест энтропии в окне"""
    entropy = entropy_field(gaussian_rho, window=(-1.0, 1.0))
    assert entropy.grid.x_min == pytest.approx(-1.0)
    assert entropy.grid.x_max == pytest.approx(1.0)


def test_fluctuation_model_gaussian(gaussian_rho):
    """Тест: для гауссианы ⟨(δx)²⟩ = σ²"""
    model = fluctuation_model(gaussian_rho)
    assert np.allclose(model.msd.values, 0.64, rtol=1e-8)
    assert np.allclose(mean_square_displacement(model).values, model.msd.values)
    assert np.allclose(model.gamma.values, 1.0 / (2.0 * 0.64), rtol=1e-8)


def test_fluctuation_model_flat_direction():
    """Тест: плоская или выпуклая энтропия даёт FlatDirection"""
    grid = make_uniform_grid(-1.0, 1.0, 21)
    with pytest.raises(FlatDirection):
        fluctuation_model(Field(grid, np.full(21, 0.5)))
    with pytest.raises(FlatDirection):
        fluctuation_model(Field(grid, np.exp(grid.points ** 2)))


def test_fluctuation_density(gaussian_rho):
    """Тест распределения смещений: гауссиана по δx с пиком ρ_eq(x)"""
    center = gaussian_rho.grid.n_points // 2
    samples = fluctuation_density(gaussian_rho, center, [0.0, 0.8])
    assert samples[0] == pytest.approx(gaussian_rho.values[center])
    assert samples[1] == pytest.approx(gaussian_rho.values[center] * math.exp(-0.5), rel=1e-8)
    with pytest.raises(InvalidArgument):
        fluctuation_density(gaussian_rho, 1000, [0.0])


def test_entropy_curvature(gaussian_rho):
    """Тест кривизны энтропии -k/σ²"""
    assert np.allclose(entropy_curvature(gaussian_rho, k=3.0).values, -3.0 / 0.64, rtol=1e-8)


@pytest.mark.parametrize("gamma", [0.5, 2.0, 10.0])
def test_displacement_ratio_quadrature(gamma):
    """Тест квадратуры ⟨(δx)²⟩ = 1/2γ"""
    assert displacement_ratio_quadrature(gamma) == pytest.approx(1.0 / (2.0 * gamma), rel=1e-10)


def test_displacement_ratio_rejects_nonpositive_gamma():
    """Тест отказа для γ <= 0"""
    with pytest.raises(DomainError):
        displacement_ratio_quadrature(0.0)


@pytest.mark.parametrize("hbar", [1.0, 0.5])
def test_uncertainty_product_gaussian(gaussian_rho, hbar):
    """Тест: ⟨(δp)²⟩·⟨(δx)²⟩ = ħ²/4 для гауссовой плотности"""
    product = uncertainty_product(gaussian_rho, hbar=hbar)
    assert np.max(np.abs(product.values - hbar ** 2 / 4.0)) < 1e-10


def test_momentum_dispersion_entropy(gaussian_rho):
    """Тест: ⟨(δp)²⟩ = ħ²/4σ²"""
    assert np.allclose(momentum_dispersion_entropy(gaussian_rho).values, 0.25 / 0.64, rtol=1e-8)


# ===== ТЕСТЫ ЭНТРОПИИ ГИББСА =====

def test_gibbs_entropy_ground_state_closed_form(ho_grid):
    """Тест: G₀ = -(1 + ln π)/2"""
    assert ho_gibbs_entropy(0, ho_grid) == pytest.approx(GROUND_STATE_GIBBS, abs=1e-10)


def test_gibbs_entropy_rejects_unnormalized():
    """Тест отказа для ненормированной плотности"""
    grid = make_uniform_grid(-1.0, 1.0, 11)
    with pytest.raises(InvalidArgument):
        gibbs_entropy(Field(grid, np.ones(11)))
    with pytest.raises(InvalidArgument):
        gibbs_entropy(Field(grid, -0.5 * np.ones(11)))


def test_gibbs_entropy_zero_convention():
    """Тест соглашения 0·ln 0 = 0: равномерная плотность на половине отрезка"""
    grid = make_uniform_grid(0.0, 2.0, 201)
    rho = np.where(grid.points <= 1.0, 1.0, 0.0)
    # ступенька интегрируется с погрешностью квадратуры; проверяем только конечность
    value = gibbs_entropy(Field(grid, rho), normalization_tol=1e-1)
    assert math.isfinite(value)
    assert abs(value) < 1e-1


def test_table2_rows_match_reference(ho_grid):
    """Тест воспроизведения таблицы G_n для n = 0..10 с допуском строки"""
    rows = table2_rows(10, ho_grid)
    assert [n for n, _, _ in rows] == list(range(11))
    for n, value, error in rows:
        assert error is None
        assert abs(value - REFERENCE_GIBBS[n]) <= reference_tolerance(n, 1e-4)


def test_table2_row9_matches_exact_value(ho_grid):
    """Тест: G_9 совпадает со значением высокой точности, а не с опубликованным"""
    value = ho_gibbs_entropy(9, ho_grid)
    assert value == pytest.approx(EXACT_GIBBS_9, abs=1e-6)
    assert abs(value - REFERENCE_GIBBS[9]) > 1e-4
    assert abs(value - REFERENCE_GIBBS[9]) <= reference_tolerance(9, 1e-4)


def test_reference_tolerance():
    """Тест: поправка действует только для строки 9 и не ослабляет более мягкий допуск"""
    assert reference_tolerance(9, 1e-4) == 2e-4
    assert reference_tolerance(9, 1e-3) == 1e-3
    assert reference_tolerance(3, 1e-4) == 1e-4
    assert reference_tolerance(3, 1e-12) == 1e-12


@pytest.mark.asyncio
async def test_table2_report_monotone(ho_grid):
    """Тест: G_n строго убывают, разности |G_{n+1} - G_n| тоже"""
    report = await table2_report_async(10, ho_grid)
    assert len(report.levels) == 11
    assert report.is_strictly_decreasing()
    assert report.gaps_strictly_decreasing()


@pytest.mark.asyncio
async def test_table2_report_async_order(ho_grid):
    """Тест: параллельный расчёт возвращает уровни по возрастанию n"""
    report = await table2_report_async(4, ho_grid)
    assert [n for n, _ in report.levels] == [0, 1, 2, 3, 4]


@pytest.mark.asyncio
async def test_table2_report_async_rejects_failed_level():
    """Тест: отчёт без пропусков не строится, если уровень не рассчитан"""
    with pytest.raises(InvalidArgument):
        await table2_report_async(2, default_grid(61))


def test_table2_rejects_large_n():
    """Тест отказа для n_max > 30"""
    with pytest.raises(InvalidArgument):
        table2_rows(31, default_grid())
    with pytest.raises(InvalidArgument):
        table2_rows(-1)


def test_table2_coarse_grid_deviates():
    """Тест: на сетке из 201 узла строки рассчитываются, но выходят за допуск"""
    rows = table2_rows(10, default_grid(201))
    assert len(rows) == 11
    assert all(error is None for _, _, error in rows)
    deviations = [abs(value - REFERENCE_GIBBS[n]) for n, value, _ in rows]
    assert max(deviations) > 1e-4


def test_table2_very_coarse_grid_reports_errors():
    """Тест: на сетке из 61 узла плотности не нормированы, строки содержат ошибку"""
    rows = table2_rows(10, default_grid(61))
    assert len(rows) == 11
    assert any(value is None and error for _, value, error in rows)


def test_metastability_delta():
    """Тест: переход 1 -> 0 допустим (ΔG < 0)"""
    delta = metastability_delta(REFERENCE_GIBBS[1], REFERENCE_GIBBS[0])
    assert delta.delta < 0
    assert delta.metastable_transition is True
    assert metastability_delta(REFERENCE_GIBBS[0], REFERENCE_GIBBS[1]).metastable_transition is False


def test_solver_crosscheck(ho_grid):
    """Тест сверки энтропий аналитических и численных состояний"""
    rows = table2_solver_crosscheck(3, ho_grid)
    assert len(rows) == 4
    assert all(ok for _, _, _, ok in rows)
