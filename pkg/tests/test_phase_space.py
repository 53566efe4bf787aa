"""Unit тесты фазового пространства и транспортных невязок."""
import math

import numpy as np
import pytest

from services.errors import DegenerateDistribution, InvalidArgument
from services.numerics import Field, make_uniform_grid
from services.phase_space import (
    DensityFields,
    PhaseSpaceDistribution,
    classical_hamilton_residual,
    continuity_residual,
    extract_moments,
    liouville_residual,
    momentum_dispersion_direct,
    momentum_transport_residual,
    quantum_force_term,
    snapshot_time_step,
    statistical_bracket,
    statistical_hamilton_residual,
    statistical_hamiltonian,
)
from services.schrodinger_madelung import density_fields, ho_eigenstate, ho_potential
from services.verification import check_phase_space_transport


@pytest.fixture
def shifted_gaussian():
    """Гауссиана с ⟨p⟩ = 0.5 и ⟨(δp)²⟩ = 0.49"""
    x_grid = make_uniform_grid(-8.0, 8.0, 161)
    p_grid = make_uniform_grid(-8.0, 8.0, 321)
    return PhaseSpaceDistribution.from_function(
        x_grid, p_grid, lambda X, P: np.exp(-0.5 * (X - 0.3) ** 2 - (P - 0.5) ** 2 / (2.0 * 0.49)),
    )


def _free_streaming(x_grid, p_grid, t):
    """Свободное движение F(x - pt, p)"""
    return PhaseSpaceDistribution.from_function(
        x_grid, p_grid, lambda X, P: np.exp(-0.5 * (X - P * t) ** 2 - 0.5 * P ** 2), time=t,
    )


# ===== ТЕСТЫ РАСПРЕДЕЛЕНИЯ =====

def test_from_function_normalizes(shifted_gaussian):
    """Тест нормировки распределения"""
    assert shifted_gaussian.total_probability() == pytest.approx(1.0, abs=1e-10)


def test_distribution_rejects_negative_values():
    """Тест отказа для отрицательных значений"""
    x_grid = make_uniform_grid(-1.0, 1.0, 5)
    p_grid = make_uniform_grid(-1.0, 1.0, 5)
    values = np.full((5, 5), 0.25)
    values[0, 0] = -0.1
    with pytest.raises(InvalidArgument):
        PhaseSpaceDistribution(x_grid, p_grid, values)


def test_distribution_rejects_unnormalized():
    """Тест отказа для ненормированного распределения"""
    x_grid = make_uniform_grid(-1.0, 1.0, 5)
    p_grid = make_uniform_grid(-1.0, 1.0, 5)
    with pytest.raises(InvalidArgument):
        PhaseSpaceDistribution(x_grid, p_grid, np.ones((5, 5)))


def test_zero_distribution_is_degenerate():
    """Тест: нулевое распределение нельзя нормировать"""
    x_grid = make_uniform_grid(-1.0, 1.0, 5)
    p_grid = make_uniform_grid(-1.0, 1.0, 5)
    with pytest.raises(DegenerateDistribution):
        PhaseSpaceDistribution.from_function(x_grid, p_grid, lambda X, P: np.zeros_like(X))


# ===== ТЕСТЫ МОМЕНТОВ =====

def test_extract_moments(shifted_gaussian):
    """Тест импульсных моментов гауссианы"""
    fields = extract_moments(shifted_gaussian)
    rho = np.asarray(fields.rho.values)
    mask = rho > 1e-6 * rho.max()
    assert np.max(np.abs(fields.momentum.values[mask] - 0.5)) < 1e-6
    assert np.max(np.abs(fields.dispersion.values[mask] - 0.49)) < 1e-6
    assert fields.rho.x[np.argmax(rho)] == pytest.approx(0.3)


def test_dispersion_identity(shifted_gaussian):
    """Тест: M2/ρ - p² совпадает с прямой квадратурой ∫(p - p(x))²F dp/ρ"""
    fields = extract_moments(shifted_gaussian)
    direct = momentum_dispersion_direct(shifted_gaussian, fields)
    rho = np.asarray(fields.rho.values)
    mask = rho > 1e-6 * rho.max()
    assert np.max(np.abs(direct.values[mask] - fields.dispersion.values[mask])) < 1e-10


def test_moments_zero_below_threshold():
    """Тест: импульс и дисперсия обнуляются там, где ρ ниже порога"""
    x_grid = make_uniform_grid(-30.0, 30.0, 121)
    p_grid = make_uniform_grid(-6.0, 6.0, 121)
    F = PhaseSpaceDistribution.from_function(x_grid, p_grid, lambda X, P: np.exp(-0.5 * X ** 2 - 0.5 * (P - 1.0) ** 2))
    fields = extract_moments(F)
    assert fields.momentum.values[0] == 0.0
    assert fields.dispersion.values[0] == 0.0


def test_dispersion_free_fields():
    """Тест ансамбля без дисперсии: M2 = ρp²"""
    grid = make_uniform_grid(-3.0, 3.0, 31)
    rho = Field(grid, np.exp(-grid.points ** 2))
    momentum = Field(grid, np.sin(grid.points))
    fields = DensityFields.dispersion_free(rho, momentum)
    assert np.allclose(fields.m2.values, rho.values * momentum.values ** 2)
    assert fields.dispersion.max_abs() == 0.0
    assert np.allclose(fields.current.values, rho.values * momentum.values)


# ===== ТЕСТЫ ТРАНСПОРТНЫХ НЕВЯЗОК =====

def test_snapshot_time_step():
    """Тест шага тройки снимков"""
    assert snapshot_time_step([0.0, 0.1, 0.2]) == pytest.approx(0.1)
    with pytest.raises(InvalidArgument):
        snapshot_time_step([0.0, 0.1, 0.3])
    with pytest.raises(InvalidArgument):
        snapshot_time_step([0.0, 0.1])


def test_liouville_free_streaming():
    """Тест невязки Лиувилля для свободного движения"""
    x_grid = make_uniform_grid(-6.0, 6.0, 241)
    p_grid = make_uniform_grid(-6.0, 6.0, 241)
    snapshots = [_free_streaming(x_grid, p_grid, 0.5 + k * 1e-3) for k in (-1, 0, 1)]
    assert liouville_residual(snapshots, accuracy=4).max_abs() < 1e-3

    fields = [extract_moments(F) for F in snapshots]
    assert continuity_residual(fields, 1.0, accuracy=4).max_abs() < 1e-3
    assert momentum_transport_residual(snapshots, accuracy=4).max_abs() < 1e-3


def test_liouville_detects_wrong_dynamics():
    """Тест: неподвижные снимки движущегося ансамбля дают заметную невязку"""
    x_grid = make_uniform_grid(-6.0, 6.0, 121)
    p_grid = make_uniform_grid(-6.0, 6.0, 121)
    frozen = _free_streaming(x_grid, p_grid, 0.5)
    snapshots = [
        PhaseSpaceDistribution(x_grid, p_grid, frozen.values, time=0.5 + k * 1e-3) for k in (-1, 0, 1)
    ]
    assert liouville_residual(snapshots).max_abs() > 1e-2


def test_snapshots_on_different_grids_rejected():
    """Тест отказа для снимков на разных сетках"""
    p_grid = make_uniform_grid(-6.0, 6.0, 61)
    a = _free_streaming(make_uniform_grid(-6.0, 6.0, 61), p_grid, 0.0)
    b = _free_streaming(make_uniform_grid(-6.0, 6.0, 81), p_grid, 0.1)
    c = _free_streaming(make_uniform_grid(-6.0, 6.0, 61), p_grid, 0.2)
    with pytest.raises(InvalidArgument):
        liouville_residual([a, b, c])


def test_transport_in_harmonic_potential(lab_config):
    """Тест невязок для вращающейся гауссианы в потенциале осциллятора"""
    checks = check_phase_space_transport(lab_config)
    assert [c.name for c in checks] == ['liouville', 'continuity', 'momentum_transport']
    assert all(c.passed for c in checks)


# ===== ТЕСТЫ СТАТИСТИЧЕСКОГО ГАМИЛЬТОНИАНА =====

def test_statistical_bracket_ground_state():
    """Тест: скобка основного состояния осциллятора равна E₀ = ½"""
    grid = make_uniform_grid(-6.0, 6.0, 1201)
    psi, energy = ho_eigenstate(0, grid)
    fields = density_fields(psi, accuracy=6)
    V = ho_potential(grid)
    bracket = statistical_bracket(fields, V, accuracy=6).window(-3.0, 3.0)
    assert np.max(np.abs(bracket.values - energy)) < 1e-6


def test_statistical_hamiltonian_closures_agree_for_gaussian():
    """Тест: для гауссова состояния замыкания 'entropy' и 'moments' совпадают"""
    grid = make_uniform_grid(-6.0, 6.0, 1201)
    psi, _ = ho_eigenstate(0, grid)
    fields = density_fields(psi, accuracy=6).window(-3.0, 3.0)
    V = ho_potential(fields.grid)
    entropy = statistical_hamiltonian(fields, V, closure='entropy', accuracy=6)
    moments = statistical_hamiltonian(fields, V, closure='moments', accuracy=6)
    # H = x²/2 + ¼ для основного состояния
    assert np.allclose(entropy.values, 0.5 * fields.grid.points ** 2 + 0.25, atol=1e-6)
    assert np.allclose(moments.values, entropy.values, atol=1e-6)


def test_statistical_hamiltonian_unknown_closure():
    """Тест отказа для неизвестного замыкания"""
    grid = make_uniform_grid(-3.0, 3.0, 31)
    fields = DensityFields.dispersion_free(Field(grid, np.exp(-grid.points ** 2)), Field(grid, np.zeros(31)))
    with pytest.raises(InvalidArgument):
        statistical_hamiltonian(fields, ho_potential(grid), closure='virial')


def test_dispersion_free_reduces_to_classical():
    """Тест: без дисперсии статистическое уравнение совпадает с классическим"""
    grid = make_uniform_grid(-5.0, 5.0, 201)
    x = grid.points
    rho = Field(grid, np.exp(-0.5 * x ** 2) / math.sqrt(2.0 * math.pi))
    snapshots = [
        DensityFields.dispersion_free(rho, Field(grid, 0.3 + 0.2 * np.sin(x) * t), time=t)
        for t in (0.49, 0.5, 0.51)
    ]
    V = ho_potential(grid)
    assert quantum_force_term(snapshots[1]).max_abs() == 0.0
    classical = classical_hamilton_residual(snapshots, V)
    statistical = statistical_hamilton_residual(snapshots, V, closure='moments')
    assert np.array_equal(classical.values, statistical.values)
