"""
Фазовое пространство: распределение F(x, p; t), его импульсные моменты и
невязки транспортных уравнений, выведенных из уравнения Лиувилля.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from services.errors import DegenerateDistribution, DomainError, InvalidArgument
from services.numerics import (
    DEFAULT_ACCURACY,
    Field,
    Field2D,
    Grid1D,
    derivative,
    differentiate_array,
    frozen_array,
    integrate_array,
    log_second_derivative,
)

logger = logging.getLogger(__name__)

# Порог плотности, ниже которого импульс и дисперсия полагаются равными нулю
RHO_EPSILON = 1e-12
NORMALIZATION_TOLERANCE = 1e-6
# Число отбрасываемых граничных узлов в невязках
RESIDUAL_MARGIN = 2

CLOSURES = ('entropy', 'moments')


def _zero_field(grid: Grid1D) -> Field:
    return Field(grid, np.zeros(grid.n_points))


@dataclass(frozen=True)
class PhaseSpaceDistribution:
    """
    Выборка F(x, p) на прямом произведении сеток в фиксированный момент времени.

    Потенциал задаётся полем на x_grid; None означает V = 0.
    """

    x_grid: Grid1D
    p_grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    mass: float = 1.0
    potential: Optional[Field] = None

    def __post_init__(self):
        shape = (self.x_grid.n_points, self.p_grid.n_points)
        values = frozen_array(self.values, shape, 'PhaseSpaceDistribution')
        if np.iscomplexobj(values):
            raise InvalidArgument("F(x, p) должна быть вещественной")
        if np.any(values < 0):
            raise InvalidArgument("F(x, p) должна быть неотрицательной")
        object.__setattr__(self, 'values', values)
        if not self.mass > 0:
            raise InvalidArgument(f"Масса должна быть положительной: {self.mass}")
        if self.potential is None:
            object.__setattr__(self, 'potential', _zero_field(self.x_grid))
        elif self.potential.grid != self.x_grid:
            raise InvalidArgument("Потенциал должен быть задан на x_grid распределения")

        total = self.total_probability()
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidArgument(f"Распределение не нормировано: ∬F dx dp = {total:.8f}")

    @classmethod
    def from_function(
        cls,
        x_grid: Grid1D,
        p_grid: Grid1D,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        time: float = 0.0,
        mass: float = 1.0,
        potential: Optional[Field] = None,
        normalize: bool = True,
    ) -> 'PhaseSpaceDistribution':
        """
        Строит распределение по функции func(X, P), вычисленной на сетке.

        Args:
            x_grid: Сетка координат
            p_grid: Сетка импульсов
            func: Векторизованная функция F(x, p)
            time: Момент времени снимка
            mass: Масса частицы
            potential: Потенциал V(x) на x_grid
            normalize: Перенормировать квадратурой до ∬F = 1

        Returns:
            PhaseSpaceDistribution: Новый снимок
        """
        X, P = np.meshgrid(x_grid.points, p_grid.points, indexing='ij')
        values = np.asarray(func(X, P), dtype=float)
        if normalize:
            total = integrate_array(integrate_array(values, p_grid.spacing, axis=1), x_grid.spacing)
            if not total > 0:
                raise DegenerateDistribution("Нельзя нормировать распределение с нулевой массой")
            values = values / total
        return cls(x_grid, p_grid, values, time=time, mass=mass, potential=potential)

    def total_probability(self) -> float:
        """Квадратура ∬F dx dp."""
        marginal = integrate_array(self.values, self.p_grid.spacing, axis=1)
        return float(integrate_array(marginal, self.x_grid.spacing))


@dataclass(frozen=True)
class DensityFields:
    """Поля ρ(x), p(x), M2(x) и ⟨(δp)²⟩(x) на общей сетке."""

    rho: Field
    momentum: Field
    m2: Field
    dispersion: Field
    time: float = 0.0

    def __post_init__(self):
        grid = self.rho.grid
        for name in ('momentum', 'm2', 'dispersion'):
            if getattr(self, name).grid != grid:
                raise InvalidArgument(f"Поле {name} задано на другой сетке, чем rho")
        if np.iscomplexobj(self.rho.values) or np.any(self.rho.values < 0):
            raise InvalidArgument("Плотность rho должна быть вещественной и неотрицательной")

    @classmethod
    def dispersion_free(cls, rho: Field, momentum: Field, time: float = 0.0) -> 'DensityFields':
        """Ансамбль без дисперсии: M2 = ρp², ⟨(δp)²⟩ = 0."""
        m2 = Field(rho.grid, rho.values * momentum.values ** 2)
        return cls(rho, momentum, m2, _zero_field(rho.grid), time=time)

    @property
    def grid(self) -> Grid1D:
        return self.rho.grid

    @property
    def current(self) -> Field:
        """Поток ρp."""
        return Field(self.grid, self.rho.values * self.momentum.values)

    def slice(self, start: int, stop: int) -> 'DensityFields':
        return DensityFields(
            self.rho.slice(start, stop),
            self.momentum.slice(start, stop),
            self.m2.slice(start, stop),
            self.dispersion.slice(start, stop),
            time=self.time,
        )

    def window(self, x_lo: float, x_hi: float) -> 'DensityFields':
        """Поля, ограниченные отрезком [x_lo, x_hi]."""
        return self.slice(*self.grid.index_window(x_lo, x_hi))


def _positive_mask(rho: np.ndarray, epsilon: float) -> np.ndarray:
    return rho > epsilon


def _safe_ratio(numerator: np.ndarray, rho: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, numerator / np.where(mask, rho, 1.0), 0.0)


def extract_moments(F: PhaseSpaceDistribution, epsilon: float = RHO_EPSILON) -> DensityFields:
    """
    Импульсные моменты распределения.

    Args:
        F: Снимок распределения
        epsilon: Порог плотности для определения p(x) и дисперсии

    Returns:
        DensityFields: ρ = ∫F dp, p = ∫pF dp / ρ, M2 = ∫p²F dp, ⟨(δp)²⟩ = M2/ρ - p²
    """
    p = F.p_grid.points
    hp = F.p_grid.spacing
    rho = integrate_array(F.values, hp, axis=1)
    flux = integrate_array(F.values * p[None, :], hp, axis=1)
    m2 = integrate_array(F.values * (p ** 2)[None, :], hp, axis=1)

    mask = _positive_mask(rho, epsilon)
    if not np.any(mask):
        raise DegenerateDistribution(f"Плотность ниже порога {epsilon:g} на всей сетке")

    momentum = _safe_ratio(flux, rho, mask)
    dispersion = np.where(mask, _safe_ratio(m2, rho, mask) - momentum ** 2, 0.0)
    logger.debug(f"Моменты извлечены: nx={F.x_grid.n_points}, np={F.p_grid.n_points}, t={F.time}")

    grid = F.x_grid
    return DensityFields(
        Field(grid, rho),
        Field(grid, momentum),
        Field(grid, m2),
        Field(grid, dispersion),
        time=F.time,
    )


def momentum_dispersion_direct(
    F: PhaseSpaceDistribution,
    fields: DensityFields,
    epsilon: float = RHO_EPSILON,
) -> Field:
    """Дисперсия ∫[p - p(x)]²F dp / ρ(x), посчитанная прямой квадратурой."""
    if fields.grid != F.x_grid:
        raise InvalidArgument("Поля моментов заданы на другой сетке, чем распределение")
    p = F.p_grid.points
    deviation = p[None, :] - np.asarray(fields.momentum.values)[:, None]
    second = integrate_array(deviation ** 2 * F.values, F.p_grid.spacing, axis=1)
    rho = np.asarray(fields.rho.values)
    mask = _positive_mask(rho, epsilon)
    if not np.any(mask):
        raise DegenerateDistribution(f"Плотность ниже порога {epsilon:g} на всей сетке")
    return Field(F.x_grid, _safe_ratio(second, rho, mask))


def _margin(accuracy: int, margin: int) -> int:
    return max(margin, accuracy // 2)


def snapshot_time_step(times: Sequence[float]) -> float:
    if len(times) != 3:
        raise InvalidArgument(f"Нужны ровно три снимка, получено {len(times)}")
    t0, t1, t2 = times
    step = t1 - t0
    if not step > 0 or not math.isclose(t2 - t1, step, rel_tol=1e-9, abs_tol=1e-15):
        raise InvalidArgument(f"Снимки должны идти с равным положительным шагом: {tuple(times)}")
    return step


def _check_distribution_snapshots(snapshots: Sequence[PhaseSpaceDistribution]) -> float:
    delta = snapshot_time_step([f.time for f in snapshots])
    first = snapshots[0]
    for other in snapshots[1:]:
        if other.x_grid != first.x_grid or other.p_grid != first.p_grid:
            raise InvalidArgument("Снимки распределения заданы на разных сетках")
        if other.mass != first.mass:
            raise InvalidArgument("Снимки распределения имеют разную массу")
        if not np.array_equal(other.potential.values, first.potential.values):
            raise InvalidArgument("Снимки распределения имеют разный потенциал")
    return delta


def _check_field_snapshots(snapshots: Sequence[DensityFields]) -> float:
    delta = snapshot_time_step([f.time for f in snapshots])
    grid = snapshots[0].grid
    if any(f.grid != grid for f in snapshots[1:]):
        raise InvalidArgument("Снимки полей заданы на разных сетках")
    return delta


def _check_potential(V: Field, grid: Grid1D) -> None:
    if V.grid != grid:
        raise InvalidArgument("Потенциал задан на другой сетке, чем поля")


def liouville_residual(
    snapshots: Sequence[PhaseSpaceDistribution],
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = RESIDUAL_MARGIN,
) -> Field2D:
    """
    Невязка уравнения Лиувилля ∂F/∂t + (p/m)∂F/∂x - V'(x)∂F/∂p.

    Args:
        snapshots: Снимки в моменты t-Δ, t, t+Δ
        accuracy: Порядок пространственных разностей
        margin: Число отбрасываемых граничных узлов

    Returns:
        Field2D: Невязка во внутренней области в момент t
    """
    delta = _check_distribution_snapshots(snapshots)
    before, current, after = snapshots
    p = current.p_grid.points

    dF_dt = (after.values - before.values) / (2.0 * delta)
    dF_dx = differentiate_array(current.values, current.x_grid.spacing, 1, accuracy, axis=0)
    dF_dp = differentiate_array(current.values, current.p_grid.spacing, 1, accuracy, axis=1)
    force = derivative(current.potential, 1, accuracy).values

    residual = dF_dt + (p[None, :] / current.mass) * dF_dx - force[:, None] * dF_dp
    return Field2D(current.x_grid, current.p_grid, residual).interior(_margin(accuracy, margin))


def continuity_residual(
    snapshots: Sequence[DensityFields],
    mass: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = RESIDUAL_MARGIN,
) -> Field:
    """Невязка уравнения непрерывности ∂ρ/∂t + (1/m)∂(ρp)/∂x."""
    delta = _check_field_snapshots(snapshots)
    before, current, after = snapshots
    drho_dt = (after.rho.values - before.rho.values) / (2.0 * delta)
    dflux_dx = differentiate_array(current.current.values, current.grid.spacing, 1, accuracy)
    residual = drho_dt + dflux_dx / mass
    return Field(current.grid, residual).interior(_margin(accuracy, margin))


def momentum_transport_residual(
    snapshots: Sequence[PhaseSpaceDistribution],
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = RESIDUAL_MARGIN,
    epsilon: float = RHO_EPSILON,
) -> Field:
    """Невязка переноса импульса ∂(ρp)/∂t + (1/m)∂M2/∂x + V'ρ."""
    delta = _check_distribution_snapshots(snapshots)
    before, current, after = (extract_moments(f, epsilon) for f in snapshots)
    snapshot = snapshots[1]

    dflux_dt = (after.current.values - before.current.values) / (2.0 * delta)
    dm2_dx = differentiate_array(current.m2.values, current.grid.spacing, 1, accuracy)
    force = derivative(snapshot.potential, 1, accuracy).values

    residual = dflux_dt + dm2_dx / snapshot.mass + force * current.rho.values
    return Field(current.grid, residual).interior(_margin(accuracy, margin))


def _check_closure(closure: str) -> None:
    if closure not in CLOSURES:
        raise InvalidArgument(f"Неизвестное замыкание '{closure}', ожидалось одно из {CLOSURES}")


def _require_positive_density(fields: DensityFields) -> None:
    if np.any(np.asarray(fields.rho.values) <= 0):
        raise DomainError("Плотность должна быть строго положительной в окне вычисления")


def statistical_hamiltonian(
    fields: DensityFields,
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    closure: str = 'entropy',
    accuracy: int = DEFAULT_ACCURACY,
) -> Field:
    """
    Средняя статистическая энергия H(x).

    При closure='entropy' дисперсия выражается через энтропию:
    H = p²/2m + V - (ħ²/8m)∂²ln ρ/∂x². При closure='moments' используется
    собственная дисперсия ансамбля: H = (p² + ⟨(δp)²⟩)/2m + V.

    Args:
        fields: Поля моментов (уже ограниченные окном)
        V: Потенциал на той же сетке
        mass: Масса
        hbar: Постоянная Планка
        closure: 'entropy' или 'moments'
        accuracy: Порядок разностной схемы

    Returns:
        Field: H(x)
    """
    _check_closure(closure)
    _check_potential(V, fields.grid)
    kinetic = fields.momentum.values ** 2 / (2.0 * mass) + V.values
    if closure == 'moments':
        return Field(fields.grid, kinetic + fields.dispersion.values / (2.0 * mass))

    _require_positive_density(fields)
    curvature = log_second_derivative(fields.rho, accuracy).values
    return Field(fields.grid, kinetic - hbar ** 2 / (8.0 * mass) * curvature)


def statistical_bracket(
    fields: DensityFields,
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
) -> Field:
    """Комбинация H - (ħ²/8mρ)∂²ρ/∂x²; для вещественного собственного состояния равна E."""
    hamiltonian = statistical_hamiltonian(fields, V, mass, hbar, 'entropy', accuracy)
    rho = fields.rho.values
    rho_xx = derivative(fields.rho, 2, accuracy).values
    return Field(fields.grid, hamiltonian.values - hbar ** 2 / (8.0 * mass) * rho_xx / rho)


def quantum_force_term(
    fields: DensityFields,
    mass: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
    epsilon: float = RHO_EPSILON,
) -> Field:
    """Член (1/mρ)∂(ρ⟨(δp)²⟩)/∂x; нулевой там, где ρ ниже порога."""
    rho = np.asarray(fields.rho.values)
    pressure = differentiate_array(rho * fields.dispersion.values, fields.grid.spacing, 1, accuracy)
    mask = _positive_mask(rho, epsilon)
    return Field(fields.grid, _safe_ratio(pressure, rho, mask) / mass)


def classical_hamilton_residual(
    snapshots: Sequence[DensityFields],
    V: Field,
    mass: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = RESIDUAL_MARGIN,
) -> Field:
    """Невязка классического уравнения Гамильтона ∂p/∂t + ∂(p²/2m + V)/∂x."""
    delta = _check_field_snapshots(snapshots)
    before, current, after = snapshots
    _check_potential(V, current.grid)
    dp_dt = (after.momentum.values - before.momentum.values) / (2.0 * delta)
    energy = current.momentum.values ** 2 / (2.0 * mass) + V.values
    residual = dp_dt + differentiate_array(energy, current.grid.spacing, 1, accuracy)
    return Field(current.grid, residual).interior(_margin(accuracy, margin))


def statistical_hamilton_residual(
    snapshots: Sequence[DensityFields],
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    closure: str = 'entropy',
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = RESIDUAL_MARGIN,
) -> Field:
    """
    Невязка статистического уравнения Гамильтона.

    closure='entropy': ∂p/∂t + ∂/∂x[H - (ħ²/8mρ)∂²ρ/∂x²].
    closure='moments': ∂p/∂t + ∂(p²/2m + V)/∂x + (1/mρ)∂(ρ⟨(δp)²⟩)/∂x;
    для ансамбля без дисперсии последний член тождественно равен нулю.
    """
    _check_closure(closure)
    delta = _check_field_snapshots(snapshots)
    before, current, after = snapshots
    _check_potential(V, current.grid)

    dp_dt = (after.momentum.values - before.momentum.values) / (2.0 * delta)
    if closure == 'moments':
        energy = current.momentum.values ** 2 / (2.0 * mass) + V.values
        quantum = quantum_force_term(current, mass, accuracy)
        residual = dp_dt + differentiate_array(energy, current.grid.spacing, 1, accuracy) + quantum.values
    else:
        bracket = statistical_bracket(current, V, mass, hbar, accuracy)
        residual = dp_dt + differentiate_array(bracket.values, current.grid.spacing, 1, accuracy)
    return Field(current.grid, residual).interior(_margin(accuracy, margin))
