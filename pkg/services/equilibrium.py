"""
Энтропия и равновесные флуктуации: S = k ln ρ, гауссова модель смещений,
ограничение ⟨(δp)²⟩⟨(δx)²⟩ = ħ²/4 и энтропия Гиббса состояний осциллятора.
"""

import asyncio
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from services.errors import DomainError, FlatDirection, InvalidArgument, LabError
from services.numerics import (
    DEFAULT_ACCURACY,
    TRUNCATION,
    Field,
    Grid1D,
    integrate_array,
    log_second_derivative,
    make_uniform_grid,
    truncation_radius,
)
from services.schrodinger_madelung import MAX_QUANTUM_NUMBER, ho_eigenstate, ho_potential, solve_stationary

logger = logging.getLogger(__name__)

# Опубликованные значения энтропии Гиббса для n = 0..10 (единицы mω/ħ = 1)
REFERENCE_GIBBS = (
    -1.07237, -1.34273, -1.49859, -1.60978, -1.69650, -1.76803,
    -1.82901, -1.88216, -1.92927, -1.97179, -2.01020,
)
GROUND_STATE_GIBBS = -(1.0 + math.log(math.pi)) / 2.0
# Опубликованное G_9 отличается от значения высокой точности на 1.6e-4
EXACT_GIBBS_9 = -1.9716255544
REFERENCE_ROW_TOLERANCE = {9: 2e-4}

DEFAULT_WINDOW = (-12.0, 12.0)
DEFAULT_POINTS = 4001
# |кривизна| ниже порога считается плоским направлением
FLAT_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-6
DENSITY_FLOOR = 1e-300
SOLVER_TOLERANCE = 1e-3


@dataclass(frozen=True)
class EntropyField:
    """S(x) = k ln ρ(x)."""

    grid: Grid1D
    entropy: Field
    k_const: float = 1.0

    def density(self) -> Field:
        """exp(S/k)."""
        return Field(self.grid, np.exp(np.asarray(self.entropy.values) / self.k_const))


@dataclass(frozen=True)
class FluctuationModel:
    """Гауссова модель смещений: кривизна ∂²S/∂x², γ = |S''|/2k и ⟨(δx)²⟩ = 1/2γ."""

    gamma: Field
    curvature: Field
    msd: Field

    def __post_init__(self):
        if np.any(np.asarray(self.gamma.values) <= 0):
            raise DomainError("γ должна быть положительной")
        if np.any(np.asarray(self.curvature.values) > 0):
            raise FlatDirection("Кривизна энтропии должна быть отрицательной")


@dataclass(frozen=True)
class GibbsEntropyReport:
    """Уровни (n, G_n) по возрастанию n."""

    levels: List[Tuple[int, float]]

    @property
    def values(self) -> List[float]:
        return [g for _, g in self.levels]

    def gaps(self) -> List[float]:
        """|G_{n+1} - G_n|."""
        values = self.values
        return [abs(b - a) for a, b in zip(values, values[1:])]

    def is_strictly_decreasing(self) -> bool:
        values = self.values
        return all(b < a for a, b in zip(values, values[1:]))

    def gaps_strictly_decreasing(self) -> bool:
        gaps = self.gaps()
        return all(b < a for a, b in zip(gaps, gaps[1:]))


@dataclass(frozen=True)
class MetastabilityDelta:
    delta: float
    metastable_transition: bool


def default_grid(points: int = DEFAULT_POINTS, window: Tuple[float, float] = DEFAULT_WINDOW) -> Grid1D:
    return make_uniform_grid(window[0], window[1], points)


def _require_positive(rho: Field) -> np.ndarray:
    values = np.asarray(rho.values)
    if np.iscomplexobj(values) or np.any(values <= 0):
        raise DomainError("Плотность должна быть строго положительной в окне")
    return values


def entropy_field(rho: Field, k: float = 1.0, window: Optional[Tuple[float, float]] = None) -> EntropyField:
    """
    Энтропия S = k ln ρ.

    Args:
        rho: Плотность
        k: Постоянная энтропии
        window: Окно (x_lo, x_hi), в котором ρ > 0

    Returns:
        EntropyField: Энтропия на сетке окна
    """
    if not k > 0:
        raise InvalidArgument(f"Постоянная k должна быть положительной: {k}")
    if window is not None:
        rho = rho.window(*window)
    values = _require_positive(rho)
    return EntropyField(rho.grid, Field(rho.grid, k * np.log(values)), k_const=k)


def entropy_curvature(rho: Field, k: float = 1.0, accuracy: int = DEFAULT_ACCURACY) -> Field:
    """∂²S/∂x² = k ∂²ln ρ/∂x²."""
    _require_positive(rho)
    return Field(rho.grid, k * log_second_derivative(rho, accuracy).values)


def fluctuation_model(rho_eq: Field, k: float = 1.0, accuracy: int = DEFAULT_ACCURACY) -> FluctuationModel:
    """
    Гауссова модель флуктуаций по равновесной плотности.

    Raises:
        FlatDirection: Кривизна энтропии не отрицательна хотя бы в одной точке
    """
    curvature = entropy_curvature(rho_eq, k, accuracy)
    values = np.asarray(curvature.values)
    if np.any(values >= -FLAT_TOLERANCE):
        worst = float(np.max(values))
        raise FlatDirection(f"Кривизна энтропии {worst:.3e} не отрицательна: модель флуктуаций не определена")
    gamma = np.abs(values) / (2.0 * k)
    return FluctuationModel(
        gamma=Field(rho_eq.grid, gamma),
        curvature=curvature,
        msd=Field(rho_eq.grid, 1.0 / (2.0 * gamma)),
    )


def fluctuation_density(
    rho_eq: Field,
    x_index: int,
    dx_samples: Sequence[float],
    k: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
) -> np.ndarray:
    """
    Распределение малых смещений ρ(x, δx) = ρ_eq(x)·exp(-|S''|δx²/2k).

    Args:
        rho_eq: Равновесная плотность
        x_index: Индекс точки x
        dx_samples: Смещения δx
        k: Постоянная энтропии
        accuracy: Порядок разностной схемы

    Returns:
        np.ndarray: Значения для каждого δx
    """
    if not 0 <= x_index < rho_eq.grid.n_points:
        raise InvalidArgument(f"Индекс {x_index} вне сетки из {rho_eq.grid.n_points} узлов")
    curvature = float(entropy_curvature(rho_eq, k, accuracy).values[x_index])
    if curvature >= -FLAT_TOLERANCE:
        raise FlatDirection(f"Кривизна энтропии {curvature:.3e} в точке {x_index} не отрицательна")
    shifts = np.asarray(dx_samples, dtype=float)
    return rho_eq.values[x_index] * np.exp(-abs(curvature) * shifts ** 2 / (2.0 * k))


def mean_square_displacement(model: FluctuationModel) -> Field:
    """⟨(δx)²⟩ = 1/(2γ)."""
    gamma = np.asarray(model.gamma.values)
    if np.any(gamma <= 0):
        raise DomainError("γ должна быть положительной")
    return Field(model.gamma.grid, 1.0 / (2.0 * gamma))


def displacement_ratio_quadrature(gamma: float, points: int = 4001, relative: float = TRUNCATION) -> float:
    """
    Прямая квадратура ∫δx² e^{-γδx²} / ∫e^{-γδx²} по отрезку обрезки.

    Args:
        gamma: Параметр γ > 0
        points: Число узлов квадратуры
        relative: Относительный порог обрезки хвостов

    Returns:
        float: ⟨(δx)²⟩
    """
    if not gamma > 0:
        raise DomainError(f"γ должна быть положительной: {gamma}")
    radius = truncation_radius(1.0 / math.sqrt(2.0 * gamma), relative)
    grid = make_uniform_grid(-radius, radius, points)
    shifts = grid.points
    weight = np.exp(-gamma * shifts ** 2)
    return float(integrate_array(shifts ** 2 * weight, grid.spacing) / integrate_array(weight, grid.spacing))


def momentum_dispersion_entropy(rho: Field, hbar: float = 1.0, accuracy: int = DEFAULT_ACCURACY) -> Field:
    """⟨(δp)²⟩ = -(ħ²/4)∂²ln ρ/∂x²."""
    _require_positive(rho)
    return Field(rho.grid, -hbar ** 2 / 4.0 * log_second_derivative(rho, accuracy).values)


def uncertainty_product(
    rho: Field,
    hbar: float = 1.0,
    k: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
) -> Field:
    """Поточечное произведение ⟨(δp)²⟩·⟨(δx)²⟩."""
    model = fluctuation_model(rho, k, accuracy)
    dispersion = momentum_dispersion_entropy(rho, hbar, accuracy)
    return Field(rho.grid, dispersion.values * mean_square_displacement(model).values)


def gibbs_entropy(rho: Field, normalization_tol: float = NORMALIZATION_TOLERANCE) -> float:
    """
    G = ∫ρ ln ρ dx с соглашением 0·ln 0 = 0.

    Raises:
        InvalidArgument: Плотность отрицательна или не нормирована
    """
    values = np.asarray(rho.values)
    if np.iscomplexobj(values) or np.any(values < 0):
        raise InvalidArgument("Плотность должна быть вещественной и неотрицательной")
    total = float(integrate_array(values, rho.grid.spacing))
    if abs(total - 1.0) > normalization_tol:
        raise InvalidArgument(f"Плотность не нормирована: ∫ρ dx = {total:.8f}")
    support = values > DENSITY_FLOOR
    integrand = np.where(support, values * np.log(np.where(support, values, 1.0)), 0.0)
    return float(integrate_array(integrand, rho.grid.spacing))


def metastability_delta(g_n: float, g_m: float) -> MetastabilityDelta:
    """ΔG = G_n - G_m; переход n -> m допустим при ΔG < 0."""
    delta = g_n - g_m
    return MetastabilityDelta(delta=delta, metastable_transition=delta < 0)


def reference_tolerance(n: int, tolerance: float) -> float:
    """Допуск сверки строки n с опорной таблицей: не строже поправки для строки."""
    return max(tolerance, REFERENCE_ROW_TOLERANCE.get(n, 0.0))


def _check_n_max(n_max: int) -> None:
    if isinstance(n_max, bool) or int(n_max) != n_max or not 0 <= n_max <= MAX_QUANTUM_NUMBER:
        raise InvalidArgument(f"n_max должно быть целым в [0, {MAX_QUANTUM_NUMBER}], получено {n_max}")


def ho_gibbs_entropy(n: int, grid: Grid1D, hbar: float = 1.0, mass: float = 1.0, omega: float = 1.0) -> float:
    """Энтропия Гиббса аналитической плотности |ψ_n|²."""
    psi, _ = ho_eigenstate(n, grid, hbar, mass, omega)
    return gibbs_entropy(psi.density())


TableRow = Tuple[int, Optional[float], Optional[str]]


def _table2_row(n: int, grid: Grid1D, hbar: float, mass: float, omega: float) -> TableRow:
    try:
        return n, ho_gibbs_entropy(n, grid, hbar, mass, omega), None
    except LabError as e:
        logger.warning(f"Уровень n={n}: {e}")
        return n, None, str(e)


async def table2_rows_async(
    n_max: int,
    grid: Optional[Grid1D] = None,
    hbar: float = 1.0,
    mass: float = 1.0,
    omega: float = 1.0,
) -> List[TableRow]:
    """
    Параллельный расчёт G_n для n = 0..n_max, не прерывающийся на ошибке отдельного уровня.

    Args:
        n_max: Наибольшее квантовое число (не более 30)
        grid: Сетка (по умолчанию [-12, 12], 4001 узел)
        hbar: Постоянная Планка
        mass: Масса
        omega: Частота

    Returns:
        List[TableRow]: (n, G_n или None, текст ошибки или None) по возрастанию n
    """
    _check_n_max(n_max)
    grid = grid or default_grid()
    tasks = [asyncio.to_thread(_table2_row, n, grid, hbar, mass, omega) for n in range(int(n_max) + 1)]
    rows = list(await asyncio.gather(*tasks))
    logger.debug(f"Энтропии Гиббса рассчитаны: n_max={n_max}, узлов={grid.n_points}")
    return rows


def table2_rows(
    n_max: int,
    grid: Optional[Grid1D] = None,
    hbar: float = 1.0,
    mass: float = 1.0,
    omega: float = 1.0,
) -> List[TableRow]:
    """Синхронная обёртка над table2_rows_async."""
    return asyncio.run(table2_rows_async(n_max, grid, hbar, mass, omega))


async def table2_report_async(
    n_max: int,
    grid: Optional[Grid1D] = None,
    hbar: float = 1.0,
    mass: float = 1.0,
    omega: float = 1.0,
) -> GibbsEntropyReport:
    """
    Уровни (n, G_n) без пропусков.

    Raises:
        InvalidArgument: Хотя бы один уровень не рассчитан
    """
    rows = await table2_rows_async(n_max, grid, hbar, mass, omega)
    failed = [(n, error) for n, value, error in rows if value is None]
    if failed:
        n, error = failed[0]
        raise InvalidArgument(f"Уровень n={n} не рассчитан: {error}")
    return GibbsEntropyReport(levels=[(n, value) for n, value, _ in rows])


def table2_solver_crosscheck(
    n_max: int,
    grid: Optional[Grid1D] = None,
    tolerance: float = SOLVER_TOLERANCE,
) -> List[Tuple[int, float, float, bool]]:
    """
    Сверка энтропий аналитических плотностей с плотностями численного решателя.

    Returns:
        List[Tuple[int, float, float, bool]]: (n, G аналитическая, G решателя, совпадение в пределах допуска)
    """
    _check_n_max(n_max)
    grid = grid or default_grid()
    states = solve_stationary(ho_potential(grid), k=int(n_max) + 1)
    rows = []
    for n, state in enumerate(states):
        analytic = ho_gibbs_entropy(n, grid)
        numeric = gibbs_entropy(state.wavefunction.density())
        rows.append((n, analytic, numeric, abs(analytic - numeric) <= tolerance))
    return rows
