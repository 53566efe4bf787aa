"""
Инфинитезимальное преобразование Вигнера-Мойала: характеристическая функция
Z_Q(x, δx/2) = ∫ e^{ipδx/ħ} F(x, p) dp, её пределы при δx -> 0 и проверка
факторизации Z_Q = ψ*(x - δx/2) ψ(x + δx/2).
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from services.errors import DegenerateDistribution, DomainError, InvalidArgument
from services.numerics import (
    DEFAULT_ACCURACY,
    Field,
    Field2D,
    Grid1D,
    frozen_array,
    integrate_array,
    interpolate_cubic,
    log_second_derivative,
    richardson_limit,
)
from services.phase_space import RHO_EPSILON, DensityFields, PhaseSpaceDistribution

if TYPE_CHECKING:
    from services.schrodinger_madelung import Wavefunction

logger = logging.getLogger(__name__)

# Предельная ширина оси δx (инфинитезимальный режим)
MAX_SHIFT = 0.1
HERMITIAN_TOLERANCE = 1e-10
# Число оболочек |δx| для экстраполяции Ричардсона
LIMIT_SHELLS = 3

READINGS = ('product', 'displaced')


@dataclass(frozen=True)
class CharacteristicFunction:
    """
    Z_Q на сетке x × δx. Столбец δx = 0 совпадает с ρ(x).

    Ось δx должна быть симметричной с нечётным числом узлов.
    """

    x_grid: Grid1D
    dx_grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not self.dx_grid.is_symmetric() or self.dx_grid.n_points % 2 == 0:
            raise InvalidArgument("Ось δx должна быть симметричной относительно нуля с нечётным числом узлов")
        shape = (self.x_grid.n_points, self.dx_grid.n_points)
        values = frozen_array(np.asarray(self.values, dtype=complex), shape, 'CharacteristicFunction')
        object.__setattr__(self, 'values', values)

        scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
        mirrored = np.conj(values[:, ::-1])
        if np.max(np.abs(values - mirrored)) > HERMITIAN_TOLERANCE * scale:
            raise InvalidArgument("Z_Q нарушает эрмитову симметрию Z(x, -δx) = conj Z(x, δx)")
        zero = values[:, self.zero_index]
        if np.any(zero.real < -HERMITIAN_TOLERANCE * scale):
            raise InvalidArgument("Z_Q(x, 0) должна быть неотрицательной")

    @property
    def zero_index(self) -> int:
        return self.dx_grid.n_points // 2

    @property
    def shifts(self) -> np.ndarray:
        """Значения δx с точным нулём в центре."""
        pts = self.dx_grid.points
        pts[self.zero_index] = 0.0
        return pts

    @property
    def rho(self) -> Field:
        """Z_Q(x, 0)."""
        return Field(self.x_grid, self.values[:, self.zero_index].real)


@dataclass(frozen=True)
class PartitionStats:
    """Импульсная статистика Z_Q по образцу статистической суммы."""

    mean_p: Field
    mean_p2: Field
    dispersion: Field


@dataclass(frozen=True)
class EnergyPartitionStats:
    """Энергетическая статистика канонической суммы Z(β) = Σ e^{-βE}."""

    beta: float
    mean_energy: float
    mean_energy2: float
    variance: float


def _check_shift_grid(dx_grid: Grid1D, max_shift: Optional[float]) -> None:
    if not dx_grid.is_symmetric():
        raise InvalidArgument(f"Ось δx не симметрична: [{dx_grid.x_min}, {dx_grid.x_max}]")
    if dx_grid.n_points % 2 == 0:
        raise InvalidArgument("Ось δx должна содержать δx = 0 (нечётное число узлов)")
    if max_shift is not None and dx_grid.x_max > max_shift * (1 + 1e-12):
        raise InvalidArgument(f"max|δx| = {dx_grid.x_max} выходит за инфинитезимальный режим {max_shift}")


def characteristic_function(
    F: PhaseSpaceDistribution,
    dx_grid: Grid1D,
    hbar: float = 1.0,
    max_shift: Optional[float] = MAX_SHIFT,
) -> CharacteristicFunction:
    """
    Характеристическая функция распределения.

    Args:
        F: Снимок распределения
        dx_grid: Симметричная ось δx
        hbar: Постоянная Планка
        max_shift: Допустимый max|δx| (None отключает проверку)

    Returns:
        CharacteristicFunction: Z_Q(x, δx/2) по квадратуре над p
    """
    _check_shift_grid(dx_grid, max_shift)
    p = F.p_grid.points
    shifts = dx_grid.points
    shifts[dx_grid.n_points // 2] = 0.0

    values = np.empty((F.x_grid.n_points, dx_grid.n_points), dtype=complex)
    for j, shift in enumerate(shifts):
        kernel = np.exp(1j * p * shift / hbar)
        values[:, j] = integrate_array(F.values * kernel[None, :], F.p_grid.spacing, axis=1)
    # Точная эрмитовость: квадратура e^{±ipδ} даёт сопряжённые суммы лишь до округления
    values = 0.5 * (values + np.conj(values[:, ::-1]))
    logger.debug(f"Z_Q построена: nx={F.x_grid.n_points}, nδ={dx_grid.n_points}, max|δx|={dx_grid.x_max:g}")
    return CharacteristicFunction(F.x_grid, dx_grid, values, time=F.time)


def _shell_count(Z: CharacteristicFunction) -> int:
    shells = min(LIMIT_SHELLS, Z.zero_index)
    if shells < 2:
        raise InvalidArgument(f"Для пределов δx -> 0 нужно не менее 5 узлов δx, получено {Z.dx_grid.n_points}")
    return shells


def _limit(values: np.ndarray, center: int, step: float, shells: int, order: int) -> np.ndarray:
    """Экстраполированная центральная производная по оси δx в нуле."""
    h_values = []
    estimates = []
    for s in range(1, shells + 1):
        plus = values[:, center + s]
        minus = values[:, center - s]
        h = s * step
        if order == 1:
            estimates.append((plus - minus) / (2.0 * h))
        else:
            estimates.append((plus - 2.0 * values[:, center] + minus) / h ** 2)
        h_values.append(h)
    return richardson_limit(h_values, np.array(estimates))


def _active_rows(Z: CharacteristicFunction, epsilon: float) -> np.ndarray:
    rows = Z.values[:, Z.zero_index].real > epsilon
    if not np.any(rows):
        raise DegenerateDistribution(f"Z_Q(x, 0) ниже порога {epsilon:g} на всей сетке")
    return rows


def _log_values(Z: CharacteristicFunction, rows: np.ndarray, shells: int) -> np.ndarray:
    c = Z.zero_index
    stencil = Z.values[rows, c - shells:c + shells + 1]
    if np.any(stencil.real <= 0):
        raise DomainError("Re Z_Q <= 0 в узлах шаблона: главная ветвь логарифма неприменима")
    return np.log(stencil)


def zq_limit_moments(
    Z: CharacteristicFunction,
    hbar: float = 1.0,
    epsilon: float = RHO_EPSILON,
) -> DensityFields:
    """
    Моменты из пределов Z_Q при δx -> 0.

    ρ = Z(x, 0); ρp = ħ·Im ∂Z/∂δx (производная ядра e^{ipδx/ħ} равна (i/ħ)ρp);
    M2 = -ħ² Re ∂²Z/∂δx².
    """
    shells = _shell_count(Z)
    step = Z.dx_grid.spacing
    c = Z.zero_index
    rho = Z.values[:, c].real.copy()
    rho[rho < 0] = 0.0

    flux = hbar * _limit(Z.values, c, step, shells, 1).imag
    m2 = -hbar ** 2 * _limit(Z.values, c, step, shells, 2).real

    mask = rho > epsilon
    if not np.any(mask):
        raise DegenerateDistribution(f"Z_Q(x, 0) ниже порога {epsilon:g} на всей сетке")
    safe = np.where(mask, rho, 1.0)
    momentum = np.where(mask, flux / safe, 0.0)
    dispersion = np.where(mask, m2 / safe - momentum ** 2, 0.0)

    grid = Z.x_grid
    return DensityFields(
        Field(grid, rho), Field(grid, momentum), Field(grid, m2), Field(grid, dispersion), time=Z.time,
    )


def dispersion_from_zq(
    Z: CharacteristicFunction,
    hbar: float = 1.0,
    epsilon: float = RHO_EPSILON,
) -> Field:
    """
    ⟨(δp)²⟩(x) = -ħ² lim ∂²ln Z_Q/∂δx².

    Строки, где Z(x, 0) ниже порога, получают ноль.
    """
    return momentum_partition_stats(Z, hbar, epsilon).dispersion


def momentum_partition_stats(
    Z: CharacteristicFunction,
    hbar: float = 1.0,
    epsilon: float = RHO_EPSILON,
) -> PartitionStats:
    """
    Статистика импульса из Z_Q.

    Args:
        Z: Характеристическая функция
        hbar: Постоянная Планка
        epsilon: Порог Z(x, 0)

    Returns:
        PartitionStats: ⟨p⟩ = -iħ ∂ln Z, ⟨p²⟩ = -(ħ²/Z)∂²Z, ⟨(δp)²⟩ = -ħ² ∂²ln Z
    """
    shells = _shell_count(Z)
    step = Z.dx_grid.spacing
    rows = _active_rows(Z, epsilon)
    logs = _log_values(Z, rows, shells)

    n = Z.x_grid.n_points
    mean_p = np.zeros(n)
    mean_p2 = np.zeros(n)
    dispersion = np.zeros(n)

    mean_p[rows] = (-1j * hbar * _limit(logs, shells, step, shells, 1)).real
    dispersion[rows] = -hbar ** 2 * _limit(logs, shells, step, shells, 2).real
    second = _limit(Z.values[rows], Z.zero_index, step, shells, 2)
    mean_p2[rows] = (-hbar ** 2 * second / Z.values[rows, Z.zero_index]).real

    grid = Z.x_grid
    return PartitionStats(Field(grid, mean_p), Field(grid, mean_p2), Field(grid, dispersion))


def energy_partition_stats(energies: Sequence[float], beta: float, step: float = 1e-3) -> EnergyPartitionStats:
    """
    Энергетическая сторона таблицы статистик: пределы производных по β
    от Z(β) = Σ e^{-βE_n}, вычисленные той же экстраполяцией, что и для Z_Q.

    Args:
        energies: Дискретный спектр
        beta: Обратная температура
        step: Базовый шаг по β

    Returns:
        EnergyPartitionStats: ⟨E⟩ = -∂ln Z/∂β, ⟨E²⟩ = Z⁻¹∂²Z/∂β², ⟨ΔE²⟩ = ∂²ln Z/∂β²
    """
    levels = np.asarray(energies, dtype=float)
    if levels.ndim != 1 or levels.size == 0 or not np.all(np.isfinite(levels)):
        raise InvalidArgument("Спектр должен быть непустой последовательностью конечных чисел")
    if not beta > 0 or not step > 0:
        raise InvalidArgument(f"beta и шаг должны быть положительными: beta={beta}, step={step}")

    h = min(step, beta / (2 * LIMIT_SHELLS + 2))
    betas = beta + h * np.arange(-LIMIT_SHELLS, LIMIT_SHELLS + 1)
    log_z = np.array([logsumexp(-b * levels) for b in betas])
    center = LIMIT_SHELLS
    # Z нормируется на Z(β), чтобы ⟨E²⟩ = Z⁻¹∂²Z считалась без переполнения
    ratio = np.exp(log_z - log_z[center])

    d_log = float(_limit(log_z[None, :], center, h, LIMIT_SHELLS, 1)[0])
    d2_log = float(_limit(log_z[None, :], center, h, LIMIT_SHELLS, 2)[0])
    d2_ratio = float(_limit(ratio[None, :], center, h, LIMIT_SHELLS, 2)[0])
    return EnergyPartitionStats(beta=beta, mean_energy=-d_log, mean_energy2=d2_ratio, variance=d2_log)


def closed_form_dispersion(rho: Field, hbar: float = 1.0, accuracy: int = DEFAULT_ACCURACY) -> Field:
    """-(ħ²/4)∂²ln ρ/∂x²."""
    curvature = log_second_derivative(rho, accuracy)
    return Field(rho.grid, -hbar ** 2 / 4.0 * curvature.values)


def _check_containment(outer: Grid1D, x_grid: Grid1D, dx_grid: Grid1D) -> None:
    reach = 0.5 * dx_grid.x_max
    tol = 1e-12 * max(abs(outer.x_min), abs(outer.x_max), outer.spacing)
    if x_grid.x_min - reach < outer.x_min - tol or x_grid.x_max + reach > outer.x_max + tol:
        raise InvalidArgument(
            f"Точки x ± δx/2 выходят за сетку [{outer.x_min}, {outer.x_max}]: "
            f"x ∈ [{x_grid.x_min}, {x_grid.x_max}], max|δx| = {dx_grid.x_max}"
        )


def _displaced(f: Field, x_grid: Grid1D, dx_grid: Grid1D):
    _check_containment(f.grid, x_grid, dx_grid)
    x = x_grid.points[:, None]
    half = 0.5 * dx_grid.points[None, :]
    half[0, dx_grid.n_points // 2] = 0.0
    plus = interpolate_cubic(f, (x + half).ravel()).reshape(x.shape[0], -1)
    minus = interpolate_cubic(f, (x - half).ravel()).reshape(x.shape[0], -1)
    return minus, plus


def equilibrium_characteristic_function(
    rho_eq: Field,
    x_grid: Grid1D,
    dx_grid: Grid1D,
    reading: str = 'product',
    time: float = 0.0,
) -> CharacteristicFunction:
    """
    Z_Q, построенная по равновесной плотности.

    Args:
        rho_eq: Равновесная плотность на сетке, покрывающей x ± δx/2
        x_grid: Сетка x для Z_Q
        dx_grid: Симметричная ось δx
        reading: 'product': √ρ(x - δx/2)·√ρ(x + δx/2);
            'displaced': ½[ρ(x + δx/2) + ρ(x - δx/2)]
        time: Момент времени

    Returns:
        CharacteristicFunction: Вещественная Z_Q
    """
    if reading not in READINGS:
        raise InvalidArgument(f"Неизвестное прочтение '{reading}', ожидалось одно из {READINGS}")
    _check_shift_grid(dx_grid, None)
    minus, plus = _displaced(rho_eq, x_grid, dx_grid)
    minus = np.clip(minus, 0.0, None)
    plus = np.clip(plus, 0.0, None)
    if reading == 'product':
        values = np.sqrt(minus) * np.sqrt(plus)
    else:
        values = 0.5 * (minus + plus)
    return CharacteristicFunction(x_grid, dx_grid, values, time=time)


def ansatz_characteristic_function(
    psi: 'Wavefunction',
    x_grid: Grid1D,
    dx_grid: Grid1D,
) -> CharacteristicFunction:
    """ψ*(x - δx/2)·ψ(x + δx/2) с кубической интерполяцией ψ вне узлов."""
    _check_shift_grid(dx_grid, None)
    amplitude = Field(psi.grid, psi.values)
    minus, plus = _displaced(amplitude, x_grid, dx_grid)
    return CharacteristicFunction(x_grid, dx_grid, np.conj(minus) * plus, time=psi.time)


def factorization_residual(Z: CharacteristicFunction, psi: 'Wavefunction') -> Field2D:
    """
    |Z_Q(x, δx/2) - ψ*(x - δx/2)ψ(x + δx/2)|.

    Raises:
        InvalidArgument: Если x ± δx/2 выходит за сетку ψ
    """
    ansatz = ansatz_characteristic_function(psi, Z.x_grid, Z.dx_grid)
    return Field2D(Z.x_grid, Z.dx_grid, np.abs(Z.values - ansatz.values))


def second_order_coefficient(residual: Field2D, row: int) -> float:
    """
    Коэффициент c подгонки r(δx) ≈ c·δx² по строке невязки (без δx = 0).

    Args:
        residual: Невязка на сетке x × δx
        row: Индекс строки x

    Returns:
        float: Коэффициент при δx²
    """
    shifts = residual.y_grid.points
    keep = np.abs(shifts) > 0.5 * residual.y_grid.spacing
    d2 = shifts[keep] ** 2
    r = np.asarray(residual.values)[row, keep]
    return float(np.dot(r, d2) / np.dot(d2, d2))
