"""
Одномерное уравнение Шрёдингера: аналитические состояния осциллятора,
численный стационарный решатель, разложение Маделунга ψ = R e^{is/ħ},
квантовое уравнение Гамильтона-Якоби и метастабильный распад.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from services.errors import InvalidArgument
from services.numerics import (
    DEFAULT_ACCURACY,
    Field,
    Field2D,
    Grid1D,
    derivative,
    differentiate_array,
    frozen_array,
    integrate_array,
    solve_tridiag_eigen,
)
from services.phase_space import RHO_EPSILON, DensityFields, snapshot_time_step
from services.wigner_moyal import CharacteristicFunction

logger = logging.getLogger(__name__)

MAX_QUANTUM_NUMBER = 30
# Радиус исключения вокруг узла ψ (в узлах сетки)
NODE_EXCLUSION = 3
NODE_EPSILON = 1e-12
MIN_SEGMENT = 5
# Предел dt·max|V|/ħ для схемы Кранка-Николсон
EVOLVE_GUARD = 0.5

SINK_CONVENTIONS = ('amplitude', 'density')
ANCHORS = ('zero', 'principal')


@dataclass(frozen=True)
class Wavefunction:
    """
    Комплексная амплитуда ψ(x) на сетке.

    Нормировка не навязывается при создании: затухающие состояния
    намеренно имеют норму меньше единицы.
    """

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    hbar: float = 1.0
    mass: float = 1.0
    energy: Optional[float] = None

    def __post_init__(self):
        values = frozen_array(np.asarray(self.values, dtype=complex), (self.grid.n_points,), 'Wavefunction')
        object.__setattr__(self, 'values', values)
        if not (self.hbar > 0 and self.mass > 0):
            raise InvalidArgument(f"ħ и m должны быть положительными: hbar={self.hbar}, mass={self.mass}")

    def norm(self) -> float:
        """∫|ψ|² dx."""
        return float(integrate_array(np.abs(self.values) ** 2, self.grid.spacing))

    def density(self) -> Field:
        return Field(self.grid, np.abs(self.values) ** 2)

    def with_values(self, values, time: Optional[float] = None) -> 'Wavefunction':
        return Wavefunction(
            self.grid, values, time=self.time if time is None else time,
            hbar=self.hbar, mass=self.mass, energy=self.energy,
        )


@dataclass(frozen=True)
class StationaryState:
    """
    Стационарное состояние численного решателя.

    energy экстраполирована по Ричардсону с сетки 2h; discrete_energy:
    собственное значение трёхточечной дискретизации.
    """

    energy: float
    discrete_energy: float
    wavefunction: Wavefunction


@dataclass(frozen=True)
class MadelungFields:
    """Полярное разложение на одном сегменте без узлов."""

    R: Field
    s: Field
    p_field: Field
    time: float = 0.0

    @property
    def grid(self) -> Grid1D:
        return self.R.grid


@dataclass(frozen=True)
class DecaySpec:
    """Начальный уровень, скорости переходов R(i->f) и (необязательно) энергии уровней."""

    initial_label: str
    rates: Mapping[str, float]
    energies: Optional[Mapping[str, float]] = None

    def __post_init__(self):
        for label, rate in self.rates.items():
            if not math.isfinite(rate) or rate < 0:
                raise InvalidArgument(f"Скорость перехода {self.initial_label}->{label} должна быть конечной и неотрицательной: {rate}")
        if self.energies is not None and self.initial_label in self.energies:
            initial = self.energies[self.initial_label]
            for label in self.rates:
                final = self.energies.get(label)
                if final is not None and final > initial:
                    raise InvalidArgument(
                        f"Переход {self.initial_label}->{label} повышает энергию ({initial} -> {final}): "
                        f"спонтанный переход невозможен"
                    )

    @classmethod
    def from_rates(cls, rates: Sequence[float], initial_label: str = 'i') -> 'DecaySpec':
        """Спецификация с безымянными конечными уровнями f1, f2, ..."""
        return cls(initial_label, {f"f{j + 1}": float(r) for j, r in enumerate(rates)})

    @property
    def final_labels(self) -> List[str]:
        return list(self.rates)

    @property
    def tau(self) -> float:
        return decay_rate(self)


@dataclass(frozen=True)
class DecayingState:
    """Метастабильное состояние φ_n = ψ_n e^{-t/τ}."""

    psi_n: Wavefunction
    tau: float
    time: float

    @property
    def factor(self) -> float:
        return math.exp(-self.time / self.tau)

    @property
    def amplitude(self) -> np.ndarray:
        return self.psi_n.values * self.factor

    def norm(self) -> float:
        return self.psi_n.norm() * self.factor ** 2

    def wavefunction(self) -> Wavefunction:
        return self.psi_n.with_values(self.amplitude, time=self.time)


def _check_quantum_number(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or not 0 <= n <= MAX_QUANTUM_NUMBER:
        raise InvalidArgument(f"Квантовое число должно быть целым в [0, {MAX_QUANTUM_NUMBER}], получено {n}")


def ho_potential(grid: Grid1D, mass: float = 1.0, omega: float = 1.0) -> Field:
    """V(x) = ½mω²x²."""
    return Field(grid, 0.5 * mass * omega ** 2 * grid.points ** 2)


def ho_eigenstate(
    n: int,
    grid: Grid1D,
    hbar: float = 1.0,
    mass: float = 1.0,
    omega: float = 1.0,
) -> Tuple[Wavefunction, float]:
    """
    Нормированное состояние осциллятора ψ_n по устойчивой рекурсии Эрмита.

    Args:
        n: Квантовое число (0..30)
        grid: Сетка, покрывающая носитель
        hbar: Постоянная Планка
        mass: Масса
        omega: Частота

    Returns:
        Tuple[Wavefunction, float]: ψ_n и энергия ħω(n + ½)
    """
    _check_quantum_number(n)
    n = int(n)
    xi = math.sqrt(mass * omega / hbar) * grid.points
    scale = (mass * omega / (math.pi * hbar)) ** 0.25
    previous = np.zeros_like(xi)
    current = scale * np.exp(-0.5 * xi ** 2)
    for j in range(n):
        following = math.sqrt(2.0 / (j + 1)) * xi * current - math.sqrt(j / (j + 1)) * previous
        previous, current = current, following
    energy = hbar * omega * (n + 0.5)
    return Wavefunction(grid, current, hbar=hbar, mass=mass, energy=energy), energy


def _dirichlet_pairs(potential: np.ndarray, spacing: float, mass: float, hbar: float, k: int):
    kinetic = hbar ** 2 / (mass * spacing ** 2)
    interior = potential[1:-1]
    diagonal = kinetic + interior
    off_diagonal = np.full(interior.size - 1, -0.5 * kinetic)
    return solve_tridiag_eigen(diagonal, off_diagonal, k)


def solve_stationary(
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    k: int = 5,
    extrapolate: bool = True,
) -> List[StationaryState]:
    """
    Нижние k состояний центральной разностной дискретизации -(ħ²/2m)∂² + V
    с нулевыми граничными значениями.

    Args:
        V: Потенциал на сетке
        mass: Масса
        hbar: Постоянная Планка
        k: Число состояний
        extrapolate: Уточнять энергии по сетке 2h (нужно нечётное число узлов)

    Returns:
        List[StationaryState]: Вещественные нормированные состояния по возрастанию энергии
    """
    grid = V.grid
    potential = np.asarray(V.values)
    if np.iscomplexobj(potential):
        raise InvalidArgument("Потенциал должен быть вещественным")
    if not 1 <= k <= grid.n_points - 2:
        raise InvalidArgument(f"k должно быть в [1, {grid.n_points - 2}], получено {k}")

    fine = _dirichlet_pairs(potential, grid.spacing, mass, hbar, k)
    coarse_energies: Optional[List[float]] = None
    if extrapolate and grid.n_points % 2 == 1 and (grid.n_points + 1) // 2 - 2 >= k:
        coarse = _dirichlet_pairs(potential[::2], 2.0 * grid.spacing, mass, hbar, k)
        coarse_energies = [pair.value for pair in coarse]
    elif extrapolate:
        logger.warning(f"Экстраполяция энергий пропущена: {grid.n_points} узлов не допускают сетку 2h")

    states = []
    for j, pair in enumerate(fine):
        values = np.zeros(grid.n_points)
        values[1:-1] = pair.vector
        significant = np.nonzero(np.abs(values) > 1e-8 * np.max(np.abs(values)))[0]
        if significant.size and values[significant[0]] < 0:
            values = -values
        values /= math.sqrt(integrate_array(values ** 2, grid.spacing))

        energy = pair.value
        if coarse_energies is not None:
            energy = (4.0 * pair.value - coarse_energies[j]) / 3.0
        psi = Wavefunction(grid, values, hbar=hbar, mass=mass, energy=energy)
        states.append(StationaryState(energy=energy, discrete_energy=pair.value, wavefunction=psi))
    logger.debug(f"Стационарный решатель: n={grid.n_points}, k={k}, E0={states[0].energy:.8f}")
    return states


def node_free_segments(
    values,
    epsilon: float = NODE_EPSILON,
    exclusion: int = NODE_EXCLUSION,
    min_length: int = MIN_SEGMENT,
) -> List[Tuple[int, int]]:
    """
    Максимальные отрезки [start, stop) без узлов амплитуды.

    Узлом считается точка с |ψ| ≤ epsilon или локальный минимум |ψ| с изломом
    (вторая разность больше самого значения), что ловит смену знака между узлами сетки.

    Args:
        values: Значения ψ или R
        epsilon: Порог амплитуды
        exclusion: Радиус исключения вокруг узла
        min_length: Минимальная длина сегмента

    Returns:
        List[Tuple[int, int]]: Диапазоны индексов
    """
    R = np.abs(np.asarray(values))
    n = R.size
    nodes = R <= epsilon
    left, mid, right = R[:-2], R[1:-1], R[2:]
    kink = (mid <= left) & (mid <= right) & (left + right - 2.0 * mid > mid)
    nodes[1:-1] |= kink

    excluded = np.zeros(n, dtype=bool)
    for i in np.nonzero(nodes)[0]:
        excluded[max(0, i - exclusion):min(n, i + exclusion + 1)] = True

    segments = []
    start = None
    for i in range(n + 1):
        inside = i < n and not excluded[i]
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            if i - start >= min_length:
                segments.append((start, i))
            start = None
    return segments


def _window_slice(psi: Wavefunction, window: Optional[Tuple[float, float]]) -> Tuple[int, int]:
    if window is None:
        return 0, psi.grid.n_points
    return psi.grid.index_window(*window)


def madelung_decompose(
    psi: Wavefunction,
    window: Optional[Tuple[float, float]] = None,
    anchor: str = 'zero',
    segments: Optional[Sequence[Tuple[int, int]]] = None,
    accuracy: int = DEFAULT_ACCURACY,
) -> List[MadelungFields]:
    """
    Разложение ψ = R e^{is/ħ} по сегментам без узлов.

    Args:
        psi: Волновая функция
        window: Окно анализа (x_lo, x_hi)
        anchor: 'zero': s = 0 в левой точке сегмента;
            'principal': s(left) = ħ·arg ψ(left) в главной ветви
        segments: Готовые диапазоны индексов полной сетки
        accuracy: Порядок разностной схемы для p = ∂s/∂x

    Returns:
        List[MadelungFields]: Поля каждого сегмента слева направо
    """
    if anchor not in ANCHORS:
        raise InvalidArgument(f"Неизвестная привязка фазы '{anchor}', ожидалась одна из {ANCHORS}")
    if segments is None:
        lo, hi = _window_slice(psi, window)
        segments = [(lo + a, lo + b) for a, b in node_free_segments(psi.values[lo:hi])]

    result = []
    for start, stop in segments:
        grid = psi.grid.sub_grid(start, stop)
        values = np.asarray(psi.values[start:stop])
        phase = np.unwrap(np.angle(values))
        if anchor == 'zero':
            phase = phase - phase[0]
        s = Field(grid, psi.hbar * phase)
        result.append(MadelungFields(
            R=Field(grid, np.abs(values)),
            s=s,
            p_field=derivative(s, 1, accuracy),
            time=psi.time,
        ))
    logger.debug(f"Разложение Маделунга: {len(result)} сегментов, t={psi.time}")
    return result


def madelung_snapshots(
    psis: Sequence[Wavefunction],
    window: Optional[Tuple[float, float]] = None,
    accuracy: int = DEFAULT_ACCURACY,
) -> List[Tuple[MadelungFields, ...]]:
    """
    Согласованные по времени разложения трёх снимков.

    Сегменты определяются по среднему снимку; фаза в левой точке каждого
    сегмента развёртывается по времени, чтобы ∂s/∂t не содержал скачков 2πħ.

    Returns:
        List[Tuple[MadelungFields, ...]]: Для каждого сегмента тройка полей по времени
    """
    if len(psis) != 3:
        raise InvalidArgument(f"Нужны ровно три снимка, получено {len(psis)}")
    middle = psis[1]
    for psi in psis:
        if psi.grid != middle.grid or psi.hbar != middle.hbar or psi.mass != middle.mass:
            raise InvalidArgument("Снимки ψ заданы на разных сетках или в разных единицах")
    snapshot_time_step([psi.time for psi in psis])

    lo, hi = _window_slice(middle, window)
    segments = [(lo + a, lo + b) for a, b in node_free_segments(middle.values[lo:hi])]
    per_time = [madelung_decompose(psi, anchor='principal', segments=segments, accuracy=accuracy) for psi in psis]

    triples = []
    for fields in zip(*per_time):
        lefts = np.unwrap([f.s.values[0] / middle.hbar for f in fields])
        aligned = []
        for f, left in zip(fields, lefts):
            shift = middle.hbar * left - f.s.values[0]
            s = Field(f.grid, f.s.values + shift)
            aligned.append(MadelungFields(f.R, s, f.p_field, time=f.time))
        triples.append(tuple(aligned))
    return triples


def _restrict(V: Field, grid: Grid1D) -> Field:
    if V.grid == grid:
        return V
    restricted = V.window(grid.x_min, grid.x_max)
    if restricted.grid.n_points != grid.n_points or not math.isclose(
        restricted.grid.spacing, grid.spacing, rel_tol=1e-9
    ):
        raise InvalidArgument("Потенциал не согласован с сеткой сегмента")
    return restricted


def quantum_potential(
    R: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
    epsilon: float = NODE_EPSILON,
    exclusion: int = NODE_EXCLUSION,
) -> List[Field]:
    """
    Квантовый потенциал Q = -(ħ²/2m)R''/R на каждом сегменте без узлов.

    Args:
        R: Амплитуда |ψ|
        mass: Масса
        hbar: Постоянная Планка
        accuracy: Порядок разностной схемы
        epsilon: Порог узла
        exclusion: Радиус исключения вокруг узла

    Returns:
        List[Field]: Q на сегментах слева направо
    """
    result = []
    for start, stop in node_free_segments(R.values, epsilon, exclusion):
        segment = R.slice(start, stop)
        curvature = derivative(segment, 2, accuracy).values
        result.append(Field(segment.grid, -hbar ** 2 / (2.0 * mass) * curvature / segment.values))
    return result


def _check_madelung_snapshots(snapshots: Sequence[MadelungFields]) -> float:
    delta = snapshot_time_step([f.time for f in snapshots])
    grid = snapshots[0].grid
    if any(f.grid != grid for f in snapshots[1:]):
        raise InvalidArgument("Снимки полей Маделунга заданы на разных сегментах")
    return delta


def qhj_residual(
    snapshots: Sequence[MadelungFields],
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = 2,
) -> Field:
    """Невязка ∂s/∂t + (∂s/∂x)²/2m + V - (ħ²/2mR)∂²R/∂x² на одном сегменте."""
    delta = _check_madelung_snapshots(snapshots)
    before, current, after = snapshots
    potential = _restrict(V, current.grid)
    ds_dt = (after.s.values - before.s.values) / (2.0 * delta)
    quantum = -hbar ** 2 / (2.0 * mass) * derivative(current.R, 2, accuracy).values / current.R.values
    residual = ds_dt + current.p_field.values ** 2 / (2.0 * mass) + potential.values + quantum
    return Field(current.grid, residual).interior(max(margin, accuracy // 2))


def sink_rate(tau: Optional[float], convention: str = 'amplitude') -> float:
    """
    Скорость убывания плотности в членах стока.

    'amplitude': 2/τ (амплитуда затухает как e^{-t/τ}); 'density': 1/τ.
    """
    if convention not in SINK_CONVENTIONS:
        raise InvalidArgument(f"Неизвестное соглашение о стоке '{convention}', ожидалось одно из {SINK_CONVENTIONS}")
    if tau is None or math.isinf(tau):
        return 0.0
    if not tau > 0:
        raise InvalidArgument(f"Время жизни должно быть положительным: {tau}")
    return (2.0 if convention == 'amplitude' else 1.0) / tau


def madelung_continuity_residual(
    snapshots: Sequence[MadelungFields],
    mass: float = 1.0,
    tau: Optional[float] = None,
    sink_convention: str = 'amplitude',
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = 2,
) -> Field:
    """Невязка ∂R²/∂t + ∂(R²s'/m)/∂x + rate·R² (rate = 0 без стока)."""
    rate = sink_rate(tau, sink_convention)
    delta = _check_madelung_snapshots(snapshots)
    before, current, after = snapshots
    density = current.R.values ** 2
    drho_dt = (after.R.values ** 2 - before.R.values ** 2) / (2.0 * delta)
    flux = density * current.p_field.values / mass
    residual = drho_dt + differentiate_array(flux, current.grid.spacing, 1, accuracy) + rate * density
    return Field(current.grid, residual).interior(max(margin, accuracy // 2))


def probability_current(psi: Wavefunction, accuracy: int = DEFAULT_ACCURACY) -> Field:
    """j = (ħ/m) Im(ψ* ∂ψ/∂x)."""
    dpsi = differentiate_array(psi.values, psi.grid.spacing, 1, accuracy)
    return Field(psi.grid, psi.hbar / psi.mass * np.imag(np.conj(psi.values) * dpsi))


def density_fields(
    psi: Wavefunction,
    accuracy: int = DEFAULT_ACCURACY,
    epsilon: float = RHO_EPSILON,
) -> DensityFields:
    """
    Поля моментов квантового состояния.

    p = m·j/ρ, дисперсия -(ħ²/4)∂²ln ρ там, где ρ выше порога, иначе 0.
    """
    rho = np.abs(psi.values) ** 2
    mask = rho > epsilon
    safe = np.where(mask, rho, 1.0)
    current = probability_current(psi, accuracy).values
    momentum = np.where(mask, psi.mass * current / safe, 0.0)

    drho = differentiate_array(rho, psi.grid.spacing, 1, accuracy)
    d2rho = differentiate_array(rho, psi.grid.spacing, 2, accuracy)
    log_curvature = np.where(mask, d2rho / safe - (drho / safe) ** 2, 0.0)
    dispersion = -psi.hbar ** 2 / 4.0 * log_curvature
    m2 = rho * (momentum ** 2 + dispersion)

    grid = psi.grid
    return DensityFields(
        Field(grid, rho), Field(grid, momentum), Field(grid, m2), Field(grid, dispersion), time=psi.time,
    )


def evolve(psi: Wavefunction, V: Field, dt: float, steps: int) -> Wavefunction:
    """
    Эволюция по схеме Кранка-Николсон с нулевыми граничными значениями.

    Args:
        psi: Начальное состояние
        V: Вещественный потенциал на сетке ψ
        dt: Шаг по времени
        steps: Число шагов

    Returns:
        Wavefunction: Состояние в момент psi.time + steps·dt
    """
    if V.grid != psi.grid:
        raise InvalidArgument("Потенциал и ψ заданы на разных сетках")
    if isinstance(steps, bool) or int(steps) != steps or steps < 0:
        raise InvalidArgument(f"Число шагов должно быть неотрицательным целым: {steps}")
    if not dt > 0:
        raise InvalidArgument(f"Шаг по времени должен быть положительным: {dt}")
    potential = np.asarray(V.values, dtype=float)
    guard = dt * float(np.max(np.abs(potential))) / psi.hbar
    if guard >= EVOLVE_GUARD:
        raise InvalidArgument(f"dt·max|V|/ħ = {guard:.3f} >= {EVOLVE_GUARD}: шаг слишком велик")

    kinetic = psi.hbar ** 2 / (psi.mass * psi.grid.spacing ** 2)
    diagonal = kinetic + potential[1:-1]
    coupling = -0.5 * kinetic
    a = 0.5j * dt / psi.hbar

    n_int = diagonal.size
    banded = np.zeros((3, n_int), dtype=complex)
    banded[0, 1:] = a * coupling
    banded[1] = 1.0 + a * diagonal
    banded[2, :-1] = a * coupling

    state = np.array(psi.values[1:-1], dtype=complex)
    for _ in range(int(steps)):
        applied = diagonal * state
        applied[1:] += coupling * state[:-1]
        applied[:-1] += coupling * state[1:]
        state = solve_banded((1, 1), banded, state - a * applied)

    values = np.zeros(psi.grid.n_points, dtype=complex)
    values[1:-1] = state
    logger.debug(f"Эволюция: {steps} шагов dt={dt}, норма={integrate_array(np.abs(values) ** 2, psi.grid.spacing):.12f}")
    return psi.with_values(values, time=psi.time + steps * dt)


def decay_rate(spec: DecaySpec) -> float:
    """
    Время жизни τ = 1/Σ R(i->f).

    Returns:
        float: τ, либо math.inf если все скорости нулевые
    """
    total = math.fsum(spec.rates.values())
    if total == 0.0:
        logger.info(f"Все скорости переходов из {spec.initial_label} нулевые: время жизни бесконечно")
        return math.inf
    return 1.0 / total


def metastable_state(psi_n: Wavefunction, tau: float, t: float) -> DecayingState:
    """φ_n = ψ_n e^{-t/τ}."""
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidArgument(f"Время жизни должно быть положительным и конечным: {tau}")
    if not (math.isfinite(t) and t >= 0):
        raise InvalidArgument(f"Момент времени должен быть неотрицательным: {t}")
    return DecayingState(psi_n=psi_n, tau=tau, time=t)


def decay_series(psi_n: Wavefunction, tau: float, t_max: float, steps: int) -> List[Dict[str, float]]:
    """
    Ряд (t, норма, e^{-2t/τ}, |разность|) на равномерной сетке [0, t_max].

    Args:
        psi_n: Нормированное стационарное состояние
        tau: Время жизни
        t_max: Конечный момент
        steps: Число интервалов

    Returns:
        List[Dict[str, float]]: Строки ряда по возрастанию t
    """
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InvalidArgument(f"Число шагов должно быть положительным целым: {steps}")
    if not (math.isfinite(t_max) and t_max >= 0):
        raise InvalidArgument(f"t_max должно быть неотрицательным: {t_max}")
    rows = []
    for j in range(int(steps) + 1):
        t = t_max * j / steps
        norm = metastable_state(psi_n, tau, t).norm()
        predicted = math.exp(-2.0 * t / tau)
        rows.append({'t': t, 'norm': norm, 'predicted': predicted, 'residual': abs(norm - predicted)})
    return rows


def master_zq_residual(
    snapshots: Sequence[CharacteristicFunction],
    V: Field,
    mass: float = 1.0,
    hbar: float = 1.0,
    tau: Optional[float] = None,
    sink_convention: str = 'amplitude',
    accuracy: int = DEFAULT_ACCURACY,
    margin: int = 2,
) -> Field2D:
    """
    |-iħ∂Z/∂t - (ħ²/m)∂²Z/∂x∂δx + δx V'(x) Z - iħ·rate·Z| по трём снимкам Z_Q.

    Args:
        snapshots: Z_Q в моменты t-Δ, t, t+Δ на общих сетках
        V: Потенциал на сетке, содержащей x_grid снимков
        mass: Масса
        hbar: Постоянная Планка
        tau: Время жизни (None: без стока)
        sink_convention: 'amplitude' или 'density'
        accuracy: Порядок разностной схемы
        margin: Число отбрасываемых граничных узлов по обеим осям

    Returns:
        Field2D: Модуль невязки во внутренней области
    """
    rate = sink_rate(tau, sink_convention)
    delta = snapshot_time_step([Z.time for Z in snapshots])
    before, current, after = snapshots
    for other in (before, after):
        if other.x_grid != current.x_grid or other.dx_grid != current.dx_grid:
            raise InvalidArgument("Снимки Z_Q заданы на разных сетках")
    potential = _restrict(V, current.x_grid)

    dZ_dt = (after.values - before.values) / (2.0 * delta)
    dZ_dx = differentiate_array(current.values, current.x_grid.spacing, 1, accuracy, axis=0)
    mixed = differentiate_array(dZ_dx, current.dx_grid.spacing, 1, accuracy, axis=1)
    force = derivative(potential, 1, accuracy).values
    shifts = current.shifts

    lhs = -1j * hbar * dZ_dt - hbar ** 2 / mass * mixed + shifts[None, :] * force[:, None] * current.values
    residual = np.abs(lhs - 1j * hbar * rate * current.values)
    return Field2D(current.x_grid, current.dx_grid, residual).interior(max(margin, accuracy // 2))
