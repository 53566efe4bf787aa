"""
Каноническое равновесие: распределение F = C e^{-2βH}, его характеристическая
функция, условия равновесия, амплитуда ψ = √C₁ e^{-βV} e^{-iEt/ħ},
энергетические соотношения и частный случай гармонического осциллятора.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from services.equilibrium import entropy_field
from services.errors import InvalidArgument, InvalidModel, PreconditionViolation
from services.numerics import (
    TRUNCATION,
    Field,
    Field2D,
    integrate_array,
    make_uniform_grid,
    truncation_radius,
)
from services.schrodinger_madelung import Wavefunction
from services.wigner_moyal import CharacteristicFunction, factorization_residual, second_order_coefficient

logger = logging.getLogger(__name__)

DEFAULT_Q_WINDOW = (-12.0, 12.0)
QUADRATURE_POINTS = 4001
HESSIAN_STEP = 1e-4
CONDITION_TOLERANCE = 1e-6
ANSATZ_TOLERANCE = 1e-6
ENERGY_TOLERANCE = 1e-8
# K_B·T ниже порога: каноническое описание помечается как непригодное
PATHOLOGY_TEMPERATURE = 1e-6

Potential = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CanonicalEnsemble:
    """
    Каноническое распределение с сепарабельным потенциалом V = Σ V_n(q_n).

    Константы C и C₁ вычисляются нормировочной квадратурой по отрезку
    q_window (по координатам) и по отрезку обрезки гауссианы (по импульсам).
    При confined=True отрезок q_window считается ящиком и хвосты не проверяются.
    """

    temperature: float
    masses: Tuple[float, ...]
    potentials: Tuple[Potential, ...]
    hbar: float = 1.0
    kb: float = 1.0
    q_window: Tuple[float, float] = DEFAULT_Q_WINDOW
    quadrature_points: int = QUADRATURE_POINTS
    truncation: float = TRUNCATION
    confined: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'masses', tuple(float(m) for m in self.masses))
        object.__setattr__(self, 'potentials', tuple(self.potentials))
        if len(self.masses) == 0 or len(self.masses) != len(self.potentials):
            raise InvalidArgument("Число масс и потенциалов должно совпадать и быть положительным")
        if any(not m > 0 for m in self.masses):
            raise InvalidArgument(f"Массы должны быть положительными: {self.masses}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise InvalidArgument(f"Температура должна быть конечной и неотрицательной: {self.temperature}")
        if not (self.hbar > 0 and self.kb > 0):
            raise InvalidArgument(f"ħ и K_B должны быть положительными: hbar={self.hbar}, kb={self.kb}")

    @classmethod
    def harmonic(
        cls,
        masses: Sequence[float],
        omegas: Sequence[float],
        temperature: float,
        hbar: float = 1.0,
        kb: float = 1.0,
        **kwargs,
    ) -> 'CanonicalEnsemble':
        """Ансамбль независимых осцилляторов V_n = ½m_nω_n²q_n²."""
        if len(masses) != len(omegas):
            raise InvalidArgument("Число масс и частот должно совпадать")
        potentials = tuple(_harmonic_potential(m, w) for m, w in zip(masses, omegas))
        return cls(temperature, tuple(masses), potentials, hbar=hbar, kb=kb, **kwargs)

    @classmethod
    def locked_harmonic(
        cls,
        mass: float = 1.0,
        omega: float = 1.0,
        n_dof: int = 1,
        hbar: float = 1.0,
        kb: float = 1.0,
        **kwargs,
    ) -> 'CanonicalEnsemble':
        """N одинаковых осцилляторов при температуре K_B T = ħω/2."""
        temperature = hbar * omega / (2.0 * kb)
        return cls.harmonic([mass] * n_dof, [omega] * n_dof, temperature, hbar=hbar, kb=kb, **kwargs)

    @property
    def n_dof(self) -> int:
        return len(self.masses)

    @property
    def beta2(self) -> float:
        """2β = 1/(K_B T); бесконечность при T = 0."""
        if self.temperature == 0:
            return math.inf
        return 1.0 / (self.kb * self.temperature)

    @property
    def beta(self) -> float:
        return self.beta2 / 2.0

    def _require_temperature(self) -> None:
        if self.temperature == 0:
            raise InvalidModel("При T = 0 каноническое распределение не нормируемо")

    def potential(self, q: Sequence) -> np.ndarray:
        """V(q) = Σ V_n(q_n)."""
        self._check_configuration(q)
        return sum(np.asarray(v(np.asarray(qn, dtype=float)), dtype=float) for v, qn in zip(self.potentials, q))

    def _check_configuration(self, q: Sequence) -> None:
        if len(q) != self.n_dof:
            raise InvalidArgument(f"Ожидалось {self.n_dof} координат, получено {len(q)}")

    @cached_property
    def position_partitions(self) -> Tuple[float, ...]:
        """∫e^{-2βV_n(q)} dq по каждой степени свободы."""
        self._require_temperature()
        grid = make_uniform_grid(self.q_window[0], self.q_window[1], self.quadrature_points)
        q = grid.points
        result = []
        for n, potential in enumerate(self.potentials):
            exponent = -self.beta2 * np.asarray(potential(q), dtype=float)
            if not np.all(np.isfinite(exponent)):
                raise InvalidModel(f"Потенциал степени свободы {n} не конечен в окне")
            peak = float(np.max(exponent))
            edge = max(exponent[0], exponent[-1]) - peak
            if not self.confined and edge > math.log(self.truncation):
                raise InvalidModel(
                    f"Распределение степени свободы {n} не убывает к краям окна {self.q_window}: "
                    f"потенциал не удерживает ансамбль"
                )
            result.append(math.exp(peak) * float(integrate_array(np.exp(exponent - peak), grid.spacing)))
        return tuple(result)

    def momentum_grid(self, n: int):
        """Сетка импульсов, покрывающая e^{-βp²/m_n} до порога обрезки."""
        self._require_temperature()
        sigma = math.sqrt(self.masses[n] * self.kb * self.temperature)
        radius = truncation_radius(sigma, self.truncation)
        return make_uniform_grid(-radius, radius, self.quadrature_points)

    @cached_property
    def momentum_partitions(self) -> Tuple[float, ...]:
        """∫e^{-βp²/m_n} dp по каждой степени свободы."""
        result = []
        for n, mass in enumerate(self.masses):
            grid = self.momentum_grid(n)
            weight = np.exp(-self.beta * grid.points ** 2 / mass)
            result.append(float(integrate_array(weight, grid.spacing)))
        return tuple(result)

    @cached_property
    def c1(self) -> float:
        """Нормировка C₁ плотности ρ_eq = C₁e^{-2βV}."""
        return 1.0 / math.prod(self.position_partitions)

    @cached_property
    def c(self) -> float:
        """Нормировка C распределения F = Ce^{-2βH}."""
        return self.c1 / math.prod(self.momentum_partitions)


def _harmonic_potential(mass: float, omega: float) -> Potential:
    stiffness = mass * omega ** 2

    def potential(q):
        return 0.5 * stiffness * np.asarray(q, dtype=float) ** 2

    return potential


@dataclass(frozen=True)
class EquilibriumPointReport:
    """Невязки условий равновесия по степеням свободы."""

    q0: Tuple[float, ...]
    gradient_check: Tuple[float, ...]
    curvature_lock: Tuple[float, ...]
    tolerance: float = CONDITION_TOLERANCE
    passes: bool = field(init=False)

    def __post_init__(self):
        ok = all(r <= self.tolerance for r in self.gradient_check + self.curvature_lock)
        object.__setattr__(self, 'passes', ok)

    @property
    def gradient_passes(self) -> bool:
        return all(r <= self.tolerance for r in self.gradient_check)

    @property
    def curvature_passes(self) -> bool:
        return all(r <= self.tolerance for r in self.curvature_lock)


@dataclass(frozen=True)
class AnsatzReport:
    """Коэффициенты при δq² невязок факторизации и смещённой плотности для одной степени свободы."""

    dof: int
    factorization_coefficient: float
    displacement_coefficient: float
    tolerance: float = ANSATZ_TOLERANCE

    @property
    def factorizes(self) -> bool:
        return self.factorization_coefficient <= self.tolerance

    @property
    def displaced_reading_holds(self) -> bool:
        return self.displacement_coefficient <= self.tolerance

    @property
    def higher_order(self) -> bool:
        """Представление точно до второго порядка по δq."""
        return self.factorizes and self.displaced_reading_holds


@dataclass(frozen=True)
class EnergyRelation:
    e_full: float
    e_equilibrium: float

    @property
    def agree(self) -> bool:
        return abs(self.e_full - self.e_equilibrium) <= ENERGY_TOLERANCE


@dataclass(frozen=True)
class HarmonicLock:
    """Величины осциллятора при K_B T = ħω/2."""

    temperature_lock: float
    thermal_energy: float
    energy: float
    dispersion_per_mass: float
    dispersion: float
    msd: float
    uncertainty_product: float
    uncertainty_holds: bool
    pathology: bool


def canonical_F(ensemble: CanonicalEnsemble, q: Sequence, p: Sequence):
    """
    Нормированная плотность Ce^{-2βH(q, p)}.

    Args:
        ensemble: Ансамбль
        q: Координаты (по одной на степень свободы, допускаются массивы)
        p: Импульсы той же формы

    Returns:
        Значение плотности (скаляр или массив)
    """
    ensemble._check_configuration(p)
    kinetic = sum(np.asarray(pn, dtype=float) ** 2 / (2.0 * m) for pn, m in zip(p, ensemble.masses))
    hamiltonian = kinetic + ensemble.potential(q)
    return ensemble.c * np.exp(-ensemble.beta2 * hamiltonian)


@dataclass(frozen=True)
class CanonicalMoments:
    """Квадратуры F(q, p) на фазовой сетке одной степени свободы."""

    norm: float
    momentum_variance: float
    factorization_residual: float


def canonical_moments(ensemble: CanonicalEnsemble, points: int = 801) -> CanonicalMoments:
    """
    Нормировка F, дисперсия импульсного маргинала и отклонение F от произведения маргиналов.

    Сетка q совпадает с окном ансамбля, сетка p покрывает гауссиану до порога обрезки.
    Для канонического распределения дисперсия равна m·K_B·T, отклонение равно нулю.

    Args:
        ensemble: Ансамбль с одной степенью свободы
        points: Число узлов по каждой оси

    Returns:
        CanonicalMoments: Результаты квадратур
    """
    if ensemble.n_dof != 1:
        raise InvalidArgument(f"Фазовая сетка строится для одной степени свободы, получено {ensemble.n_dof}")
    ensemble._require_temperature()
    q_grid = make_uniform_grid(ensemble.q_window[0], ensemble.q_window[1], points)
    radius = ensemble.momentum_grid(0).x_max
    p_grid = make_uniform_grid(-radius, radius, points)
    Q, P = np.meshgrid(q_grid.points, p_grid.points, indexing='ij')
    F = canonical_F(ensemble, [Q], [P])

    q_marginal = integrate_array(F, p_grid.spacing, axis=1)
    p_marginal = integrate_array(F, q_grid.spacing, axis=0)
    norm = float(integrate_array(q_marginal, q_grid.spacing))
    p = p_grid.points
    mean = float(integrate_array(p * p_marginal, p_grid.spacing)) / norm
    variance = float(integrate_array((p - mean) ** 2 * p_marginal, p_grid.spacing)) / norm
    product = np.outer(q_marginal, p_marginal) / norm
    residual = float(np.max(np.abs(F - product)) / np.max(F))
    logger.debug(f"Фазовые квадратуры: ∫F = {norm:.12f}, ⟨(δp)²⟩ = {variance:.12f}, отклонение {residual:.2e}")
    return CanonicalMoments(norm=norm, momentum_variance=variance, factorization_residual=residual)


def boltzmann_zq(ensemble: CanonicalEnsemble, q: Sequence[float], dq: Sequence[float]) -> float:
    """Квадратура ∫e^{ip·δq/ħ}F(q, p)dp по всем импульсам."""
    ensemble._check_configuration(dq)
    value = ensemble.c1 * math.exp(-ensemble.beta2 * float(ensemble.potential(q)))
    for n, (mass, shift) in enumerate(zip(ensemble.masses, dq)):
        grid = ensemble.momentum_grid(n)
        p = grid.points
        integrand = np.exp(-ensemble.beta * p ** 2 / mass) * np.exp(1j * p * shift / ensemble.hbar)
        value *= integrate_array(integrand, grid.spacing).real / ensemble.momentum_partitions[n]
    return float(value)


def boltzmann_zq_closed_form(ensemble: CanonicalEnsemble, q: Sequence[float], dq: Sequence[float]) -> float:
    """C₁e^{-2βV(q)}·exp(-Σ m_n δq_n²/(4βħ²))."""
    ensemble._require_temperature()
    ensemble._check_configuration(dq)
    envelope = sum(m * float(s) ** 2 for m, s in zip(ensemble.masses, dq)) / (4.0 * ensemble.beta * ensemble.hbar ** 2)
    return float(ensemble.c1 * math.exp(-ensemble.beta2 * float(ensemble.potential(q)) - envelope))


def _dof_function(ensemble: CanonicalEnsemble, n: int) -> Callable[[float], float]:
    potential = ensemble.potentials[n]
    return lambda x: float(potential(np.asarray(x, dtype=float)))


def _refined_derivatives(fn: Callable[[float], float], x: float, step: float) -> Tuple[float, float]:
    def first(h):
        return (fn(x + h) - fn(x - h)) / (2.0 * h)

    def second(h):
        return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / h ** 2

    half = 0.5 * step
    return (4.0 * first(half) - first(step)) / 3.0, (4.0 * second(half) - second(step)) / 3.0


def lock_curvature(ensemble: CanonicalEnsemble, n: int) -> float:
    """m_n/(β²ħ²); ноль при T = 0."""
    if ensemble.temperature == 0:
        return 0.0
    return ensemble.masses[n] / (ensemble.beta ** 2 * ensemble.hbar ** 2)


def equilibrium_conditions(
    ensemble: CanonicalEnsemble,
    q0: Sequence[float],
    tolerance: float = CONDITION_TOLERANCE,
    step: float = HESSIAN_STEP,
) -> EquilibriumPointReport:
    """
    Невязки |V'(q0)| и |V''(q0) - m_n/(β²ħ²)| по каждой степени свободы.

    Args:
        ensemble: Ансамбль
        q0: Точка конфигурационного пространства
        tolerance: Допуск прохождения
        step: Шаг центральных разностей (с одним уточнением по Ричардсону)

    Returns:
        EquilibriumPointReport: Отчёт о точке
    """
    ensemble._check_configuration(q0)
    gradients = []
    locks = []
    for n, x in enumerate(q0):
        slope, curvature = _refined_derivatives(_dof_function(ensemble, n), float(x), step)
        gradients.append(abs(slope))
        locks.append(abs(curvature - lock_curvature(ensemble, n)))
    report = EquilibriumPointReport(tuple(float(x) for x in q0), tuple(gradients), tuple(locks), tolerance)
    logger.debug(f"Условия равновесия в q0={report.q0}: градиент={report.gradient_check}, кривизна={report.curvature_lock}")
    return report


def boltzmann_amplitude(ensemble: CanonicalEnsemble, q: Sequence, E: float = 0.0, t: float = 0.0):
    """√C₁ e^{-βV(q)} e^{-iEt/ħ}."""
    phase = np.exp(-1j * E * t / ensemble.hbar)
    return math.sqrt(ensemble.c1) * np.exp(-ensemble.beta * ensemble.potential(q)) * phase


def rho_eq(ensemble: CanonicalEnsemble, q: Sequence):
    """C₁e^{-2βV(q)}."""
    return ensemble.c1 * np.exp(-ensemble.beta2 * ensemble.potential(q))


def _configuration(q0: Sequence[float], n: int, values: np.ndarray) -> List:
    return [values if j == n else float(x) for j, x in enumerate(q0)]


def ansatz_equilibrium_check(
    ensemble: CanonicalEnsemble,
    q0: Sequence[float],
    dq_max: float = 0.1,
    dq_points: int = 11,
    tolerance: float = ANSATZ_TOLERANCE,
) -> List[AnsatzReport]:
    """
    Проверка представления Z_Q произведением амплитуд вблизи q0.

    Для каждой степени свободы (остальные δq = 0) строится Z_Q(q, δq) на
    пяти точках около q0 и подгоняются коэффициенты при δq² у невязок
    |Z_Q - ψ*ψ| и |Z_Q - ½[ρ_eq(q + δq/2) + ρ_eq(q - δq/2)]|, отнесённые к ρ_eq(q0).

    Returns:
        List[AnsatzReport]: Отчёты по степеням свободы
    """
    ensemble._check_configuration(q0)
    if dq_points < 5 or dq_points % 2 == 0:
        raise InvalidArgument(f"Ось δq должна иметь нечётное число узлов не менее 5, получено {dq_points}")
    dx_grid = make_uniform_grid(-dq_max, dq_max, dq_points)
    shifts = dx_grid.points
    shifts[dq_points // 2] = 0.0
    half_step = 0.5 * dx_grid.spacing
    reach = (dq_points - 1) // 2 + 2

    reports = []
    for n, center in enumerate(q0):
        center = float(center)
        x_grid = make_uniform_grid(center - 2 * half_step, center + 2 * half_step, 5)
        psi_grid = make_uniform_grid(center - (reach + 4) * half_step, center + (reach + 4) * half_step, 2 * (reach + 4) + 1)

        values = np.empty((5, dq_points))
        for i, x in enumerate(x_grid.points):
            for j, shift in enumerate(shifts):
                q = [x if k == n else float(c) for k, c in enumerate(q0)]
                dq = [shift if k == n else 0.0 for k in range(ensemble.n_dof)]
                values[i, j] = boltzmann_zq(ensemble, q, dq)
        Z = CharacteristicFunction(x_grid, dx_grid, values)

        amplitude = boltzmann_amplitude(ensemble, _configuration(q0, n, psi_grid.points))
        psi = Wavefunction(psi_grid, amplitude, hbar=ensemble.hbar, mass=ensemble.masses[n])
        scale = float(values[2, dq_points // 2])

        factor_residual = factorization_residual(Z, psi)
        x = x_grid.points[:, None]
        plus = rho_eq(ensemble, _configuration(q0, n, x + 0.5 * shifts[None, :]))
        minus = rho_eq(ensemble, _configuration(q0, n, x - 0.5 * shifts[None, :]))
        displaced = np.abs(values - 0.5 * (plus + minus))

        reports.append(AnsatzReport(
            dof=n,
            factorization_coefficient=second_order_coefficient(factor_residual, 2) / scale,
            displacement_coefficient=second_order_coefficient(Field2D(x_grid, dx_grid, displaced), 2) / scale,
            tolerance=tolerance,
        ))
    return reports


def energy_relation(
    ensemble: CanonicalEnsemble,
    q0: Sequence[float],
    require_equilibrium: bool = True,
    step: float = HESSIAN_STEP,
) -> EnergyRelation:
    """
    Энергия в точке q0 двумя способами.

    E_full = Σ[(βħ²/2m_n)V'' - (β²ħ²/2m_n)(V')²] + V(q0);
    E_equilibrium = V(q0) + N·K_B·T. При T = 0 E_full = V(q0) (механическое равновесие).

    Raises:
        PreconditionViolation: Точка не проходит условия равновесия
    """
    if require_equilibrium:
        report = equilibrium_conditions(ensemble, q0, step=step)
        if not report.passes:
            raise PreconditionViolation(
                f"Точка {report.q0} не является равновесной: градиент={report.gradient_check}, "
                f"кривизна={report.curvature_lock}"
            )
    base = float(ensemble.potential([np.asarray(x) for x in q0]))
    e_equilibrium = base + ensemble.n_dof * ensemble.kb * ensemble.temperature
    if ensemble.temperature == 0:
        return EnergyRelation(e_full=base, e_equilibrium=e_equilibrium)

    beta = ensemble.beta
    hbar2 = ensemble.hbar ** 2
    e_full = base
    for n, x in enumerate(q0):
        slope, curvature = _refined_derivatives(_dof_function(ensemble, n), float(x), step)
        mass = ensemble.masses[n]
        e_full += beta * hbar2 * curvature / (2.0 * mass) - beta ** 2 * hbar2 * slope ** 2 / (2.0 * mass)
    return EnergyRelation(e_full=e_full, e_equilibrium=e_equilibrium)


def ho_special_case(
    mass: float = 1.0,
    omega: float = 1.0,
    hbar: float = 1.0,
    n_dof: int = 1,
    kb: float = 1.0,
    pathology_temperature: float = PATHOLOGY_TEMPERATURE,
) -> HarmonicLock:
    """
    Осциллятор при K_B T = ħω/2.

    При фиксации ⟨(δp)²⟩ = mħω/2 и ⟨(δx)²⟩ = ħ/(2mω), поэтому произведение
    равно ħ²/4 тождественно при любых m и ω; uncertainty_holds сверяет только
    арифметику. Флаг pathology не следует из этого произведения: это порог
    K_B·T < pathology_temperature, то есть ω -> 0 при фиксированном ħ.

    Args:
        mass: Масса
        omega: Частота
        hbar: Постоянная Планка
        n_dof: Число одинаковых осцилляторов
        kb: Постоянная Больцмана
        pathology_temperature: Порог K_B·T, ниже которого описание помечается как непригодное

    Returns:
        HarmonicLock: T_lock, E = Nħω/2, ⟨(δp)²⟩/m = ħω/2, ⟨(δx)²⟩ = ħ/2mω и их произведение
    """
    if not (mass > 0 and omega > 0 and hbar > 0 and kb > 0):
        raise InvalidArgument(f"Параметры должны быть положительными: m={mass}, ω={omega}, ħ={hbar}, K_B={kb}")
    if isinstance(n_dof, bool) or int(n_dof) != n_dof or n_dof < 1:
        raise InvalidArgument(f"Число степеней свободы должно быть положительным целым: {n_dof}")

    thermal = 0.5 * hbar * omega
    dispersion_per_mass = thermal
    dispersion = mass * dispersion_per_mass
    # ⟨(δx)²⟩ = K_B T / |V''| при S = -V/T
    msd = thermal / (mass * omega ** 2)
    product = dispersion * msd
    pathology = thermal < pathology_temperature
    if pathology:
        logger.warning(f"K_B·T = {thermal:.3e} ниже порога {pathology_temperature:g}: каноническое описание непригодно")
    return HarmonicLock(
        temperature_lock=thermal / kb,
        thermal_energy=thermal,
        energy=n_dof * thermal,
        dispersion_per_mass=dispersion_per_mass,
        dispersion=dispersion,
        msd=msd,
        uncertainty_product=product,
        uncertainty_holds=abs(product - hbar ** 2 / 4.0) <= 1e-10 * hbar ** 2,
        pathology=pathology,
    )


def entropy_bridge_residual(ensemble: CanonicalEnsemble, grid_points: int = 401, half_width: float = 3.0) -> float:
    """
    max|S - (-V/T + const)| для S = K_B ln ρ_eq одной степени свободы,
    константа фиксируется значением в центре окна.
    """
    ensemble._require_temperature()
    grid = make_uniform_grid(-half_width, half_width, grid_points)
    q = grid.points
    potential = np.asarray(ensemble.potentials[0](q), dtype=float)
    density = ensemble.c1 * math.prod(ensemble.position_partitions[1:]) * np.exp(-ensemble.beta2 * potential)
    entropy = entropy_field(Field(grid, density), k=ensemble.kb).entropy.values
    expected = -potential / ensemble.temperature
    center = grid_points // 2
    return float(np.max(np.abs((entropy - entropy[center]) - (expected - expected[center]))))


def boltzmann_report(ensemble: CanonicalEnsemble, q0: Sequence[float]) -> Dict:
    """
    Сводка по ансамблю для JSON: параметры, условия равновесия и энергии.

    Returns:
        Dict: Сериализуемый словарь
    """
    report = equilibrium_conditions(ensemble, q0)
    energies = energy_relation(ensemble, q0, require_equilibrium=False)
    return {
        'parameters': {
            'temperature': ensemble.temperature,
            'beta2': ensemble.beta2,
            'masses': list(ensemble.masses),
            'n_dof': ensemble.n_dof,
            'hbar': ensemble.hbar,
            'kb': ensemble.kb,
        },
        'equilibrium': {
            'q0': list(report.q0),
            'gradient_check': list(report.gradient_check),
            'curvature_lock': list(report.curvature_lock),
            'passes': report.passes,
        },
        'energies': {
            'e_full': energies.e_full,
            'e_equilibrium': energies.e_equilibrium,
            'agree': energies.agree,
        },
    }
