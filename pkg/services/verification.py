"""
Наборы проверок инвариантов и невязок по каждому вычислительному модулю.

Каждая проверка строит собственные данные и возвращает список Check;
проверки набора выполняются параллельно в потоках, результаты
собираются в каноническом порядке.
"""

import asyncio
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config.config import LabConfig
from services.boltzmann import (
    CanonicalEnsemble,
    ansatz_equilibrium_check,
    boltzmann_zq,
    boltzmann_zq_closed_form,
    canonical_moments,
    energy_relation,
    entropy_bridge_residual,
    equilibrium_conditions,
    ho_special_case,
)
from services.equilibrium import (
    GROUND_STATE_GIBBS,
    REFERENCE_GIBBS,
    GibbsEntropyReport,
    default_grid,
    displacement_ratio_quadrature,
    entropy_field,
    fluctuation_model,
    metastability_delta,
    reference_tolerance,
    table2_rows,
    table2_solver_crosscheck,
    uncertainty_product,
)
from services.errors import InvalidArgument, LabError
from services.numerics import Field, Grid1D, make_uniform_grid, preload_stencils
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
    statistical_bracket,
    statistical_hamilton_residual,
)
from services.schrodinger_madelung import (
    DecaySpec,
    Wavefunction,
    decay_rate,
    decay_series,
    density_fields,
    evolve,
    ho_eigenstate,
    ho_potential,
    madelung_continuity_residual,
    madelung_snapshots,
    master_zq_residual,
    metastable_state,
    qhj_residual,
    quantum_potential,
    solve_stationary,
)
from services.wigner_moyal import (
    ansatz_characteristic_function,
    characteristic_function,
    closed_form_dispersion,
    dispersion_from_zq,
    energy_partition_stats,
    equilibrium_characteristic_function,
    momentum_partition_stats,
    zq_limit_moments,
)
from utils.time_utils import elapsed, start_timer

logger = logging.getLogger(__name__)

# Порог плотности окна сравнения для тождеств на собственных состояниях
IDENTITY_DENSITY_FLOOR = 1e-8
# Относительный порог строк ρ при сравнении дисперсий
ROW_FLOOR = 1e-8
# Шаг по времени для тройки снимков
SNAPSHOT_STEP = 1e-3
SINK_SNAPSHOT_STEP = 1e-4
IDENTITY_LEVELS = 6


@dataclass(frozen=True)
class Check:
    """Результат одной проверки."""

    name: str
    target: float
    computed: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    """Упорядоченный список проверок; общий итог истинен, только если прошли все."""

    suite: str
    checks: List[Check] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def counts(self) -> Tuple[int, int]:
        """(число прошедших, всего)."""
        return sum(1 for c in self.checks if c.passed), len(self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]


def _within(name: str, target: float, computed: float, tolerance: float, relative: bool = False) -> Check:
    deviation = abs(computed - target)
    if relative:
        deviation /= max(abs(target), np.finfo(float).tiny)
    return Check(name, float(target), float(computed), float(tolerance), bool(deviation <= tolerance))


def _bounded(name: str, computed: float, tolerance: float) -> Check:
    """Проверка вида computed ≤ tolerance с целевым значением 0."""
    return Check(name, 0.0, float(computed), float(tolerance), bool(computed <= tolerance))


def _holds(name: str, condition: bool) -> Check:
    return Check(name, 1.0, 1.0 if condition else 0.0, 0.0, bool(condition))


def _units(config: LabConfig) -> Tuple[float, float, float]:
    return config.HBAR, config.MASS, config.OMEGA


def _config_grid(config: LabConfig) -> Grid1D:
    return default_grid(config.GRID_POINTS, config.WINDOW)


# ===== ФАЗОВОЕ ПРОСТРАНСТВО =====

def _rotating_gaussian(x_grid: Grid1D, p_grid: Grid1D, t: float, potential: Field) -> PhaseSpaceDistribution:
    """Гауссиана, центр которой движется по траектории осциллятора (m = ω = 1)."""
    xc, pc = math.cos(t), -math.sin(t)
    return PhaseSpaceDistribution.from_function(
        x_grid, p_grid,
        lambda X, P: np.exp(-0.5 * (X - xc) ** 2 - 0.5 * (P - pc) ** 2),
        time=t, potential=potential,
    )


def check_phase_space_moments(config: LabConfig) -> List[Check]:
    x_grid = make_uniform_grid(-8.0, 8.0, 161)
    p_grid = make_uniform_grid(-8.0, 8.0, 321)
    F = PhaseSpaceDistribution.from_function(
        x_grid, p_grid, lambda X, P: np.exp(-0.5 * (X - 0.3) ** 2 - (P - 0.5) ** 2 / (2.0 * 0.49)),
    )
    fields = extract_moments(F, config.RHO_EPSILON)
    rho = np.asarray(fields.rho.values)
    mask = rho > 1e-6 * rho.max()
    direct = momentum_dispersion_direct(F, fields, config.RHO_EPSILON)

    return [
        _within('normalization', 1.0, F.total_probability(), config.tolerance('normalization')),
        _bounded('moments_momentum', float(np.max(np.abs(fields.momentum.values[mask] - 0.5))), config.tolerance('moments')),
        _bounded('moments_dispersion', float(np.max(np.abs(fields.dispersion.values[mask] - 0.49))), config.tolerance('moments')),
        _bounded(
            'dispersion_identity',
            float(np.max(np.abs(direct.values[mask] - fields.dispersion.values[mask]))),
            config.tolerance('dispersion_identity'),
        ),
    ]


def check_phase_space_transport(config: LabConfig) -> List[Check]:
    x_grid = make_uniform_grid(-6.0, 6.0, 241)
    p_grid = make_uniform_grid(-6.0, 6.0, 241)
    potential = ho_potential(x_grid)
    t = 0.7
    snapshots = [_rotating_gaussian(x_grid, p_grid, t + k * SNAPSHOT_STEP, potential) for k in (-1, 0, 1)]
    fields = [extract_moments(F, config.RHO_EPSILON) for F in snapshots]
    accuracy = config.FD_ACCURACY
    tol = config.tolerance('liouville')
    return [
        _bounded('liouville', liouville_residual(snapshots, accuracy).max_abs(), tol),
        _bounded('continuity', continuity_residual(fields, 1.0, accuracy).max_abs(), tol),
        _bounded('momentum_transport', momentum_transport_residual(snapshots, accuracy, epsilon=config.RHO_EPSILON).max_abs(), tol),
    ]


def check_phase_space_bracket(config: LabConfig) -> List[Check]:
    """Статистическая скобка основного состояния осциллятора постоянна и равна E."""
    grid = make_uniform_grid(-6.0, 6.0, 1201)
    psi, energy = ho_eigenstate(0, grid)
    accuracy = config.FD_ACCURACY
    times = [1.0 + k * SNAPSHOT_STEP for k in (-1, 0, 1)]
    snapshots = []
    for t in times:
        moving = psi.with_values(psi.values * np.exp(-1j * energy * t), time=t)
        snapshots.append(density_fields(moving, accuracy, config.RHO_EPSILON).window(-4.0, 4.0))
    V = ho_potential(snapshots[1].grid)

    bracket = statistical_bracket(snapshots[1], V, accuracy=accuracy).window(-3.0, 3.0)
    residual = statistical_hamilton_residual(snapshots, V, accuracy=accuracy).window(-3.0, 3.0)
    tol = config.tolerance('bracket')
    return [
        _bounded('statistical_bracket_constant', float(np.max(np.abs(bracket.values - energy))), tol),
        _bounded('statistical_hamilton_stationary', residual.max_abs(), tol),
    ]


def check_phase_space_dispersion_free(config: LabConfig) -> List[Check]:
    """Для ансамбля без дисперсии статистическое уравнение совпадает с классическим."""
    grid = make_uniform_grid(-5.0, 5.0, 201)
    x = grid.points
    rho = Field(grid, np.exp(-0.5 * x ** 2) / math.sqrt(2.0 * math.pi))
    snapshots = [
        DensityFields.dispersion_free(rho, Field(grid, 0.3 + 0.2 * np.sin(x) * t), time=t)
        for t in (0.49, 0.5, 0.51)
    ]
    V = ho_potential(grid)
    accuracy = config.FD_ACCURACY
    classical = classical_hamilton_residual(snapshots, V, accuracy=accuracy)
    statistical = statistical_hamilton_residual(snapshots, V, closure='moments', accuracy=accuracy)
    tol = config.tolerance('dispersion_free')
    return [
        _bounded('quantum_term_vanishes', quantum_force_term(snapshots[1], accuracy=accuracy).max_abs(), tol),
        _bounded('reduces_to_classical', float(np.max(np.abs(statistical.values - classical.values))), tol),
    ]


# ===== ХАРАКТЕРИСТИЧЕСКАЯ ФУНКЦИЯ =====

def _dx_grid(config: LabConfig) -> Grid1D:
    return make_uniform_grid(-config.DX_MAX, config.DX_MAX, config.DX_POINTS)


def distribution_family() -> List[Tuple[str, Callable[[np.ndarray, np.ndarray], np.ndarray]]]:
    """Гладкие тестовые распределения: гауссовы произведения, сдвиги, корреляции и смеси по p."""
    def gauss(u, center, var):
        return np.exp(-(u - center) ** 2 / (2.0 * var))

    return [
        ('gaussian_product', lambda X, P: gauss(X, 0.0, 1.0) * gauss(P, 0.0, 1.0)),
        ('narrow_momentum', lambda X, P: gauss(X, 0.0, 1.0) * gauss(P, 0.0, 0.36)),
        ('wide_momentum', lambda X, P: gauss(X, 0.0, 1.0) * gauss(P, 0.0, 2.25)),
        ('shifted', lambda X, P: gauss(X, 1.0, 1.0) * gauss(P, 1.5, 1.0)),
        ('shifted_negative', lambda X, P: gauss(X, -0.8, 0.5) * gauss(P, -1.0, 0.8)),
        ('correlated', lambda X, P: gauss(X, 0.0, 1.0) * gauss(P, 0.8 * X, 1.0)),
        ('correlated_squeezed', lambda X, P: np.exp(-(X ** 2 - 1.2 * X * P + P ** 2) / (2.0 * 0.64))),
        ('bimodal_symmetric', lambda X, P: gauss(X, 0.0, 1.0) * (gauss(P, 1.5, 0.25) + gauss(P, -1.5, 0.25))),
        ('bimodal_asymmetric', lambda X, P: gauss(X, 0.0, 1.0) * (0.7 * gauss(P, 1.0, 0.36) + 0.3 * gauss(P, -2.0, 0.64))),
        ('bimodal_drifting', lambda X, P: gauss(X, 0.0, 1.0) * (gauss(P, 1.0 + 0.3 * X, 0.49) + gauss(P, -1.0, 0.49))),
        ('quartic_envelope', lambda X, P: np.exp(-X ** 4 / 4.0) * gauss(P, 0.0, 1.0)),
    ]


def check_wigner_equivalence(config: LabConfig) -> List[Check]:
    """Дисперсия из пределов Z_Q совпадает с прямой квадратурой на всём семействе."""
    x_grid = make_uniform_grid(-6.0, 6.0, 121)
    p_grid = make_uniform_grid(-10.0, 10.0, 801)
    dx_grid = _dx_grid(config)
    checks = []
    for label, func in distribution_family():
        F = PhaseSpaceDistribution.from_function(x_grid, p_grid, func)
        fields = extract_moments(F, config.RHO_EPSILON)
        direct = np.asarray(momentum_dispersion_direct(F, fields, config.RHO_EPSILON).values)
        Z = characteristic_function(F, dx_grid, config.HBAR)
        from_zq = np.asarray(dispersion_from_zq(Z, config.HBAR, config.RHO_EPSILON).values)
        rho = np.asarray(fields.rho.values)
        rows = rho > ROW_FLOOR * rho.max()
        relative = np.abs(from_zq[rows] - direct[rows]) / np.abs(direct[rows])
        checks.append(_bounded(f"zq_equivalence[{label}]", float(np.max(relative)), config.tolerance('zq_equivalence')))
    return checks


def check_wigner_limits(config: LabConfig) -> List[Check]:
    x_grid = make_uniform_grid(-6.0, 6.0, 121)
    p_grid = make_uniform_grid(-10.0, 10.0, 801)
    F = PhaseSpaceDistribution.from_function(
        x_grid, p_grid, lambda X, P: np.exp(-0.5 * (X - 1.0) ** 2 - 0.5 * (P - 1.5 - 0.2 * X) ** 2),
    )
    fields = extract_moments(F, config.RHO_EPSILON)
    Z = characteristic_function(F, _dx_grid(config), config.HBAR)
    limits = zq_limit_moments(Z, config.HBAR, config.RHO_EPSILON)
    stats = momentum_partition_stats(Z, config.HBAR, config.RHO_EPSILON)

    rho = np.asarray(fields.rho.values)
    rows = rho > ROW_FLOOR * rho.max()
    values = np.asarray(Z.values)
    mirrored = np.conj(values[:, ::-1])
    identity = np.asarray(stats.mean_p2.values) - np.asarray(stats.dispersion.values) - np.asarray(stats.mean_p.values) ** 2
    m2_over_rho = np.asarray(fields.m2.values)[rows] / rho[rows]

    return [
        _bounded('zq_at_zero_is_density', float(np.max(np.abs(values[:, Z.zero_index].real - rho))), config.tolerance('moments')),
        _bounded(
            'zq_limit_momentum',
            float(np.max(np.abs(limits.momentum.values[rows] - fields.momentum.values[rows]))),
            config.tolerance('moments'),
        ),
        _bounded('hermitian_symmetry', float(np.max(np.abs(values - mirrored))), config.tolerance('hermitian')),
        _bounded(
            'partition_identity',
            float(np.max(np.abs(identity[rows]) / m2_over_rho)),
            config.tolerance('zq_equivalence'),
        ),
    ]


def check_wigner_closed_form(config: LabConfig) -> List[Check]:
    """Произведение амплитуд гауссовой плотности даёт -(ħ²/4)∂²ln ρ."""
    sigma2 = 0.64
    grid = make_uniform_grid(-4.0, 4.0, 401)
    rho = Field(grid, np.exp(-grid.points ** 2 / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2))
    h = grid.spacing
    # Шаг оси δx равен 2h: точки x ± δx/2 совпадают с узлами сетки ρ
    dx_grid = make_uniform_grid(-10.0 * h, 10.0 * h, 11)
    x_grid = grid.sub_grid(8, grid.n_points - 8)
    Z = equilibrium_characteristic_function(rho, x_grid, dx_grid, reading='product')
    from_zq = np.asarray(dispersion_from_zq(Z, config.HBAR, config.RHO_EPSILON).values)
    closed = np.asarray(closed_form_dispersion(rho, config.HBAR, config.FD_ACCURACY).values)[8:grid.n_points - 8]
    return [
        _bounded(
            'closed_form_product_reading',
            float(np.max(np.abs(from_zq - closed) / np.abs(closed))),
            config.tolerance('zq_equivalence'),
        ),
    ]


def check_wigner_energy_partition(config: LabConfig) -> List[Check]:
    """Энергетическая сторона таблицы статистик против прямых сумм по спектру."""
    energies = np.arange(400) + 0.5
    beta = 1.0
    stats = energy_partition_stats(energies, beta)
    weights = np.exp(-beta * (energies - energies[0]))
    weights /= weights.sum()
    mean = float(np.dot(weights, energies))
    mean2 = float(np.dot(weights, energies ** 2))
    tol = config.tolerance('cumulant')
    return [
        _within('energy_mean', mean, stats.mean_energy, tol),
        _within('energy_second_moment', mean2, stats.mean_energy2, tol),
        _within('energy_variance', mean2 - mean ** 2, stats.variance, tol),
    ]


# ===== РАВНОВЕСИЕ И ЭНТРОПИЯ =====

def check_equilibrium_table2(config: LabConfig) -> List[Check]:
    rows = table2_rows(len(REFERENCE_GIBBS) - 1, _config_grid(config))
    tol = config.tolerance('table2')
    checks = []
    levels = []
    for n, value, error in rows:
        if value is None:
            logger.warning(f"Уровень n={n} не рассчитан: {error}")
            checks.append(Check(f"table2[{n}]", REFERENCE_GIBBS[n], math.nan, reference_tolerance(n, tol), False))
            continue
        levels.append((n, value))
        checks.append(_within(f"table2[{n}]", REFERENCE_GIBBS[n], value, reference_tolerance(n, tol)))

    report = GibbsEntropyReport(levels=levels)
    complete = len(levels) == len(REFERENCE_GIBBS)
    checks.append(_holds('table2_strictly_decreasing', complete and report.is_strictly_decreasing()))
    checks.append(_holds('table2_gaps_decreasing', complete and report.gaps_strictly_decreasing()))
    if levels and levels[0][0] == 0:
        checks.append(_within('gibbs_ground_closed_form', GROUND_STATE_GIBBS, levels[0][1], tol))
    if complete:
        checks.append(_holds('metastable_transition_1_to_0', metastability_delta(levels[1][1], levels[0][1]).metastable_transition))
    return checks


def check_equilibrium_fluctuations(config: LabConfig) -> List[Check]:
    sigma2 = 0.64
    grid = make_uniform_grid(-4.0, 4.0, 161)
    rho = Field(grid, np.exp(-grid.points ** 2 / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2))
    accuracy = config.FD_ACCURACY
    product = uncertainty_product(rho, config.HBAR, config.K_ENTROPY, accuracy)
    model = fluctuation_model(rho, config.K_ENTROPY, accuracy)
    entropy = entropy_field(rho, config.K_ENTROPY)
    roundtrip = np.abs(entropy.density().values - rho.values) / rho.values

    checks = [
        _bounded(
            'uncertainty_gaussian',
            float(np.max(np.abs(product.values - config.HBAR ** 2 / 4.0))),
            config.tolerance('uncertainty'),
        ),
        _bounded('fluctuation_msd_gaussian', float(np.max(np.abs(model.msd.values - sigma2))) / sigma2, config.tolerance('cumulant')),
        _bounded('entropy_roundtrip', float(np.max(roundtrip)), config.tolerance('entropy_roundtrip')),
    ]
    for gamma in (0.5, 2.0):
        checks.append(_within(
            f"msd_quadrature[{gamma:g}]", 1.0 / (2.0 * gamma), displacement_ratio_quadrature(gamma),
            config.tolerance('msd_quadrature'), relative=True,
        ))
    return checks


def check_equilibrium_solver(config: LabConfig) -> List[Check]:
    rows = table2_solver_crosscheck(5, _config_grid(config), config.tolerance('solver_crosscheck'))
    worst = max(abs(analytic - numeric) for _, analytic, numeric, _ in rows)
    return [_bounded('solver_crosscheck', worst, config.tolerance('solver_crosscheck'))]


# ===== ШРЁДИНГЕР И МАДЕЛУНГ =====

def _identity_deviation(
    psi: Wavefunction,
    V: Field,
    energy: float,
    accuracy: int,
    floor: float = IDENTITY_DENSITY_FLOOR,
) -> float:
    """max|V + Q - E|/|E| по сегментам без узлов, где ρ выше порога."""
    R = Field(psi.grid, np.abs(psi.values))
    margin = max(1, accuracy // 2)
    worst = 0.0
    for q in quantum_potential(R, psi.mass, psi.hbar, accuracy):
        q = q.interior(margin)
        start, stop = psi.grid.index_window(q.grid.x_min, q.grid.x_max)
        rho = np.asarray(R.values[start:stop]) ** 2
        mask = rho > floor
        if not np.any(mask):
            continue
        deviation = np.abs(V.values[start:stop] + q.values - energy)[mask] / abs(energy)
        worst = max(worst, float(np.max(deviation)))
    return worst


def check_schrodinger_eigen(config: LabConfig) -> List[Check]:
    hbar, mass, omega = _units(config)
    grid = _config_grid(config)
    V = ho_potential(grid, mass, omega)
    states = solve_stationary(V, mass, hbar, k=IDENTITY_LEVELS)
    checks = []
    for n, state in enumerate(states):
        checks.append(_within(f"eigen_energy[{n}]", hbar * omega * (n + 0.5), state.energy, config.tolerance('eigen_energy')))
    for n in range(IDENTITY_LEVELS):
        psi, energy = ho_eigenstate(n, grid, hbar, mass, omega)
        deviation = _identity_deviation(psi, V, energy, config.FD_ACCURACY)
        checks.append(_bounded(f"eigen_identity_analytic[{n}]", deviation, config.tolerance('eigen_identity_analytic')))
    for n, state in enumerate(states):
        # трёхточечная вторая производная согласована с дискретизацией решателя
        deviation = _identity_deviation(state.wavefunction, V, state.discrete_energy, 2)
        checks.append(_bounded(f"eigen_identity_solver[{n}]", deviation, config.tolerance('eigen_identity_solver')))
    return checks


def _stationary_snapshots(psi: Wavefunction, energy: float, center: float, step: float, tau: float = math.inf) -> List[Wavefunction]:
    result = []
    for k in (-1, 0, 1):
        t = center + k * step
        decay = 1.0 if math.isinf(tau) else math.exp(-t / tau)
        result.append(psi.with_values(psi.values * np.exp(-1j * energy * t / psi.hbar) * decay, time=t))
    return result


def check_schrodinger_qhj(config: LabConfig) -> List[Check]:
    hbar, mass, omega = _units(config)
    grid = _config_grid(config)
    V = ho_potential(grid, mass, omega)
    accuracy = config.FD_ACCURACY
    checks = []
    for n in (0, 1):
        psi, energy = ho_eigenstate(n, grid, hbar, mass, omega)
        worst = 0.0
        for triple in madelung_snapshots(_stationary_snapshots(psi, energy, 1.0, SNAPSHOT_STEP), accuracy=accuracy):
            residual = qhj_residual(triple, V, mass, hbar, accuracy)
            start, stop = grid.index_window(residual.grid.x_min, residual.grid.x_max)
            mask = np.abs(psi.values[start:stop]) ** 2 > IDENTITY_DENSITY_FLOOR
            if np.any(mask):
                worst = max(worst, float(np.max(np.abs(residual.values[mask]))))
        checks.append(_bounded(f"qhj_stationary[{n}]", worst, config.tolerance('qhj')))
    return checks


def check_schrodinger_decay(config: LabConfig) -> List[Check]:
    hbar, mass, omega = _units(config)
    grid = _config_grid(config)
    psi, _ = ho_eigenstate(1, grid, hbar, mass, omega)
    tau = 1.0
    series = decay_series(psi, tau, 5.0 * tau, 50)
    spec = DecaySpec.from_rates([0.5, 0.5])

    snapshots = [metastable_state(psi, tau, 1.0 + k * SINK_SNAPSHOT_STEP).wavefunction() for k in (-1, 0, 1)]
    worst = 0.0
    for triple in madelung_snapshots(snapshots, accuracy=config.FD_ACCURACY):
        residual = madelung_continuity_residual(
            triple, mass, tau=tau, sink_convention=config.SINK_CONVENTION, accuracy=config.FD_ACCURACY,
        )
        worst = max(worst, residual.max_abs())

    return [
        _bounded('decay_norm', max(row['residual'] for row in series), config.tolerance('decay_norm')),
        _within('decay_tau_from_rates', 1.0, decay_rate(spec), 0.0),
        _bounded('sink_continuity', worst, config.tolerance('sink_continuity')),
    ]


def check_schrodinger_master(config: LabConfig) -> List[Check]:
    hbar, mass, omega = _units(config)
    grid = _config_grid(config)
    V = ho_potential(grid, mass, omega)
    psi, energy = ho_eigenstate(0, grid, hbar, mass, omega)
    h = grid.spacing
    center = grid.n_points // 2
    x_grid = grid.sub_grid(center - 100, center + 101)
    # δx с шагом 2h: x ± δx/2 попадают в узлы сетки ψ
    dx_grid = make_uniform_grid(-10.0 * h, 10.0 * h, 11)
    accuracy = config.FD_ACCURACY

    checks = []
    for label, tau in (('stationary', math.inf), ('decaying', 1.0)):
        psis = _stationary_snapshots(psi, energy, 1.0, SINK_SNAPSHOT_STEP, tau)
        Zs = [ansatz_characteristic_function(p, x_grid, dx_grid) for p in psis]
        residual = master_zq_residual(
            Zs, V, mass, hbar, tau=None if math.isinf(tau) else tau,
            sink_convention=config.SINK_CONVENTION, accuracy=accuracy,
        )
        checks.append(_bounded(f"master_zq_{label}", residual.max_abs(), config.tolerance('master_zq')))
    return checks


def check_schrodinger_evolve(config: LabConfig) -> List[Check]:
    grid = make_uniform_grid(-10.0, 10.0, 1001)
    psi, _ = ho_eigenstate(0, grid)
    evolved = evolve(psi, ho_potential(grid), 0.005, 200)
    return [_within('evolve_norm', psi.norm(), evolved.norm(), config.tolerance('normalization'))]


# ===== РАВНОВЕСИЕ БОЛЬЦМАНА =====

def check_boltzmann_closed_form(config: LabConfig) -> List[Check]:
    ensemble = CanonicalEnsemble.harmonic(
        [1.0, 2.0], [1.0, 1.5], temperature=1.0, hbar=config.HBAR, kb=config.K_B, truncation=config.TRUNCATION,
    )
    checks = []
    for q, dq in (((0.3, -0.2), (0.05, 0.08)), ((0.0, 0.0), (0.1, -0.1)), ((-1.0, 0.5), (0.02, 0.0))):
        numeric = boltzmann_zq(ensemble, q, dq)
        closed = boltzmann_zq_closed_form(ensemble, q, dq)
        checks.append(_within(f"zq_closed_form[{q}]", closed, numeric, config.tolerance('zq_closed_form'), relative=True))
    return checks


def check_boltzmann_canonical(config: LabConfig) -> List[Check]:
    """Импульсный маргинал F имеет дисперсию m·K_B·T; F распадается на произведение маргиналов."""
    hbar, mass, omega = _units(config)
    locked = CanonicalEnsemble.locked_harmonic(mass, omega, 1, hbar=hbar, kb=config.K_B)
    cold = CanonicalEnsemble.harmonic([mass], [omega], temperature=locked.temperature / 2.0, hbar=hbar, kb=config.K_B)
    checks = []
    for label, ensemble in (('lock', locked), ('half_lock', cold)):
        moments = canonical_moments(ensemble)
        checks.extend([
            _within(f"canonical_norm[{label}]", 1.0, moments.norm, config.tolerance('normalization')),
            _within(
                f"canonical_p_variance[{label}]", mass * config.K_B * ensemble.temperature,
                moments.momentum_variance, config.tolerance('moments'), relative=True,
            ),
            _bounded(f"canonical_product_form[{label}]", moments.factorization_residual, config.tolerance('moments')),
        ])
    return checks


def check_boltzmann_iff(config: LabConfig) -> List[Check]:
    """Факторизация точна до O(δq³) тогда и только тогда, когда выполнены оба условия равновесия."""
    hbar, mass, omega = _units(config)
    locked = CanonicalEnsemble.locked_harmonic(mass, omega, 1, hbar=hbar, kb=config.K_B)
    unlocked = CanonicalEnsemble.harmonic(
        [mass], [omega], temperature=2.0 * locked.temperature, hbar=hbar, kb=config.K_B,
    )
    tol = config.tolerance('ansatz')
    checks = []
    for label, ensemble, q0, expected in (
        ('locked_at_minimum', locked, (0.0,), True),
        ('temperature_off_lock', unlocked, (0.0,), False),
        ('off_minimum', locked, (1.0,), False),
    ):
        conditions = equilibrium_conditions(ensemble, q0)
        report = ansatz_equilibrium_check(ensemble, q0, tolerance=tol)[0]
        logger.debug(
            f"{label}: условия={conditions.passes}, коэффициенты="
            f"({report.factorization_coefficient:.3e}, {report.displacement_coefficient:.3e})"
        )
        holds = conditions.passes == expected and report.higher_order == expected
        checks.append(_holds(f"iff[{label}]", holds))
    return checks


def check_boltzmann_lock(config: LabConfig) -> List[Check]:
    hbar, mass, omega = _units(config)
    n_dof = 2
    locked = CanonicalEnsemble.locked_harmonic(mass, omega, n_dof, hbar=hbar, kb=config.K_B)
    relation = energy_relation(locked, (0.0,) * n_dof)
    lock = ho_special_case(mass, omega, hbar, n_dof, config.K_B, config.PATHOLOGY_TEMPERATURE)
    low = ho_special_case(mass, 1e-9, hbar, 1, config.K_B, config.PATHOLOGY_TEMPERATURE)
    thermal = CanonicalEnsemble.harmonic([mass], [omega], temperature=1.0, hbar=hbar, kb=config.K_B)
    tol = config.tolerance('energy_relation')
    return [
        _within('energy_relation_branches', relation.e_equilibrium, relation.e_full, tol),
        _within('energy_at_lock', n_dof * hbar * omega / 2.0, relation.e_full, tol),
        _within('lock_energy', n_dof * hbar * omega / 2.0, lock.energy, tol),
        _within('lock_uncertainty', hbar ** 2 / 4.0, lock.uncertainty_product, config.tolerance('uncertainty')),
        _holds('pathology_flag_low_frequency', low.pathology),
        _bounded('entropy_bridge', entropy_bridge_residual(thermal), config.tolerance('entropy_roundtrip')),
    ]


SUITES: Dict[str, Tuple[Callable[[LabConfig], List[Check]], ...]] = {
    'phase-space': (
        check_phase_space_moments,
        check_phase_space_transport,
        check_phase_space_bracket,
        check_phase_space_dispersion_free,
    ),
    'wigner': (
        check_wigner_equivalence,
        check_wigner_limits,
        check_wigner_closed_form,
        check_wigner_energy_partition,
    ),
    'equilibrium': (
        check_equilibrium_table2,
        check_equilibrium_fluctuations,
        check_equilibrium_solver,
    ),
    'schrodinger': (
        check_schrodinger_eigen,
        check_schrodinger_qhj,
        check_schrodinger_decay,
        check_schrodinger_master,
        check_schrodinger_evolve,
    ),
    'boltzmann': (
        check_boltzmann_closed_form,
        check_boltzmann_canonical,
        check_boltzmann_iff,
        check_boltzmann_lock,
    ),
}
SUITE_NAMES = tuple(SUITES) + ('all',)


def _run_check(check: Callable[[LabConfig], List[Check]], config: LabConfig) -> List[Check]:
    """Выполняет функцию проверки; ошибка сервиса превращается в непрошедшую проверку."""
    try:
        return check(config)
    except LabError as e:
        logger.error(f"Проверка {check.__name__} завершилась ошибкой: {e}")
        return [Check(check.__name__, math.nan, math.nan, 0.0, False)]


async def _run_suite_async(suite: str, config: LabConfig) -> List[Check]:
    tasks = [asyncio.to_thread(_run_check, check, config) for check in SUITES[suite]]
    results = await asyncio.gather(*tasks)
    return [c for batch in results for c in batch]


async def run_verification_async(suite: str, config: LabConfig) -> VerificationReport:
    """
    Запускает набор проверок.

    Args:
        suite: Имя набора или 'all'
        config: Конфигурация

    Returns:
        VerificationReport: Проверки в каноническом порядке (при 'all' с префиксом набора)

    Raises:
        InvalidArgument: Неизвестное имя набора
    """
    if suite not in SUITE_NAMES:
        raise InvalidArgument(f"Неизвестный набор проверок '{suite}', ожидался один из {SUITE_NAMES}")
    preload_stencils()
    started = start_timer()
    names: Sequence[str] = tuple(SUITES) if suite == 'all' else (suite,)
    batches = await asyncio.gather(*(_run_suite_async(name, config) for name in names))

    checks = []
    for name, batch in zip(names, batches):
        for check in batch:
            label = f"{name}/{check.name}" if suite == 'all' else check.name
            checks.append(Check(label, check.target, check.computed, check.tolerance, check.passed))
    report = VerificationReport(suite=suite, checks=checks, wall_time=elapsed(started))
    passed, total = report.counts()
    logger.info(f"Набор '{suite}': пройдено {passed}/{total}")
    for failure in report.failures():
        logger.warning(
            f"Не пройдено {failure.name}: цель={failure.target:.6g}, "
            f"получено={failure.computed:.6g}, допуск={failure.tolerance:.3g}"
        )
    return report


def run_verification(suite: str, config: LabConfig) -> VerificationReport:
    """Синхронная обёртка над run_verification_async."""
    return asyncio.run(run_verification_async(suite, config))
