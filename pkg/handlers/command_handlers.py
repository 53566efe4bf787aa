"""Обработчики команд командной строки лаборатории."""

import logging
import math
import os
from dataclasses import asdict
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

from services.boltzmann import CanonicalEnsemble, boltzmann_report, ho_special_case
from services.equilibrium import REFERENCE_GIBBS, REFERENCE_ROW_TOLERANCE, default_grid, reference_tolerance, table2_rows
from services.errors import InvalidArgument, LabError
from services.exporters import export_wavefunction
from services.schrodinger_madelung import DecaySpec, decay_series, ho_eigenstate, ho_potential, solve_stationary
from services.verification import run_verification
from utils.report_formatter import Report, ReportTable, render
from utils.time_utils import elapsed, format_duration, start_timer

if TYPE_CHECKING:
    from config.config import LabConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

CommandResult = Tuple[int, Optional[str]]


class CommandHandlers:
    """Класс для выполнения команд: расчёт, проверка допусков и форматирование отчёта."""

    def __init__(self, config: 'LabConfig'):
        """
        Инициализирует обработчики команд.

        Args:
            config: Конфигурация лаборатории (уже с переопределениями из флагов)
        """
        self.config = config

    def _grid(self):
        return default_grid(self.config.GRID_POINTS, self.config.WINDOW)

    def _finish(self, command: str, started: float, exit_code: int, report: Report) -> CommandResult:
        """Рендерит отчёт и пишет в лог время выполнения (в данные оно не попадает)."""
        text = render(report, self.config.OUTPUT_FORMAT)
        logger.info(f"Команда {command} завершена с кодом {exit_code} за {format_duration(elapsed(started))}")
        return exit_code, text

    def _run(self, command: str, action) -> CommandResult:
        """Выполняет команду, переводя ошибки сервисов и записи файлов в код 2."""
        logger.info(f"Команда {command}: старт")
        try:
            return action()
        except (LabError, ValueError, OSError) as e:
            logger.error(f"Команда {command}: {e}")
            return EXIT_USAGE, None

    # ===== table2 =====

    def cmd_table2(self, n_max: int = 10) -> CommandResult:
        """
        Воспроизведение таблицы энтропий Гиббса состояний осциллятора.

        Args:
            n_max: Наибольшее квантовое число

        Returns:
            CommandResult: 0 если все строки с опорным значением в допуске, иначе 1
        """
        return self._run('table2', lambda: self._table2(n_max))

    def _table2(self, n_max: int) -> CommandResult:
        started = start_timer()
        config = self.config
        tolerance = config.tolerance('table2')
        rows = table2_rows(n_max, self._grid(), config.HBAR, config.MASS, config.OMEGA)

        table = ReportTable(
            columns=['n', 'G_n', 'gap', 'delta_vs_paper', 'status'],
            meta={
                'command': 'table2',
                'n_max': n_max,
                'grid_points': config.GRID_POINTS,
                'tolerance': tolerance,
                'row_tolerance': ';'.join(
                    f"{row}:{reference_tolerance(row, tolerance):g}" for row in sorted(REFERENCE_ROW_TOLERANCE) if row <= n_max
                ),
            },
            fixed_columns={'G_n': 5, 'gap': 5},
        )
        failures = 0
        previous = None
        for n, value, error in rows:
            if value is None:
                table.add_row(n, None, None, None, 'error')
                failures += 1
                previous = None
                logger.warning(f"table2: n={n} не рассчитан: {error}")
                continue
            gap = abs(value - previous) if previous is not None else None
            previous = value
            if n < len(REFERENCE_GIBBS):
                delta = abs(value - REFERENCE_GIBBS[n])
                status = 'pass' if delta <= reference_tolerance(n, tolerance) else 'fail'
                if status == 'fail':
                    failures += 1
                    logger.warning(f"table2: n={n} G={value:.6f}, опорное {REFERENCE_GIBBS[n]:.5f}, |Δ|={delta:.2e}")
            else:
                delta, status = None, 'no reference'
            table.add_row(n, value, gap, delta, status)

        exit_code = EXIT_CHECK_FAILED if failures else EXIT_OK
        logger.info(f"table2: строк {len(rows)}, не прошли {failures}")
        return self._finish('table2', started, exit_code, table)

    # ===== verify =====

    def cmd_verify(self, suite: str = 'all') -> CommandResult:
        """
        Запускает набор проверок инвариантов.

        Args:
            suite: all, phase-space, wigner, equilibrium, schrodinger или boltzmann

        Returns:
            CommandResult: 0 если все проверки прошли, иначе 1; неизвестный набор - 2
        """
        return self._run('verify', lambda: self._verify(suite))

    def _verify(self, suite: str) -> CommandResult:
        started = start_timer()
        report = run_verification(suite, self.config)
        passed, total = report.counts()
        table = ReportTable(
            columns=['check', 'target', 'computed', 'tolerance', 'pass'],
            meta={'command': 'verify', 'suite': suite, 'passed': passed, 'total': total},
        )
        for check in report.checks:
            table.add_row(check.name, check.target, check.computed, check.tolerance, check.passed)
        exit_code = EXIT_OK if report.passed else EXIT_CHECK_FAILED
        return self._finish('verify', started, exit_code, table)

    # ===== decay =====

    def cmd_decay(
        self,
        n: int = 1,
        tau: Optional[float] = 1.0,
        t_max: float = 5.0,
        steps: int = 50,
        rates: Optional[Sequence[float]] = None,
    ) -> CommandResult:
        """
        Временной ряд нормы метастабильного состояния φ_n = ψ_n e^{-t/τ}.

        Args:
            n: Квантовое число состояния осциллятора
            tau: Время жизни (игнорируется, если заданы rates)
            t_max: Конечный момент
            steps: Число интервалов по времени
            rates: Скорости переходов; τ = 1/ΣR

        Returns:
            CommandResult: 0 если |норма - e^{-2t/τ}| в допуске во всех точках, иначе 1
        """
        return self._run('decay', lambda: self._decay(n, tau, t_max, steps, rates))

    def _decay(self, n: int, tau: Optional[float], t_max: float, steps: int, rates: Optional[Sequence[float]]) -> CommandResult:
        started = start_timer()
        config = self.config
        meta = {'command': 'decay', 'n': n}
        if rates is not None:
            spec = DecaySpec.from_rates(rates)
            tau = spec.tau
            meta['rates'] = ';'.join(f"{r:g}" for r in spec.rates.values())
        if tau is None or not (math.isfinite(tau) and tau > 0):
            raise InvalidArgument(f"Время жизни должно быть положительным и конечным: {tau}")
        meta['tau'] = tau

        psi, _ = ho_eigenstate(n, self._grid(), config.HBAR, config.MASS, config.OMEGA)
        series = decay_series(psi, tau, t_max, steps)
        tolerance = config.tolerance('decay_norm')
        table = ReportTable(columns=['t', 'norm', 'predicted', 'residual'], meta=meta)
        worst = 0.0
        for row in series:
            table.add_row(row['t'], row['norm'], row['predicted'], row['residual'])
            worst = max(worst, row['residual'])
        if worst > tolerance:
            logger.warning(f"decay: максимальная невязка {worst:.3e} превышает допуск {tolerance:g}")
        exit_code = EXIT_CHECK_FAILED if worst > tolerance else EXIT_OK
        return self._finish('decay', started, exit_code, table)

    # ===== boltzmann =====

    def cmd_boltzmann(self, omega: Optional[float] = None, mass: Optional[float] = None, n_dof: int = 1) -> CommandResult:
        """
        Осциллятор в каноническом ансамбле при температуре фиксации K_B T = ħω/2.

        Args:
            omega: Частота (по умолчанию из конфигурации)
            mass: Масса (по умолчанию из конфигурации)
            n_dof: Число одинаковых степеней свободы

        Returns:
            CommandResult: 0 если ⟨(δp)²⟩⟨(δx)²⟩ = ħ²/4 и точка q = 0 равновесна, иначе 1
        """
        return self._run('boltzmann', lambda: self._boltzmann(omega, mass, n_dof))

    def _boltzmann(self, omega: Optional[float], mass: Optional[float], n_dof: int) -> CommandResult:
        started = start_timer()
        config = self.config
        omega = config.OMEGA if omega is None else omega
        mass = config.MASS if mass is None else mass
        lock = ho_special_case(mass, omega, config.HBAR, n_dof, config.K_B, config.PATHOLOGY_TEMPERATURE)
        ensemble = CanonicalEnsemble.locked_harmonic(mass, omega, int(n_dof), config.HBAR, config.K_B)
        ensemble_report = boltzmann_report(ensemble, [0.0] * int(n_dof))

        report = {
            'command': 'boltzmann',
            'parameters': {'omega': omega, 'mass': mass, 'n_dof': int(n_dof), 'hbar': config.HBAR, 'kb': config.K_B},
            'lock': asdict(lock),
            'ensemble': ensemble_report,
        }
        ok = lock.uncertainty_holds and ensemble_report['equilibrium']['passes']
        exit_code = EXIT_OK if ok else EXIT_CHECK_FAILED
        return self._finish('boltzmann', started, exit_code, report)

    # ===== eigen =====

    def cmd_eigen(self, k: int = 6, vectors_dir: Optional[str] = None) -> CommandResult:
        """
        Нижние k собственных пар численного решателя для осциллятора с аналитическими энергиями.

        Args:
            k: Число пар
            vectors_dir: Директория для собственных векторов psi_<n>.csv (с JSON-заголовком)

        Returns:
            CommandResult: 0 если все энергии в допуске eigen_energy от ħω(n + ½), иначе 1
        """
        return self._run('eigen', lambda: self._eigen(k, vectors_dir))

    def _eigen(self, k: int, vectors_dir: Optional[str]) -> CommandResult:
        started = start_timer()
        config = self.config
        grid = self._grid()
        states = solve_stationary(ho_potential(grid, config.MASS, config.OMEGA), config.MASS, config.HBAR, k)
        tolerance = config.tolerance('eigen_energy')
        table = ReportTable(
            columns=['n', 'energy', 'discrete_energy', 'analytic', 'abs_diff', 'status', 'vector'],
            meta={'command': 'eigen', 'k': k, 'grid_points': config.GRID_POINTS, 'tolerance': tolerance},
        )
        failures = 0
        for n, state in enumerate(states):
            analytic = config.HBAR * config.OMEGA * (n + 0.5)
            diff = abs(state.energy - analytic)
            status = 'pass' if diff <= tolerance else 'fail'
            failures += status == 'fail'
            vector = None
            if vectors_dir:
                vector = os.path.join(vectors_dir, f"psi_{n}.csv")
                export_wavefunction(state.wavefunction, vector)
            table.add_row(n, state.energy, state.discrete_energy, analytic, diff, status, vector)
        exit_code = EXIT_CHECK_FAILED if failures else EXIT_OK
        return self._finish('eigen', started, exit_code, table)
