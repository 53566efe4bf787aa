"""Точка входа лаборатории: воспроизведение таблицы энтропий Гиббса и проверки невязок."""

import argparse
import logging
import os
import sys
from typing import List, Optional

from config.config import LabConfig
from handlers.command_handlers import EXIT_OK, EXIT_USAGE, CommandHandlers
from services.verification import SUITE_NAMES
from utils.logger_config import setup_logging

logger = logging.getLogger(__name__)


def _parse_rates(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Ожидался список чисел через запятую: {value}")


def build_parser() -> argparse.ArgumentParser:
    """Создаёт парсер аргументов командной строки."""
    parser = argparse.ArgumentParser(
        prog='madelung-lab',
        description='Численная проверка термодинамического вывода уравнения Шрёдингера',
    )
    parser.add_argument('--config', help='JSON-файл конфигурации (иначе MADELUNG_LAB_CONFIG)')
    parser.add_argument('--format', dest='output_format', choices=('csv', 'json'), help='Формат вывода')
    parser.add_argument('--out', help='Файл вывода (по умолчанию stdout)')
    parser.add_argument('--grid-points', type=int, help='Число узлов пространственной сетки')
    parser.add_argument('--window', help='Окно сетки A,B (отрицательное A: --window=-12,12)')
    parser.add_argument('--tol', action='append', default=[], metavar='NAME=VALUE', help='Переопределение допуска')
    parser.add_argument('--log-level', help='Уровень логирования')

    commands = parser.add_subparsers(dest='command', required=True)

    table2 = commands.add_parser('table2', help='Энтропии Гиббса состояний осциллятора')
    table2.add_argument('--n-max', type=int, default=10)

    verify = commands.add_parser('verify', help='Наборы проверок инвариантов')
    verify.add_argument('suite', nargs='?', default='all', help=f"Один из: {', '.join(SUITE_NAMES)}")

    decay = commands.add_parser('decay', help='Затухание метастабильного состояния')
    decay.add_argument('--n', type=int, default=1)
    decay.add_argument('--tau', type=float, default=1.0)
    decay.add_argument('--t-max', type=float, default=5.0)
    decay.add_argument('--steps', type=int, default=50)
    decay.add_argument('--rates', type=_parse_rates, help='Скорости переходов R1,R2,... (τ = 1/ΣR)')

    boltzmann = commands.add_parser('boltzmann', help='Осциллятор при температуре фиксации')
    boltzmann.add_argument('--omega', type=float)
    boltzmann.add_argument('--m', dest='mass', type=float)
    boltzmann.add_argument('--N', dest='n_dof', type=int, default=1)

    eigen = commands.add_parser('eigen', help='Собственные пары численного решателя')
    eigen.add_argument('--k', type=int, default=6)
    eigen.add_argument('--vectors', help='Директория для собственных векторов psi_<n>.csv')

    return parser


class MadelungLab:
    """Главный класс: конфигурация, логирование и выполнение одной команды."""

    def __init__(self, args: argparse.Namespace):
        """
        Загружает конфигурацию и применяет флаги командной строки.

        Raises:
            OSError: Файл конфигурации недоступен
            ValueError: Неверная конфигурация или флаг
        """
        self.args = args
        self.config = LabConfig(args.config)
        self._apply_flags()

        setup_logging(self.config.LOG_LEVEL, self.config.LOG_FILE or None)

        is_valid, error_message = self.config.validate()
        if not is_valid:
            raise ValueError(f"Ошибка конфигурации: {error_message}")

        logger.info(f"Конфигурация загружена: {self.config}")
        self.command_handlers = CommandHandlers(self.config)

    def _apply_flags(self) -> None:
        """Флаги командной строки имеют приоритет над файлом конфигурации."""
        args = self.args
        overrides = {}
        if args.output_format:
            overrides['OUTPUT_FORMAT'] = args.output_format
        if args.out:
            overrides['OUTPUT_PATH'] = args.out
        if args.grid_points is not None:
            overrides['GRID_POINTS'] = args.grid_points
        if args.window:
            overrides['WINDOW'] = args.window
        if args.log_level:
            overrides['LOG_LEVEL'] = args.log_level
        self.config.apply(overrides)
        for assignment in args.tol:
            self.config.parse_tolerance(assignment)

    def run(self) -> int:
        """
        Выполняет команду и выводит отчёт.

        Returns:
            int: Код завершения 0, 1 или 2
        """
        args = self.args
        handlers = self.command_handlers
        if args.command == 'table2':
            exit_code, text = handlers.cmd_table2(args.n_max)
        elif args.command == 'verify':
            exit_code, text = handlers.cmd_verify(args.suite)
        elif args.command == 'decay':
            exit_code, text = handlers.cmd_decay(args.n, args.tau, args.t_max, args.steps, args.rates)
        elif args.command == 'boltzmann':
            exit_code, text = handlers.cmd_boltzmann(args.omega, args.mass, args.n_dof)
        else:
            exit_code, text = handlers.cmd_eigen(args.k, args.vectors)

        if text is not None:
            try:
                self._write_output(text)
            except OSError as e:
                logger.error(f"Не удалось записать вывод: {e}")
                return EXIT_USAGE
        return exit_code

    def _write_output(self, text: str) -> None:
        path = self.config.OUTPUT_PATH
        if not path:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        directory = os.path.dirname(path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info(f"Отчёт записан: {path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция запуска."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse завершает работу с кодом 2 при ошибке использования
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        lab = MadelungLab(args)
    except (OSError, ValueError) as e:
        setup_logging(args.log_level or 'WARNING')
        logger.error(f"Не удалось запустить: {e}")
        return EXIT_USAGE
    return lab.run()


if __name__ == "__main__":
    sys.exit(main())
