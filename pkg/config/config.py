"""Configuration management: defaults, JSON config file, environment and command-line overrides."""

import json
import os
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import load_dotenv

# Загружаем переменные окружения из .env файла
load_dotenv()

CONFIG_ENV = 'MADELUNG_LAB_CONFIG'

# Допуски проверок по умолчанию; переопределяются через --tol NAME=VALUE
DEFAULT_TOLERANCES: Dict[str, float] = {
    'table2': 1e-4,
    'solver_crosscheck': 1e-3,
    'moments': 1e-6,
    'dispersion_identity': 1e-10,
    'normalization': 1e-8,
    'liouville': 1e-4,
    'bracket': 1e-6,
    'dispersion_free': 1e-12,
    'zq_equivalence': 1e-6,
    'hermitian': 1e-10,
    'cumulant': 1e-8,
    'uncertainty': 1e-10,
    'msd_quadrature': 1e-10,
    'entropy_roundtrip': 1e-12,
    'eigen_energy': 1e-4,
    'eigen_identity_analytic': 1e-9,
    'eigen_identity_solver': 1e-5,
    'decay_norm': 1e-10,
    'sink_continuity': 1e-6,
    'qhj': 1e-6,
    'master_zq': 1e-6,
    'zq_closed_form': 1e-8,
    'energy_relation': 1e-8,
    'ansatz': 1e-6,
}

OUTPUT_FORMATS = ('csv', 'json')
SINK_CONVENTIONS = ('amplitude', 'density')


class LabConfig:
    """Класс для управления конфигурацией лаборатории."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Инициализирует конфигурацию: значения по умолчанию, затем JSON-файл.

        Args:
            config_path: Путь к JSON-файлу (иначе переменная MADELUNG_LAB_CONFIG)
        """
        # Единицы
        self.HBAR: float = 1.0
        self.MASS: float = 1.0
        self.OMEGA: float = 1.0
        self.K_ENTROPY: float = 1.0
        self.K_B: float = 1.0

        # Сетки
        self.WINDOW: Tuple[float, float] = (-12.0, 12.0)
        self.GRID_POINTS: int = 4001
        self.DX_MAX: float = 0.1
        self.DX_POINTS: int = 11
        self.FD_ACCURACY: int = 6

        # Численные пороги
        self.RHO_EPSILON: float = 1e-12
        self.TRUNCATION: float = 1e-16
        self.SINK_CONVENTION: str = 'amplitude'
        self.PATHOLOGY_TEMPERATURE: float = 1e-6
        self.TOLERANCES: Dict[str, float] = dict(DEFAULT_TOLERANCES)

        # Вывод и логирование
        self.OUTPUT_FORMAT: str = 'csv'
        self.OUTPUT_PATH: Optional[str] = None
        self.LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'WARNING')
        self.LOG_FILE: str = os.getenv('LOG_FILE', '')

        self.CONFIG_PATH: Optional[str] = config_path or os.getenv(CONFIG_ENV) or None
        if self.CONFIG_PATH:
            self.load_file(self.CONFIG_PATH)

    def load_file(self, path: str) -> None:
        """
        Загружает JSON-файл конфигурации поверх текущих значений.

        Args:
            path: Путь к файлу

        Raises:
            OSError: Файл недоступен
            ValueError: Неверный JSON или неизвестный ключ
        """
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ValueError(f"Файл конфигурации {path} должен содержать JSON-объект")
        self.apply(data)

    def apply(self, overrides: Mapping[str, Any]) -> None:
        """Применяет словарь переопределений (ключи без учёта регистра)."""
        for key, value in overrides.items():
            name = key.upper()
            if name == 'WINDOW':
                self.WINDOW = self._parse_window(value)
            elif name == 'TOLERANCES':
                if not isinstance(value, Mapping):
                    raise ValueError("TOLERANCES должен быть объектом NAME -> VALUE")
                for tol_name, tol_value in value.items():
                    self.set_tolerance(tol_name, tol_value)
            elif name in ('GRID_POINTS', 'DX_POINTS', 'FD_ACCURACY'):
                setattr(self, name, self._parse_int(value, name))
            elif name in ('HBAR', 'MASS', 'OMEGA', 'K_ENTROPY', 'K_B', 'DX_MAX',
                          'RHO_EPSILON', 'TRUNCATION', 'PATHOLOGY_TEMPERATURE'):
                setattr(self, name, float(value))
            elif name in ('SINK_CONVENTION', 'OUTPUT_FORMAT', 'LOG_LEVEL'):
                setattr(self, name, str(value).lower() if name != 'LOG_LEVEL' else str(value).upper())
            elif name in ('OUTPUT_PATH', 'LOG_FILE'):
                setattr(self, name, None if value is None else str(value))
            else:
                raise ValueError(f"Неизвестный параметр конфигурации: {key}")

    def _parse_window(self, value: Any) -> Tuple[float, float]:
        """Парсит окно из строки 'A,B' или пары чисел."""
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(',') if p.strip()]
        else:
            parts = list(value)
        if len(parts) != 2:
            raise ValueError(f"Окно должно задаваться двумя числами A,B: {value}")
        return float(parts[0]), float(parts[1])

    def _parse_int(self, value: Any, name: str) -> int:
        """Парсит целое значение без потери дробной части."""
        number = float(value)
        if int(number) != number:
            raise ValueError(f"{name} должно быть целым: {value}")
        return int(number)

    def parse_tolerance(self, assignment: str) -> None:
        """Применяет строку вида NAME=VALUE."""
        name, sep, value = assignment.partition('=')
        if not sep or not name.strip():
            raise ValueError(f"Ожидалось NAME=VALUE, получено '{assignment}'")
        self.set_tolerance(name.strip(), value.strip())

    def set_tolerance(self, name: str, value: Any) -> None:
        if name not in self.TOLERANCES:
            raise ValueError(f"Неизвестный допуск: {name}")
        self.TOLERANCES[name] = float(value)

    def tolerance(self, name: str) -> float:
        return self.TOLERANCES[name]

    def validate(self) -> Tuple[bool, Optional[str]]:
        """
        Валидирует конфигурацию.

        Returns:
            tuple[bool, Optional[str]]: (is_valid, error_message)
        """
        for name in ('HBAR', 'MASS', 'OMEGA', 'K_ENTROPY', 'K_B'):
            if not getattr(self, name) > 0:
                return False, f"{name} должен быть положительным."

        a, b = self.WINDOW
        if not a < b:
            return False, f"Окно [{a}, {b}] вырождено: требуется A < B."

        if self.GRID_POINTS < 5:
            return False, "GRID_POINTS должен быть не менее 5."

        if self.DX_POINTS < 5 or self.DX_POINTS % 2 == 0:
            return False, "DX_POINTS должен быть нечётным и не менее 5."

        if not self.DX_MAX > 0:
            return False, "DX_MAX должен быть положительным."

        if self.FD_ACCURACY not in (2, 4, 6):
            return False, "FD_ACCURACY должен быть 2, 4 или 6."

        if not (self.RHO_EPSILON > 0 and 0 < self.TRUNCATION < 1 and self.PATHOLOGY_TEMPERATURE > 0):
            return False, "RHO_EPSILON, TRUNCATION и PATHOLOGY_TEMPERATURE должны быть положительными (TRUNCATION < 1)."

        for name, value in self.TOLERANCES.items():
            if not value > 0:
                return False, f"Допуск {name} должен быть положительным."

        if self.OUTPUT_FORMAT not in OUTPUT_FORMATS:
            return False, f"OUTPUT_FORMAT должен быть одним из {OUTPUT_FORMATS}."

        if self.SINK_CONVENTION not in SINK_CONVENTIONS:
            return False, f"SINK_CONVENTION должен быть одним из {SINK_CONVENTIONS}."

        return True, None

    def __repr__(self) -> str:
        """Строковое представление конфигурации для строки запуска в логе."""
        return (
            f"LabConfig("
            f"HBAR={self.HBAR}, "
            f"MASS={self.MASS}, "
            f"OMEGA={self.OMEGA}, "
            f"WINDOW={self.WINDOW}, "
            f"GRID_POINTS={self.GRID_POINTS}, "
            f"FD_ACCURACY={self.FD_ACCURACY}, "
            f"SINK_CONVENTION={self.SINK_CONVENTION}, "
            f"OUTPUT_FORMAT={self.OUTPUT_FORMAT}, "
            f"CONFIG_PATH={self.CONFIG_PATH}"
            f")"
        )
