"""
Экспорт и импорт полей в CSV с JSON-заголовком рядом с файлом данных.

Заголовок хранит сетки и параметры, в CSV лежат значения по узлам с полной точностью.
"""

import csv
import json
import logging
import os
from typing import Dict, List

import numpy as np

from services.errors import InvalidArgument
from services.numerics import Field, Grid1D
from services.phase_space import PhaseSpaceDistribution
from services.schrodinger_madelung import Wavefunction
from services.wigner_moyal import CharacteristicFunction

logger = logging.getLogger(__name__)

HEADER_SUFFIX = '.json'


def header_path(path: str) -> str:
    """Путь JSON-заголовка для файла данных."""
    return f"{path}{HEADER_SUFFIX}"


def _grid_header(grid: Grid1D) -> Dict[str, float]:
    return {'x_min': grid.x_min, 'x_max': grid.x_max, 'n_points': grid.n_points}


def _grid_from_header(data: Dict) -> Grid1D:
    try:
        return Grid1D(float(data['x_min']), float(data['x_max']), int(data['n_points']))
    except (KeyError, TypeError) as e:
        raise InvalidArgument(f"Неполное описание сетки в заголовке: {data}") from e


def _ensure_dir(path: str) -> None:
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)


def _write_header(path: str, header: Dict) -> None:
    with open(header_path(path), 'w', encoding='utf-8') as f:
        json.dump(header, f, indent=2, sort_keys=True)
        f.write('\n')


def _read_header(path: str, kind: str) -> Dict:
    with open(header_path(path), 'r', encoding='utf-8') as f:
        header = json.load(f)
    if header.get('kind') != kind:
        raise InvalidArgument(f"Файл {path} содержит '{header.get('kind')}', ожидалось '{kind}'")
    return header


def _write_rows(path: str, columns: List[str], rows) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _read_rows(path: str, columns: List[str]) -> np.ndarray:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != columns:
            raise InvalidArgument(f"Неверные столбцы в {path}: {header}, ожидалось {columns}")
        data = [[float(v) for v in row] for row in reader if row]
    return np.array(data, dtype=float).reshape(-1, len(columns))


def export_distribution(F: PhaseSpaceDistribution, path: str) -> None:
    """
    Сохраняет распределение: CSV (x, p, F) построчно по x, затем по p.

    Args:
        F: Снимок распределения
        path: Путь CSV-файла (заголовок пишется в path + '.json')
    """
    _ensure_dir(path)
    X, P = np.meshgrid(F.x_grid.points, F.p_grid.points, indexing='ij')
    _write_rows(path, ['x', 'p', 'F'], zip(X.ravel(), P.ravel(), np.asarray(F.values).ravel()))
    _write_header(path, {
        'kind': 'distribution',
        'x_grid': _grid_header(F.x_grid),
        'p_grid': _grid_header(F.p_grid),
        'time': F.time,
        'mass': F.mass,
        'potential': [float(v) for v in F.potential.values],
    })
    logger.info(f"Распределение сохранено: {path} ({F.x_grid.n_points}x{F.p_grid.n_points})")


def load_distribution(path: str) -> PhaseSpaceDistribution:
    """
    Загружает распределение, сохранённое export_distribution.

    Raises:
        OSError: Файл недоступен
        InvalidArgument: Данные не согласованы с заголовком
    """
    header = _read_header(path, 'distribution')
    x_grid = _grid_from_header(header['x_grid'])
    p_grid = _grid_from_header(header['p_grid'])
    data = _read_rows(path, ['x', 'p', 'F'])
    expected = x_grid.n_points * p_grid.n_points
    if data.shape[0] != expected:
        raise InvalidArgument(f"В {path} {data.shape[0]} строк, ожидалось {expected}")
    values = data[:, 2].reshape(x_grid.n_points, p_grid.n_points)
    potential = Field(x_grid, header.get('potential') or np.zeros(x_grid.n_points))
    return PhaseSpaceDistribution(
        x_grid, p_grid, values, time=float(header.get('time', 0.0)),
        mass=float(header.get('mass', 1.0)), potential=potential,
    )


def export_characteristic_function(Z: CharacteristicFunction, path: str) -> None:
    """Сохраняет Z_Q: CSV (x, dx, re, im)."""
    _ensure_dir(path)
    X, D = np.meshgrid(Z.x_grid.points, Z.shifts, indexing='ij')
    values = np.asarray(Z.values)
    _write_rows(path, ['x', 'dx', 're', 'im'], zip(X.ravel(), D.ravel(), values.real.ravel(), values.imag.ravel()))
    _write_header(path, {
        'kind': 'characteristic_function',
        'x_grid': _grid_header(Z.x_grid),
        'dx_grid': _grid_header(Z.dx_grid),
        'time': Z.time,
    })
    logger.info(f"Z_Q сохранена: {path}")


def export_wavefunction(psi: Wavefunction, path: str) -> None:
    """Сохраняет ψ: CSV (x, re, im) и параметры в заголовке."""
    _ensure_dir(path)
    values = np.asarray(psi.values)
    _write_rows(path, ['x', 're', 'im'], zip(psi.grid.points, values.real, values.imag))
    _write_header(path, {
        'kind': 'wavefunction',
        'grid': _grid_header(psi.grid),
        'time': psi.time,
        'hbar': psi.hbar,
        'mass': psi.mass,
        'energy': psi.energy,
    })
    logger.info(f"Волновая функция сохранена: {path}")


def load_wavefunction(path: str) -> Wavefunction:
    """Загружает ψ, сохранённую export_wavefunction."""
    header = _read_header(path, 'wavefunction')
    grid = _grid_from_header(header['grid'])
    data = _read_rows(path, ['x', 're', 'im'])
    if data.shape[0] != grid.n_points:
        raise InvalidArgument(f"В {path} {data.shape[0]} строк, ожидалось {grid.n_points}")
    energy = header.get('energy')
    return Wavefunction(
        grid, data[:, 1] + 1j * data[:, 2], time=float(header.get('time', 0.0)),
        hbar=float(header.get('hbar', 1.0)), mass=float(header.get('mass', 1.0)),
        energy=None if energy is None else float(energy),
    )
