"""Unit тесты форматирования отчётов, экспорта полей и утилит времени."""
import io
import json
import logging
import math
import sys

import numpy as np
import pytest

from services.errors import InvalidArgument
from services.exporters import (
    export_characteristic_function,
    export_distribution,
    export_wavefunction,
    header_path,
    load_distribution,
    load_wavefunction,
)
from services.numerics import make_uniform_grid
from services.phase_space import PhaseSpaceDistribution
from services.schrodinger_madelung import ho_eigenstate, ho_potential
from services.wigner_moyal import characteristic_function
from utils.logger_config import setup_logging
from utils.report_formatter import ReportTable, format_number, render, render_csv, render_json, to_jsonable
from utils.time_utils import elapsed, format_duration


@pytest.fixture
def small_distribution():
    """Гауссиана на сетке 21x31 в потенциале осциллятора"""
    x_grid = make_uniform_grid(-4.0, 4.0, 21)
    p_grid = make_uniform_grid(-5.0, 5.0, 31)
    return PhaseSpaceDistribution.from_function(
        x_grid, p_grid, lambda X, P: np.exp(-0.5 * X ** 2 - 0.5 * (P - 0.2) ** 2),
        time=0.25, mass=2.0, potential=ho_potential(x_grid),
    )


# ===== ТЕСТЫ ФОРМАТИРОВАНИЯ ЧИСЕЛ =====

@pytest.mark.parametrize("value,decimals,expected", [
    (None, None, ''),
    (True, None, 'true'),
    (np.bool_(False), None, 'false'),
    (3, None, '3'),
    (np.int64(7), None, '7'),
    (0.1234567, None, '0.123457'),
    (-1.0723649429, 5, '-1.07236'),
    (math.nan, None, 'nan'),
    (-math.inf, None, '-inf'),
    ('pass', None, 'pass'),
])
def test_format_number(value, decimals, expected):
    """Тест представления ячеек CSV"""
    assert format_number(value, decimals) == expected


def test_to_jsonable():
    """Тест приведения numpy-типов и бесконечностей"""
    payload = to_jsonable({'a': np.float64(0.5), 'b': np.array([1, 2]), 'c': math.inf, 1: (np.bool_(True),)})
    assert payload == {'a': 0.5, 'b': [1, 2], 'c': 'inf', '1': [True]}
    json.dumps(payload)


# ===== ТЕСТЫ CSV И JSON =====

def test_render_csv_table():
    """Тест таблицы с метаданными и фиксированными столбцами"""
    table = ReportTable(columns=['n', 'G_n', 'status'], meta={'command': 'table2', 'n_max': 1}, fixed_columns={'G_n': 5})
    table.add_row(0, -1.0723649429, 'pass')
    table.add_row(1, -1.3427, 'pass')
    assert render_csv(table) == (
        "# command=table2\n"
        "# n_max=1\n"
        "n,G_n,status\n"
        "0,-1.07236,pass\n"
        "1,-1.34270,pass\n"
    )


def test_add_row_checks_length():
    """Тест отказа для строки неверной длины"""
    table = ReportTable(columns=['a', 'b'])
    with pytest.raises(ValueError):
        table.add_row(1)


def test_render_csv_nested_mapping():
    """Тест: вложенный словарь выводится парами quantity,value"""
    text = render_csv({'lock': {'energy': 0.5, 'pathology': False}, 'q0': [0.0, 1.0]})
    assert text == (
        "quantity,value\n"
        "lock.energy,0.5\n"
        "lock.pathology,false\n"
        "q0,0;1\n"
    )


def test_render_json_table():
    """Тест JSON-представления таблицы"""
    table = ReportTable(columns=['check', 'pass'], meta={'suite': 'boltzmann'})
    table.add_row('iff[locked_at_minimum]', True)
    data = json.loads(render_json(table))
    assert data == {'meta': {'suite': 'boltzmann'}, 'rows': [{'check': 'iff[locked_at_minimum]', 'pass': True}]}


def test_render_json_deterministic():
    """Тест: порядок ключей не зависит от порядка вставки"""
    assert render_json({'b': 1, 'a': 2}) == render_json({'a': 2, 'b': 1})
    assert render_json({'x': math.nan}).strip().endswith('}')


def test_render_unknown_format():
    """Тест отказа для неизвестного формата"""
    with pytest.raises(ValueError):
        render({'a': 1}, 'xml')


# ===== ТЕСТЫ ЭКСПОРТА ПОЛЕЙ =====

def test_wavefunction_roundtrip(tmp_path):
    """Тест сохранения и загрузки ψ без потери точности"""
    grid = make_uniform_grid(-6.0, 6.0, 121)
    psi, _ = ho_eigenstate(2, grid)
    psi = psi.with_values(psi.values * np.exp(0.3j * grid.points), time=1.5)
    path = str(tmp_path / "fields" / "psi.csv")
    export_wavefunction(psi, path)
    loaded = load_wavefunction(path)
    assert loaded.grid == grid
    assert np.array_equal(loaded.values, psi.values)
    assert loaded.time == 1.5
    assert loaded.energy == pytest.approx(2.5)


def test_distribution_roundtrip(tmp_path, small_distribution):
    """Тест сохранения и загрузки F(x, p) с потенциалом и массой"""
    path = str(tmp_path / "F.csv")
    export_distribution(small_distribution, path)
    loaded = load_distribution(path)
    assert np.array_equal(loaded.values, small_distribution.values)
    assert loaded.mass == 2.0
    assert loaded.time == 0.25
    assert np.array_equal(loaded.potential.values, small_distribution.potential.values)


def test_load_wrong_kind(tmp_path):
    """Тест отказа при загрузке файла другого вида"""
    grid = make_uniform_grid(-3.0, 3.0, 31)
    psi, _ = ho_eigenstate(0, grid)
    path = str(tmp_path / "psi.csv")
    export_wavefunction(psi, path)
    with pytest.raises(InvalidArgument):
        load_distribution(path)


def test_load_missing_file(tmp_path):
    """Тест: отсутствующий файл даёт OSError"""
    with pytest.raises(OSError):
        load_wavefunction(str(tmp_path / "absent.csv"))


def test_export_characteristic_function(tmp_path, small_distribution):
    """Тест экспорта Z_Q: заголовок и число строк"""
    Z = characteristic_function(small_distribution, make_uniform_grid(-0.1, 0.1, 5))
    path = str(tmp_path / "Z.csv")
    export_characteristic_function(Z, path)
    with open(header_path(path), encoding='utf-8') as f:
        header = json.load(f)
    assert header['kind'] == 'characteristic_function'
    assert header['dx_grid']['n_points'] == 5
    with open(path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'x,dx,re,im'
    assert len(lines) == 1 + 21 * 5


# ===== ТЕСТЫ УТИЛИТ ВРЕМЕНИ =====

def test_format_duration():
    """Тест формата ЧЧ:ММ:СС.ммм"""
    assert format_duration(3661.5) == "01:01:01.500"
    assert format_duration(0.0004) == "00:00:00.000"
    assert format_duration(-5.0) == "00:00:00.000"


def test_elapsed():
    """Тест прошедшего времени с явной отметкой"""
    assert elapsed(1.0, 3.5) == 2.5
    assert elapsed(5.0, 3.0) == 0.0


# ===== ТЕСТЫ ЛОГИРОВАНИЯ =====

def test_setup_logging_follows_replaced_stderr(monkeypatch):
    """Тест: повторная настройка переключает консольный обработчик на текущий stderr"""
    first, second = io.StringIO(), io.StringIO()
    monkeypatch.setattr(sys, 'stderr', first)
    setup_logging('WARNING')
    monkeypatch.setattr(sys, 'stderr', second)
    setup_logging('WARNING')

    logging.getLogger('lab.test').warning("переключение потока")

    assert 'переключение потока' in second.getvalue()
    assert 'переключение потока' not in first.getvalue()
