"""Unit тесты конфигурации."""
import json

import pytest

from config.config import CONFIG_ENV, DEFAULT_TOLERANCES, LabConfig


def _write_config(tmp_path, data):
    path = tmp_path / "lab.json"
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


# ===== ТЕСТЫ ЗНАЧЕНИЙ ПО УМОЛЧАНИЮ =====

def test_defaults(lab_config):
    """Тест значений по умолчанию: натуральные единицы, сетка 4001 узел"""
    assert lab_config.HBAR == 1.0
    assert lab_config.WINDOW == (-12.0, 12.0)
    assert lab_config.GRID_POINTS == 4001
    assert lab_config.FD_ACCURACY == 6
    assert lab_config.SINK_CONVENTION == 'amplitude'
    assert lab_config.OUTPUT_FORMAT == 'csv'
    assert lab_config.tolerance('table2') == 1e-4
    assert lab_config.validate() == (True, None)


def test_tolerances_are_copied(lab_config):
    """Тест: изменение допуска не затрагивает таблицу по умолчанию"""
    lab_config.set_tolerance('qhj', 1e-3)
    assert DEFAULT_TOLERANCES['qhj'] == 1e-6
    assert LabConfig().tolerance('qhj') == 1e-6


def test_repr_mentions_grid(lab_config):
    """Тест строкового представления"""
    assert 'GRID_POINTS=4001' in repr(lab_config)


# ===== ТЕСТЫ ФАЙЛА КОНФИГУРАЦИИ =====

def test_load_file(tmp_path, monkeypatch):
    """Тест загрузки JSON-файла с ключами без учёта регистра"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    path = _write_config(tmp_path, {
        'grid_points': 801,
        'window': '-8,8',
        'Sink_Convention': 'DENSITY',
        'tolerances': {'qhj': 1e-5},
    })
    config = LabConfig(path)
    assert config.GRID_POINTS == 801
    assert config.WINDOW == (-8.0, 8.0)
    assert config.SINK_CONVENTION == 'density'
    assert config.tolerance('qhj') == 1e-5
    assert config.CONFIG_PATH == path


def test_config_from_environment(tmp_path, monkeypatch):
    """Тест: путь к файлу берётся из переменной окружения"""
    path = _write_config(tmp_path, {'omega': 2.0})
    monkeypatch.setenv(CONFIG_ENV, path)
    assert LabConfig().OMEGA == 2.0


def test_load_file_unknown_key(tmp_path, monkeypatch):
    """Тест отказа для неизвестного ключа"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    with pytest.raises(ValueError):
        LabConfig(_write_config(tmp_path, {'speed_of_light': 1.0}))


def test_load_file_not_object(tmp_path, monkeypatch):
    """Тест отказа для JSON, не являющегося объектом"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    with pytest.raises(ValueError):
        LabConfig(_write_config(tmp_path, [1, 2, 3]))


def test_load_file_missing(tmp_path, monkeypatch):
    """Тест отказа для отсутствующего файла"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    with pytest.raises(OSError):
        LabConfig(str(tmp_path / "missing.json"))


def test_load_file_invalid_json(tmp_path, monkeypatch):
    """Тест отказа для повреждённого JSON"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    path = tmp_path / "broken.json"
    path.write_text("{grid_points: ", encoding='utf-8')
    with pytest.raises(ValueError):
        LabConfig(str(path))


# ===== ТЕСТЫ ПЕРЕОПРЕДЕЛЕНИЙ =====

def test_parse_tolerance(lab_config):
    """Тест строки NAME=VALUE"""
    lab_config.parse_tolerance('table2 = 1e-3')
    assert lab_config.tolerance('table2') == 1e-3


@pytest.mark.parametrize("assignment", ["table2", "=1e-3", "bogus=1e-3", "table2=abc"])
def test_parse_tolerance_rejects(lab_config, assignment):
    """Тест отказа для неверных переопределений допусков"""
    with pytest.raises(ValueError):
        lab_config.parse_tolerance(assignment)


def test_apply_rejects_fractional_points(lab_config):
    """Тест: число узлов должно быть целым"""
    with pytest.raises(ValueError):
        lab_config.apply({'grid_points': 100.5})
    lab_config.apply({'grid_points': 101.0})
    assert lab_config.GRID_POINTS == 101


def test_apply_window_pair(lab_config):
    """Тест окна, заданного парой чисел"""
    lab_config.apply({'window': [-3, 5]})
    assert lab_config.WINDOW == (-3.0, 5.0)
    with pytest.raises(ValueError):
        lab_config.apply({'window': '1,2,3'})


# ===== ТЕСТЫ ВАЛИДАЦИИ =====

@pytest.mark.parametrize("overrides", [
    {'window': '1,1'},
    {'hbar': 0.0},
    {'grid_points': 3},
    {'dx_points': 10},
    {'fd_accuracy': 5},
    {'truncation': 2.0},
    {'output_format': 'xml'},
    {'sink_convention': 'mass'},
    {'tolerances': {'table2': 0.0}},
])
def test_validate_rejects(lab_config, overrides):
    """Тест валидации некорректных значений"""
    lab_config.apply(overrides)
    ok, message = lab_config.validate()
    assert ok is False
    assert message
