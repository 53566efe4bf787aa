"""Конфигурация pytest для тестов."""
import sys
from pathlib import Path

import pytest

# Добавляем корневую директорию проекта в путь
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Настройка pytest-asyncio (опционально)
try:
    import pytest_asyncio
    pytest_plugins = ('pytest_asyncio',)
except ImportError:
    # pytest-asyncio не установлен, тесты все равно будут работать
    pass


@pytest.fixture
def lab_config(monkeypatch):
    """Конфигурация по умолчанию без внешнего JSON-файла"""
    from config.config import CONFIG_ENV, LabConfig

    monkeypatch.delenv(CONFIG_ENV, raising=False)
    return LabConfig()


@pytest.fixture
def ho_grid():
    """Сетка [-12, 12] из 4001 узла для состояний осциллятора"""
    from services.numerics import make_uniform_grid

    return make_uniform_grid(-12.0, 12.0, 4001)
