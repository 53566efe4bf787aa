"""Настройка логирования для лаборатории."""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

# Флаг для предотвращения повторной инициализации
_logging_configured = False
_console_handler: Optional[logging.StreamHandler] = None


def setup_logging(log_level: str = 'INFO', log_file: Optional[str] = None) -> None:
    """
    Настраивает корневой логгер: консоль (stderr) и, при необходимости, файл с ротацией.

    Данные команд идут в stdout, поэтому все сообщения журнала пишутся
    только в поток диагностики.

    Args:
        log_level: Уровень логирования (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Путь к файлу логов (пусто или None: только консоль)
    """
    global _logging_configured, _console_handler

    numeric_level = getattr(logging, str(log_level).upper(), logging.INFO)

    # Повторный вызов: обработчики уже есть, но sys.stderr мог быть подменён
    if _logging_configured:
        logging.getLogger().setLevel(numeric_level)
        if _console_handler is not None:
            # setStream сбрасывает старый поток, а он может быть уже закрыт
            _console_handler.stream = sys.stderr
            _console_handler.setLevel(numeric_level)
        return

    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    date_format = '%Y-%m-%d %H:%M:%S'

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    # Удаляем существующие обработчики до добавления новых
    while root_logger.handlers:
        handler = root_logger.handlers[0]
        root_logger.removeHandler(handler)
        try:
            handler.close()
        except Exception:
            pass

    formatter = logging.Formatter(log_format, date_format)

    # Обработчик для файла (с ротацией)
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    # Обработчик для консоли
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)
    _console_handler = console_handler

    # Внешние библиотеки пишут только предупреждения
    logging.getLogger('asyncio').setLevel(logging.WARNING)

    _logging_configured = True
