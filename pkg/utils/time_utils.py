"""Утилиты для измерения времени выполнения команд."""

import time
from typing import Optional


def start_timer() -> float:
    """
    Возвращает отметку монотонных часов.

    Returns:
        float: Значение time.perf_counter()
    """
    return time.perf_counter()


def elapsed(start: float, now: Optional[float] = None) -> float:
    """Секунды, прошедшие с отметки start."""
    end = time.perf_counter() if now is None else now
    return max(0.0, end - start)


def format_duration(seconds: float) -> str:
    """
    Форматирует длительность в формат ЧЧ:ММ:СС.ммм.

    Args:
        seconds: Длительность в секундах

    Returns:
        str: Отформатированная длительность
    """
    millis_total = int(round(max(0.0, seconds) * 1000))
    hours, rest = divmod(millis_total, 3_600_000)
    minutes, rest = divmod(rest, 60_000)
    secs, millis = divmod(rest, 1000)
    return f"{hours:02}:{minutes:02}:{secs:02}.{millis:03}"
