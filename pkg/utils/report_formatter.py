"""Форматирование отчётов команд в CSV и JSON."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

# Значащие цифры чисел в CSV
CSV_SIGNIFICANT = 6


@dataclass
class ReportTable:
    """
    Табличный отчёт: строки метаданных, заголовок и строки данных.

    fixed_columns задаёт число знаков после запятой для отдельных столбцов CSV
    (остальные числа выводятся с CSV_SIGNIFICANT значащими цифрами).
    """

    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)
    fixed_columns: Dict[str, int] = field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Ожидалось {len(self.columns)} значений, получено {len(values)}")
        self.rows.append(list(values))


Report = Union[ReportTable, Mapping[str, Any]]


def format_number(value: Any, decimals: Optional[int] = None) -> str:
    """
    Текстовое представление значения ячейки CSV.

    Args:
        value: Число, строка, bool или None
        decimals: Фиксированное число знаков после запятой (иначе 6 значащих цифр)

    Returns:
        str: Представление ячейки
    """
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return 'nan'
        if math.isinf(number):
            return 'inf' if number > 0 else '-inf'
        if decimals is not None:
            return f"{number:.{decimals}f}"
        return f"{number:.{CSV_SIGNIFICANT}g}"
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Приводит numpy-типы и бесконечности к значениям, допустимым в строгом JSON."""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return 'nan'
        if math.isinf(number):
            return 'inf' if number > 0 else '-inf'
        return number
    return value


def _flatten(payload: Mapping[str, Any], prefix: str = '') -> List[List[Any]]:
    rows = []
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            rows.extend(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            rows.append([name, ';'.join(format_number(v) for v in value)])
        else:
            rows.append([name, value])
    return rows


def render_csv(report: Report) -> str:
    """
    CSV-представление отчёта; метаданные идут строками-комментариями '# key=value'.

    Вложенный словарь выводится парами quantity,value с составными ключами.
    """
    if not isinstance(report, ReportTable):
        report = ReportTable(columns=['quantity', 'value'], rows=_flatten(report))

    buffer = io.StringIO()
    for key, value in report.meta.items():
        buffer.write(f"# {key}={format_number(value)}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([
            format_number(value, report.fixed_columns.get(column))
            for column, value in zip(report.columns, row)
        ])
    return buffer.getvalue()


def render_json(report: Report) -> str:
    """JSON-представление с полной точностью и детерминированным порядком ключей."""
    if isinstance(report, ReportTable):
        payload = {
            'meta': report.meta,
            'rows': [dict(zip(report.columns, row)) for row in report.rows],
        }
    else:
        payload = report
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def render(report: Report, output_format: str) -> str:
    """
    Отчёт в заданном формате.

    Args:
        report: Таблица или вложенный словарь
        output_format: 'csv' или 'json'

    Returns:
        str: Текст отчёта
    """
    if output_format == 'csv':
        return render_csv(report)
    if output_format == 'json':
        return render_json(report)
    raise ValueError(f"Неизвестный формат вывода: {output_format}")
