"""Численное ядро: равномерные сетки, квадратуры, конечные разности и спектр трёхдиагональных матриц."""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from numpy.polynomial import polynomial as P
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, eigh_tridiagonal

from services.errors import DomainError, InvalidArgument, NumericalFailure

logger = logging.getLogger(__name__)

# Порядок точности разностных схем по умолчанию для операций верхнего уровня
DEFAULT_ACCURACY = 4
# Относительный порог обрезки бесконечных интегралов
TRUNCATION = 1e-16
SUPPORTED_ACCURACY = (2, 4, 6)

Number = Union[float, complex]


@dataclass(frozen=True)
class Grid1D:
    """Равномерная сетка с включёнными концами отрезка."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidArgument(f"Границы сетки должны быть конечными: [{self.x_min}, {self.x_max}]")
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise InvalidArgument(f"Число точек должно быть целым: {self.n_points}")
        if self.n_points < 3:
            raise InvalidArgument(f"Сетка требует не менее 3 точек, получено {self.n_points}")
        if not self.x_max > self.x_min:
            raise InvalidArgument(f"Вырожденный отрезок: [{self.x_min}, {self.x_max}]")
        object.__setattr__(self, 'x_min', float(self.x_min))
        object.__setattr__(self, 'x_max', float(self.x_max))
        object.__setattr__(self, 'n_points', int(self.n_points))

    @property
    def spacing(self) -> float:
        """Шаг сетки."""
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        """Узлы сетки (строго возрастающие)."""
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        """Проверяет симметрию сетки относительно нуля."""
        scale = max(abs(self.x_min), abs(self.x_max))
        return abs(self.x_min + self.x_max) <= rtol * scale

    def sub_grid(self, start: int, stop: int) -> 'Grid1D':
        """
        Возвращает подсетку из узлов [start, stop).

        Args:
            start: Индекс первого узла
            stop: Индекс за последним узлом

        Returns:
            Grid1D: Подсетка с тем же шагом
        """
        if not 0 <= start < stop <= self.n_points:
            raise InvalidArgument(f"Неверный диапазон подсетки [{start}, {stop})")
        pts = self.points
        return Grid1D(float(pts[start]), float(pts[stop - 1]), stop - start)

    def index_window(self, x_lo: float, x_hi: float) -> Tuple[int, int]:
        """Диапазон индексов [start, stop) узлов, попадающих в отрезок [x_lo, x_hi]."""
        pts = self.points
        tol = 1e-12 * max(abs(self.x_min), abs(self.x_max), self.spacing)
        inside = np.nonzero((pts >= x_lo - tol) & (pts <= x_hi + tol))[0]
        if inside.size == 0:
            raise InvalidArgument(f"Окно [{x_lo}, {x_hi}] не содержит узлов сетки")
        return int(inside[0]), int(inside[-1]) + 1


def frozen_array(values, shape: Tuple[int, ...], what: str) -> np.ndarray:
    arr = np.array(values)
    if arr.dtype.kind not in 'fc':
        arr = arr.astype(float)
    if arr.shape != shape:
        raise InvalidArgument(f"{what}: ожидалась форма {shape}, получено {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{what}: значения должны быть конечными")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Field:
    """Значения (вещественные или комплексные) на узлах Grid1D."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', frozen_array(self.values, (self.grid.n_points,), 'Field'))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def slice(self, start: int, stop: int) -> 'Field':
        """Поле на подсетке [start, stop)."""
        return Field(self.grid.sub_grid(start, stop), self.values[start:stop])

    def window(self, x_lo: float, x_hi: float) -> 'Field':
        """Поле, ограниченное отрезком [x_lo, x_hi]."""
        return self.slice(*self.grid.index_window(x_lo, x_hi))

    def interior(self, margin: int = 2) -> 'Field':
        """Поле без margin граничных узлов с каждой стороны."""
        return self.slice(margin, self.grid.n_points - margin)


@dataclass(frozen=True)
class Field2D:
    """Значения на прямом произведении двух сеток (ось 0: x_grid, ось 1: y_grid)."""

    x_grid: Grid1D
    y_grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        shape = (self.x_grid.n_points, self.y_grid.n_points)
        object.__setattr__(self, 'values', frozen_array(self.values, shape, 'Field2D'))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def interior(self, margin: int = 2, axis: Optional[int] = None) -> 'Field2D':
        """Обрезает margin узлов по краям (по обеим осям или только по axis)."""
        nx, ny = self.values.shape
        xs = slice(margin, nx - margin) if axis in (None, 0) else slice(0, nx)
        ys = slice(margin, ny - margin) if axis in (None, 1) else slice(0, ny)
        x_grid = self.x_grid.sub_grid(xs.start, xs.stop)
        y_grid = self.y_grid.sub_grid(ys.start, ys.stop)
        return Field2D(x_grid, y_grid, self.values[xs, ys])


@dataclass(frozen=True)
class EigenPair:
    """Собственное значение и собственный вектор."""

    value: float
    vector: np.ndarray


def make_uniform_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    """
    Создаёт равномерную сетку.

    Args:
        x_min: Левый конец
        x_max: Правый конец
        n: Число узлов (не менее 3)

    Returns:
        Grid1D: Сетка с шагом (x_max - x_min)/(n - 1)
    """
    return Grid1D(x_min, x_max, n)


def truncation_radius(sigma: float, relative: float = TRUNCATION) -> float:
    """Радиус, за которым гауссиана с масштабом sigma падает ниже relative от пика."""
    if sigma <= 0 or not 0 < relative < 1:
        raise InvalidArgument(f"Неверные параметры обрезки: sigma={sigma}, relative={relative}")
    return sigma * math.sqrt(2.0 * math.log(1.0 / relative))


def _integrate_real(values: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    n = values.shape[axis]
    if n % 2 == 1:
        return simpson(values, dx=spacing, axis=axis)
    head = np.take(values, np.arange(n - 1), axis=axis)
    last = np.take(values, [n - 2, n - 1], axis=axis)
    return simpson(head, dx=spacing, axis=axis) + 0.5 * spacing * last.sum(axis=axis)


def integrate_array(values, spacing: float, axis: int = -1):
    """
    Составная формула Симпсона вдоль оси; при чётном числе узлов последний
    интервал берётся по формуле трапеций.

    Args:
        values: Массив значений
        spacing: Шаг сетки
        axis: Ось интегрирования

    Returns:
        Интеграл (массив меньшей размерности или скаляр)
    """
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return _integrate_real(values.real, spacing, axis) + 1j * _integrate_real(values.imag, spacing, axis)
    return _integrate_real(values.astype(float), spacing, axis)


def integrate(f: Field) -> Number:
    """Интеграл поля по его сетке."""
    result = integrate_array(f.values, f.grid.spacing)
    if np.iscomplexobj(result):
        return complex(result)
    return float(result)


@lru_cache(maxsize=None)
def stencil_weights(offsets: Tuple[int, ...], order: int) -> np.ndarray:
    """
    Веса конечно-разностного шаблона для производной порядка order в точке 0.

    Args:
        offsets: Смещения узлов шаблона (в шагах сетки)
        order: Порядок производной

    Returns:
        np.ndarray: Веса (без множителя 1/h**order)
    """
    weights = sympy.finite_diff_weights(order, list(offsets), 0)[order][-1]
    return np.array([float(w) for w in weights])


def preload_stencils(accuracies: Sequence[int] = SUPPORTED_ACCURACY) -> int:
    """
    Заполняет кэш весов всех шаблонов, которые использует differentiate_array.

    Вызывается до параллельного запуска проверок, чтобы рабочие потоки
    не обращались к sympy одновременно.

    Returns:
        int: Число шаблонов в кэше
    """
    for accuracy in accuracies:
        _check_accuracy(accuracy)
        half = accuracy // 2
        for order in (1, 2):
            width = accuracy + order
            stencil_weights(tuple(range(-half, half + 1)), order)
            for i in range(half):
                stencil_weights(tuple(range(-i, width - i)), order)
                stencil_weights(tuple(range(i + 1 - width, i + 1)), order)
    return stencil_weights.cache_info().currsize


def _check_accuracy(accuracy: int) -> None:
    if accuracy not in SUPPORTED_ACCURACY:
        raise InvalidArgument(f"Порядок точности должен быть одним из {SUPPORTED_ACCURACY}, получено {accuracy}")


def differentiate_array(values, spacing: float, order: int, accuracy: int = 2, axis: int = 0) -> np.ndarray:
    """
    Производная вдоль оси: центральные разности внутри, односторонние шаблоны
    того же порядка точности у границ.

    Args:
        values: Массив значений
        spacing: Шаг сетки
        order: Порядок производной (1 или 2)
        accuracy: Порядок аппроксимации (2, 4 или 6)
        axis: Ось дифференцирования

    Returns:
        np.ndarray: Производная той же формы
    """
    if order not in (1, 2):
        raise InvalidArgument(f"Поддерживаются только производные 1 и 2 порядка, получено {order}")
    _check_accuracy(accuracy)
    arr = np.moveaxis(np.asarray(values), axis, 0)
    n = arr.shape[0]
    half = accuracy // 2
    width = accuracy + order
    if n < max(width, 5):
        raise InvalidArgument(f"Для производной порядка {order} с точностью {accuracy} нужно не менее {max(width, 5)} узлов, получено {n}")

    dtype = np.result_type(arr.dtype, float)
    out = np.empty(arr.shape, dtype=dtype)
    offsets = tuple(range(-half, half + 1))
    central = stencil_weights(offsets, order)
    out[half:n - half] = sum(w * arr[half + s:n - half + s] for s, w in zip(offsets, central) if w != 0.0)
    for i in range(half):
        left = tuple(range(-i, width - i))
        out[i] = sum(w * arr[i + s] for s, w in zip(left, stencil_weights(left, order)))
        j = n - 1 - i
        right = tuple(range(n - width - j, n - j))
        out[j] = sum(w * arr[j + s] for s, w in zip(right, stencil_weights(right, order)))
    out /= spacing ** order
    return np.moveaxis(out, 0, axis)


def derivative(f: Field, order: int, accuracy: int = 2) -> Field:
    """
    Производная поля.

    Args:
        f: Поле (не менее 5 узлов)
        order: 1 или 2
        accuracy: Порядок аппроксимации разностной схемы

    Returns:
        Field: Производная на той же сетке
    """
    return Field(f.grid, differentiate_array(f.values, f.grid.spacing, order, accuracy))


def log_second_derivative(f: Field, accuracy: int = 2) -> Field:
    """Вторая производная ln f; f должна быть строго положительной."""
    values = np.asarray(f.values)
    if np.iscomplexobj(values) or np.any(values <= 0):
        raise DomainError("ln f определён только для строго положительного вещественного поля")
    return derivative(Field(f.grid, np.log(values)), 2, accuracy)


def interpolate_cubic(f: Field, x_new) -> np.ndarray:
    """Кубическая сплайн-интерполяция поля в точках x_new (вещественная и мнимая части отдельно)."""
    x_new = np.asarray(x_new, dtype=float)
    lo, hi = f.grid.x_min, f.grid.x_max
    tol = 1e-12 * max(abs(lo), abs(hi), f.grid.spacing)
    if np.any(x_new < lo - tol) or np.any(x_new > hi + tol):
        raise InvalidArgument("Точки интерполяции выходят за пределы сетки")
    x = f.grid.points
    values = np.asarray(f.values)
    real = CubicSpline(x, values.real)(x_new)
    if np.iscomplexobj(values):
        return real + 1j * CubicSpline(x, values.imag)(x_new)
    return real


def richardson_limit(h_values: Sequence[float], estimates) -> np.ndarray:
    """
    Экстраполяция к h -> 0 по оценкам с ошибкой, чётной по h.

    Args:
        h_values: Шаги, на которых получены оценки
        estimates: Оценки, ось 0 соответствует h_values

    Returns:
        np.ndarray: Предел при h -> 0
    """
    h2 = np.asarray(h_values, dtype=float) ** 2
    est = np.asarray(estimates)
    if est.shape[0] != h2.size:
        raise InvalidArgument("Число оценок не совпадает с числом шагов")
    if h2.size == 1:
        return est[0]
    flat = est.reshape(h2.size, -1)
    deg = h2.size - 1

    def _fit(y):
        return P.polyfit(h2, y, deg)[0]

    if np.iscomplexobj(flat):
        limit = _fit(flat.real) + 1j * _fit(flat.imag)
    else:
        limit = _fit(flat)
    return np.asarray(limit).reshape(est.shape[1:])


def solve_tridiag_eigen(
    diagonal: Sequence[float],
    off_diagonal: Sequence[float],
    k: int,
    grid: Optional[Grid1D] = None,
) -> List[EigenPair]:
    """
    Нижние k собственных пар симметричной трёхдиагональной матрицы.

    Args:
        diagonal: Главная диагональ
        off_diagonal: Побочная диагональ (длина на 1 меньше)
        k: Число собственных пар
        grid: Сетка для нормировки векторов квадратурой (иначе евклидова норма)

    Returns:
        List[EigenPair]: Пары по возрастанию собственных значений
    """
    d = np.asarray(diagonal, dtype=float)
    e = np.asarray(off_diagonal, dtype=float)
    if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
        raise InvalidArgument(f"Побочная диагональ должна иметь длину {d.size - 1}, получено {e.size}")
    if not 1 <= k <= d.size:
        raise InvalidArgument(f"k должно быть в диапазоне [1, {d.size}], получено {k}")
    if grid is not None and grid.n_points != d.size:
        raise InvalidArgument("Размер сетки не совпадает с размером матрицы")

    try:
        values, vectors = eigh_tridiagonal(d, e, select='i', select_range=(0, k - 1))
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Трёхдиагональный решатель не сошёлся: {exc}") from exc

    applied = d[:, None] * vectors
    applied[:-1] += e[:, None] * vectors[1:]
    applied[1:] += e[:, None] * vectors[:-1]
    residual = float(np.max(np.abs(applied - vectors * values)))
    row_sums = np.abs(d).copy()
    row_sums[:-1] += np.abs(e)
    row_sums[1:] += np.abs(e)
    norm_inf = float(np.max(row_sums))
    logger.debug(f"Трёхдиагональный спектр: n={d.size}, k={k}, невязка={residual:.3e}, ||A||={norm_inf:.3e}")
    if residual > 1e-8 * max(norm_inf, np.finfo(float).tiny):
        raise NumericalFailure(f"Невязка собственных векторов {residual:.3e} превышает допуск")

    pairs = []
    for j in range(k):
        vec = vectors[:, j]
        if grid is not None:
            norm = integrate_array(vec * vec, grid.spacing)
            if norm <= 0:
                raise NumericalFailure("Неположительная квадратурная норма собственного вектора")
            vec = vec / math.sqrt(norm)
        pairs.append(EigenPair(float(values[j]), vec))
    return pairs
