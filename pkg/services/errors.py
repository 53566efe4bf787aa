"""Иерархия исключений лаборатории."""


class LabError(Exception):
    """Базовое исключение для всех ошибок вычислительных сервисов."""


class InvalidArgument(LabError, ValueError):
    """Некорректные входные параметры (границы сетки, размеры, имена)."""


class DomainError(LabError, ValueError):
    """Аргумент вне области определения (например, ln от неположительной плотности)."""


class DegenerateDistribution(LabError, ValueError):
    """Плотность rho ниже порога на всей сетке."""


class FlatDirection(LabError, ValueError):
    """Кривизна энтропии не отрицательна: гауссова модель флуктуаций не определена."""


class NumericalFailure(LabError, ArithmeticError):
    """Численный метод не сошёлся или нарушил собственную проверку точности."""


class InvalidModel(LabError, ValueError):
    """Модель не нормируема (например, потенциал не удерживает распределение)."""


class PreconditionViolation(LabError):
    """Операция вызвана в точке, где её предусловие не выполняется."""
