"""Иерархия исключений пакета.

У каждого класса есть ``exit_code`` — код завершения CLI:
1 для ошибок ввода и валидации, 2 для численных сбоев.
"""

from typing import Any, Optional


class ResLabError(Exception):
    """Базовое исключение пакета."""

    exit_code = 1


class ParseError(ResLabError):
    """Ошибка разбора входного файла."""

    def __init__(self, message: str, line: Optional[int] = None):
        """
        Args:
            message: Описание ошибки
            line: Номер строки файла (с единицы)
        """
        self.line = line
        if line is not None:
            message = f"строка {line}: {message}"
        super().__init__(message)


class ValidationError(ResLabError, ValueError):
    """Нарушен инвариант типа или диапазон аргумента."""


class PreconditionError(ValidationError):
    """Данные не подходят для выбранной операции."""


class FitFailureError(ResLabError):
    """Нелинейный фит не сошёлся."""

    exit_code = 2

    def __init__(self, message: str, last_iterate: Any = None):
        """
        Args:
            message: Описание ошибки
            last_iterate: Последнее приближение оптимизатора
        """
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateFitError(FitFailureError):
    """В данных нет особенности, которую можно фитировать."""


class DegenerateGeometryError(FitFailureError):
    """Точки не задают окружность (коллинеарны или их слишком мало)."""


class InconsistentGeometryError(FitFailureError):
    """Параметры окружности дают нефизичную добротность."""


class UnphysicalParametersError(ResLabError):
    """Комбинация добротностей даёт Q_i <= 0."""

    exit_code = 2


class InfiniteQError(ResLabError):
    """Суммарные потери равны нулю."""

    exit_code = 2
