"""Проверка пользовательского ввода командной строки."""

import json
import math
import os
from typing import Any, Dict, Optional

from ..core.errors import ValidationError

SEED_ENV = "RESLAB_SEED"


class InputValidator:
    """Валидация чисел, зёрен и явно указанных JSON-файлов."""

    def __init__(self, environ: Optional[Dict[str, str]] = None):
        """
        Инициализация валидатора.

        Args:
            environ: Переменные окружения (по умолчанию os.environ)
        """
        self.environ = os.environ if environ is None else environ

    def positive(self, value: Optional[float], name: str) -> float:
        """
        Проверяет, что число задано, конечно и больше нуля.

        Raises:
            ValidationError: иначе
        """
        if value is None:
            raise ValidationError(f"Не задан параметр --{name}")
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"--{name} должно быть > 0, получено {value}")
        return float(value)

    def finite(self, value: Optional[float], name: str) -> float:
        if value is None:
            raise ValidationError(f"Не задан параметр --{name}")
        if not math.isfinite(value):
            raise ValidationError(f"--{name} должно быть конечным числом")
        return float(value)

    def seed(self, flag_value: Optional[int]) -> int:
        """
        Итоговое зерно: переменная RESLAB_SEED важнее флага --seed.

        Returns:
            Зерно (0, если не задано нигде)
        """
        raw = self.environ.get(SEED_ENV)
        if raw is not None and raw.strip():
            try:
                value = int(raw.strip(), 0)
            except ValueError:
                raise ValidationError(
                    f"{SEED_ENV} должна быть целым числом: {raw!r}"
                ) from None
        else:
            value = 0 if flag_value is None else int(flag_value)
        if value < 0 or value >= 2**64:
            raise ValidationError("Зерно должно быть 64-битным беззнаковым числом")
        return value

    def load_json(self, path: str, what: str) -> Any:
        """
        Читает явно указанный JSON-файл без подстановки значений по умолчанию.

        Args:
            path: Путь к файлу
            what: Что это за файл (для сообщения об ошибке)

        Raises:
            ValidationError: файл не читается или не является JSON
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except OSError as e:
            raise ValidationError(f"Не удалось прочитать {what} {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ValidationError(
                f"{what} {path}: неверный JSON (строка {e.lineno}): {e.msg}"
            ) from e

    def json_object(self, path: str, what: str) -> Dict[str, Any]:
        data = self.load_json(path, what)
        if not isinstance(data, dict):
            raise ValidationError(f"{what} {path}: ожидался JSON-объект")
        return data
