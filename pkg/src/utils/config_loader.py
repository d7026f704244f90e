"""Загрузка конфигурации анализа."""

import copy
import json
import os
from typing import Any, Dict

from .console import log

DEFAULT_CONFIG: Dict[str, Any] = {
    "chain": {
        "stages": [
            {"label": "room temperature", "db": 60},
            {"label": "cryogenic", "db": 60},
        ]
    },
    "xps": {
        "presets": {
            "al2p": {"lambda_ox": 2.8, "r0": 1.4, "theta": 1.5707963267948966},
            "ta4f": {"lambda_ox": 1.9, "r0": 0.5, "theta": 1.5707963267948966},
        }
    },
    "fit": {
        "refine": True,
        "temperature_k": 0.010,
        "model_variant": "exponent_outside",
        "bootstrap": 0,
        "verbose": False,
    },
    "output": {"show_emoji": True, "float_digits": 4},
}


class ConfigLoader:
    """Класс для загрузки конфигурации из JSON-файла."""

    def __init__(self, config_path: str):
        """
        Инициализация загрузчика конфигурации.

        Args:
            config_path: Путь к файлу конфигурации
        """
        self.config_path = config_path
        self.config: Dict[str, Any] = {}
        self.last_modified = 0.0
        self._load()

    def _load(self) -> None:
        """Загружает конфигурацию из файла."""
        try:
            current_mtime = os.path.getmtime(self.config_path)

            if current_mtime > self.last_modified:
                with open(self.config_path, "r", encoding="utf-8") as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise ValueError("корень конфигурации должен быть объектом")
                self.config = self._merge_defaults(loaded)
                self.last_modified = current_mtime
                log(f"Конфигурация загружена: {self.config_path}", "✅")

        except (OSError, ValueError) as e:
            log(f"Ошибка при загрузке конфигурации: {e}", "⚠️")
            self._use_defaults()

    @staticmethod
    def _merge_defaults(loaded: Dict[str, Any]) -> Dict[str, Any]:
        """Дополняет секции файла значениями по умолчанию."""
        merged = copy.deepcopy(DEFAULT_CONFIG)
        for section, value in loaded.items():
            if isinstance(value, dict) and isinstance(merged.get(section), dict):
                merged[section].update(value)
            else:
                merged[section] = value
        return merged

    def _use_defaults(self) -> None:
        """Использует значения по умолчанию."""
        self.config = copy.deepcopy(DEFAULT_CONFIG)

    def reload(self) -> bool:
        """
        Перечитывает файл, если он изменился.

        Returns:
            True если конфигурация была обновлена
        """
        old_mtime = self.last_modified
        self._load()
        return self.last_modified > old_mtime

    def get(self, key: str = None, default: Any = None) -> Any:
        """
        Получает значение из конфигурации.

        Args:
            key: Ключ (если None, возвращает весь словарь)
            default: Значение по умолчанию

        Returns:
            Значение из конфигурации или default
        """
        if key is None:
            return self.config
        return self.config.get(key, default)
