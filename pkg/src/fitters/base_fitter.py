"""Базовый класс для всех фиттеров."""

from abc import ABC, abstractmethod
from typing import Any, Dict

from ..utils.console import step


class BaseFitter(ABC):
    """Абстрактный базовый класс для фиттеров."""

    def __init__(self, config: Dict[str, Any]):
        """
        Инициализация фиттера.

        Args:
            config: Секция ``fit`` конфигурации
        """
        self.config = config
        self.verbose = bool(config.get("verbose", False))

    @abstractmethod
    def fit(self, data: Any) -> Any:
        """
        Фитирует данные и возвращает результат.

        Args:
            data: Трасса или свип

        Returns:
            Результат фита
        """
        pass

    def _progress(self, message: str) -> None:
        """Печатает строку прогресса, если включён verbose."""
        if self.verbose:
            step(message)
