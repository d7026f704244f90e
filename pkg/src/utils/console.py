"""Вывод диагностических сообщений с меткой времени."""

import sys
from datetime import datetime
from typing import TextIO

# Переключается из конфигурации (output.show_emoji)
SHOW_EMOJI = True


def timestamp() -> str:
    """Текущее время в формате ЧЧ:ММ:СС."""
    return datetime.now().strftime("%H:%M:%S")


def log(message: str, emoji: str = "", stream: TextIO = None) -> None:
    """
    Печатает строку вида ``[ЧЧ:ММ:СС] ✅ сообщение``.

    Args:
        message: Текст сообщения
        emoji: Маркер перед текстом (выводится, если включён в конфиге)
        stream: Куда писать; по умолчанию stderr
    """
    marker = f"{emoji} " if emoji and SHOW_EMOJI else ""
    print(f"[{timestamp()}] {marker}{message}", file=stream or sys.stderr)


def step(message: str, stream: TextIO = None) -> None:
    """Строка прогресса этапа: ``  → сообщение``."""
    print(f"  → {message}", file=stream or sys.stderr)
