"""Физические константы (точные значения SI)."""

import math
from dataclasses import dataclass
from typing import Final

H: Final[float] = 6.62607015e-34
K_B: Final[float] = 1.380649e-23
HBAR: Final[float] = H / (2 * math.pi)

# Базовая температура криостата по умолчанию, К
BASE_TEMPERATURE_K: Final[float] = 0.010


@dataclass(frozen=True)
class PhysicalConstants:
    """Неизменяемый набор констант для передачи в расчёты."""

    h: float = H
    k_b: float = K_B
    hbar: float = HBAR


PHYSICAL_CONSTANTS: Final[PhysicalConstants] = PhysicalConstants()
