"""Толщина оксидной плёнки по отношению интенсивностей пиков XPS."""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Union

import numpy as np

from ..core.errors import ValidationError

ArrayLike = Union[float, np.ndarray]

# Пометка для встроенных наборов констант
ILLUSTRATIVE_NOTE = "illustrative, not calibrated"


@dataclass(frozen=True)
class XPSConstants:
    """
    Константы модели однородного оксидного слоя.

    Attributes:
        lambda_ox: Длина ослабления фотоэлектронов в оксиде, нм
        r0: N_m·λ_m / (N_ox·λ_ox)
        theta: Угол вылета электронов к поверхности, рад, (0, π/2]
        label: Название набора
        note: Примечание, выводится вместе с результатом
    """

    lambda_ox: float
    r0: float
    theta: float = math.pi / 2
    label: str = "custom"
    note: str = ""

    def __post_init__(self):
        if not math.isfinite(self.lambda_ox) or self.lambda_ox <= 0:
            raise ValidationError("lambda_ox должна быть > 0")
        if not math.isfinite(self.r0) or self.r0 <= 0:
            raise ValidationError("r0 должно быть > 0")
        if not 0 < self.theta <= math.pi / 2:
            raise ValidationError("theta должен лежать в (0, π/2]")

    @property
    def effective_length(self) -> float:
        """λ_ox·sinθ, нм."""
        return self.lambda_ox * math.sin(self.theta)

    @classmethod
    def from_config(cls, data: Dict[str, Any], label: str = "custom") -> "XPSConstants":
        """
        Набор констант из JSON-словаря ``{"lambda_ox", "r0", "theta"}``.

        Raises:
            ValidationError: нет ключей или значения вне допустимых границ
        """
        if not isinstance(data, dict):
            raise ValidationError("Константы XPS должны быть JSON-объектом")
        missing = [key for key in ("lambda_ox", "r0") if key not in data]
        if missing:
            raise ValidationError(f"В константах XPS нет: {', '.join(missing)}")
        try:
            return cls(
                lambda_ox=float(data["lambda_ox"]),
                r0=float(data["r0"]),
                theta=float(data.get("theta", math.pi / 2)),
                label=str(data.get("label", label)),
                note=str(data.get("note", "")),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"Неверные константы XPS: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


PRESETS: Dict[str, XPSConstants] = {
    "al2p": XPSConstants(2.8, 1.4, math.pi / 2, "al2p", ILLUSTRATIVE_NOTE),
    "ta4f": XPSConstants(1.9, 0.5, math.pi / 2, "ta4f", ILLUSTRATIVE_NOTE),
}


def get_preset(name: str) -> XPSConstants:
    """
    Встроенный набор констант по имени.

    Raises:
        ValidationError: нет такого набора
    """
    try:
        return PRESETS[name.lower()]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValidationError(
            f"Неизвестный набор констант '{name}' (есть: {known})"
        ) from None


def oxide_thickness(ratio: ArrayLike, c: XPSConstants) -> ArrayLike:
    """
    Толщина оксида d = λ_ox·sinθ·ln(1 + R/r0).

    Args:
        ratio: Отношение I_ox/I_m (скаляр или массив), ≥ 0
        c: Константы

    Returns:
        Толщина, нм
    """
    values = np.asarray(ratio, dtype=float)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValidationError("Отношение интенсивностей должно быть конечным и ≥ 0")
    d = c.effective_length * np.log1p(values / c.r0)
    return float(d) if d.ndim == 0 else d


def oxide_ratio(d: ArrayLike, c: XPSConstants) -> ArrayLike:
    """
    Обратная функция: R = r0·(exp(d/(λ_ox·sinθ)) − 1).

    Args:
        d: Толщина, нм, ≥ 0
        c: Константы

    Returns:
        Отношение I_ox/I_m
    """
    values = np.asarray(d, dtype=float)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValidationError("Толщина должна быть конечной и ≥ 0")
    ratio = c.r0 * np.expm1(values / c.effective_length)
    return float(ratio) if ratio.ndim == 0 else ratio
