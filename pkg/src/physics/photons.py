"""Калибровка мощности: от выхода генератора до ⟨n⟩ в резонаторе."""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Tuple, Union

import numpy as np

from ..core.constants import HBAR
from ..core.errors import ValidationError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class AttenuationStage:
    """Одна ступень ослабления входной линии."""

    label: str
    attenuation_db: float

    def __post_init__(self):
        if not math.isfinite(self.attenuation_db) or self.attenuation_db < 0:
            raise ValidationError(
                f"Ступень '{self.label}': ослабление должно быть ≥ 0 дБ, "
                f"получено {self.attenuation_db}"
            )


@dataclass(frozen=True)
class AttenuationChain:
    """
    Упорядоченный список ступеней ослабления между генератором и чипом.

    Attributes:
        stages: Ступени в порядке прохождения сигнала
    """

    stages: Tuple[AttenuationStage, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @classmethod
    def of(cls, *attenuations_db: float) -> "AttenuationChain":
        """Цепочка из безымянных ступеней: ``AttenuationChain.of(60, 60)``."""
        return cls(
            tuple(
                AttenuationStage(f"stage{idx + 1}", float(db))
                for idx, db in enumerate(attenuations_db)
            )
        )

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "AttenuationChain":
        """
        Строит цепочку из JSON-описания.

        Args:
            config: ``{"stages": [{"label": "RT", "db": 60}, ...]}``

        Raises:
            ValidationError: неверная структура или отрицательное ослабление
        """
        if not isinstance(config, dict) or not isinstance(
            config.get("stages", []), list
        ):
            raise ValidationError("Цепочка должна иметь вид {\"stages\": [...]}")

        stages = []
        for idx, raw in enumerate(config.get("stages", [])):
            if not isinstance(raw, dict) or "db" not in raw:
                raise ValidationError(f"Ступень {idx}: нет поля 'db'")
            try:
                db = float(raw["db"])
            except (TypeError, ValueError):
                raise ValidationError(
                    f"Ступень {idx}: 'db' не число: {raw['db']!r}"
                ) from None
            stages.append(AttenuationStage(str(raw.get("label", f"stage{idx + 1}")), db))
        return cls(tuple(stages))

    def to_config(self) -> Dict[str, Any]:
        return {
            "stages": [
                {"label": s.label, "db": s.attenuation_db} for s in self.stages
            ]
        }

    @property
    def total_db(self) -> float:
        """Суммарное ослабление, дБ (не зависит от порядка ступеней)."""
        return math.fsum(s.attenuation_db for s in self.stages)

    def __iter__(self) -> Iterable[AttenuationStage]:
        return iter(self.stages)

    def __len__(self) -> int:
        return len(self.stages)


def dbm_to_watts(power_dbm: ArrayLike) -> ArrayLike:
    """Мощность в дБм → Вт."""
    return 10 ** (np.asarray(power_dbm, dtype=float) / 10) * 1e-3


def watts_to_dbm(power_w: float) -> float:
    """
    Мощность в Вт → дБм.

    Raises:
        ValidationError: мощность не положительна
    """
    if not power_w > 0:
        raise ValidationError("Мощность в дБм определена только для P > 0")
    return 10 * math.log10(power_w / 1e-3)


def chain_power(source_dbm: ArrayLike, chain: AttenuationChain) -> ArrayLike:
    """
    Мощность на входе резонатора.

    Args:
        source_dbm: Мощность генератора, дБм
        chain: Цепочка ослаблений

    Returns:
        P = 10^((source_dbm − total_db)/10) · 1 мВт, Вт
    """
    source = np.asarray(source_dbm, dtype=float)
    if not np.all(np.isfinite(source)):
        raise ValidationError("Мощность генератора должна быть конечной")
    power = dbm_to_watts(source - chain.total_db)
    return float(power) if power.ndim == 0 else power


def _check_resonator(f_r: float, q_l: float, abs_qc: float) -> None:
    for name, value in (("f_r", f_r), ("q_l", q_l), ("abs_qc", abs_qc)):
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} должно быть > 0, получено {value}")


def mean_photons(
    p_applied: ArrayLike, f_r: float, q_l: float, abs_qc: float
) -> ArrayLike:
    """
    Среднее число фотонов в резонаторе в стационаре.

    ⟨n⟩ = 2·Q_l²·P / (ħ·ω_r²·|Q_c|), ω_r = 2π·f_r.

    Args:
        p_applied: Мощность на входе, Вт (≥ 0)
        f_r: Резонансная частота, Гц
        q_l: Нагруженная добротность
        abs_qc: |Q_c|

    Returns:
        ⟨n⟩
    """
    _check_resonator(f_r, q_l, abs_qc)
    power = np.asarray(p_applied, dtype=float)
    if np.any(power < 0) or not np.all(np.isfinite(power)):
        raise ValidationError("Мощность должна быть конечной и ≥ 0")

    omega = 2 * math.pi * f_r
    n_mean = 2 * q_l**2 * power / (HBAR * omega**2 * abs_qc)
    return float(n_mean) if n_mean.ndim == 0 else n_mean


def required_source_dbm(
    n_target: float,
    chain: AttenuationChain,
    f_r: float,
    q_l: float,
    abs_qc: float,
) -> float:
    """
    Мощность генератора, нужная для заданного ⟨n⟩ (обратная задача).

    Raises:
        ValidationError: n_target ≤ 0
    """
    _check_resonator(f_r, q_l, abs_qc)
    if not n_target > 0:
        raise ValidationError("Целевое ⟨n⟩ должно быть > 0")
    omega = 2 * math.pi * f_r
    power = n_target * HBAR * omega**2 * abs_qc / (2 * q_l**2)
    return watts_to_dbm(power) + chain.total_db
