"""Сравнение двух фитов TLS одного резонатора до и после хранения на воздухе."""

from dataclasses import dataclass
from typing import Any, Dict

from ..fitters.tls_fitter import TLSFitResult


@dataclass(frozen=True)
class AgingDelta:
    """
    Изменения параметров потерь между двумя эпохами.

    Attributes:
        before: Фит до хранения
        after: Фит после хранения
        f_tls0_change_pct: Относительное изменение F·tanδ⁰, %
        tan_other_delta: Абсолютное изменение tanδ_other
        q_i_lp_delta: Абсолютное изменение Q_i,LP
        q_i_lp_change_pct: Относительное изменение Q_i,LP, %
    """

    before: TLSFitResult
    after: TLSFitResult
    f_tls0_change_pct: float
    tan_other_delta: float
    q_i_lp_delta: float
    q_i_lp_change_pct: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f_tls0_change_pct": self.f_tls0_change_pct,
            "tan_other_delta": self.tan_other_delta,
            "q_i_lp_delta": self.q_i_lp_delta,
            "q_i_lp_change_pct": self.q_i_lp_change_pct,
        }

    @property
    def f_tls0_change_label(self) -> str:
        """Изменение F·tanδ⁰ со знаком и одним знаком после запятой."""
        return f"{self.f_tls0_change_pct:+.1f}%"


def percent_change(before: float, after: float) -> float:
    return 100 * (after - before) / before


def aging_report(before: TLSFitResult, after: TLSFitResult) -> AgingDelta:
    """
    Считает изменения потерь между эпохами.

    Args:
        before: Фит в начальной эпохе
        after: Фит после хранения

    Returns:
        AgingDelta
    """
    return AgingDelta(
        before=before,
        after=after,
        f_tls0_change_pct=percent_change(before.params.f_tls0, after.params.f_tls0),
        tan_other_delta=after.params.tan_other - before.params.tan_other,
        q_i_lp_delta=after.q_i_lp - before.q_i_lp,
        q_i_lp_change_pct=percent_change(before.q_i_lp, after.q_i_lp),
    )
