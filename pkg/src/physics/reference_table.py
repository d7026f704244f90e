"""
Опубликованная сводка резонаторов: девять строк параметров TLS.

Используется для проверки согласованности модели потерь и как источник
параметров синтетических свипов.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..core.constants import BASE_TEMPERATURE_K
from ..fitters.tls_fitter import TLSFitResult, TLSParams, qi_low_photon

# n_c в сводке не публикуется; синтетические свипы используют это значение
DEFAULT_N_C = 10.0

# Допуски согласованности Q_i,LP, %
TIGHT_TOLERANCE_PCT = 4.0
LOOSE_TOLERANCE_PCT = 7.0


@dataclass(frozen=True)
class ReferenceRow:
    """
    Строка сводки.

    Attributes:
        key: Короткий идентификатор строки
        stack: Структура плёнки
        exposure: Время на воздухе
        q_i_lp: Опубликованная Q_i,LP
        f_tls0: F·tanδ⁰
        f_r: Резонансная частота, Гц
        q_c: Q_c
        tan_other: tanδ_other
        beta: β
    """

    key: str
    stack: str
    exposure: str
    q_i_lp: float
    f_tls0: float
    f_r: float
    q_c: float
    tan_other: float
    beta: float


# fmt: off
ROWS: Tuple[ReferenceRow, ...] = (
    ReferenceRow("dep_ta_t0", "Deposited Al₂O₃/Ta", "0", 1.08e6, 0.93e-6, 5.209e9, 2.28e6, 0.0, 0.14),
    ReferenceRow("dep_ta_6m", "Deposited Al₂O₃/Ta", "6 months", 0.98e6, 1.05e-6, 5.212e9, 0.12e6, 0.0, 0.13),
    ReferenceRow("dep_ta_14m", "Deposited Al₂O₃/Ta", "14 months", 0.92e6, 1.07e-6, 5.206e9, 0.16e6, 0.0, 0.14),
    ReferenceRow("nat_ta_t0", "Native Ta₂O₅/Ta", "0", 1.35e6, 0.61e-6, 5.075e9, 0.70e6, 0.14e-6, 0.15),
    ReferenceRow("nat_ta_2m", "Native Ta₂O₅/Ta", "2 months", 0.83e6, 0.96e-6, 5.053e9, 0.27e6, 0.20e-6, 0.18),
    ReferenceRow("dep_al_t0", "Deposited Al₂O₃/Al", "0", 1.44e6, 0.68e-6, 5.126e9, 0.42e6, 0.0, 0.24),
    ReferenceRow("dep_al_2w", "Deposited Al₂O₃/Al", "2 weeks", 1.23e6, 0.87e-6, 5.122e9, 0.21e6, 0.0, 0.26),
    ReferenceRow("nat_al_t0", "Native AlOₓ/Al", "0", 1.34e6, 0.59e-6, 5.178e9, 0.20e6, 0.03e-6, 0.21),
    ReferenceRow("nat_al_2w", "Native AlOₓ/Al", "2 weeks", 0.16e6, 0.89e-6, 5.174e9, 0.24e6, 5.59e-6, 0.21),
)
# fmt: on

# Пары (до, после) для сравнения старения
AGING_PAIRS: Tuple[Tuple[str, str], ...] = (
    ("dep_al_t0", "dep_al_2w"),
    ("dep_ta_t0", "dep_ta_14m"),
    ("nat_ta_t0", "nat_ta_2m"),
    ("nat_al_t0", "nat_al_2w"),
)


def get_row(key: str) -> ReferenceRow:
    """Строка сводки по ключу."""
    for row in ROWS:
        if row.key == key:
            return row
    raise KeyError(key)


def row_params(row: ReferenceRow, n_c: float = DEFAULT_N_C) -> TLSParams:
    """Параметры модели потерь для строки сводки с выбранным n_c."""
    return TLSParams(
        f_tls0=row.f_tls0, n_c=n_c, beta=row.beta, tan_other=row.tan_other
    )


def row_fit_result(
    row: ReferenceRow,
    temperature: float = BASE_TEMPERATURE_K,
    n_c: float = DEFAULT_N_C,
) -> TLSFitResult:
    """Результат «фита», собранный из опубликованных значений строки."""
    params = row_params(row, n_c)
    return TLSFitResult(
        params=params,
        sigmas={},
        q_i_lp=qi_low_photon(params, row.f_r, temperature),
        chi2_reduced=float("nan"),
        f_r=row.f_r,
        temperature=temperature,
        bounds_active=["tan_other"] if row.tan_other == 0 else [],
        q_c=row.q_c,
    )


@dataclass(frozen=True)
class ConsistencyRow:
    """Предсказанная и опубликованная Q_i,LP для одной строки."""

    row: ReferenceRow
    predicted: float

    @property
    def deviation_pct(self) -> float:
        """(предсказание − публикация) / публикация, %."""
        return 100 * (self.predicted - self.row.q_i_lp) / self.row.q_i_lp

    @property
    def within_tight(self) -> bool:
        return abs(self.deviation_pct) <= TIGHT_TOLERANCE_PCT

    @property
    def within_loose(self) -> bool:
        return abs(self.deviation_pct) <= LOOSE_TOLERANCE_PCT


def consistency_report(
    temperature: float = BASE_TEMPERATURE_K,
    rows: Optional[Tuple[ReferenceRow, ...]] = None,
) -> List[ConsistencyRow]:
    """
    Q_i,LP = 1/(F·tanδ⁰·tanh(h·f_r/2k_B·T) + tanδ_other) для каждой строки.

    Строки с большим отклонением не отбрасываются: все девять попадают
    в отчёт.
    """
    return [
        ConsistencyRow(row, qi_low_photon(row_params(row), row.f_r, temperature))
        for row in (rows or ROWS)
    ]


def consistency_summary(report: List[ConsistencyRow]) -> Dict[str, int]:
    """Сколько строк укладывается в узкий и широкий допуск."""
    return {
        "rows": len(report),
        "within_tight": sum(r.within_tight for r in report),
        "within_loose": sum(r.within_loose for r in report),
    }
