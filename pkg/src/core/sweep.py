"""Зависимость Q_i от среднего числа фотонов для одного резонатора."""

import csv
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .trace import PathLike, iter_csv_rows, parse_float

SWEEP_HEADER = ("n_mean", "qi")
SWEEP_HEADER_WITH_SIGMA = ("n_mean", "qi", "qi_sigma")


@dataclass(frozen=True, eq=False)
class PowerSweep:
    """
    Точки (⟨n⟩, Q_i) одного резонатора в одну эпоху.

    Attributes:
        n_mean: Среднее число фотонов, > 0
        q_i: Внутренняя добротность, > 0
        q_i_sigma: Погрешность Q_i (1σ) или None
        f_r: Резонансная частота, Гц
        temperature: Температура, К
        meta: Произвольная метка
    """

    n_mean: np.ndarray
    q_i: np.ndarray
    q_i_sigma: Optional[np.ndarray]
    f_r: float
    temperature: float
    meta: Optional[str] = None

    def __post_init__(self):
        n_mean = np.array(self.n_mean, dtype=float)
        q_i = np.array(self.q_i, dtype=float)
        sigma = (
            None
            if self.q_i_sigma is None
            else np.array(self.q_i_sigma, dtype=float)
        )

        if n_mean.ndim != 1 or n_mean.shape != q_i.shape:
            raise ValidationError("n_mean и qi должны быть векторами одной длины")
        if sigma is not None and sigma.shape != q_i.shape:
            raise ValidationError("qi_sigma должна совпадать по длине с qi")
        if n_mean.size == 0:
            raise ValidationError("Свип не содержит точек")

        for idx in range(n_mean.size):
            if not np.isfinite(n_mean[idx]) or n_mean[idx] <= 0:
                raise ValidationError(f"Точка {idx}: n_mean должно быть > 0")
            if not np.isfinite(q_i[idx]) or q_i[idx] <= 0:
                raise ValidationError(f"Точка {idx}: qi должно быть > 0")
            if sigma is not None and (
                not np.isfinite(sigma[idx]) or sigma[idx] <= 0
            ):
                raise ValidationError(f"Точка {idx}: qi_sigma должна быть > 0")

        if not np.isfinite(self.f_r) or self.f_r <= 0:
            raise ValidationError("f_r должна быть > 0")
        if not np.isfinite(self.temperature) or self.temperature <= 0:
            raise ValidationError("Температура должна быть > 0")

        for array in (n_mean, q_i, sigma):
            if array is not None:
                array.flags.writeable = False
        object.__setattr__(self, "n_mean", n_mean)
        object.__setattr__(self, "q_i", q_i)
        object.__setattr__(self, "q_i_sigma", sigma)
        object.__setattr__(self, "f_r", float(self.f_r))
        object.__setattr__(self, "temperature", float(self.temperature))

    def __len__(self) -> int:
        return self.n_mean.size

    @classmethod
    def from_arrays(
        cls,
        n_mean: Sequence[float],
        q_i: Sequence[float],
        f_r: float,
        temperature: float,
        q_i_sigma: Optional[Sequence[float]] = None,
        meta: Optional[str] = None,
    ) -> "PowerSweep":
        """Создаёт свип из последовательностей чисел."""
        return cls(
            np.asarray(n_mean), np.asarray(q_i), q_i_sigma, f_r, temperature, meta
        )

    def lowest_power_qi(self) -> float:
        """Q_i в точке с наименьшим ⟨n⟩."""
        return float(self.q_i[np.argmin(self.n_mean)])

    @property
    def decades(self) -> float:
        """Сколько декад ⟨n⟩ покрывает свип."""
        return float(np.log10(self.n_mean.max() / self.n_mean.min()))


def load_power_sweep(
    path: PathLike, f_r: float, temperature: float
) -> PowerSweep:
    """
    Читает свип по мощности из CSV с заголовком ``n_mean,qi[,qi_sigma]``.

    Args:
        path: Путь к файлу
        f_r: Резонансная частота, Гц
        temperature: Температура, К

    Returns:
        Проверенный свип

    Raises:
        ParseError: неверный заголовок или строка
        ValidationError: неположительные значения или нет данных
    """
    comments: List[str] = []
    header: Optional[tuple] = None
    columns: List[List[float]] = [[], [], []]

    for line_no, cells in iter_csv_rows(path, comments):
        if header is None:
            header = tuple(cells)
            if header not in (SWEEP_HEADER, SWEEP_HEADER_WITH_SIGMA):
                raise ParseError(
                    "ожидался заголовок n_mean,qi[,qi_sigma]", line_no
                )
            continue

        if len(cells) != len(header):
            raise ParseError(
                f"ожидалось {len(header)} колонки, найдено {len(cells)}",
                line_no,
            )
        for idx, (value, name) in enumerate(zip(cells, header)):
            columns[idx].append(parse_float(value, line_no, name))

    if header is None:
        raise ParseError("файл пуст или без заголовка")
    if not columns[0]:
        raise ValidationError("В файле свипа нет строк данных")

    sigma = columns[2] if header == SWEEP_HEADER_WITH_SIGMA else None
    return PowerSweep.from_arrays(
        columns[0],
        columns[1],
        f_r,
        temperature,
        q_i_sigma=sigma,
        meta="\n".join(comments) if comments else None,
    )


def save_power_sweep(sweep: PowerSweep, path: PathLike) -> None:
    """Пишет свип в CSV того же формата, что читает ``load_power_sweep``."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        if sweep.meta:
            for meta_line in sweep.meta.splitlines():
                f.write(f"# {meta_line}\n")

        writer = csv.writer(f, lineterminator="\n")
        if sweep.q_i_sigma is None:
            writer.writerow(SWEEP_HEADER)
            for n, q in zip(sweep.n_mean, sweep.q_i):
                writer.writerow([repr(float(n)), repr(float(q))])
        else:
            writer.writerow(SWEEP_HEADER_WITH_SIGMA)
            for n, q, s in zip(sweep.n_mean, sweep.q_i, sweep.q_i_sigma):
                writer.writerow([repr(float(n)), repr(float(q)), repr(float(s))])
