"""Комплексные трассы пропускания: тип данных, чтение/запись CSV и калибровка фона."""

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import ParseError, ValidationError

PathLike = Union[str, Path]

# Порог для деления на фон
BACKGROUND_GUARD = 1e-15


class TraceFormat(str, Enum):
    """Формат CSV-файла трассы."""

    RE_IM = "re_im"
    DB_PHASE = "db_phase"

    @property
    def header(self) -> Tuple[str, str, str]:
        if self is TraceFormat.RE_IM:
            return ("freq_hz", "re", "im")
        return ("freq_hz", "amp_db", "phase_rad")


@dataclass(frozen=True, eq=False)
class ComplexTrace:
    """
    Частотная сетка и комплексный S21 на ней.

    Массивы копируются и замораживаются при создании, поэтому трассу
    можно свободно передавать между потоками.
    """

    freqs: np.ndarray
    samples: np.ndarray
    meta: Optional[str] = field(default=None)

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float)
        samples = np.array(self.samples, dtype=complex)

        if freqs.ndim != 1 or samples.ndim != 1:
            raise ValidationError("Трасса должна быть одномерной")
        if freqs.size != samples.size:
            raise ValidationError(
                f"Длины не совпадают: {freqs.size} частот, "
                f"{samples.size} отсчётов"
            )
        if not np.all(np.isfinite(freqs)) or not np.all(np.isfinite(samples)):
            raise ValidationError("Трасса содержит NaN или inf")
        if freqs.size > 1:
            bad = np.nonzero(np.diff(freqs) <= 0)[0]
            if bad.size:
                raise ValidationError(
                    f"Частоты не возрастают строго (точка {bad[0] + 1})"
                )

        freqs.flags.writeable = False
        samples.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.freqs.size

    @property
    def span(self) -> float:
        """Ширина частотного окна, Гц."""
        return float(self.freqs[-1] - self.freqs[0])

    def with_samples(self, samples: np.ndarray) -> "ComplexTrace":
        """Новая трасса на той же сетке."""
        return ComplexTrace(self.freqs, samples, self.meta)

    def require_length(self, minimum: int) -> None:
        """
        Проверяет минимальную длину трассы для потребителя.

        Args:
            minimum: Минимально допустимое число точек

        Raises:
            ValidationError: если точек меньше
        """
        if len(self) < minimum:
            raise ValidationError(
                f"Нужно не меньше {minimum} точек, в трассе {len(self)}"
            )


def iter_csv_rows(
    path: PathLike, comments: List[str]
) -> Iterator[Tuple[int, List[str]]]:
    """
    Перебирает непустые строки CSV с номерами строк.

    Args:
        path: Путь к файлу
        comments: Сюда складываются строки-комментарии без ``#``

    Yields:
        Пары (номер строки, ячейки без пробелов по краям)
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                comments.append(stripped[1:].strip())
                continue
            row = next(csv.reader([stripped]))
            yield line_no, [cell.strip() for cell in row]


def parse_float(value: str, line_no: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(
            f"не число в колонке {column}: {value!r}", line_no
        ) from None


def load_trace(
    path: PathLike, format: Union[TraceFormat, str] = TraceFormat.RE_IM
) -> ComplexTrace:
    """
    Читает трассу из CSV.

    Строки, начинающиеся с ``#``, считаются метаданными и сохраняются
    в ``meta``.

    Args:
        path: Путь к файлу
        format: ``re_im`` или ``db_phase``

    Returns:
        Проверенная трасса

    Raises:
        ParseError: неверный заголовок или строка данных
        ValidationError: частоты не возрастают
    """
    fmt = TraceFormat(format)
    freqs: List[float] = []
    samples: List[complex] = []
    comments: List[str] = []
    header_seen = False

    for line_no, cells in iter_csv_rows(path, comments):
        if not header_seen:
            if tuple(cells) != fmt.header:
                raise ParseError(
                    f"ожидался заголовок {','.join(fmt.header)}", line_no
                )
            header_seen = True
            continue

        if len(cells) != 3:
            raise ParseError(
                f"ожидалось 3 колонки, найдено {len(cells)}", line_no
            )

        freq = parse_float(cells[0], line_no, fmt.header[0])
        first = parse_float(cells[1], line_no, fmt.header[1])
        second = parse_float(cells[2], line_no, fmt.header[2])

        if fmt is TraceFormat.RE_IM:
            samples.append(complex(first, second))
        else:
            samples.append(10 ** (first / 20) * np.exp(1j * second))
        freqs.append(freq)

    if not header_seen:
        raise ParseError("файл пуст или без заголовка")

    meta = "\n".join(comments) if comments else None
    return ComplexTrace(np.array(freqs), np.array(samples), meta)


def save_trace(
    trace: ComplexTrace,
    path: PathLike,
    format: Union[TraceFormat, str] = TraceFormat.RE_IM,
) -> None:
    """
    Пишет трассу в CSV.

    Числа выводятся через ``repr``, так что ``re_im`` читается обратно
    бит в бит.

    Args:
        trace: Трасса
        path: Путь к файлу
        format: ``re_im`` или ``db_phase``
    """
    fmt = TraceFormat(format)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if trace.meta:
            for meta_line in trace.meta.splitlines():
                f.write(f"# {meta_line}\n")

        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fmt.header)
        for freq, sample in zip(trace.freqs, trace.samples):
            if fmt is TraceFormat.RE_IM:
                first, second = sample.real, sample.imag
            else:
                first = 20 * np.log10(np.abs(sample))
                second = np.angle(sample)
            writer.writerow(
                [repr(float(freq)), repr(float(first)), repr(float(second))]
            )


def calibrate_background(
    trace: ComplexTrace, reference: ComplexTrace
) -> ComplexTrace:
    """
    Делит трассу на фоновую, снятую выше T_c.

    Деление выполняется в полярной форме: при делении трассы на саму себя
    получается ровно 1+0j.

    Args:
        trace: Измеренная трасса
        reference: Фон на той же сетке

    Returns:
        Откалиброванная трасса

    Raises:
        ValidationError: сетки различаются или фон близок к нулю
    """
    if len(trace) != len(reference) or not np.array_equal(
        trace.freqs, reference.freqs
    ):
        raise ValidationError("Частотные сетки трассы и фона различаются")

    ref_abs = np.abs(reference.samples)
    small = np.nonzero(ref_abs < BACKGROUND_GUARD)[0]
    if small.size:
        raise ValidationError(
            f"Фон близок к нулю в точке {small[0]} "
            f"(|S21| < {BACKGROUND_GUARD:g})"
        )

    magnitude = np.abs(trace.samples) / ref_abs
    phase = np.angle(trace.samples) - np.angle(reference.samples)
    return trace.with_samples(magnitude * np.exp(1j * phase))
