"""
Генератор синтетических данных с контролируемым шумом.

Трассы и свипы, которые он выдаёт, служат эталоном для всех фиттеров.
Генератор случайных чисел: numpy PCG64 с явным зерном; имя алгоритма
и версия numpy записываются в строку метаданных.
"""

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from ..core.errors import ValidationError
from ..core.sweep import PowerSweep
from ..core.trace import ComplexTrace
from ..fitters.notch_fitter import NotchParams, internal_q, s21_model
from ..fitters.tls_fitter import TLSParams, loss_model

PRNG_NAME = "numpy.random.PCG64"
MIN_TRACE_POINTS = 8
MAX_SEED = 2**64 - 1


class NoiseKind(str, Enum):
    NONE = "none"
    COMPLEX_GAUSSIAN = "complex_gaussian"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class NoiseSpec:
    """
    Описание шума измерения.

    Attributes:
        kind: Тип шума
        sigma: Относительная амплитуда, ≥ 0
        seed: Зерно генератора, 64-битное беззнаковое
    """

    kind: NoiseKind = NoiseKind.NONE
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", NoiseKind(self.kind))
        except ValueError:
            raise ValidationError(f"Неизвестный тип шума: {self.kind}") from None
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValidationError("sigma шума должна быть ≥ 0")
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ValidationError("Зерно должно быть 64-битным беззнаковым числом")
        object.__setattr__(self, "seed", int(self.seed))

    def rng(self) -> np.random.Generator:
        """Новый генератор для этого зерна."""
        return np.random.Generator(np.random.PCG64(self.seed))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "sigma": self.sigma, "seed": self.seed}


def _meta_line(kind: str, params: Dict[str, Any], noise: NoiseSpec, **extra: Any) -> str:
    record = {
        "synth": kind,
        "params": params,
        "noise": noise.to_dict(),
        "prng": PRNG_NAME,
        "numpy": np.__version__,
    }
    record.update(extra)
    return json.dumps(record, sort_keys=True)


def parse_meta(meta: Optional[str]) -> Optional[Dict[str, Any]]:
    """
    Достаёт запись генератора из метаданных трассы или свипа.

    Returns:
        Словарь, если среди строк метаданных есть запись генератора, иначе None
    """
    if not meta:
        return None
    for line in meta.splitlines():
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            continue
        if isinstance(record, dict) and "synth" in record:
            return record
    return None


def synth_trace(
    p: NotchParams,
    f_min: float,
    f_max: float,
    n_points: int,
    noise: NoiseSpec = NoiseSpec(),
) -> ComplexTrace:
    """
    Трасса S21 по модели на равномерной сетке плюс шум.

    Args:
        p: Параметры резонатора
        f_min: Нижняя граница сетки, Гц
        f_max: Верхняя граница сетки, Гц
        n_points: Число точек, ≥ 8
        noise: Шум; complex_gaussian добавляет σ·(g1 + i·g2)·a,
            multiplicative умножает отсчёты на (1 + σ·g)

    Returns:
        Трасса с записью параметров и зерна в ``meta``

    Raises:
        ValidationError: резонанс вне сетки или мало точек
    """
    if not f_min < p.f_r < f_max:
        raise ValidationError(
            f"Резонанс {p.f_r:g} Гц вне сетки [{f_min:g}, {f_max:g}]"
        )
    if n_points < MIN_TRACE_POINTS:
        raise ValidationError(f"Нужно не меньше {MIN_TRACE_POINTS} точек")

    freqs = np.linspace(f_min, f_max, int(n_points))
    samples = s21_model(p, freqs)

    if noise.kind is NoiseKind.COMPLEX_GAUSSIAN:
        g = noise.rng().standard_normal((2, freqs.size))
        samples = samples + noise.sigma * (g[0] + 1j * g[1]) * p.a
    elif noise.kind is NoiseKind.MULTIPLICATIVE:
        g = noise.rng().standard_normal(freqs.size)
        samples = samples * (1 + noise.sigma * g)

    params = {
        "f_r": p.f_r,
        "q_l": p.q_l,
        "abs_qc": p.abs_qc,
        "phi": p.phi,
        "a": p.a,
        "alpha": p.alpha,
        "tau": p.tau,
    }
    meta = _meta_line(
        "trace", params, noise, q_i=internal_q(p.q_l, p.abs_qc, p.phi)
    )
    return ComplexTrace(freqs, samples, meta)


def synth_sweep(
    p: TLSParams,
    f_r: float,
    temperature: float,
    n_grid: Union[Sequence[float], np.ndarray],
    noise: NoiseSpec = NoiseSpec(),
) -> PowerSweep:
    """
    Свип Q_i(⟨n⟩) = 1/tanδ(⟨n⟩) по модели потерь.

    Args:
        p: Параметры TLS
        f_r: Резонансная частота, Гц
        temperature: Температура, К
        n_grid: Возрастающая сетка ⟨n⟩ > 0
        noise: none или multiplicative (Q_i·(1 + σ·g))

    Returns:
        Свип с записью параметров и зерна в ``meta``

    Raises:
        ValidationError: сетка не возрастает или тип шума не подходит
    """
    grid = np.asarray(n_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("Сетка ⟨n⟩ должна быть непустым вектором")
    if np.any(np.diff(grid) < 0):
        raise ValidationError("Сетка ⟨n⟩ должна быть отсортирована")
    if noise.kind is NoiseKind.COMPLEX_GAUSSIAN:
        raise ValidationError("Для свипа доступен только мультипликативный шум")

    q_i = 1 / loss_model(p, grid, f_r, temperature)
    if noise.kind is NoiseKind.MULTIPLICATIVE:
        q_i = q_i * (1 + noise.sigma * noise.rng().standard_normal(grid.size))

    params = {
        "f_tls0": p.f_tls0,
        "n_c": p.n_c,
        "beta": p.beta,
        "tan_other": p.tan_other,
        "f_r": f_r,
        "temperature": temperature,
    }
    return PowerSweep.from_arrays(
        grid,
        np.atleast_1d(q_i),
        f_r,
        temperature,
        meta=_meta_line("sweep", params, noise),
    )
