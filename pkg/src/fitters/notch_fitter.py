"""
Модель S21 резонатора в notch-конфигурации и извлечение добротностей.

Порядок извлечения: задержка кабеля → фит окружности → фит фазы →
нормировка на внерезонансную точку → Q_c и φ по нормированной
окружности → (опционально) совместное уточнение всех семи параметров.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.optimize import least_squares, minimize_scalar

from ..core.errors import (
    DegenerateFitError,
    FitFailureError,
    InconsistentGeometryError,
    PreconditionError,
    UnphysicalParametersError,
    ValidationError,
)
from ..core.trace import ComplexTrace
from ..utils.console import log, step
from .base_fitter import BaseFitter
from .circle_fitter import CircleFit, fit_circle

ArrayLike = Union[float, np.ndarray]

# Настройки Левенберга–Марквардта
LM_MAX_NFEV = 200
LM_GTOL = 1e-12
LM_XTOL = 1e-12
LM_FTOL = 1e-12

# Поиск задержки: окно ±10/span, сетка, затем Брент в соседних узлах
DELAY_WINDOW_SPANS = 10.0
DELAY_GRID_POINTS = 401
DELAY_XTOL_SPANS = 1e-9

MIN_DELAY_POINTS = 16
MIN_PHASE_EXCURSION = 0.1

JSON_FIELDS = (
    "f_r_hz",
    "q_l",
    "abs_qc",
    "phi_rad",
    "a",
    "alpha_rad",
    "tau_s",
    "q_i",
    "residual_rms",
)


@dataclass(frozen=True)
class NotchParams:
    """
    Параметры модели S21.

    Attributes:
        f_r: Резонансная частота, Гц
        q_l: Нагруженная добротность
        abs_qc: Модуль константы связи |Q_c|
        phi: Угол рассогласования импедансов, рад
        a: Амплитуда окружения
        alpha: Фаза окружения, рад
        tau: Задержка кабеля, с
    """

    f_r: float
    q_l: float
    abs_qc: float
    phi: float = 0.0
    a: float = 1.0
    alpha: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        values = (self.f_r, self.q_l, self.abs_qc, self.phi, self.a, self.alpha, self.tau)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("Параметры резонатора должны быть конечными")
        if self.f_r <= 0 or self.q_l <= 0 or self.abs_qc <= 0:
            raise ValidationError("f_r, q_l и abs_qc должны быть > 0")
        if abs(self.phi) >= math.pi / 2:
            raise ValidationError("|phi| должен быть меньше π/2")
        if self.a < 0:
            raise ValidationError("Амплитуда a не может быть отрицательной")
        if self.q_l >= self.abs_qc / math.cos(self.phi):
            raise ValidationError("q_l >= abs_qc/cos(phi): Q_i получается ≤ 0")

    @property
    def diameter(self) -> float:
        """Диаметр нормированной окружности, q_l/|Q_c|."""
        return self.q_l / self.abs_qc


@dataclass(frozen=True)
class NotchFit:
    """
    Результат извлечения.

    Attributes:
        params: Итоговые параметры модели
        q_i: Внутренняя добротность
        residual_rms: СКО комплексных остатков модели
        circle_center: Центр окружности в нормированных координатах
        circle_radius: Радиус окружности в нормированных координатах
        staged: Параметры до совместного уточнения
        refined: Выполнялось ли совместное уточнение
    """

    params: NotchParams
    q_i: float
    residual_rms: float
    circle_center: complex
    circle_radius: float
    staged: Optional[NotchParams] = None
    refined: bool = False

    @property
    def circle(self) -> Tuple[complex, float]:
        return self.circle_center, self.circle_radius

    def to_dict(self) -> Dict[str, float]:
        """Словарь с фиксированными именами полей для JSON."""
        p = self.params
        values = (
            p.f_r, p.q_l, p.abs_qc, p.phi, p.a, p.alpha, p.tau,
            self.q_i, self.residual_rms,
        )
        return {name: float(value) for name, value in zip(JSON_FIELDS, values)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NotchFit":
        """
        Восстанавливает результат из JSON-словаря.

        Окружность восстанавливается из параметров модели.

        Raises:
            ValidationError: нет обязательного поля
        """
        missing = [name for name in JSON_FIELDS if name not in data]
        if missing:
            raise ValidationError(f"В JSON нет полей: {', '.join(missing)}")

        params = NotchParams(
            f_r=float(data["f_r_hz"]),
            q_l=float(data["q_l"]),
            abs_qc=float(data["abs_qc"]),
            phi=float(data["phi_rad"]),
            a=float(data["a"]),
            alpha=float(data["alpha_rad"]),
            tau=float(data["tau_s"]),
        )
        radius = params.diameter / 2
        return cls(
            params=params,
            q_i=float(data["q_i"]),
            residual_rms=float(data["residual_rms"]),
            circle_center=1 - radius * np.exp(1j * params.phi),
            circle_radius=radius,
        )


def s21_model(p: NotchParams, f: ArrayLike) -> ArrayLike:
    """
    Комплексный S21 notch-резонатора с окружением и задержкой.

    Args:
        p: Параметры модели
        f: Частота (скаляр или массив), Гц

    Returns:
        a·e^{iα}·e^{−2πifτ}·[1 − (q_l/|Q_c|)·e^{iφ} / (1 + 2i·q_l·(f/f_r − 1))]
    """
    f = np.asarray(f, dtype=float)
    environment = p.a * np.exp(1j * (p.alpha - 2 * np.pi * f * p.tau))
    resonance = 1 - p.diameter * np.exp(1j * p.phi) / (
        1 + 2j * p.q_l * (f / p.f_r - 1)
    )
    result = environment * resonance
    return complex(result) if result.ndim == 0 else result


def internal_q(q_l: float, abs_qc: float, phi: float) -> float:
    """
    Внутренняя добротность с поправкой на рассогласование (diameter correction).

    Args:
        q_l: Нагруженная добротность
        abs_qc: Модуль |Q_c|
        phi: Угол рассогласования, рад

    Returns:
        1 / (1/q_l − cos(phi)/abs_qc)

    Raises:
        ValidationError: аргументы вне области определения
        UnphysicalParametersError: знаменатель ≤ 0
    """
    if q_l <= 0 or abs_qc <= 0:
        raise ValidationError("q_l и abs_qc должны быть > 0")
    if abs(phi) >= math.pi / 2:
        raise ValidationError("|phi| должен быть меньше π/2")

    denominator = 1 / q_l - math.cos(phi) / abs_qc
    if denominator <= 0:
        raise UnphysicalParametersError(
            f"1/q_l − cos(phi)/abs_qc = {denominator:.3e} ≤ 0"
        )
    return 1 / denominator


def _delay_residual(trace: ComplexTrace, tau: float) -> float:
    corrected = trace.samples * np.exp(2j * np.pi * trace.freqs * tau)
    return fit_circle(corrected).residual_rms


def estimate_delay(trace: ComplexTrace) -> float:
    """
    Оценивает задержку кабеля.

    Грубая оценка — наклон развёрнутой фазы. Затем в окне ±10/span
    ищется задержка, при которой исправленные точки лучше всего ложатся
    на окружность: перебор по сетке и метод Брента между соседними узлами.

    Args:
        trace: Трасса, не меньше 16 точек

    Returns:
        Задержка τ, с

    Raises:
        ValidationError: слишком короткая трасса
        FitFailureError: фаза не разворачивается
    """
    trace.require_length(MIN_DELAY_POINTS)
    phase = np.unwrap(np.angle(trace.samples))
    if not np.all(np.isfinite(phase)):
        raise FitFailureError("Не удалось развернуть фазу трассы")

    offsets = trace.freqs - trace.freqs.mean()
    slope = np.polyfit(offsets, phase, 1)[0]
    tau_coarse = -slope / (2 * np.pi)

    span = trace.span
    window = DELAY_WINDOW_SPANS / span
    grid = np.linspace(tau_coarse - window, tau_coarse + window, DELAY_GRID_POINTS)
    residuals = np.array([_delay_residual(trace, tau) for tau in grid])
    best = int(np.argmin(residuals))

    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, grid.size - 1)]
    result = minimize_scalar(
        lambda tau: _delay_residual(trace, tau),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": DELAY_XTOL_SPANS / span},
    )
    tau = float(result.x)
    if result.fun > residuals[best]:
        tau = float(grid[best])
    return tau


def _phase_guesses(freqs: np.ndarray, phase: np.ndarray) -> Tuple[float, float, float]:
    """Начальные f_r, q_l и θ₀ по наклону фазы."""
    smooth = gaussian_filter1d(phase, sigma=2.0)
    slope = np.abs(np.gradient(smooth, freqs))
    peak = int(np.argmax(slope))
    f_guess = float(freqs[peak])

    # Ширина пика наклона на половине высоты равна f_r/q_l
    half = 0.5 * slope[peak]
    left = peak
    while left > 0 and slope[left - 1] >= half:
        left -= 1
    right = peak
    while right < slope.size - 1 and slope[right + 1] >= half:
        right += 1
    fwhm = max(freqs[right] - freqs[left], float(np.min(np.diff(freqs))))
    q_guess = f_guess / fwhm

    theta_guess = float(
        np.mean(phase - 2 * np.arctan(2 * q_guess * (1 - freqs / f_guess)))
    )
    return f_guess, q_guess, theta_guess


def fit_phase(centered: ComplexTrace) -> Tuple[float, float, float]:
    """
    Фит фазы точек, сдвинутых центром окружности в начало координат.

    Модель: θ(f) = θ₀ + 2·arctan(2·q_l·(1 − f/f_r)).

    Args:
        centered: Трасса с центром окружности в нуле

    Returns:
        (theta0, q_l, f_r)

    Raises:
        DegenerateFitError: фаза почти не меняется (резонанса нет)
        FitFailureError: LM не сошёлся за отведённые итерации
    """
    freqs = centered.freqs
    phase = np.unwrap(np.angle(centered.samples))
    excursion = float(np.ptp(phase))
    if excursion < MIN_PHASE_EXCURSION:
        raise DegenerateFitError(
            f"Фаза меняется лишь на {excursion:.3g} рад: резонанс не найден"
        )
    if excursion < 0.8 * 2 * np.pi:
        log(
            f"Данные покрывают только {excursion:.1f} рад окружности, "
            f"стоит расширить окно по частоте",
            "⚠️",
        )

    f_guess, q_guess, theta_guess = _phase_guesses(freqs, phase)
    f_unit = f_guess / q_guess

    def unpack(x: np.ndarray) -> Tuple[float, float, float]:
        return x[0], x[1] * q_guess, f_guess + x[2] * f_unit

    def residuals(x: np.ndarray) -> np.ndarray:
        theta0, q_l, f_r = unpack(x)
        return phase - (theta0 + 2 * np.arctan(2 * q_l * (1 - freqs / f_r)))

    def jacobian(x: np.ndarray) -> np.ndarray:
        _, q_l, f_r = unpack(x)
        u = 2 * q_l * (1 - freqs / f_r)
        weight = 2 / (1 + u * u)
        d_theta = np.ones_like(freqs)
        d_q = weight * 2 * (1 - freqs / f_r) * q_guess
        d_f = weight * 2 * q_l * freqs / f_r**2 * f_unit
        return -np.column_stack((d_theta, d_q, d_f))

    result = least_squares(
        residuals,
        np.array([theta_guess, 1.0, 0.0]),
        jac=jacobian,
        method="lm",
        max_nfev=LM_MAX_NFEV,
        gtol=LM_GTOL,
        xtol=LM_XTOL,
        ftol=LM_FTOL,
    )
    theta0, q_l, f_r = unpack(result.x)
    if not result.success:
        raise FitFailureError(
            f"Фит фазы не сошёлся: {result.message}",
            last_iterate={"theta0": theta0, "q_l": q_l, "f_r": f_r},
        )
    if q_l <= 0 or not freqs[0] < f_r < freqs[-1]:
        raise FitFailureError(
            "Фит фазы дал резонанс вне окна или q_l ≤ 0",
            last_iterate={"theta0": theta0, "q_l": q_l, "f_r": f_r},
        )
    return _wrap_angle(float(theta0)), float(q_l), float(f_r)


def _wrap_angle(angle: float) -> float:
    """Приводит угол к [−π, π)."""
    return (angle + math.pi) % (2 * math.pi) - math.pi


def _refine(trace: ComplexTrace, staged: NotchParams) -> NotchParams:
    """
    Совместное уточнение семи параметров комплексным МНК.

    Фаза окружения отсчитывается от центральной частоты, чтобы развязать
    α и τ; в ответе α пересчитывается к абсолютной частоте.
    """
    freqs = trace.freqs
    data = trace.samples
    f_center = 0.5 * (freqs[0] + freqs[-1])
    delta_f = freqs - f_center
    span = trace.span

    f_unit = staged.f_r / staged.q_l
    tau_unit = 1 / (2 * np.pi * span)
    alpha_local = _wrap_angle(staged.alpha - 2 * np.pi * f_center * staged.tau)

    def unpack(x: np.ndarray) -> Tuple[float, ...]:
        return (
            staged.f_r + x[0] * f_unit,
            x[1] * staged.q_l,
            x[2] * staged.abs_qc,
            x[3],
            x[4] * staged.a,
            x[5],
            staged.tau + x[6] * tau_unit,
        )

    def model_parts(x: np.ndarray):
        f_r, q_l, abs_qc, phi, a, alpha, tau = unpack(x)
        rotation = np.exp(1j * (alpha - 2 * np.pi * delta_f * tau))
        denominator = 1 + 2j * q_l * (freqs / f_r - 1)
        coupling = np.exp(1j * phi) / abs_qc
        bracket = 1 - q_l * coupling / denominator
        return f_r, q_l, abs_qc, a, rotation, denominator, coupling, bracket

    def residuals(x: np.ndarray) -> np.ndarray:
        _, _, _, a, rotation, _, _, bracket = model_parts(x)
        diff = a * rotation * bracket - data
        return np.concatenate((diff.real, diff.imag))

    def jacobian(x: np.ndarray) -> np.ndarray:
        f_r, q_l, abs_qc, a, rotation, denominator, coupling, bracket = model_parts(x)
        env = a * rotation
        model = env * bracket
        columns = (
            env * q_l * coupling * (-2j * q_l * freqs / f_r**2) / denominator**2 * f_unit,
            -env * coupling / denominator**2 * staged.q_l,
            env * q_l * coupling / (abs_qc * denominator) * staged.abs_qc,
            -1j * env * q_l * coupling / denominator,
            rotation * bracket * staged.a,
            1j * model,
            -2j * np.pi * delta_f * model * tau_unit,
        )
        jac = np.column_stack(columns)
        return np.vstack((jac.real, jac.imag))

    x0 = np.array([0.0, 1.0, 1.0, staged.phi, 1.0, alpha_local, 0.0])
    result = least_squares(
        residuals,
        x0,
        jac=jacobian,
        method="lm",
        max_nfev=LM_MAX_NFEV,
        gtol=LM_GTOL,
        xtol=LM_XTOL,
        ftol=LM_FTOL,
    )
    f_r, q_l, abs_qc, phi, a, alpha_local, tau = unpack(result.x)
    if not result.success:
        raise FitFailureError(
            f"Совместное уточнение не сошлось: {result.message}",
            last_iterate=dict(
                f_r=f_r, q_l=q_l, abs_qc=abs_qc, phi=phi, a=a,
                alpha=alpha_local, tau=tau,
            ),
        )

    alpha = _wrap_angle(alpha_local + 2 * np.pi * f_center * tau)
    return _build_params(f_r, q_l, abs_qc, phi, abs(a), alpha, tau)


def _build_params(
    f_r: float, q_l: float, abs_qc: float, phi: float,
    a: float, alpha: float, tau: float,
) -> NotchParams:
    """Собирает NotchParams, переводя нефизичную геометрию в InconsistentGeometryError."""
    phi = _wrap_angle(phi)
    if q_l <= 0 or abs_qc <= 0 or abs(phi) >= math.pi / 2:
        raise InconsistentGeometryError(
            f"Нефизичная геометрия: q_l={q_l:.4g}, abs_qc={abs_qc:.4g}, "
            f"phi={phi:.3f}",
            last_iterate=(f_r, q_l, abs_qc, phi, a, alpha, tau),
        )
    try:
        internal_q(q_l, abs_qc, phi)
    except UnphysicalParametersError as e:
        raise InconsistentGeometryError(str(e)) from e
    return NotchParams(
        float(f_r), float(q_l), float(abs_qc), float(phi),
        float(a), float(alpha), float(tau),
    )


def extract(trace: ComplexTrace, refine: bool = True, verbose: bool = False) -> NotchFit:
    """
    Извлекает параметры резонанса из трассы S21.

    Args:
        trace: Трасса, охватывающая резонанс
        refine: Выполнять ли совместное уточнение семи параметров
        verbose: Печатать ли этапы

    Returns:
        NotchFit; при ``refine`` в ``staged`` лежат поэтапные значения

    Raises:
        PreconditionError: минимум |S21| на краю окна
        FitFailureError: сбой одного из этапов
    """
    trace.require_length(MIN_DELAY_POINTS)
    dip = int(np.argmin(np.abs(trace.samples)))
    if dip == 0 or dip == len(trace) - 1:
        raise PreconditionError("Минимум |S21| на краю окна: резонанс не охвачен")

    def progress(message: str) -> None:
        if verbose:
            step(message)

    progress("Оценка задержки кабеля...")
    tau = estimate_delay(trace)
    corrected = trace.samples * np.exp(2j * np.pi * trace.freqs * tau)

    progress("Фит окружности...")
    circle = fit_circle(corrected)

    progress("Фит фазы...")
    theta0, q_l, f_r = fit_phase(trace.with_samples(corrected - circle.center))

    # Внерезонансная точка диаметрально противоположна резонансной
    off_resonant = circle.center + circle.radius * np.exp(1j * (theta0 - np.pi))
    a = float(np.abs(off_resonant))
    alpha = float(np.angle(off_resonant))

    normalized: CircleFit = fit_circle(corrected / off_resonant)
    phi = float(np.angle(1 - normalized.center))
    abs_qc = q_l / (2 * normalized.radius)
    staged = _build_params(f_r, q_l, abs_qc, phi, a, alpha, tau)

    params = staged
    if refine:
        progress("Совместное уточнение семи параметров...")
        params = _refine(trace, staged)

    q_i = internal_q(params.q_l, params.abs_qc, params.phi)
    residual = trace.samples - s21_model(params, trace.freqs)
    residual_rms = float(np.sqrt(np.mean(np.abs(residual) ** 2)))

    return NotchFit(
        params=params,
        q_i=q_i,
        residual_rms=residual_rms,
        circle_center=complex(normalized.center),
        circle_radius=float(normalized.radius),
        staged=staged,
        refined=refine,
    )


class NotchFitter(BaseFitter):
    """Извлечение добротностей из трасс S21 с настройками из конфигурации."""

    def __init__(self, config: Dict[str, Any]):
        """
        Args:
            config: Секция ``fit`` (ключи ``refine``, ``verbose``)
        """
        super().__init__(config)
        self.refine = bool(config.get("refine", True))

    def fit(self, data: ComplexTrace) -> NotchFit:
        return extract(data, refine=self.refine, verbose=self.verbose)
