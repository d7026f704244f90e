"""
Модель потерь на двухуровневых системах (TLS) и её фит по свипу мощности.

    tanδ = 1/Q_i = F·tanδ⁰ · tanh(h·f_r / 2k_B·T) / (1 + ⟨n⟩/n_c)^β + tanδ_other

Фит ведётся в пространстве потерь. Ограничения параметров заданы
внутренней заменой переменных, поэтому сам оптимизатор работает без
границ (Левенберг–Марквардт).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from ..core.constants import BASE_TEMPERATURE_K, H, K_B
from ..core.errors import (
    FitFailureError,
    InfiniteQError,
    PreconditionError,
    ValidationError,
)
from ..core.sweep import PowerSweep
from ..utils.console import log
from .base_fitter import BaseFitter

ArrayLike = Union[float, np.ndarray]

N_C_BOUNDS = (1e-2, 1e9)
BETA_START = 0.2
# Доля 1/max(Q_i) в начальном tanδ_other
TAN_OTHER_START_FRACTION = 0.5

MIN_POINTS = 6
MIN_DECADES = 3.0

# Относительная близость к границе, при которой ограничение считается активным
BOUND_TOL = 1e-6
# Допуск для n_c в декадах log10 у границ N_C_BOUNDS
N_C_BOUND_TOL_DECADES = 1.1e-5
# Порог числа обусловленности для пометки неидентифицируемых параметров
IDENTIFIABILITY_COND = 1e10

# Постоянная модель принимается, если её χ² не хуже фита с этим допуском
FLAT_RTOL = 1e-6
FLAT_ATOL = 1e-9

LM_MAX_NFEV = 1000
LM_GTOL = 1e-12
LM_XTOL = 1e-12
LM_FTOL = 1e-12

PARAM_NAMES = ("f_tls0", "n_c", "beta", "tan_other")


class ModelVariant(str, Enum):
    """Куда относится показатель β."""

    # (1 + n/n_c)^β: показатель у всей скобки
    EXPONENT_OUTSIDE = "exponent_outside"
    # 1 + (n/n_c)^β
    EXPONENT_INSIDE = "exponent_inside"

    @classmethod
    def parse(cls, value: Union[str, "ModelVariant"]) -> "ModelVariant":
        """Принимает также написание через дефис (``exponent-inside``)."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_"))
        except ValueError:
            raise ValidationError(f"Неизвестный вариант модели: {value}") from None


@dataclass(frozen=True)
class TLSParams:
    """
    Параметры модели потерь.

    Attributes:
        f_tls0: F·tanδ⁰_TLS, > 0
        n_c: Критическое число фотонов, > 0
        beta: Показатель насыщения, [0, 1]
        tan_other: Потери, не зависящие от мощности, ≥ 0
    """

    f_tls0: float
    n_c: float
    beta: float
    tan_other: float

    def __post_init__(self):
        values = (self.f_tls0, self.n_c, self.beta, self.tan_other)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("Параметры TLS должны быть конечными")
        if self.f_tls0 <= 0:
            raise ValidationError("f_tls0 должно быть > 0")
        if self.n_c <= 0:
            raise ValidationError("n_c должно быть > 0")
        if not 0 <= self.beta <= 1:
            raise ValidationError("beta должно лежать в [0, 1]")
        if self.tan_other < 0:
            raise ValidationError("tan_other не может быть отрицательным")

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.f_tls0, self.n_c, self.beta, self.tan_other)


@dataclass(frozen=True)
class TLSFitResult:
    """
    Результат фита свипа мощности.

    Attributes:
        params: Подобранные параметры
        sigmas: 1σ-погрешности (ковариация в оптимуме или bootstrap)
        q_i_lp: Q_i в пределе малого числа фотонов
        chi2_reduced: Приведённый χ²
        f_r: Резонансная частота, Гц
        temperature: Температура, К
        bounds_active: Параметры, упёршиеся в границу
        non_identifiable: Параметры, которые данные не разделяют
        q_i_lowest_power: Q_i в точке свипа с наименьшим ⟨n⟩
        variant: Вариант модели
        q_c: |Q_c| резонатора, если известна (для отчёта)
        sigma_method: ``covariance`` или ``bootstrap``
    """

    params: TLSParams
    sigmas: Dict[str, float]
    q_i_lp: float
    chi2_reduced: float
    f_r: float
    temperature: float
    bounds_active: List[str] = field(default_factory=list)
    non_identifiable: List[str] = field(default_factory=list)
    q_i_lowest_power: Optional[float] = None
    variant: ModelVariant = ModelVariant.EXPONENT_OUTSIDE
    q_c: Optional[float] = None
    sigma_method: str = "covariance"

    def to_dict(self) -> Dict[str, Any]:
        """Словарь для JSON."""
        p = self.params
        return {
            "f_tls0": p.f_tls0,
            "n_c": p.n_c,
            "beta": p.beta,
            "tan_other": p.tan_other,
            "q_i_lp": self.q_i_lp,
            "f_r_hz": self.f_r,
            "temperature_k": self.temperature,
            "sigmas": dict(self.sigmas),
            "chi2_reduced": self.chi2_reduced,
            "bounds_active": list(self.bounds_active),
            "non_identifiable": list(self.non_identifiable),
            "q_i_lowest_power": self.q_i_lowest_power,
            "model_variant": self.variant.value,
            "q_c": self.q_c,
            "sigma_method": self.sigma_method,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TLSFitResult":
        """
        Восстанавливает результат из JSON-словаря.

        Raises:
            ValidationError: нет обязательных полей или значения вне границ
        """
        required = (
            "f_tls0", "n_c", "beta", "tan_other", "q_i_lp",
            "f_r_hz", "temperature_k",
        )
        missing = [name for name in required if name not in data]
        if missing:
            raise ValidationError(f"В JSON нет полей: {', '.join(missing)}")

        try:
            params = TLSParams(
                float(data["f_tls0"]),
                float(data["n_c"]),
                float(data["beta"]),
                float(data["tan_other"]),
            )
            sigmas = {k: float(v) for k, v in dict(data.get("sigmas") or {}).items()}
            lowest = data.get("q_i_lowest_power")
            q_c = data.get("q_c")
            return cls(
                params=params,
                sigmas=sigmas,
                q_i_lp=float(data["q_i_lp"]),
                chi2_reduced=float(data.get("chi2_reduced", float("nan"))),
                f_r=float(data["f_r_hz"]),
                temperature=float(data["temperature_k"]),
                bounds_active=list(data.get("bounds_active") or []),
                non_identifiable=list(data.get("non_identifiable") or []),
                q_i_lowest_power=None if lowest is None else float(lowest),
                variant=ModelVariant.parse(
                    data.get("model_variant", ModelVariant.EXPONENT_OUTSIDE)
                ),
                q_c=None if q_c is None else float(q_c),
                sigma_method=str(data.get("sigma_method", "covariance")),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"Неверный формат результата фита: {e}") from e


def thermal_factor(f_r: float, temperature: float) -> float:
    """tanh(h·f_r / 2k_B·T) — доля ненасыщенных TLS при температуре T."""
    return math.tanh(H * f_r / (2 * K_B * temperature))


def _saturation(n_mean: np.ndarray, n_c: float, beta: float, variant: ModelVariant):
    ratio = n_mean / n_c
    if variant is ModelVariant.EXPONENT_INSIDE:
        return 1 + ratio**beta
    return (1 + ratio) ** beta


def loss_model(
    p: TLSParams,
    n_mean: ArrayLike,
    f_r: float,
    temperature: float,
    variant: Union[ModelVariant, str] = ModelVariant.EXPONENT_OUTSIDE,
) -> ArrayLike:
    """
    Тангенс потерь при заданном числе фотонов.

    Args:
        p: Параметры модели
        n_mean: Среднее число фотонов (скаляр или массив), ≥ 0
        f_r: Резонансная частота, Гц
        temperature: Температура, К
        variant: Вариант модели

    Returns:
        tanδ
    """
    variant = ModelVariant.parse(variant)
    if f_r <= 0 or temperature <= 0:
        raise ValidationError("f_r и температура должны быть > 0")
    n = np.asarray(n_mean, dtype=float)
    if np.any(n < 0):
        raise ValidationError("n_mean не может быть отрицательным")

    tls = p.f_tls0 * thermal_factor(f_r, temperature)
    result = tls / _saturation(n, p.n_c, p.beta, variant) + p.tan_other
    return float(result) if result.ndim == 0 else result


def qi_low_photon(
    p: TLSParams,
    f_r: float,
    temperature: float = BASE_TEMPERATURE_K,
    variant: Union[ModelVariant, str] = ModelVariant.EXPONENT_OUTSIDE,
) -> float:
    """
    Q_i в пределе ⟨n⟩ → 0.

    Для варианта ``exponent_inside`` при β = 0 насыщение равно 2 и в пределе.

    Raises:
        InfiniteQError: суммарные потери равны нулю
    """
    loss = loss_model(p, 0.0, f_r, temperature, variant)
    if loss <= 0:
        raise InfiniteQError("Суммарные потери равны нулю: Q_i бесконечна")
    return 1 / loss


def _logistic(x: float) -> float:
    if x >= 0:
        return 1 / (1 + math.exp(-x))
    e = math.exp(x)
    return e / (1 + e)


def _logit(p: float) -> float:
    return math.log(p / (1 - p))


class _Transform:
    """
    Замена переменных: внутренние x ∈ ℝ⁴ → параметры модели в границах.

    f_tls0 — логарифм; n_c — логистика в log10-шкале между N_C_BOUNDS;
    β — логистика на [0, 1]; tan_other — sqrt(x²+1) − 1 (ноль достижим).
    """

    def __init__(self, loss_scale: float):
        self.loss_scale = loss_scale
        self.log_lo = math.log10(N_C_BOUNDS[0])
        self.log_width = math.log10(N_C_BOUNDS[1]) - self.log_lo

    def to_params(self, x: np.ndarray) -> Tuple[float, float, float, float]:
        f_tls0 = self.loss_scale * math.exp(x[0])
        n_c = 10 ** (self.log_lo + self.log_width * _logistic(x[1]))
        beta = _logistic(x[2])
        tan_other = self.loss_scale * (math.sqrt(x[3] ** 2 + 1) - 1)
        return f_tls0, n_c, beta, tan_other

    def derivatives(self, x: np.ndarray) -> np.ndarray:
        """d(параметр)/d(x) для каждой из четырёх координат."""
        f_tls0, n_c, beta, _ = self.to_params(x)
        s_nc = _logistic(x[1])
        return np.array(
            [
                f_tls0,
                n_c * math.log(10) * self.log_width * s_nc * (1 - s_nc),
                beta * (1 - beta),
                self.loss_scale * x[3] / math.sqrt(x[3] ** 2 + 1),
            ]
        )

    def to_internal(self, f_tls0: float, n_c: float, beta: float, tan_other: float):
        frac_nc = (math.log10(n_c) - self.log_lo) / self.log_width
        frac_nc = min(max(frac_nc, 1e-9), 1 - 1e-9)
        t = tan_other / self.loss_scale + 1
        return np.array(
            [
                math.log(f_tls0 / self.loss_scale),
                _logit(frac_nc),
                _logit(min(max(beta, 1e-9), 1 - 1e-9)),
                math.sqrt(t * t - 1),
            ]
        )


def _model_jacobian(
    params: Tuple[float, float, float, float],
    n: np.ndarray,
    thermal: float,
    variant: ModelVariant,
) -> np.ndarray:
    """Производные tanδ по (f_tls0, n_c, beta, tan_other)."""
    f_tls0, n_c, beta, _ = params
    ratio = n / n_c
    if variant is ModelVariant.EXPONENT_INSIDE:
        powered = ratio**beta
        denom = 1 + powered
        log_ratio = np.log(np.where(ratio > 0, ratio, 1.0))
        d_f = thermal / denom
        d_beta = -f_tls0 * thermal * powered * log_ratio / denom**2
        d_nc = f_tls0 * thermal * powered * beta / n_c / denom**2
    else:
        base = 1 + ratio
        denom = base**beta
        d_f = thermal / denom
        d_beta = -f_tls0 * thermal * np.log(base) / denom
        d_nc = f_tls0 * thermal * beta * ratio / n_c / (denom * base)
    d_other = np.ones_like(n)
    return np.column_stack((d_f, d_nc, d_beta, d_other))


def _initial_guess(sweep: PowerSweep, thermal: float) -> Tuple[float, float, float, float]:
    loss = 1 / sweep.q_i
    tan_other = TAN_OTHER_START_FRACTION * float(loss.min())
    f_tls0 = (float(loss.max()) - tan_other) / thermal
    n_c = float(np.exp(np.mean(np.log(sweep.n_mean))))
    n_c = min(max(n_c, N_C_BOUNDS[0] * 10), N_C_BOUNDS[1] / 10)
    return f_tls0, n_c, BETA_START, tan_other


def _active_bounds(f_tls0: float, n_c: float, beta: float, tan_other: float, loss_scale: float) -> List[str]:
    active = []
    log_nc = math.log10(n_c)
    if (
        abs(log_nc - math.log10(N_C_BOUNDS[0])) < N_C_BOUND_TOL_DECADES
        or abs(log_nc - math.log10(N_C_BOUNDS[1])) < N_C_BOUND_TOL_DECADES
    ):
        active.append("n_c")
    if beta < BOUND_TOL or beta > 1 - BOUND_TOL:
        active.append("beta")
    if tan_other < BOUND_TOL * loss_scale:
        active.append("tan_other")
    return active


def fit_tls(
    sweep: PowerSweep,
    variant: Union[ModelVariant, str] = ModelVariant.EXPONENT_OUTSIDE,
    q_c: Optional[float] = None,
    bootstrap: int = 0,
    seed: int = 0,
    quiet: bool = False,
) -> TLSFitResult:
    """
    Взвешенный МНК в пространстве потерь по свипу мощности.

    Остатки — (модель − 1/Q_i) / σ_tanδ, где σ_tanδ = σ_Q/Q_i², если
    погрешности заданы; иначе веса одинаковы (остатки нормированы на
    медиану потерь).

    Args:
        sweep: Не меньше 6 точек на 3 и более декадах ⟨n⟩
        variant: Вариант модели
        q_c: |Q_c| для отчёта, необязательно
        bootstrap: Число повторных выборок остатков; 0 — погрешности
            из ковариации
        seed: Зерно генератора для bootstrap
        quiet: Не печатать предупреждения

    Returns:
        TLSFitResult

    Raises:
        PreconditionError: мало точек или узкий диапазон ⟨n⟩
        FitFailureError: оптимизатор не сошёлся
    """
    variant = ModelVariant.parse(variant)
    if len(sweep) < MIN_POINTS:
        raise PreconditionError(
            f"Нужно не меньше {MIN_POINTS} точек, в свипе {len(sweep)}"
        )
    if sweep.decades < MIN_DECADES:
        raise PreconditionError(
            f"Свип покрывает {sweep.decades:.2f} декад ⟨n⟩, нужно ≥ {MIN_DECADES:g}"
        )

    n = sweep.n_mean
    loss = 1 / sweep.q_i
    if sweep.q_i_sigma is not None:
        sigma_loss = sweep.q_i_sigma / sweep.q_i**2
    else:
        sigma_loss = np.full_like(loss, float(np.median(loss)))

    thermal = thermal_factor(sweep.f_r, sweep.temperature)
    loss_scale = float(np.median(loss))
    transform = _Transform(loss_scale)
    start = _initial_guess(sweep, thermal)

    def model(params: Tuple[float, float, float, float]) -> np.ndarray:
        f_tls0, n_c, beta, tan_other = params
        return f_tls0 * thermal / _saturation(n, n_c, beta, variant) + tan_other

    def residuals(x: np.ndarray) -> np.ndarray:
        return (model(transform.to_params(x)) - loss) / sigma_loss

    def jacobian(x: np.ndarray) -> np.ndarray:
        params = transform.to_params(x)
        jac = _model_jacobian(params, n, thermal, variant)
        return jac * transform.derivatives(x) / sigma_loss[:, None]

    result = least_squares(
        residuals,
        transform.to_internal(*start),
        jac=jacobian,
        method="lm",
        max_nfev=LM_MAX_NFEV,
        gtol=LM_GTOL,
        xtol=LM_XTOL,
        ftol=LM_FTOL,
    )
    f_tls0, n_c, beta, tan_other = transform.to_params(result.x)

    # Q_i без зависимости от ⟨n⟩: в оптимизаторе β → 0 только асимптотически
    weights = 1 / sigma_loss**2
    flat_loss = float(np.sum(loss * weights) / np.sum(weights))
    flat_cost = float(np.sum(((flat_loss - loss) / sigma_loss) ** 2))
    if flat_cost <= 2 * result.cost * (1 + FLAT_RTOL) + len(sweep) * FLAT_ATOL**2:
        if not quiet:
            log("Q_i не зависит от ⟨n⟩: β на нижней границе", "⚠️")
        n_c, beta = start[1], 0.0
        # При β = 0 насыщение постоянно: 1 снаружи, 2 внутри
        flat_saturation = float(np.mean(_saturation(n, n_c, beta, variant)))
        f_tls0 = (1 - TAN_OTHER_START_FRACTION) * flat_loss * flat_saturation / thermal
        tan_other = TAN_OTHER_START_FRACTION * flat_loss
        active = ["beta"]
    elif not result.success:
        raise FitFailureError(
            f"Фит TLS не сошёлся: {result.message}",
            last_iterate=dict(zip(PARAM_NAMES, (f_tls0, n_c, beta, tan_other))),
        )
    else:
        active = _active_bounds(f_tls0, n_c, beta, tan_other, loss_scale)
        if "beta" in active:
            beta = 0.0 if beta < 0.5 else 1.0
        if "tan_other" in active:
            tan_other = 0.0
    params = TLSParams(f_tls0, n_c, beta, tan_other)

    dof = max(len(sweep) - len(PARAM_NAMES), 1)
    final_residuals = (model(params.as_tuple()) - loss) / sigma_loss
    chi2_reduced = float(np.sum(final_residuals**2) / dof)

    sigmas, non_identifiable = _uncertainties(
        params, n, thermal, variant, sigma_loss, chi2_reduced
    )
    if "beta" in active and params.beta == 0.0:
        # При β = 0 TLS-слагаемое постоянно и неотличимо от tanδ_other
        for name in ("f_tls0", "tan_other", "n_c"):
            if name not in non_identifiable:
                non_identifiable.append(name)
    if active and not quiet:
        log(f"Параметры на границе: {', '.join(active)}", "⚠️")
    if non_identifiable and not quiet:
        log(f"Данные не разделяют: {', '.join(non_identifiable)}", "⚠️")

    sigma_method = "covariance"
    if bootstrap > 0:
        sigmas = bootstrap_sigmas(
            sweep, model(params.as_tuple()), sigma_loss, variant, bootstrap, seed
        )
        sigma_method = "bootstrap"

    return TLSFitResult(
        params=params,
        sigmas=sigmas,
        q_i_lp=qi_low_photon(params, sweep.f_r, sweep.temperature, variant),
        chi2_reduced=chi2_reduced,
        f_r=sweep.f_r,
        temperature=sweep.temperature,
        bounds_active=active,
        non_identifiable=non_identifiable,
        q_i_lowest_power=sweep.lowest_power_qi(),
        variant=variant,
        q_c=q_c,
        sigma_method=sigma_method,
    )


def bootstrap_sigmas(
    sweep: PowerSweep,
    fitted_loss: np.ndarray,
    sigma_loss: np.ndarray,
    variant: ModelVariant,
    resamples: int,
    seed: int = 0,
) -> Dict[str, float]:
    """
    1σ-погрешности повторным фитом по перемешанным остаткам.

    Нормированные остатки выбираются с возвращением и добавляются к
    подобранной модели; выборки с неположительными потерями и
    несошедшиеся фиты пропускаются.

    Raises:
        FitFailureError: удачных повторов меньше двух
    """
    rng = np.random.default_rng(seed)
    standardized = (1 / sweep.q_i - fitted_loss) / sigma_loss
    samples = []
    for _ in range(resamples):
        loss = fitted_loss + sigma_loss * rng.choice(standardized, size=standardized.size)
        if np.any(loss <= 0):
            continue
        resampled = PowerSweep.from_arrays(
            sweep.n_mean, 1 / loss, sweep.f_r, sweep.temperature, sweep.q_i_sigma
        )
        try:
            samples.append(fit_tls(resampled, variant, quiet=True).params.as_tuple())
        except FitFailureError:
            continue

    if len(samples) < 2:
        raise FitFailureError(
            f"Bootstrap: удачных повторов {len(samples)} из {resamples}"
        )
    spread = np.std(np.array(samples), axis=0, ddof=1)
    return {name: float(s) for name, s in zip(PARAM_NAMES, spread)}


def _uncertainties(
    params: TLSParams,
    n: np.ndarray,
    thermal: float,
    variant: ModelVariant,
    sigma_loss: np.ndarray,
    chi2_reduced: float,
) -> Tuple[Dict[str, float], List[str]]:
    """
    1σ-погрешности из ковариации в оптимуме, масштабированной на χ²_red.

    Возвращает также параметры, входящие в плохо обусловленные направления.
    """
    jac = _model_jacobian(params.as_tuple(), n, thermal, variant) / sigma_loss[:, None]
    scale = np.array(
        [params.f_tls0, params.n_c, 1.0, max(params.tan_other, params.f_tls0)]
    )
    scaled = jac * scale
    _, singular, vt = np.linalg.svd(scaled, full_matrices=False)

    non_identifiable: List[str] = []
    if singular[-1] <= singular[0] / IDENTIFIABILITY_COND:
        weak = np.abs(vt[-1])
        non_identifiable = [
            name for name, w in zip(PARAM_NAMES, weak) if w > 0.1
        ]

    cov = np.linalg.pinv(scaled.T @ scaled) * chi2_reduced
    variances = np.diag(cov) * scale**2
    sigmas = {
        name: float(np.sqrt(max(v, 0.0))) for name, v in zip(PARAM_NAMES, variances)
    }
    return sigmas, non_identifiable


class TLSFitter(BaseFitter):
    """Фит свипов мощности с настройками из конфигурации."""

    def __init__(self, config: Dict[str, Any]):
        """
        Args:
            config: Секция ``fit`` (ключи ``model_variant``, ``bootstrap``)
        """
        super().__init__(config)
        self.variant = ModelVariant.parse(
            config.get("model_variant", ModelVariant.EXPONENT_OUTSIDE)
        )
        self.bootstrap = int(config.get("bootstrap", 0))
        if self.bootstrap < 0:
            raise ValidationError("fit.bootstrap не может быть отрицательным")

    def fit(
        self, data: PowerSweep, q_c: Optional[float] = None, seed: int = 0
    ) -> TLSFitResult:
        self._progress(
            f"Фит модели TLS ({self.variant.value}) по {len(data)} точкам..."
        )
        if self.bootstrap:
            self._progress(f"Bootstrap: {self.bootstrap} повторов...")
        return fit_tls(
            data, variant=self.variant, q_c=q_c, bootstrap=self.bootstrap, seed=seed
        )
