"""Главный класс, связывающий загрузку данных, фиттеры и форматирование."""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core.errors import ValidationError
from .core.sweep import PowerSweep, load_power_sweep, save_power_sweep
from .core.trace import (
    ComplexTrace,
    TraceFormat,
    calibrate_background,
    load_trace,
    save_trace,
)
from .fitters.notch_fitter import NotchFit, NotchFitter, NotchParams
from .fitters.tls_fitter import ModelVariant, TLSFitResult, TLSFitter, TLSParams
from .physics.aging import AgingDelta, aging_report
from .physics.photons import (
    AttenuationChain,
    chain_power,
    mean_photons,
    required_source_dbm,
)
from .physics.reference_table import consistency_report
from .physics.xps import (
    ILLUSTRATIVE_NOTE,
    XPSConstants,
    get_preset,
    oxide_ratio,
    oxide_thickness,
)
from .synth.generator import NoiseSpec, synth_sweep, synth_trace
from .utils import console
from .utils.config_loader import ConfigLoader
from .utils.formatter import ReportFormatter
from .utils.input_validator import InputValidator
from .utils.plotter import plot_notch_fit, plot_power_sweep


class ResonatorAnalyzer:
    """Управляет всеми этапами анализа резонаторов."""

    def __init__(self, config_loader: ConfigLoader):
        """
        Инициализация анализатора.

        Args:
            config_loader: Загрузчик конфигурации
        """
        self.config_loader = config_loader
        self._init_components()

    def _init_components(self) -> None:
        """Инициализирует все компоненты из текущей конфигурации."""
        config = self.config_loader.get()

        output_config = config.get("output", {})
        console.SHOW_EMOJI = bool(output_config.get("show_emoji", True))
        self.formatter = ReportFormatter(output_config)

        self.fit_config = dict(config.get("fit", {}))
        self.notch_fitter = NotchFitter(self.fit_config)
        self.tls_fitter = TLSFitter(self.fit_config)
        self.validator = InputValidator()

    def reload_config(self) -> None:
        """Перезагружает конфигурацию и компоненты."""
        if self.config_loader.reload():
            self._init_components()

    @property
    def default_temperature(self) -> float:
        return float(self.fit_config.get("temperature_k", 0.010))

    def default_chain(self) -> AttenuationChain:
        """Цепочка ослаблений из секции ``chain`` конфигурации."""
        return AttenuationChain.from_config(self.config_loader.get("chain", {}))

    def xps_preset(self, name: str) -> XPSConstants:
        """
        Набор констант XPS из секции ``xps.presets`` конфигурации.

        Raises:
            ValidationError: нет такого набора
        """
        presets = self.config_loader.get("xps", {}).get("presets", {})
        if name in presets:
            data = dict(presets[name])
            data.setdefault("note", ILLUSTRATIVE_NOTE)
            return XPSConstants.from_config(data, label=name)
        return get_preset(name)

    # --- резонансные трассы ---

    def fit_trace(
        self,
        path: str,
        background: Optional[ComplexTrace] = None,
        trace_format: TraceFormat = TraceFormat.RE_IM,
        refine: Optional[bool] = None,
        plot_path: Optional[str] = None,
    ) -> NotchFit:
        """
        Загружает трассу, при необходимости калибрует по фону и фитирует.

        Args:
            path: Путь к CSV трассы
            background: Фоновая трасса на той же сетке
            trace_format: Формат CSV
            refine: Переопределяет ``fit.refine`` из конфигурации
            plot_path: Куда сохранить SVG окружности

        Returns:
            Результат извлечения
        """
        console.log(f"Фит трассы {path}", "📈")
        trace = load_trace(path, trace_format)
        if background is not None:
            trace = calibrate_background(trace, background)

        if refine is not None:
            self.notch_fitter.refine = refine
        fit = self.notch_fitter.fit(trace)

        if plot_path:
            plot_notch_fit(trace, fit, plot_path)
        console.log(f"Q_i = {fit.q_i:.4g} ({path})", "✅")
        return fit

    def fit_traces(
        self,
        paths: Sequence[str],
        background_path: Optional[str] = None,
        trace_format: TraceFormat = TraceFormat.RE_IM,
        refine: Optional[bool] = None,
        jobs: int = 1,
        plot_path: Optional[str] = None,
    ) -> List[Tuple[str, NotchFit]]:
        """
        Фит нескольких трасс; с ``jobs > 1`` трассы обрабатываются параллельно.

        SVG окружности строится, только если трасса одна.

        Returns:
            Пары (путь, результат) в порядке входных путей
        """
        background = None
        if background_path:
            background = load_trace(background_path, trace_format)
        if refine is not None:
            self.notch_fitter.refine = refine

        def run(path: str) -> NotchFit:
            plot = plot_path if len(paths) == 1 else None
            return self.fit_trace(path, background, trace_format, plot_path=plot)

        if jobs > 1 and len(paths) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                fits = list(pool.map(run, paths))
        else:
            fits = [run(path) for path in paths]
        return list(zip(paths, fits))

    # --- свипы по мощности ---

    def fit_sweep(
        self,
        path: str,
        f_r: float,
        temperature: Optional[float] = None,
        variant: Optional[str] = None,
        q_c: Optional[float] = None,
        plot_path: Optional[str] = None,
        bootstrap: Optional[int] = None,
        seed: int = 0,
    ) -> TLSFitResult:
        """
        Загружает свип и фитирует модель потерь TLS.

        Args:
            path: Путь к CSV свипа
            f_r: Резонансная частота, Гц
            temperature: Температура, К (по умолчанию из конфигурации)
            variant: Вариант модели (по умолчанию из конфигурации)
            q_c: |Q_c| для отчёта
            plot_path: Куда сохранить SVG Q_i(⟨n⟩)
            bootstrap: Число повторов bootstrap (по умолчанию из конфигурации)
            seed: Зерно для bootstrap

        Returns:
            Результат фита
        """
        f_r = self.validator.positive(f_r, "fr")
        temp = self.default_temperature if temperature is None else temperature
        temp = self.validator.positive(temp, "temp")
        if q_c is not None:
            q_c = self.validator.positive(q_c, "qc")
        if variant is not None:
            self.tls_fitter.variant = ModelVariant.parse(variant)
        if bootstrap is not None:
            if bootstrap < 0:
                raise ValidationError("--bootstrap не может быть отрицательным")
            self.tls_fitter.bootstrap = bootstrap

        console.log(f"Фит свипа {path}", "📈")
        sweep = load_power_sweep(path, f_r, temp)
        result = self.tls_fitter.fit(sweep, q_c=q_c, seed=seed)

        if plot_path:
            plot_power_sweep(sweep, result, plot_path)
            console.log(f"График сохранён: {plot_path}", "🖼️")
        console.log(
            f"F·tanδ⁰ = {result.params.f_tls0:.3g}, β = {result.params.beta:.3f}, "
            f"Q_i,LP = {result.q_i_lp:.4g}",
            "✅",
        )
        return result

    # --- калибровка мощности ---

    def photons(
        self,
        source_dbm: float,
        f_r: float,
        q_l: float,
        abs_qc: float,
        chain: Optional[AttenuationChain] = None,
        target_n: Optional[float] = None,
    ) -> Dict[str, Any]:
        """
        ⟨n⟩ в резонаторе при заданной мощности генератора.

        Returns:
            Словарь с промежуточной мощностью и ⟨n⟩
        """
        source_dbm = self.validator.finite(source_dbm, "source-dbm")
        chain = self.default_chain() if chain is None else chain
        power = chain_power(source_dbm, chain)
        record: Dict[str, Any] = {
            "source_dbm": source_dbm,
            "total_attenuation_db": chain.total_db,
            "applied_power_dbm": source_dbm - chain.total_db,
            "applied_power_w": power,
            "n_mean": mean_photons(power, f_r, q_l, abs_qc),
            "chain": chain.to_config()["stages"],
        }
        if target_n is not None:
            record["target_n"] = target_n
            record["required_source_dbm"] = required_source_dbm(
                target_n, chain, f_r, q_l, abs_qc
            )
        return record

    # --- XPS ---

    def xps(
        self,
        constants: XPSConstants,
        ratio: Optional[float] = None,
        thickness: Optional[float] = None,
    ) -> Dict[str, Any]:
        """
        Толщина по отношению интенсивностей или обратное преобразование.

        Returns:
            Словарь с результатом и использованными константами
        """
        record: Dict[str, Any] = {"constants": constants.to_dict()}
        if ratio is not None:
            record["ratio"] = ratio
            record["thickness_nm"] = oxide_thickness(ratio, constants)
        else:
            record["thickness_nm"] = thickness
            record["ratio"] = oxide_ratio(thickness, constants)
        if constants.note:
            console.log(f"Константы '{constants.label}': {constants.note}", "⚠️")
        return record

    # --- синтетические данные ---

    def synth_trace(
        self,
        params: NotchParams,
        f_min: float,
        f_max: float,
        n_points: int,
        noise: NoiseSpec,
        path: str,
        trace_format: TraceFormat = TraceFormat.RE_IM,
    ) -> ComplexTrace:
        trace = synth_trace(params, f_min, f_max, n_points, noise)
        save_trace(trace, path, trace_format)
        console.log(f"Трасса записана: {path} ({len(trace)} точек)", "💾")
        return trace

    def synth_sweep(
        self,
        params: TLSParams,
        f_r: float,
        temperature: float,
        n_grid: np.ndarray,
        noise: NoiseSpec,
        path: str,
    ) -> PowerSweep:
        sweep = synth_sweep(params, f_r, temperature, n_grid, noise)
        save_power_sweep(sweep, path)
        console.log(f"Свип записан: {path} ({len(sweep)} точек)", "💾")
        return sweep

    # --- отчёты ---

    def load_fit_result(self, path: str) -> TLSFitResult:
        """Читает TLSFitResult из JSON-файла (строгая проверка схемы)."""
        return TLSFitResult.from_dict(self.validator.json_object(path, "результат фита"))

    def report(self, before_path: str, after_path: str, fmt: str = "markdown") -> str:
        """
        Сравнение двух фитов в формате сводки резонаторов.

        Returns:
            Отформатированный отчёт
        """
        delta: AgingDelta = aging_report(
            self.load_fit_result(before_path), self.load_fit_result(after_path)
        )
        console.log(f"Изменение F·tanδ⁰: {delta.f_tls0_change_label}", "📊")
        return self.formatter.format_report(delta, fmt)

    def table(self, temperature: Optional[float] = None, fmt: str = "markdown") -> str:
        """Согласованность опубликованной сводки с моделью потерь."""
        temp = self.default_temperature if temperature is None else temperature
        temp = self.validator.positive(temp, "temp")
        return self.formatter.format_consistency(consistency_report(temp), fmt)

    @staticmethod
    def log_grid(n_min: float, n_max: float, points: int) -> np.ndarray:
        """Логарифмическая сетка ⟨n⟩ для синтетических свипов."""
        return np.logspace(math.log10(n_min), math.log10(n_max), points)
