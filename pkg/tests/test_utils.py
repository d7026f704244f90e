"""Тесты для утилит."""

import json
import os
import re

import numpy as np
import pytest

from src.core.errors import ValidationError
from src.core.sweep import PowerSweep
from src.fitters.notch_fitter import NotchFit, internal_q
from src.physics.aging import aging_report
from src.physics.reference_table import consistency_report, get_row, row_fit_result
from src.synth.generator import synth_trace
from src.utils import console
from src.utils.config_loader import DEFAULT_CONFIG, ConfigLoader
from src.utils.formatter import REPORT_COLUMNS, ReportFormatter
from src.utils.input_validator import SEED_ENV, InputValidator
from src.utils.plotter import plot_notch_fit, plot_power_sweep


class TestConsole:
    """Тесты вывода сообщений."""

    def test_timestamped_line(self, capsys, monkeypatch):
        """Тест строки с меткой времени."""
        monkeypatch.setattr(console, "SHOW_EMOJI", True)
        console.log("Фит трассы", "📈")

        err = capsys.readouterr().err
        assert re.match(r"^\[\d{2}:\d{2}:\d{2}\] 📈 Фит трассы$", err.strip())

    def test_emoji_disabled(self, capsys, monkeypatch):
        """Тест отключения эмодзи."""
        monkeypatch.setattr(console, "SHOW_EMOJI", False)
        console.log("Готово", "✅")

        assert "✅" not in capsys.readouterr().err

    def test_step(self, capsys):
        """Тест строки этапа."""
        console.step("Фит окружности...")

        assert capsys.readouterr().err == "  → Фит окружности...\n"


class TestConfigLoader:
    """Тесты загрузки конфигурации."""

    def test_load_file(self, config_file):
        """Тест чтения файла."""
        loader = ConfigLoader(config_file)

        assert loader.get("output")["show_emoji"] is False
        assert loader.get("chain")["stages"][0]["db"] == 60

    def test_missing_file_uses_defaults(self, tmp_path):
        """Тест отсутствующего файла."""
        loader = ConfigLoader(str(tmp_path / "missing.json"))

        assert loader.get() == DEFAULT_CONFIG
        assert loader.get() is not DEFAULT_CONFIG

    def test_partial_file_merged(self, tmp_path):
        """Тест дополнения секций значениями по умолчанию."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"fit": {"refine": False}}), encoding="utf-8")
        loader = ConfigLoader(str(path))

        assert loader.get("fit")["refine"] is False
        assert loader.get("fit")["temperature_k"] == 0.010
        assert loader.get("output") == DEFAULT_CONFIG["output"]

    def test_invalid_json_uses_defaults(self, tmp_path):
        """Тест битого JSON."""
        path = tmp_path / "config.json"
        path.write_text("{fit: ", encoding="utf-8")

        assert ConfigLoader(str(path)).get() == DEFAULT_CONFIG

    def test_reload_on_change(self, config_file):
        """Тест перечитывания изменённого файла."""
        loader = ConfigLoader(config_file)
        assert loader.reload() is False

        with open(config_file, "w", encoding="utf-8") as f:
            json.dump({"fit": {"temperature_k": 0.02}}, f)
        future = loader.last_modified + 10
        os.utime(config_file, (future, future))

        assert loader.reload() is True
        assert loader.get("fit")["temperature_k"] == 0.02

    def test_get_default(self, config_file):
        """Тест значения по умолчанию для отсутствующего ключа."""
        assert ConfigLoader(config_file).get("plots", {}) == {}


class TestInputValidator:
    """Тесты валидации ввода."""

    def setup_method(self):
        """Подготовка к тестам."""
        self.validator = InputValidator(environ={})

    def test_positive(self):
        """Тест положительного числа."""
        assert self.validator.positive(0.01, "temp") == 0.01
        with pytest.raises(ValidationError):
            self.validator.positive(0.0, "temp")
        with pytest.raises(ValidationError):
            self.validator.positive(None, "fr")
        with pytest.raises(ValidationError):
            self.validator.positive(float("inf"), "fr")

    def test_finite(self):
        """Тест конечного числа."""
        assert self.validator.finite(-20.0, "source-dbm") == -20.0
        with pytest.raises(ValidationError):
            self.validator.finite(float("nan"), "source-dbm")

    def test_seed_from_flag(self):
        """Тест зерна из флага."""
        assert self.validator.seed(17) == 17
        assert self.validator.seed(None) == 0

    def test_seed_env_overrides_flag(self):
        """Тест приоритета переменной окружения."""
        validator = InputValidator(environ={SEED_ENV: "123"})

        assert validator.seed(17) == 123

    def test_seed_env_invalid(self):
        """Тест нечислового зерна в окружении."""
        with pytest.raises(ValidationError):
            InputValidator(environ={SEED_ENV: "abc"}).seed(None)

    def test_seed_out_of_range(self):
        """Тест отрицательного зерна."""
        with pytest.raises(ValidationError):
            self.validator.seed(-5)

    def test_json_object(self, tmp_path):
        """Тест чтения JSON-объекта."""
        path = tmp_path / "fit.json"
        path.write_text('{"f_tls0": 1e-6}', encoding="utf-8")

        assert self.validator.json_object(str(path), "фит") == {"f_tls0": 1e-6}

    def test_json_errors(self, tmp_path):
        """Тест ошибок чтения JSON."""
        broken = tmp_path / "broken.json"
        broken.write_text("{", encoding="utf-8")
        array = tmp_path / "array.json"
        array.write_text("[1, 2]", encoding="utf-8")

        with pytest.raises(ValidationError):
            self.validator.json_object(str(broken), "фит")
        with pytest.raises(ValidationError):
            self.validator.json_object(str(array), "фит")
        with pytest.raises(ValidationError):
            self.validator.json_object(str(tmp_path / "missing.json"), "фит")


class TestReportFormatter:
    """Тесты форматирования отчётов."""

    def setup_method(self):
        """Подготовка к тестам."""
        self.formatter = ReportFormatter({"show_emoji": False, "float_digits": 4})
        self.delta = aging_report(
            row_fit_result(get_row("dep_al_t0")), row_fit_result(get_row("dep_al_2w"))
        )

    def test_markdown_report(self):
        """Тест Markdown-отчёта о старении."""
        report = self.formatter.format_report(self.delta)

        assert "| Эпоха | " + " | ".join(REPORT_COLUMNS) + " |" in report
        assert "| до | 5.126 | 0.42 |" in report
        assert "| после | 5.122 | 0.21 |" in report
        assert "- F·tanδ⁰: +27.9%" in report
        assert "📊" not in report

    def test_column_order(self):
        """Тест порядка колонок сводки."""
        assert REPORT_COLUMNS[0].startswith("f_r")
        assert REPORT_COLUMNS[1].startswith("Q_c")
        assert REPORT_COLUMNS[2].startswith("Q_i,LP")
        assert REPORT_COLUMNS[3].startswith("F·tanδ⁰")
        assert REPORT_COLUMNS[4].startswith("tanδ_other")
        assert REPORT_COLUMNS[5] == "β"

    def test_csv_report(self):
        """Тест CSV-отчёта."""
        lines = self.formatter.format_report(self.delta, "csv").splitlines()

        assert lines[0].startswith("epoch,")
        assert lines[1].startswith("before,5.126,")
        assert lines[2].startswith("after,5.122,")
        assert "+27.9" in lines[-1]

    def test_json_report(self):
        """Тест JSON-отчёта."""
        data = json.loads(self.formatter.format_report(self.delta, "json"))

        assert data["aging"]["f_tls0_change_pct"] == pytest.approx(27.94, abs=0.01)
        assert data["before"]["f_tls0"] == 0.68e-6

    def test_missing_value_dash(self):
        """Тест прочерка для неизвестной Q_c."""
        assert self.formatter._num(None) == "—"

    def test_record_csv(self):
        """Тест CSV ключ–значение."""
        text = self.formatter.format_record({"n_mean": 41.7, "chain": [1, 2]}, "csv")

        assert text.splitlines() == ["key,value", "n_mean,41.7", 'chain,"[1, 2]"']

    def test_consistency_markdown(self):
        """Тест таблицы согласованности."""
        text = self.formatter.format_consistency(consistency_report())

        assert "Native AlOₓ/Al" in text
        assert "+20.4%" in text
        assert "В пределах 4%: 7 из 9; в пределах 7%: 8 из 9" in text

    def test_consistency_json(self):
        """Тест JSON согласованности."""
        data = json.loads(self.formatter.format_consistency(consistency_report(), "json"))

        assert len(data["rows"]) == 9
        assert data["summary"]["within_loose"] == 8


class TestPlotter:
    """Тесты SVG-графиков."""

    def test_power_sweep_svg(self, tmp_path, n_grid):
        """Тест графика Q_i(⟨n⟩)."""
        result = row_fit_result(get_row("dep_ta_t0"))
        sweep = PowerSweep.from_arrays(
            n_grid, np.linspace(1.0e6, 6.0e6, n_grid.size), result.f_r, 0.010
        )
        path = tmp_path / "sweep.svg"
        plot_power_sweep(sweep, result, path)

        text = path.read_text(encoding="utf-8")
        assert "<svg" in text

    def test_notch_svg(self, tmp_path, wide_notch_params):
        """Тест графика окружности S21."""
        p = wide_notch_params
        trace = synth_trace(p, 4.99e9, 5.01e9, 201)
        fit = NotchFit(
            params=p,
            q_i=internal_q(p.q_l, p.abs_qc, p.phi),
            residual_rms=0.0,
            circle_center=1 - p.diameter / 2 * np.exp(1j * p.phi),
            circle_radius=p.diameter / 2,
        )
        path = tmp_path / "notch.svg"
        plot_notch_fit(trace, fit, path)

        assert "<svg" in path.read_text(encoding="utf-8")

