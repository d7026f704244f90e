"""Тесты командной строки."""

import json

import pytest

from src.app import ResLabApp
from src.core.errors import FitFailureError
from src.core.sweep import PowerSweep, load_power_sweep, save_power_sweep
from src.core.trace import load_trace
from src.fitters.tls_fitter import TLSParams, fit_tls, loss_model
from src.physics.photons import AttenuationChain, chain_power, mean_photons
from src.physics.reference_table import get_row, row_fit_result
from src.synth.generator import parse_meta
from src.utils.input_validator import SEED_ENV

Q_L = 1 / (1 / 1.08e6 + 1 / 2.28e6)
WIDE_TRACE = [
    "--fr", "5e9", "--ql", "2e4", "--qc", "5e4",
    "--phi", "0.2", "--a", "0.7", "--alpha", "1.1", "--tau", "5e-8",
]


@pytest.fixture
def app(config_file, monkeypatch):
    """Приложение с тестовой конфигурацией и без RESLAB_SEED."""
    monkeypatch.delenv(SEED_ENV, raising=False)
    return ResLabApp(config_file)


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestFitS21Command:
    """Тесты команды fit-s21."""

    def test_clean_fixture(self, app, tmp_path):
        """Тест фита чистой синтетической трассы."""
        trace_path = str(tmp_path / "clean.csv")
        out = str(tmp_path / "fit.json")
        assert app.run(["synth", "trace", *WIDE_TRACE, "--out", trace_path]) == 0

        assert app.run(["fit-s21", trace_path, "--out", out]) == 0

        with open(out, encoding="utf-8") as f:
            record = json.load(f)
        truth = parse_meta(load_trace(trace_path).meta)["q_i"]
        assert record["q_i"] == pytest.approx(truth, rel=1e-6)
        assert record["refined"] is True
        assert record["source"] == trace_path

    def test_no_refine(self, app, tmp_path, capsys):
        """Тест поэтапных параметров без уточнения."""
        trace_path = str(tmp_path / "noisy.csv")
        app.run([
            "synth", "trace", *WIDE_TRACE, "--noise", "complex_gaussian",
            "--sigma", "0.005", "--seed", "4", "--out", trace_path,
        ])
        capsys.readouterr()

        assert app.run(["fit-s21", trace_path, "--no-refine"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["refined"] is False
        assert record["q_l"] == pytest.approx(2e4, rel=0.05)

    def test_batch_csv(self, app, tmp_path, capsys):
        """Тест нескольких трасс в CSV с параллельным фитом."""
        paths = []
        for seed in ("1", "2"):
            path = str(tmp_path / f"t{seed}.csv")
            app.run([
                "synth", "trace", *WIDE_TRACE, "--noise", "complex_gaussian",
                "--sigma", "0.001", "--seed", seed, "--out", path,
            ])
            paths.append(path)
        capsys.readouterr()

        assert app.run(["fit-s21", *paths, "--jobs", "2", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("source,f_r_hz,q_l,abs_qc")
        assert [line.split(",")[0] for line in lines[1:]] == paths

    def test_missing_file(self, app, tmp_path):
        """Тест отсутствующего файла."""
        assert app.run(["fit-s21", str(tmp_path / "missing.csv")]) == 1

    def test_fit_failure_exit_code(self, app, tmp_path, monkeypatch):
        """Тест кода 2 при несходящемся фите."""
        def fail(*args, **kwargs):
            raise FitFailureError("не сошлось", last_iterate=None)

        monkeypatch.setattr(app.analyzer, "fit_traces", fail)

        assert app.run(["fit-s21", str(tmp_path / "any.csv")]) == 2

    def test_malformed_trace(self, app, tmp_path):
        """Тест битой строки в трассе."""
        path = tmp_path / "bad.csv"
        path.write_text("freq_hz,re,im\n1e9,1,x\n", encoding="utf-8")

        assert app.run(["fit-s21", str(path)]) == 1

    def test_unknown_flag(self, app, tmp_path):
        """Тест неизвестного флага."""
        assert app.run(["fit-s21", str(tmp_path / "t.csv"), "--bogus"]) == 1


class TestFitTLSCommand:
    """Тесты команды fit-tls."""

    def setup_method(self):
        """Подготовка к тестам."""
        self.row = get_row("dep_ta_t0")

    def make_sweep(self, app, tmp_path):
        path = str(tmp_path / "dep_ta_t0.csv")
        assert app.run(["synth", "sweep", "--row", "dep_ta_t0", "--out", path]) == 0
        return path

    def test_table_row_fixture(self, app, tmp_path, capsys):
        """Тест фита свипа строки Ta с нанесённым Al₂O₃."""
        path = self.make_sweep(app, tmp_path)
        capsys.readouterr()

        code = app.run(["fit-tls", path, "--fr", "5.209e9", "--temp", "0.010", "--qc", "2.28e6"])

        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["f_tls0"] == pytest.approx(0.93e-6, rel=0.05)
        assert record["q_c"] == 2.28e6

    def test_matches_library_call(self, app, tmp_path, capsys):
        """Тест совпадения с вызовом библиотеки."""
        path = self.make_sweep(app, tmp_path)
        capsys.readouterr()

        app.run(["fit-tls", path, "--fr", "5.209e9"])

        record = json.loads(capsys.readouterr().out)
        direct = fit_tls(load_power_sweep(path, 5.209e9, 0.010))
        assert record["f_tls0"] == direct.params.f_tls0
        assert record["beta"] == direct.params.beta
        assert record["q_i_lp"] == direct.q_i_lp

    def test_bootstrap_flag(self, app, tmp_path, capsys):
        """Тест --bootstrap."""
        path = self.make_sweep(app, tmp_path)
        capsys.readouterr()

        assert app.run(["fit-tls", path, "--fr", "5.209e9", "--bootstrap", "10", "--seed", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["sigma_method"] == "bootstrap"
        assert app.run(["fit-tls", path, "--fr", "5.209e9", "--bootstrap", "-1"]) == 1

    def test_zero_temperature(self, app, tmp_path):
        """Тест --temp 0."""
        path = self.make_sweep(app, tmp_path)

        assert app.run(["fit-tls", path, "--fr", "5.209e9", "--temp", "0"]) == 1

    def test_plot(self, app, tmp_path):
        """Тест SVG с кривой фита."""
        path = self.make_sweep(app, tmp_path)
        plot = tmp_path / "sweep.svg"

        assert app.run(["fit-tls", path, "--fr", "5.209e9", "--plot", str(plot)]) == 0
        assert "<svg" in plot.read_text(encoding="utf-8")

    def test_model_variant_flag(self, app, tmp_path, capsys, n_grid):
        """Тест флага варианта модели."""
        truth = TLSParams(f_tls0=0.61e-6, n_c=10.0, beta=0.5, tan_other=0.14e-6)
        path = tmp_path / "sweep.csv"
        save_power_sweep(
            PowerSweep.from_arrays(
                n_grid, 1 / loss_model(truth, n_grid, 5e9, 0.010, "exponent_inside"), 5e9, 0.010
            ),
            path,
        )

        code = app.run(["fit-tls", str(path), "--fr", "5e9", "--model-variant", "exponent-inside"])

        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["model_variant"] == "exponent_inside"
        assert record["beta"] == pytest.approx(0.5, abs=1e-5)

    def test_unknown_model_variant(self, app, tmp_path):
        """Тест неизвестного варианта модели."""
        path = self.make_sweep(app, tmp_path)

        assert app.run(["fit-tls", path, "--fr", "5.209e9", "--model-variant", "cubic"]) == 1


class TestPhotonsCommand:
    """Тесты команды photons."""

    def test_reference_chain(self, app, tmp_path, capsys):
        """Тест ⟨n⟩ ≈ 42 при −20 дБм через 120 дБ."""
        chain = write_json(tmp_path / "chain.json", {"stages": [{"db": 60}, {"db": 60}]})

        code = app.run([
            "photons", "--source-dbm", "-20", "--chain", chain,
            "--fr", "5.209e9", "--ql", repr(Q_L), "--qc", "2.28e6",
        ])

        assert code == 0
        record = json.loads(capsys.readouterr().out)
        power = chain_power(-20.0, AttenuationChain.of(60, 60))
        assert record["applied_power_w"] == power
        assert record["n_mean"] == mean_photons(power, 5.209e9, Q_L, 2.28e6)
        assert record["n_mean"] == pytest.approx(41.7, abs=0.1)

    def test_chain_from_config(self, app, capsys):
        """Тест цепочки из файла конфигурации."""
        app.run(["photons", "--source-dbm", "-20", "--fr", "5e9", "--ql", "1e6", "--qc", "2e6"])

        assert json.loads(capsys.readouterr().out)["total_attenuation_db"] == 120

    def test_empty_chain(self, app, tmp_path, capsys):
        """Тест пустой цепочки: 0 дБм → 1 мВт."""
        chain = write_json(tmp_path / "chain.json", {"stages": []})

        app.run([
            "photons", "--source-dbm", "0", "--chain", chain,
            "--fr", "5e9", "--ql", "1e6", "--qc", "2e6",
        ])

        assert json.loads(capsys.readouterr().out)["applied_power_w"] == 1e-3

    def test_negative_stage(self, app, tmp_path):
        """Тест отрицательного ослабления."""
        chain = write_json(tmp_path / "chain.json", {"stages": [{"db": -10}]})

        code = app.run([
            "photons", "--source-dbm", "0", "--chain", chain,
            "--fr", "5e9", "--ql", "1e6", "--qc", "2e6",
        ])

        assert code == 1

    def test_target_photons(self, app, capsys):
        """Тест мощности генератора для заданного ⟨n⟩."""
        app.run([
            "photons", "--source-dbm", "-20", "--fr", "5.209e9",
            "--ql", repr(Q_L), "--qc", "2.28e6", "--target-n", "1",
        ])

        record = json.loads(capsys.readouterr().out)
        assert record["required_source_dbm"] < -20


class TestXPSCommand:
    """Тесты команды xps."""

    def test_explicit_constants(self, app, capsys):
        """Тест толщины при R = e − 1."""
        code = app.run(["xps", "--ratio", "1.718281828459045", "--lambda-ox", "2", "--r0", "1"])

        assert code == 0
        assert json.loads(capsys.readouterr().out)["thickness_nm"] == pytest.approx(2.0)

    def test_preset_from_config(self, app, capsys):
        """Тест набора констант из конфигурации."""
        app.run(["xps", "--thickness", "2.64", "--preset", "al2p", "--format", "csv"])

        out = capsys.readouterr().out
        assert out.startswith("key,value")
        assert "ratio" in out

    def test_unknown_preset(self, app):
        """Тест неизвестного набора констант."""
        assert app.run(["xps", "--ratio", "0.5", "--preset", "nb3d"]) == 1

    def test_ratio_and_thickness_exclusive(self, app):
        """Тест взаимоисключающих флагов."""
        assert app.run(["xps", "--ratio", "0.5", "--thickness", "1"]) == 1


class TestSynthCommand:
    """Тесты команды synth."""

    def test_seed_reproducible(self, app, tmp_path):
        """Тест одинаковых файлов при одном зерне."""
        args = [*WIDE_TRACE, "--noise", "complex_gaussian", "--sigma", "0.01", "--seed", "8"]
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        app.run(["synth", "trace", *args, "--out", str(first)])
        app.run(["synth", "trace", *args, "--out", str(second)])

        assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")

    def test_env_seed_overrides_flag(self, app, tmp_path, monkeypatch):
        """Тест приоритета RESLAB_SEED над --seed."""
        base = [*WIDE_TRACE, "--noise", "complex_gaussian", "--sigma", "0.01"]
        flag, env = tmp_path / "flag.csv", tmp_path / "env.csv"
        app.run(["synth", "trace", *base, "--seed", "5", "--out", str(flag)])
        monkeypatch.setenv(SEED_ENV, "5")
        app.run(["synth", "trace", *base, "--seed", "9", "--out", str(env)])

        assert flag.read_text(encoding="utf-8") == env.read_text(encoding="utf-8")

    def test_requires_out(self, app):
        """Тест обязательного --out."""
        assert app.run(["synth", "trace", *WIDE_TRACE]) == 1

    def test_sweep_from_flags(self, app, tmp_path):
        """Тест свипа из явных параметров."""
        path = tmp_path / "sweep.csv"
        code = app.run([
            "synth", "sweep", "--f-tls0", "1e-6", "--beta", "0.2",
            "--fr", "5e9", "--points", "10", "--out", str(path),
        ])

        assert code == 0
        assert len(load_power_sweep(path, 5e9, 0.010)) == 10

    def test_unknown_row(self, app, tmp_path):
        """Тест несуществующей строки сводки."""
        assert app.run(["synth", "sweep", "--row", "x", "--out", str(tmp_path / "s.csv")]) == 1


class TestReportCommand:
    """Тесты команды report."""

    def fit_files(self, tmp_path, before, after):
        return (
            write_json(tmp_path / "before.json", row_fit_result(get_row(before)).to_dict()),
            write_json(tmp_path / "after.json", row_fit_result(get_row(after)).to_dict()),
        )

    def test_aluminium_increase(self, app, tmp_path, capsys):
        """Тест роста F·tanδ⁰ на 27.9%."""
        before, after = self.fit_files(tmp_path, "dep_al_t0", "dep_al_2w")

        assert app.run(["report", before, after]) == 0
        assert "+27.9%" in capsys.readouterr().out

    def test_native_tantalum_increase(self, app, tmp_path, capsys):
        """Тест роста F·tanδ⁰ на 57.4%."""
        before, after = self.fit_files(tmp_path, "nat_ta_t0", "nat_ta_2m")

        app.run(["report", before, after])

        assert "+57.4%" in capsys.readouterr().out

    def test_identical_files(self, app, tmp_path, capsys):
        """Тест одинаковых файлов."""
        before, _ = self.fit_files(tmp_path, "dep_ta_t0", "dep_ta_t0")

        app.run(["report", before, before, "--format", "json"])

        aging = json.loads(capsys.readouterr().out)["aging"]
        assert aging == {
            "f_tls0_change_pct": 0.0,
            "tan_other_delta": 0.0,
            "q_i_lp_delta": 0.0,
            "q_i_lp_change_pct": 0.0,
        }

    def test_schema_mismatch(self, app, tmp_path):
        """Тест файла без обязательных полей."""
        before, _ = self.fit_files(tmp_path, "dep_al_t0", "dep_al_2w")
        broken = write_json(tmp_path / "broken.json", {"q_l": 1e6})

        assert app.run(["report", before, broken]) == 1

    def test_fit_output_feeds_report(self, app, tmp_path):
        """Тест отчёта по JSON, записанным командой fit-tls."""
        files = []
        for row in ("dep_al_t0", "dep_al_2w"):
            sweep = str(tmp_path / f"{row}.csv")
            result = str(tmp_path / f"{row}.json")
            app.run(["synth", "sweep", "--row", row, "--out", sweep])
            app.run(["fit-tls", sweep, "--fr", repr(get_row(row).f_r), "--out", result])
            files.append(result)
        out = tmp_path / "report.md"

        assert app.run(["report", *files, "--out", str(out)]) == 0
        assert "+27.9%" in out.read_text(encoding="utf-8")


class TestTableCommand:
    """Тесты команды table."""

    def test_consistency(self, app, capsys):
        """Тест проверки опубликованной сводки."""
        assert app.run(["table"]) == 0
        assert "8 из 9" in capsys.readouterr().out

    def test_help_exit_code(self, app):
        """Тест --help."""
        assert app.run(["--help"]) == 0
