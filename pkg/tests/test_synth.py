"""Тесты генератора синтетических данных."""

import numpy as np
import pytest

from src.core.errors import ValidationError
from src.core.sweep import load_power_sweep, save_power_sweep
from src.core.trace import load_trace, save_trace
from src.fitters.notch_fitter import s21_model
from src.fitters.tls_fitter import loss_model
from src.synth.generator import (
    PRNG_NAME,
    NoiseKind,
    NoiseSpec,
    parse_meta,
    synth_sweep,
    synth_trace,
)


class TestNoiseSpec:
    """Тесты описания шума."""

    def test_kind_from_string(self):
        """Тест типа шума из строки."""
        assert NoiseSpec("multiplicative", 0.01, 1).kind is NoiseKind.MULTIPLICATIVE

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        """Тест зерна вне 64-битного диапазона."""
        with pytest.raises(ValidationError):
            NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, 0.01, seed)

    def test_unknown_kind(self):
        """Тест неизвестного типа шума."""
        with pytest.raises(ValidationError):
            NoiseSpec("pink", 0.01, 1)

    def test_negative_sigma(self):
        """Тест отрицательной амплитуды."""
        with pytest.raises(ValidationError):
            NoiseSpec(NoiseKind.MULTIPLICATIVE, -0.1, 1)


class TestSynthTrace:
    """Тесты синтетических трасс."""

    def setup_method(self):
        """Подготовка к тестам."""
        self.f_min = 4.995e9
        self.f_max = 5.005e9
        self.points = 1001

    def make(self, params, noise=NoiseSpec()):
        return synth_trace(params, self.f_min, self.f_max, self.points, noise)

    def test_noiseless_equals_model(self, wide_notch_params):
        """Тест трассы без шума."""
        trace = self.make(wide_notch_params)

        assert np.array_equal(trace.samples, s21_model(wide_notch_params, trace.freqs))
        assert trace.freqs[0] == self.f_min
        assert trace.freqs[-1] == self.f_max

    def test_same_seed_same_trace(self, wide_notch_params):
        """Тест воспроизводимости при одном зерне."""
        noise = NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, 0.01, seed=42)

        first = self.make(wide_notch_params, noise)
        second = self.make(wide_notch_params, noise)
        other = self.make(wide_notch_params, NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, 0.01, 43))

        assert np.array_equal(first.samples, second.samples)
        assert not np.array_equal(first.samples, other.samples)

    def test_complex_gaussian_statistics(self, wide_notch_params):
        """Тест среднего и разброса комплексного шума."""
        p = wide_notch_params
        sigma = 0.01
        bound = 5 * sigma * p.a / np.sqrt(self.points)
        for seed in range(20):
            trace = self.make(p, NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, sigma, seed))
            residual = trace.samples - s21_model(p, trace.freqs)

            assert abs(residual.real.mean()) < bound
            assert abs(residual.imag.mean()) < bound
            assert residual.real.std() == pytest.approx(sigma * p.a, rel=0.15)
            assert residual.imag.std() == pytest.approx(sigma * p.a, rel=0.15)

    def test_multiplicative_is_real_factor(self, wide_notch_params):
        """Тест мультипликативного шума."""
        p = wide_notch_params
        trace = self.make(p, NoiseSpec(NoiseKind.MULTIPLICATIVE, 0.02, seed=7))
        factor = trace.samples / s21_model(p, trace.freqs) - 1

        assert np.max(np.abs(factor.imag)) < 1e-12
        assert factor.real.std() == pytest.approx(0.02, rel=0.15)

    def test_meta_records_truth(self, wide_notch_params):
        """Тест записи параметров и зерна в метаданные."""
        noise = NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, 0.01, seed=9)
        meta = parse_meta(self.make(wide_notch_params, noise).meta)

        assert meta["synth"] == "trace"
        assert meta["params"]["q_l"] == wide_notch_params.q_l
        assert meta["noise"] == {"kind": "complex_gaussian", "sigma": 0.01, "seed": 9}
        assert meta["prng"] == PRNG_NAME
        assert meta["numpy"] == np.__version__
        assert meta["q_i"] > wide_notch_params.q_l

    def test_meta_survives_file(self, tmp_path, wide_notch_params):
        """Тест метаданных после записи в файл."""
        trace = self.make(wide_notch_params)
        path = tmp_path / "trace.csv"
        save_trace(trace, path)

        assert parse_meta(load_trace(path).meta) == parse_meta(trace.meta)

    def test_resonance_outside_grid(self, wide_notch_params):
        """Тест резонанса вне сетки."""
        with pytest.raises(ValidationError):
            synth_trace(wide_notch_params, 5.1e9, 5.2e9, 101)

    def test_too_few_points(self, wide_notch_params):
        """Тест слишком короткой сетки."""
        with pytest.raises(ValidationError):
            synth_trace(wide_notch_params, self.f_min, self.f_max, 5)

    def test_parse_meta_without_record(self):
        """Тест метаданных без записи генератора."""
        assert parse_meta(None) is None
        assert parse_meta("эпоха 0\nне json") is None


class TestSynthSweep:
    """Тесты синтетических свипов."""

    def test_noiseless_matches_model(self, dep_al_params, n_grid):
        """Тест свипа без шума."""
        sweep = synth_sweep(dep_al_params, 5.126e9, 0.010, n_grid)

        expected = 1 / loss_model(dep_al_params, n_grid, 5.126e9, 0.010)
        assert np.array_equal(sweep.q_i, expected)
        assert sweep.q_i_sigma is None

    def test_multiplicative_reproducible(self, dep_al_params, n_grid):
        """Тест воспроизводимости шумного свипа."""
        noise = NoiseSpec(NoiseKind.MULTIPLICATIVE, 0.02, seed=1)
        first = synth_sweep(dep_al_params, 5.126e9, 0.010, n_grid, noise)
        second = synth_sweep(dep_al_params, 5.126e9, 0.010, n_grid, noise)

        assert np.array_equal(first.q_i, second.q_i)

    def test_complex_noise_rejected(self, dep_al_params, n_grid):
        """Тест комплексного шума для свипа."""
        with pytest.raises(ValidationError):
            synth_sweep(
                dep_al_params, 5.126e9, 0.010, n_grid,
                NoiseSpec(NoiseKind.COMPLEX_GAUSSIAN, 0.01, 1),
            )

    def test_unsorted_grid(self, dep_al_params):
        """Тест неотсортированной сетки."""
        with pytest.raises(ValidationError):
            synth_sweep(dep_al_params, 5.126e9, 0.010, [10.0, 1.0, 100.0])

    def test_file_round_trip_keeps_meta(self, tmp_path, dep_al_params, n_grid):
        """Тест записи свипа с метаданными."""
        sweep = synth_sweep(dep_al_params, 5.126e9, 0.010, n_grid)
        path = tmp_path / "sweep.csv"
        save_power_sweep(sweep, path)
        loaded = load_power_sweep(path, 5.126e9, 0.010)

        assert np.array_equal(loaded.q_i, sweep.q_i)
        assert parse_meta(loaded.meta)["params"]["beta"] == 0.24
