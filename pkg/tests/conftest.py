"""Общие фикстуры для тестов."""

import json
import os
import sys

import numpy as np
import pytest

# Добавляем корень репозитория в путь для импорта
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.fitters.notch_fitter import NotchParams  # noqa: E402
from src.fitters.tls_fitter import TLSParams  # noqa: E402


@pytest.fixture
def sample_config():
    """Базовая конфигурация для тестов."""
    return {
        "chain": {
            "stages": [
                {"label": "room temperature", "db": 60},
                {"label": "cryogenic", "db": 60}
            ]
        },
        "xps": {
            "presets": {
                "al2p": {"lambda_ox": 2.8, "r0": 1.4, "theta": 1.5707963267948966}
            }
        },
        "fit": {
            "refine": True,
            "temperature_k": 0.010,
            "model_variant": "exponent_outside",
            "verbose": False
        },
        "output": {
            "show_emoji": False,
            "float_digits": 4
        }
    }


@pytest.fixture
def config_file(tmp_path, sample_config):
    """Файл конфигурации во временной папке."""
    path = tmp_path / "analysis_config.json"
    path.write_text(json.dumps(sample_config), encoding="utf-8")
    return str(path)


@pytest.fixture
def table_notch_params():
    """Резонатор с Q_i = 1.08e6 и |Q_c| = 2.28e6."""
    q_l = 1 / (1 / 1.08e6 + 1 / 2.28e6)
    return NotchParams(f_r=5.209e9, q_l=q_l, abs_qc=2.28e6)


@pytest.fixture
def wide_notch_params():
    """Резонатор пониже добротностью, с задержкой и окружением."""
    return NotchParams(
        f_r=5.0e9, q_l=2e4, abs_qc=5e4, phi=0.2, a=0.7, alpha=1.1, tau=50e-9
    )


@pytest.fixture
def dep_al_params():
    """Параметры TLS для Al с нанесённым Al₂O₃, n_c = 10."""
    return TLSParams(f_tls0=0.68e-6, n_c=10.0, beta=0.24, tan_other=0.0)


@pytest.fixture
def n_grid():
    """25 точек ⟨n⟩ в логарифмическом масштабе от 1 до 1e7."""
    return np.logspace(0, 7, 25)
