"""SVG-графики: Q_i(⟨n⟩) с кривой фита и окружность S21."""

from typing import Optional

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from ..core.sweep import PowerSweep  # noqa: E402
from ..core.trace import ComplexTrace, PathLike  # noqa: E402
from ..fitters.notch_fitter import NotchFit, s21_model  # noqa: E402
from ..fitters.tls_fitter import TLSFitResult, loss_model  # noqa: E402

CURVE_POINTS = 200


def plot_power_sweep(
    sweep: PowerSweep,
    result: TLSFitResult,
    path: PathLike,
    title: Optional[str] = None,
) -> None:
    """
    Q_i от ⟨n⟩ в двойном логарифмическом масштабе вместе с кривой модели.

    Args:
        sweep: Измеренный свип
        result: Фит по этому свипу
        path: Куда сохранить SVG
        title: Заголовок графика
    """
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot(1, 1, 1)

    ax.errorbar(
        sweep.n_mean,
        sweep.q_i,
        yerr=sweep.q_i_sigma,
        marker="o",
        ls="",
        ms=5,
        label="данные",
    )

    lo, hi = np.log10(sweep.n_mean.min()), np.log10(sweep.n_mean.max())
    n_curve = np.logspace(lo - 0.5, hi + 0.5, CURVE_POINTS)
    q_curve = 1 / loss_model(
        result.params, n_curve, result.f_r, result.temperature, result.variant
    )
    ax.plot(n_curve, q_curve, "-", label="модель TLS")
    ax.axhline(result.q_i_lp, ls=":", color="gray", label="Q_i,LP")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("⟨n⟩")
    ax.set_ylabel("Q_i")
    ax.set_title(title or f"f_r = {result.f_r / 1e9:.3f} ГГц, T = {result.temperature * 1e3:g} мК")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")


def plot_notch_fit(trace: ComplexTrace, fit: NotchFit, path: PathLike) -> None:
    """
    Трасса на комплексной плоскости и модель по результату извлечения.

    Args:
        trace: Трасса, по которой делался фит
        fit: Результат извлечения
        path: Куда сохранить SVG
    """
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot(1, 1, 1)

    ax.plot(trace.samples.real, trace.samples.imag, ".", ms=3, label="данные")
    model = s21_model(fit.params, trace.freqs)
    ax.plot(model.real, model.imag, "-", label="модель")

    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re S21")
    ax.set_ylabel("Im S21")
    ax.set_title(f"Q_i = {fit.q_i:.4g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
