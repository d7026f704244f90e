"""Алгебраический фит окружности методом Таубина."""

from typing import NamedTuple, Sequence

import numpy as np

from ..core.errors import DegenerateGeometryError

# Порог отношения сингулярных чисел, ниже которого точки считаются коллинеарными
COLLINEAR_TOL = 1e-10


class CircleFit(NamedTuple):
    """Центр, радиус и среднеквадратичное отклонение точек от окружности."""

    center: complex
    radius: float
    residual_rms: float


def fit_circle(points: Sequence[complex]) -> CircleFit:
    """
    Фит окружности по точкам комплексной плоскости (Taubin, через SVD).

    Точки сдвигаются к центроиду и нормируются, чтобы матрица моментов
    была хорошо обусловлена.

    Args:
        points: Не менее трёх неколлинеарных точек

    Returns:
        CircleFit с геометрическими центром и радиусом

    Raises:
        DegenerateGeometryError: точек меньше трёх или они на одной прямой
    """
    z = np.asarray(points, dtype=complex).ravel()
    if z.size < 3:
        raise DegenerateGeometryError(
            f"Для окружности нужно минимум 3 точки, получено {z.size}"
        )
    if not np.all(np.isfinite(z)):
        raise DegenerateGeometryError("Точки содержат NaN или inf")

    shift = z.mean()
    centered = z - shift
    scale = np.max(np.abs(centered))
    if scale == 0:
        raise DegenerateGeometryError("Все точки совпадают")
    centered = centered / scale

    x = centered.real
    y = centered.imag
    spread = np.linalg.svd(np.column_stack((x, y)), compute_uv=False)
    if spread[1] <= COLLINEAR_TOL * spread[0]:
        raise DegenerateGeometryError("Точки лежат на одной прямой")

    zz = x * x + y * y
    zz_mean = zz.mean()
    z0 = (zz - zz_mean) / (2 * np.sqrt(zz_mean))

    _, _, vt = np.linalg.svd(np.column_stack((z0, x, y)), full_matrices=False)
    coef = vt[-1, :]
    a0 = coef[0] / (2 * np.sqrt(zz_mean))
    a3 = -zz_mean * a0
    if abs(a0) <= COLLINEAR_TOL:
        raise DegenerateGeometryError("Радиус окружности не ограничен")

    xc = -coef[1] / (2 * a0)
    yc = -coef[2] / (2 * a0)
    radius = np.sqrt(coef[1] ** 2 + coef[2] ** 2 - 4 * a0 * a3) / (2 * abs(a0))

    center = complex(xc, yc) * scale + shift
    radius = float(radius * scale)
    residual = np.sqrt(np.mean((np.abs(z - center) - radius) ** 2))
    return CircleFit(center, radius, float(residual))
