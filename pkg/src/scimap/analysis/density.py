"""2D Gaussian KDE and highest-density-region contours at record-mass levels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import measure

from ..errors import DegenerateDataError, ValidationError

DEFAULT_LEVELS = (0.25, 0.5, 0.75)
DEFAULT_GRID_SIZE = 200
DEFAULT_MIN_POINTS = 20

# Cap on (query x data) pairs evaluated per chunk, to bound peak memory.
_CHUNK_PAIR_BUDGET = 2_000_000


def scott_bandwidth(points: np.ndarray) -> tuple[float, float]:
    """Per-axis Scott's rule for 2D data: std * n^(-1/6)."""
    n = len(points)
    factor = n ** (-1.0 / 6.0)
    sx = float(np.std(points[:, 0]))
    sy = float(np.std(points[:, 1]))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateDataError("zero variance along an axis: bandwidth undefined")
    return sx * factor, sy * factor


def kde_density(points: np.ndarray, queries: np.ndarray, bandwidth: tuple[float, float]) -> np.ndarray:
    """Diagonal-bandwidth Gaussian KDE evaluated at query points."""
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    hx, hy = bandwidth
    if hx <= 0 or hy <= 0:
        raise ValidationError("bandwidth must be positive")
    scale = 1.0 / (len(points) * 2.0 * np.pi * hx * hy)
    out = np.empty(len(queries), dtype=np.float64)
    chunk = max(1, _CHUNK_PAIR_BUDGET // max(1, len(points)))
    for start in range(0, len(queries), chunk):
        q = queries[start : start + chunk]
        dx = (q[:, None, 0] - points[None, :, 0]) / hx
        dy = (q[:, None, 1] - points[None, :, 1]) / hy
        out[start : start + len(q)] = scale * np.exp(-0.5 * (dx * dx + dy * dy)).sum(axis=1)
    return out


@dataclass
class HdrContours:
    """Per-level density thresholds and closed contour polylines in data coordinates."""

    levels: tuple[float, ...]
    thresholds: dict[float, float]
    contours: dict[float, list[np.ndarray]]
    bandwidth: tuple[float, float]
    point_densities: np.ndarray

    def contains(self, level: float, queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Membership in the level's region by the defining density rule."""
        return kde_density(points, queries, self.bandwidth) >= self.thresholds[level]


def kde_hdr_contours(
    points: np.ndarray,
    levels: tuple[float, ...] = DEFAULT_LEVELS,
    bandwidth: float | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    min_points: int = DEFAULT_MIN_POINTS,
) -> HdrContours:
    """Contours of the regions holding a given fraction of a subject's records.

    The threshold for mass level m is the (1 - m) quantile of the density at
    the subject's own points, so {density >= threshold} contains about m of
    them. Contours come from marching squares on a padded regular grid.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValidationError(f"points must be (n, 2), got {points.shape}")
    if len(points) < min_points:
        raise DegenerateDataError(f"only {len(points)} points, need at least {min_points}")
    for level in levels:
        if not 0.0 < level < 1.0:
            raise ValidationError(f"levels must lie in (0, 1), got {level}")

    if bandwidth is None:
        hx, hy = scott_bandwidth(points)
    else:
        if bandwidth <= 0:
            raise ValidationError("bandwidth must be positive")
        hx = hy = float(bandwidth)

    point_densities = kde_density(points, points, (hx, hy))
    thresholds = {
        level: float(np.quantile(point_densities, 1.0 - level)) for level in levels
    }

    # Pad by several bandwidths so regions of interest close inside the grid.
    x_min, y_min = points.min(axis=0)
    x_max, y_max = points.max(axis=0)
    x_lo, x_hi = x_min - 4.0 * hx, x_max + 4.0 * hx
    y_lo, y_hi = y_min - 4.0 * hy, y_max + 4.0 * hy
    grid_x = np.linspace(x_lo, x_hi, grid_size)
    grid_y = np.linspace(y_lo, y_hi, grid_size)
    mesh = np.stack(np.meshgrid(grid_x, grid_y, indexing="ij"), axis=-1).reshape(-1, 2)
    grid_density = kde_density(points, mesh, (hx, hy)).reshape(grid_size, grid_size)

    x_step = (x_hi - x_lo) / (grid_size - 1)
    y_step = (y_hi - y_lo) / (grid_size - 1)
    contours: dict[float, list[np.ndarray]] = {}
    for level in levels:
        polylines = []
        for contour in measure.find_contours(grid_density, thresholds[level]):
            polyline = np.empty_like(contour)
            polyline[:, 0] = x_lo + contour[:, 0] * x_step
            polyline[:, 1] = y_lo + contour[:, 1] * y_step
            polylines.append(polyline)
        contours[level] = polylines

    return HdrContours(
        levels=tuple(levels),
        thresholds=thresholds,
        contours=contours,
        bandwidth=(hx, hy),
        point_densities=point_densities,
    )
