"""Image quality metrics (RMSE, PSNR, SSIM, UQI) and corpus aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroupError, ShapeError, WindowError
from .preprocess import gaussian_kernel_1d
from .raster import EdgeMap


@dataclass(frozen=True)
class MetricParams:
    """Window configuration for the windowed metrics."""

    ssim_window: int = 11
    ssim_sigma: float = 1.5
    uqi_window: int = 8


@dataclass(frozen=True)
class MetricRecord:
    """One (image, band, algorithm, preprocessing) cell of the benchmark grid."""

    image_id: str
    band_name: str
    algorithm: str
    preprocess_tag: str
    rmse: float = math.nan
    psnr: float = math.nan
    ssim: float = math.nan
    uqi: float = math.nan
    error: str = ""


@dataclass(frozen=True)
class AggregateCell:
    """Mean +/- population std for one (band, algorithm, metric) group."""

    band_name: str
    algorithm: str
    metric_name: str
    mean: float
    std: float
    n_included: int
    n_excluded: int


def _as_float(img) -> np.ndarray:
    if isinstance(img, EdgeMap):
        img = img.values
    return np.asarray(img, dtype=np.float64)


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _as_float(a), _as_float(b)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b) -> float:
    """Root mean square pixel error on the 0..255 scale."""
    a, b = _check_pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    err = rmse(a, b)
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(255.0 / err)


def _windowed_sums_valid(image: np.ndarray, kernel_1d: np.ndarray) -> np.ndarray:
    """Separable weighted window sums, windows fully inside the image."""
    k = len(kernel_1d)
    cols = np.lib.stride_tricks.sliding_window_view(image, k, axis=1) @ kernel_1d
    rows = np.lib.stride_tricks.sliding_window_view(cols, k, axis=0)
    return np.einsum("ijk,k->ij", rows, kernel_1d)


def ssim(a, b, params: MetricParams = MetricParams()) -> float:
    """Mean structural similarity with a Gaussian-weighted sliding window.

    Windows lie fully inside the image (no padding); stabilizers use the
    standard K1=0.01, K2=0.03 on the 255 dynamic range.
    """
    a, b = _check_pair(a, b)
    win = params.ssim_window
    if min(a.shape) < win:
        raise WindowError(f"image {a.shape} smaller than SSIM window {win}")
    weights = gaussian_kernel_1d(win, params.ssim_sigma)

    mu_a = _windowed_sums_valid(a, weights)
    mu_b = _windowed_sums_valid(b, weights)
    var_a = _windowed_sums_valid(a * a, weights) - mu_a**2
    var_b = _windowed_sums_valid(b * b, weights) - mu_b**2
    cov = _windowed_sums_valid(a * b, weights) - mu_a * mu_b

    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    index = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    return float(index.mean())


def uqi(a, b, params: MetricParams = MetricParams()) -> float:
    """Universal image quality index over uniform sliding windows.

    Fully degenerate windows (zero variance and zero means) are skipped;
    zero-variance windows with differing means contribute 0. Identical flat
    windows carry no information and are skipped as well.
    """
    a, b = _check_pair(a, b)
    win = params.uqi_window
    if min(a.shape) < win:
        raise WindowError(f"image {a.shape} smaller than UQI window {win}")
    kernel = np.full(win, 1.0 / win)

    mu_a = _windowed_sums_valid(a, kernel)
    mu_b = _windowed_sums_valid(b, kernel)
    var_a = _windowed_sums_valid(a * a, kernel) - mu_a**2
    var_b = _windowed_sums_valid(b * b, kernel) - mu_b**2
    cov = _windowed_sums_valid(a * b, kernel) - mu_a * mu_b

    var_sum = var_a + var_b
    mean_sum = mu_a**2 + mu_b**2
    degenerate = var_sum <= 0.0
    skip = degenerate & ((mean_sum == 0.0) | (mu_a == mu_b))
    zero_q = degenerate & ~skip

    contributing = ~skip
    if not contributing.any():
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (4.0 * cov * mu_a * mu_b) / (var_sum * mean_sum)
    q = np.where(zero_q, 0.0, q)
    return float(q[contributing].mean())


METRIC_NAMES = ("rmse", "psnr", "ssim", "uqi")


def compute_all(a, b, params: MetricParams = MetricParams()) -> dict:
    """All four metrics for one image pair."""
    return {
        "rmse": rmse(a, b),
        "psnr": psnr(a, b),
        "ssim": ssim(a, b, params),
        "uqi": uqi(a, b, params),
    }


def aggregate(
    records: list[MetricRecord], band_name: str, algorithm: str, metric_name: str
) -> AggregateCell:
    """Mean and population std over the group's finite metric values.

    Records are sorted by image_id first so the reduction is independent
    of arrival order; non-finite values (PSNR +inf) and error records are
    counted as excluded.
    """
    group = [
        r
        for r in records
        if r.band_name == band_name and r.algorithm == algorithm
    ]
    if not group:
        raise EmptyGroupError(f"no records for ({band_name}, {algorithm})")
    group.sort(key=lambda r: r.image_id)
    values = np.array(
        [getattr(r, metric_name) if not r.error else math.nan for r in group]
    )
    finite = values[np.isfinite(values)]
    n_excluded = len(values) - len(finite)
    if len(finite) == 0:
        return AggregateCell(band_name, algorithm, metric_name, math.nan, math.nan, 0, n_excluded)
    mean = float(finite.mean())
    std = float(np.sqrt(np.mean((finite - mean) ** 2)))
    return AggregateCell(band_name, algorithm, metric_name, mean, std, len(finite), n_excluded)
