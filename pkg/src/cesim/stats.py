"""Within-tile decorrelation statistics for coded images.

Pipeline: slice a batch of coded images into aligned M x M tiles, subtract
tile means (contrast encoding), view each of the P = M^2 tile positions as a
row of S = B * N^2 samples, and reduce the P x P Pearson matrix to a single
redundancy score: the mean squared off-diagonal correlation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import CodedImage

# Added to the sigma_i * sigma_j denominator: a zero-variance (dead) row
# correlates to 0 against everything instead of dividing by zero.
EPS_DENOM = 1e-8


@dataclass(eq=False)
class SampleMatrix:
    """P x S sample rows, one row per within-tile pixel position.

    Columns are ordered image-major, then tile-row-major within each image.
    ``contrast_mode`` is None for raw (pre-contrast) matrices.
    """

    data: np.ndarray
    tile_size: int
    grid_shape: tuple[int, int]
    num_images: int
    contrast_mode: str | None = None

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        n1, n2 = self.grid_shape
        if self.data.shape != (self.tile_size**2, self.num_images * n1 * n2):
            raise ValueError(
                f"sample matrix shape {self.data.shape} inconsistent with "
                f"M={self.tile_size}, grid={self.grid_shape}, B={self.num_images}"
            )

    @property
    def pixels_per_tile(self) -> int:
        return self.data.shape[0]

    @property
    def samples_per_pixel(self) -> int:
        return self.data.shape[1]


@dataclass(eq=False)
class TileMeanTable:
    """One mean per tile grid position, pooled over a dataset."""

    means: np.ndarray
    sample_count: int
    tile_size: int
    mode: str = "position"

    def __post_init__(self) -> None:
        self.means = np.asarray(self.means, dtype=np.float64)
        if self.sample_count <= 0:
            raise ValueError("mean table requires sample_count > 0")
        if not np.all(np.isfinite(self.means)):
            raise ValueError("mean table contains non-finite values")


def _tile_columns(values: np.ndarray, tile_size: int) -> tuple[np.ndarray, tuple[int, int]]:
    h, w = values.shape
    m = tile_size
    if h % m or w % m:
        raise ValueError(f"image {h}x{w} not divisible by tile size {m}")
    n1, n2 = h // m, w // m
    tiles = values.reshape(n1, m, n2, m).transpose(1, 3, 0, 2)
    return tiles.reshape(m * m, n1 * n2), (n1, n2)


def collect_tiles(coded_batch: Sequence[CodedImage], tile_size: int) -> SampleMatrix:
    """Assemble the raw P x S sample matrix from a batch of coded images."""
    if not coded_batch:
        raise ValueError("empty batch")
    columns = []
    grid = None
    for coded in coded_batch:
        cols, g = _tile_columns(coded.values, tile_size)
        if grid is None:
            grid = g
        elif g != grid:
            raise ValueError(f"mixed tile grids in batch: {g} vs {grid}")
        columns.append(cols)
    return SampleMatrix(np.concatenate(columns, axis=1), tile_size, grid, len(coded_batch))


def fit_tile_means(sample: SampleMatrix, mode: str = "position") -> TileMeanTable:
    """Pool tile means over the batch.

    ``position``: one scalar per grid cell, averaged over every pixel of that
    cell's tile in every image. ``global``: one scalar for everything
    (stationary-statistics shortcut; stored as a constant table).
    """
    if mode not in ("position", "global"):
        raise ValueError(f"unknown mean-fitting mode {mode!r}")
    if sample.contrast_mode is not None:
        raise ValueError("means must be fitted on a raw sample matrix")
    n1, n2 = sample.grid_shape
    per_cell = sample.data.reshape(sample.pixels_per_tile, sample.num_images, n1 * n2)
    if mode == "global":
        means = np.full((n1, n2), per_cell.mean())
    else:
        means = per_cell.mean(axis=(0, 1)).reshape(n1, n2)
    count = sample.pixels_per_tile * sample.num_images
    return TileMeanTable(means, count, sample.tile_size, mode=mode)


class TileMeanAccumulator:
    """Streaming version of :func:`fit_tile_means` with exact-count merging."""

    def __init__(self, mode: str = "position"):
        if mode not in ("position", "global"):
            raise ValueError(f"unknown mean-fitting mode {mode!r}")
        self.mode = mode
        self._sums: np.ndarray | None = None
        self._count = 0
        self._tile_size: int | None = None
        self._grid: tuple[int, int] | None = None

    def update(self, sample: SampleMatrix) -> None:
        if sample.contrast_mode is not None:
            raise ValueError("means must be fitted on a raw sample matrix")
        n1, n2 = sample.grid_shape
        if self._sums is None:
            self._sums = np.zeros(n1 * n2)
            self._tile_size = sample.tile_size
            self._grid = sample.grid_shape
        elif (sample.tile_size, sample.grid_shape) != (self._tile_size, self._grid):
            raise ValueError("sample geometry changed mid-stream")
        per_cell = sample.data.reshape(sample.pixels_per_tile, sample.num_images, n1 * n2)
        self._sums += per_cell.sum(axis=(0, 1))
        self._count += sample.pixels_per_tile * sample.num_images

    def table(self) -> TileMeanTable:
        if self._sums is None or self._count == 0:
            raise ValueError("no samples accumulated")
        means = self._sums / self._count
        if self.mode == "global":
            means = np.full_like(means, means.mean())
        n1, n2 = self._grid
        return TileMeanTable(means.reshape(n1, n2), self._count, self._tile_size, mode=self.mode)


def contrast_encode(sample: SampleMatrix, means: TileMeanTable | None) -> SampleMatrix:
    """Zero-mean contrast encoding.

    With a mean table, each column gets its grid cell's pooled mean
    subtracted. With ``means=None`` each tile sample subtracts its own
    instantaneous mean instead (per-sample mode).
    """
    if sample.contrast_mode is not None:
        raise ValueError("sample matrix already contrast-encoded")
    if means is None:
        data = sample.data - sample.data.mean(axis=0, keepdims=True)
        mode = "sample"
    else:
        n1, n2 = sample.grid_shape
        if means.tile_size != sample.tile_size or means.means.shape != (n1, n2):
            raise ValueError(
                f"mean table geometry {means.means.shape}/M={means.tile_size} does not "
                f"match samples {sample.grid_shape}/M={sample.tile_size}"
            )
        data = sample.data - np.tile(means.means.ravel(), sample.num_images)[None, :]
        mode = means.mode
    return SampleMatrix(data, sample.tile_size, sample.grid_shape, sample.num_images,
                        contrast_mode=mode)


def pearson(sample: SampleMatrix | np.ndarray) -> np.ndarray:
    """P x P correlation matrix, two-pass, with a guarded denominator.

    Zero-variance rows correlate to 0 against every other row; the diagonal
    is exactly 1 for live rows and 0 for dead ones.
    """
    data = sample.data if isinstance(sample, SampleMatrix) else np.asarray(sample, dtype=np.float64)
    num_pixels, num_samples = data.shape
    if num_samples < 2:
        raise ValueError("need at least 2 samples per coded pixel")
    dev = data - data.mean(axis=1, keepdims=True)
    cov = dev @ dev.T / num_samples
    sigma = np.sqrt((dev * dev).mean(axis=1))
    corr = cov / (np.outer(sigma, sigma) + EPS_DENOM)
    np.fill_diagonal(corr, np.where(sigma > 0, 1.0, 0.0))
    return corr


def decorrelation_loss(corr: np.ndarray) -> float:
    """Mean squared off-diagonal correlation, in [0, 1]."""
    corr = np.asarray(corr)
    num_pixels = corr.shape[0]
    if corr.ndim != 2 or corr.shape[1] != num_pixels:
        raise ValueError("correlation matrix must be square")
    if num_pixels < 2:
        raise ValueError("need at least 2 coded pixels")
    off = ~np.eye(num_pixels, dtype=bool)
    return float((corr[off] ** 2).sum() / (num_pixels * (num_pixels - 1)))


def mean_absolute_correlation(corr: np.ndarray) -> float:
    """Mean |C_ij| over off-diagonal entries."""
    corr = np.asarray(corr)
    num_pixels = corr.shape[0]
    if num_pixels < 2:
        raise ValueError("need at least 2 coded pixels")
    off = ~np.eye(num_pixels, dtype=bool)
    return float(np.abs(corr[off]).mean())
