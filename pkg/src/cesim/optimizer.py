"""Learning decorrelated exposure patterns.

The mask logits are trained end-to-end through the whole measurement chain:
binarize -> coded integration -> exposure-count normalization -> contrast
encoding -> Pearson matrix -> mean squared off-diagonal correlation. The
binarization is a hard threshold in the forward pass; the backward pass uses
the straight-through rule with a sigmoid-derivative surrogate.

The gradient is computed analytically (no autodiff dependency); the same
chain runs in a smooth "surrogate" mode (mask = sigmoid(logits)) so it can
be validated against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import encode, normalize
from .ingest import VideoClip
from .patterns import TilePattern, expand
from .seeding import derive_seed, make_rng
from .stats import (
    EPS_DENOM,
    SampleMatrix,
    TileMeanAccumulator,
    TileMeanTable,
    collect_tiles,
    contrast_encode,
    decorrelation_loss,
    fit_tile_means,
    mean_absolute_correlation,
    pearson,
)


@dataclass
class TrainConfig:
    tile_size: int = 8
    epochs: int = 5
    batch_size: int = 8
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    contrast_mode: str = "position"  # position | global | sample
    normalize_counts: bool = True
    init_std: float = 0.01
    init_offset: float = 0.1  # mostly-on start, keeps early patterns alive

    def __post_init__(self) -> None:
        if self.tile_size < 2:
            raise ValueError("decorrelation needs at least 2 pixels per tile")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if self.contrast_mode not in ("position", "global", "sample"):
            raise ValueError(f"unknown contrast mode {self.contrast_mode!r}")


@dataclass(eq=False)
class TrainReport:
    losses: np.ndarray  # per-step loss of the binarized pattern
    final_loss: float  # full-dataset loss of the returned pattern
    pattern: TilePattern
    exposure_histogram: np.ndarray
    steps: int
    best_step: int


@dataclass(eq=False)
class PatternEvaluation:
    l_cor: float
    mean_abs_correlation: float
    exposure_histogram: np.ndarray
    correlation: np.ndarray


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def binarize_ste_forward(theta: np.ndarray) -> TilePattern:
    """Hard threshold: bit = 1 iff sigmoid(theta) > 0.5; the tie theta = 0
    also maps to 1."""
    return TilePattern((np.asarray(theta) >= 0).astype(np.uint8))


def init_logits(num_slots: int, tile_size: int, cfg: TrainConfig) -> np.ndarray:
    rng = make_rng(derive_seed(cfg.seed, "mask-init"))
    return rng.normal(0.0, cfg.init_std, (num_slots, tile_size, tile_size)) + cfg.init_offset


# ---------------------------------------------------------------------------
# Differentiable chain
# ---------------------------------------------------------------------------


def _stack_tiles(batch: Sequence[VideoClip], tile_size: int) -> np.ndarray:
    """Batch -> (B, T, N1, N2, M, M) tile view."""
    if not batch:
        raise ValueError("empty batch")
    data = np.stack([clip.data for clip in batch])
    if data.ndim != 4:
        raise ValueError("training clips must be grayscale")
    b, t, h, w = data.shape
    m = tile_size
    if h % m or w % m:
        raise ValueError(f"clip {h}x{w} not divisible by tile size {m}")
    return data.reshape(b, t, h // m, m, w // m, m).transpose(0, 1, 2, 4, 3, 5)


def _chain_forward_backward(
    mask: np.ndarray,
    tiles: np.ndarray,
    means: TileMeanTable | None,
    normalize_counts: bool,
) -> tuple[float, np.ndarray]:
    """Loss and d(loss)/d(mask) for a (T, M, M) mask in [0, 1].

    Implements the two-pass Pearson gradient:
      dL/dZ = (2/S) * (B1 @ dev  -  (w / sigma) * dev),
      B1_ij = (dL/dC_ij) / (sigma_i sigma_j + eps),   w_i = sum_j B1_ij C_ij sigma_j,
    then chains through contrast encoding, count normalization, and the
    coded integration, whose mask sensitivity is the clip itself.
    """
    num_b, num_t, n1, n2, m, _ = tiles.shape
    num_pixels = m * m
    num_samples = num_b * n1 * n2
    if num_pixels < 2:
        raise ValueError("need at least 2 coded pixels per tile")
    if num_samples < 2:
        raise ValueError("need at least 2 tile samples per batch")

    coded = np.einsum("tuv,btnguv->bnguv", mask, tiles)
    count = mask.sum(axis=0)
    if normalize_counts:
        safe = np.where(count > 0, count, 1.0)
        values = np.where(count > 0, coded / safe, 0.0)
    else:
        values = coded
    rows = values.transpose(3, 4, 0, 1, 2).reshape(num_pixels, num_samples)

    if means is None:
        z = rows - rows.mean(axis=0, keepdims=True)
    else:
        if means.means.shape != (n1, n2) or means.tile_size != m:
            raise ValueError("mean table geometry does not match batch")
        z = rows - np.tile(means.means.ravel(), num_b)[None, :]

    dev = z - z.mean(axis=1, keepdims=True)
    cov = dev @ dev.T / num_samples
    sigma = np.sqrt((dev * dev).mean(axis=1))
    if not sigma.any():
        raise ValueError("degenerate statistics: every coded pixel has zero variance")
    denom = np.outer(sigma, sigma) + EPS_DENOM
    corr = cov / denom
    np.fill_diagonal(corr, 0.0)
    loss = float((corr**2).sum() / (num_pixels * (num_pixels - 1)))

    grad_corr = 2.0 * corr / (num_pixels * (num_pixels - 1))
    b1 = grad_corr / denom
    w = (b1 * corr * sigma[None, :]).sum(axis=1)
    w_over_sigma = np.divide(w, sigma, out=np.zeros_like(w), where=sigma > 0)
    grad_z = (2.0 / num_samples) * (b1 @ dev - w_over_sigma[:, None] * dev)

    if means is None:
        grad_rows = grad_z - grad_z.mean(axis=0, keepdims=True)
    else:
        grad_rows = grad_z
    grad_values = grad_rows.reshape(m, m, num_b, n1, n2).transpose(2, 3, 4, 0, 1)

    if normalize_counts:
        grad_coded = np.where(count > 0, grad_values / safe, 0.0)
        grad_count = -np.einsum("bnguv,bnguv->uv", grad_values, values) / safe
    else:
        grad_coded = grad_values
        grad_count = np.zeros_like(count)
    grad_mask = np.einsum("bnguv,btnguv->tuv", grad_coded, tiles) + grad_count[None, :, :]
    return loss, grad_mask


def loss_and_grad(
    theta: np.ndarray,
    batch: Sequence[VideoClip],
    means: TileMeanTable | None,
    *,
    normalize_counts: bool = True,
    surrogate: bool = False,
) -> tuple[float, np.ndarray]:
    """Decorrelation loss of the binarized mask and its gradient w.r.t. theta.

    ``means=None`` switches contrast encoding to per-sample tile means (and
    makes that subtraction part of the differentiated graph); otherwise the
    table is a fixed target. With ``surrogate=True`` the forward pass uses
    the smooth mask sigmoid(theta) instead of the hard threshold; finite
    differences of that mode's loss validate this mode's gradient.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 3 or theta.shape[1] != theta.shape[2]:
        raise ValueError(f"logits must be (T, M, M), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("logits contain non-finite values")
    tiles = _stack_tiles(batch, theta.shape[1])
    if tiles.shape[1] != theta.shape[0]:
        raise ValueError("clip slot count does not match logits")
    s = sigmoid(theta)
    mask = s if surrogate else (theta >= 0).astype(np.float64)
    loss, grad_mask = _chain_forward_backward(mask, tiles, means, normalize_counts)
    return loss, grad_mask * s * (1.0 - s)


# ---------------------------------------------------------------------------
# Training and evaluation
# ---------------------------------------------------------------------------


def _raw_samples(batch: Sequence[VideoClip], pattern: TilePattern, normalize_counts: bool) -> SampleMatrix:
    """Stats-module view of one encoded batch (the non-differentiable path)."""
    coded = []
    for clip in batch:
        img = encode(clip, expand(pattern, clip.height, clip.width))
        coded.append(normalize(img) if normalize_counts else img)
    return collect_tiles(coded, pattern.tile_size)


def fit_dataset_means(
    dataset: Sequence[VideoClip],
    pattern: TilePattern,
    *,
    mode: str = "position",
    normalize_counts: bool = True,
    chunk_size: int = 32,
) -> TileMeanTable:
    """Streaming tile-mean fit over a dataset under a fixed pattern."""
    acc = TileMeanAccumulator(mode=mode)
    for start in range(0, len(dataset), chunk_size):
        acc.update(_raw_samples(dataset[start : start + chunk_size], pattern, normalize_counts))
    return acc.table()


def train_pattern(dataset: Sequence[VideoClip], cfg: TrainConfig) -> TrainReport:
    """Adam over mask logits; per-step forward uses the hard binarized mask.

    The contrast-encoding mean table is refit from the full dataset at the
    start of every epoch (with the then-current pattern) and held fixed
    within the epoch. Returns the best-loss pattern seen.
    """
    clips = list(dataset)
    if not clips:
        raise ValueError("empty dataset")
    num_slots = clips[0].num_slots
    theta = init_logits(num_slots, cfg.tile_size, cfg)
    adam_m = np.zeros_like(theta)
    adam_v = np.zeros_like(theta)

    batches = [clips[i : i + cfg.batch_size] for i in range(0, len(clips), cfg.batch_size)]
    losses: list[float] = []
    best_loss = np.inf
    best_bits: np.ndarray | None = None
    best_step = 0
    step = 0
    for _epoch in range(cfg.epochs):
        if cfg.contrast_mode == "sample":
            means = None
        else:
            means = fit_dataset_means(
                clips, binarize_ste_forward(theta),
                mode=cfg.contrast_mode, normalize_counts=cfg.normalize_counts,
            )
        for batch in batches:
            loss, grad = loss_and_grad(
                theta, batch, means, normalize_counts=cfg.normalize_counts
            )
            losses.append(loss)
            step += 1
            if loss < best_loss:
                best_loss = loss
                best_bits = (theta >= 0).astype(np.uint8)
                best_step = step
            adam_m = cfg.beta1 * adam_m + (1 - cfg.beta1) * grad
            adam_v = cfg.beta2 * adam_v + (1 - cfg.beta2) * grad * grad
            m_hat = adam_m / (1 - cfg.beta1**step)
            v_hat = adam_v / (1 - cfg.beta2**step)
            theta = theta - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)

    pattern = TilePattern(best_bits, seed=cfg.seed)
    if pattern.bits.sum() == 0:
        raise ValueError("pattern collapse: trained pattern exposes nothing")
    evaluation = evaluate_pattern(
        pattern, clips,
        contrast_mode=cfg.contrast_mode, normalize_counts=cfg.normalize_counts,
    )
    return TrainReport(
        losses=np.asarray(losses),
        final_loss=evaluation.l_cor,
        pattern=pattern,
        exposure_histogram=evaluation.exposure_histogram,
        steps=step,
        best_step=best_step,
    )


def evaluate_pattern(
    pattern: TilePattern,
    dataset: Sequence[VideoClip],
    *,
    contrast_mode: str = "position",
    normalize_counts: bool = True,
    chunk_size: int = 32,
) -> PatternEvaluation:
    """Full-dataset decorrelation statistics for a fixed pattern."""
    clips = list(dataset)
    if not clips:
        raise ValueError("empty dataset")
    chunks = [
        _raw_samples(clips[i : i + chunk_size], pattern, normalize_counts)
        for i in range(0, len(clips), chunk_size)
    ]
    raw = SampleMatrix(
        np.concatenate([c.data for c in chunks], axis=1),
        pattern.tile_size,
        chunks[0].grid_shape,
        sum(c.num_images for c in chunks),
    )
    if contrast_mode == "sample":
        encoded = contrast_encode(raw, None)
    else:
        encoded = contrast_encode(raw, fit_tile_means(raw, mode=contrast_mode))
    corr = pearson(encoded)
    # live rows carry a unit diagonal, so an all-zero matrix means all-dead
    if not corr.any():
        raise ValueError("degenerate statistics: every coded pixel has zero variance")
    return PatternEvaluation(
        l_cor=decorrelation_loss(corr),
        mean_abs_correlation=mean_absolute_correlation(corr),
        exposure_histogram=np.bincount(
            pattern.exposure_count().ravel(), minlength=pattern.num_slots + 1
        ),
        correlation=corr,
    )
