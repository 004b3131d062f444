"""Tile-repetitive exposure patterns.

A pattern lives on one M x M tile across T exposure slots and is replicated
over the full frame, so every aligned M x M tile exposes identically. The
four task-agnostic generators here are the standard baselines: long, short,
random 50%, and sparse-random (one slot per pixel).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .seeding import make_rng

PATTERN_MAGIC = "CEPAT v1"


@dataclass(eq=False)
class TilePattern:
    """Binary exposure bits of shape (T, M, M); seed records provenance."""

    bits: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 3 or self.bits.shape[1] != self.bits.shape[2]:
            raise ValueError(f"pattern bits must be (T, M, M), got {self.bits.shape}")
        if self.bits.shape[0] < 1 or self.bits.shape[1] < 1:
            raise ValueError("T and M must be >= 1")
        if not np.isin(self.bits, (0, 1)).all():
            raise ValueError("pattern bits must be 0 or 1")

    @property
    def num_slots(self) -> int:
        return self.bits.shape[0]

    @property
    def tile_size(self) -> int:
        return self.bits.shape[1]

    def exposure_count(self) -> np.ndarray:
        """Per-position count of exposed slots, (M, M) ints in [0, T]."""
        return self.bits.sum(axis=0, dtype=np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TilePattern):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.bits, other.bits)


def long_exposure(num_slots: int, tile_size: int) -> TilePattern:
    """All pixels exposed in every slot."""
    return TilePattern(np.ones((num_slots, tile_size, tile_size), dtype=np.uint8))


def short_exposure(num_slots: int, tile_size: int, period: int = 8, offset: int = 0) -> TilePattern:
    """All pixels exposed in slots t with t = offset (mod period)."""
    if period < 1:
        raise ValueError("period must be >= 1")
    bits = np.zeros((num_slots, tile_size, tile_size), dtype=np.uint8)
    bits[offset % period :: period] = 1
    return TilePattern(bits)


def random_pattern(num_slots: int, tile_size: int, p: float = 0.5, seed: int = 0) -> TilePattern:
    """I.i.d. Bernoulli(p) bits from the counter-based generator."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = make_rng(seed)
    bits = (rng.random((num_slots, tile_size, tile_size)) < p).astype(np.uint8)
    return TilePattern(bits, seed=seed)


def sparse_random(num_slots: int, tile_size: int, seed: int = 0) -> TilePattern:
    """Each pixel exposed in exactly one uniformly chosen slot."""
    rng = make_rng(seed)
    slots = rng.integers(0, num_slots, size=(tile_size, tile_size))
    bits = np.zeros((num_slots, tile_size, tile_size), dtype=np.uint8)
    ii, jj = np.meshgrid(range(tile_size), range(tile_size), indexing="ij")
    bits[slots, ii, jj] = 1
    return TilePattern(bits, seed=seed)


def expand(tile: TilePattern, height: int, width: int) -> np.ndarray:
    """Replicate the tile over an (T, height, width) full-frame mask.

    Dimensions must be exact multiples of the tile size; the encoder only
    operates on crops aligned to the tile grid.
    """
    m = tile.tile_size
    if height % m or width % m:
        raise ValueError(f"frame {height}x{width} not divisible by tile size {m}")
    return np.tile(tile.bits, (1, height // m, width // m))


def extract_tile(full_mask: np.ndarray, tile_size: int, row: int = 0, col: int = 0) -> TilePattern:
    """Read back one aligned tile of an expanded mask."""
    m = tile_size
    r0, c0 = row * m, col * m
    return TilePattern(full_mask[:, r0 : r0 + m, c0 : c0 + m])


def mask_exposure_count(full_mask: np.ndarray) -> np.ndarray:
    return np.asarray(full_mask).sum(axis=0, dtype=np.int64)


# ---------------------------------------------------------------------------
# Pattern file format: text header, then T blocks of M lines of M {0,1} chars
# separated by blank lines.
# ---------------------------------------------------------------------------


def save_pattern(path: str | Path, pattern: TilePattern) -> None:
    t, m = pattern.num_slots, pattern.tile_size
    seed = "none" if pattern.seed is None else str(pattern.seed)
    blocks = [
        "\n".join("".join(str(b) for b in row) for row in slot_bits)
        for slot_bits in pattern.bits
    ]
    text = f"{PATTERN_MAGIC}\nT={t} M={m} seed={seed}\n" + "\n\n".join(blocks) + "\n"
    Path(path).write_text(text)


def load_pattern(path: str | Path) -> TilePattern:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != PATTERN_MAGIC:
        raise ValueError(f"{path}: bad pattern file magic")
    try:
        fields = dict(item.split("=", 1) for item in lines[1].split())
        t, m = int(fields["T"]), int(fields["M"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except (IndexError, KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed pattern header") from exc
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != t * m:
        raise ValueError(f"{path}: truncated pattern body, expected {t * m} rows, got {len(body)}")
    bits = np.zeros((t, m, m), dtype=np.uint8)
    for k, ln in enumerate(body):
        if len(ln) != m or set(ln) - {"0", "1"}:
            raise ValueError(f"{path}: invalid pattern row {ln!r}")
        bits[k // m, k % m] = [int(c) for c in ln]
    return TilePattern(bits, seed=seed)
