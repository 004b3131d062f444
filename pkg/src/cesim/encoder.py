"""Coded-exposure encoding: integrate a masked clip into one coded image.

The coded value at each position is the sum of that pixel's luminance over
the slots in which its mask bit is 1; the per-position exposure count rides
along so values can later be normalized to a mean-luminance scale.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import VideoClip

SNPX_MAGIC = b"SNPX"
SNPX_VERSION = 1


@dataclass(eq=False)
class CodedImage:
    """Accumulated exposure sums plus per-position exposure counts."""

    values: np.ndarray
    counts: np.ndarray
    normalized: bool = False
    zero_count_positions: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.values.ndim != 2 or self.values.shape != self.counts.shape:
            raise ValueError("values and counts must be matching 2-D arrays")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def encode(clip: VideoClip, mask: np.ndarray) -> CodedImage:
    """Sum each pixel's luminance over its exposed slots.

    ``mask`` is a (T, H, W) binary array matching the clip geometry.
    """
    mask = np.asarray(mask)
    if clip.is_color:
        raise ValueError("encode expects grayscale clips")
    if mask.shape != clip.data.shape:
        raise ValueError(f"mask shape {mask.shape} != clip shape {clip.data.shape}")
    # accumulate slot by slot: the reduction order is fixed, so results are
    # bit-reproducible and independent of any spatial partitioning
    values = np.zeros(clip.data.shape[1:], dtype=np.float64)
    for t in range(clip.num_slots):
        values += mask[t] * clip.data[t]
    counts = mask.astype(np.int64).sum(axis=0)
    return CodedImage(values, counts)


def normalize(coded: CodedImage) -> CodedImage:
    """Divide each value by its exposure count; zero-count positions stay 0."""
    if coded.normalized:
        raise ValueError("coded image already normalized")
    zero = coded.counts == 0
    values = np.divide(coded.values, coded.counts, out=np.zeros_like(coded.values), where=~zero)
    return CodedImage(values, coded.counts.copy(), normalized=True,
                      zero_count_positions=int(zero.sum()))


def compression_ratio(
    clip: VideoClip,
    coded: CodedImage,
    bits_per_raw_pixel: int = 8,
    bits_per_coded_pixel: int = 8,
) -> float:
    """Raw-to-coded size ratio: (T*H*W*bits_raw) / (H*W*bits_coded)."""
    if (clip.height, clip.width) != (coded.height, coded.width):
        raise ValueError("clip and coded image disagree on geometry")
    return clip.num_slots * bits_per_raw_pixel / bits_per_coded_pixel


def export_quantized(coded: CodedImage, num_slots: int) -> np.ndarray:
    """8-bit readout view: value/T scaled to [0, 255], round half to even."""
    scaled = np.clip(coded.values / num_slots, 0.0, 1.0) * 255.0
    return np.rint(scaled).astype(np.uint8)


# ---------------------------------------------------------------------------
# Coded-image container: magic, version, H, W, flags, f32 values, u8 counts,
# CRC32 over everything before it.
# ---------------------------------------------------------------------------


def write_coded(path: str | Path, coded: CodedImage) -> None:
    if coded.counts.max(initial=0) > 255:
        raise ValueError("exposure counts exceed the 8-bit container limit")
    flags = 1 if coded.normalized else 0
    payload = SNPX_MAGIC + struct.pack(
        "<BIIB", SNPX_VERSION, coded.height, coded.width, flags
    )
    payload += coded.values.astype("<f4").tobytes()
    payload += coded.counts.astype(np.uint8).tobytes()
    payload += struct.pack("<I", zlib.crc32(payload))
    Path(path).write_bytes(payload)


def read_coded(path: str | Path) -> CodedImage:
    raw = Path(path).read_bytes()
    if len(raw) < 18:
        raise ValueError(f"{path}: truncated file")
    if raw[:4] != SNPX_MAGIC:
        raise ValueError(f"{path}: bad magic")
    version, height, width, flags = struct.unpack("<BIIB", raw[4:14])
    if version != SNPX_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    n = height * width
    expected = 14 + 4 * n + n + 4
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated file ({len(raw)} bytes, expected {expected})")
    (crc,) = struct.unpack("<I", raw[-4:])
    if crc != zlib.crc32(raw[:-4]):
        raise ValueError(f"{path}: checksum mismatch")
    values = np.frombuffer(raw, dtype="<f4", count=n, offset=14).reshape(height, width)
    counts = np.frombuffer(raw, dtype=np.uint8, count=n, offset=14 + 4 * n).reshape(height, width)
    return CodedImage(values.astype(np.float64), counts.astype(np.int64),
                      normalized=bool(flags & 1))
