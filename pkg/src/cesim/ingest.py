"""Frame-sequence loading and preprocessing.

Frames are grayscale (H, W) or color (H, W, 3) arrays with values in [0, 1].
The preprocessing chain used throughout the toolkit is:

    load (display-referred codes)  ->  linearize  ->  gray  ->  area-resample
    shorter side to ``short_side``  ->  center crop

Supported on-disk formats are binary PGM (P5, 8- or 16-bit) and grayscale
PNG. Directories are read in lexicographic filename order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

_FORMATS = ("auto", "pgm8", "pgm16", "png-gray")

# BT.601 luma weights, applied in linear light.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(eq=False)
class Frame:
    """One exposure-slot image, values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim not in (2, 3) or (self.data.ndim == 3 and self.data.shape[2] != 3):
            raise ValueError(f"frame must be (H, W) or (H, W, 3), got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("frame contains non-finite values")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("frame values outside [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def is_color(self) -> bool:
        return self.data.ndim == 3


@dataclass(eq=False)
class VideoClip:
    """T stacked frames of identical geometry: data shape (T, H, W[, 3])."""

    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim not in (3, 4):
            raise ValueError(f"clip must be (T, H, W) or (T, H, W, 3), got {self.data.shape}")
        if self.data.shape[0] < 1:
            raise ValueError("clip needs at least one frame")

    @classmethod
    def from_frames(cls, frames: Sequence[Frame]) -> "VideoClip":
        if not frames:
            raise ValueError("no frames")
        shape = frames[0].data.shape
        for f in frames[1:]:
            if f.data.shape != shape:
                raise ValueError("inconsistent dimensions across frames")
        return cls(np.stack([f.data for f in frames]))

    @property
    def num_slots(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def is_color(self) -> bool:
        return self.data.ndim == 4

    def frames(self) -> list[Frame]:
        return [Frame(self.data[t]) for t in range(self.num_slots)]


# ---------------------------------------------------------------------------
# PGM / PNG I/O
# ---------------------------------------------------------------------------


def _read_pgm_raw(path: str | Path) -> tuple[np.ndarray, int]:
    raw = Path(path).read_bytes()
    header = re.match(rb"P5\s+(?:#.*\n\s*)?(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if header is None:
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in header.groups())
    if maxval < 1 or maxval > 65535:
        raise ValueError(f"{path}: unsupported bit depth (maxval={maxval})")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    need = width * height * dtype.itemsize
    if len(raw) - header.end() < need:
        raise ValueError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(raw, dtype=dtype, count=width * height, offset=header.end())
    return pixels.reshape(height, width).astype(np.float64) / maxval, maxval


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary (P5) PGM into [0, 1] floats; maxval sets the scale."""
    return _read_pgm_raw(path)[0]


def write_pgm(path: str | Path, values: np.ndarray, maxval: int = 255) -> None:
    """Write [0, 1] values as a binary PGM with the given maxval."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("PGM export requires a 2-D grayscale array")
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    q = np.rint(np.clip(values, 0.0, 1.0) * maxval)
    q = q.astype(np.uint8 if maxval == 255 else ">u2")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        fh.write(q.tobytes())


def _read_png_gray(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.float64) / 255.0
        if img.mode in ("I;16", "I"):
            arr = np.asarray(img, dtype=np.float64)
            if arr.max() > 65535:
                raise ValueError(f"{path}: unsupported bit depth")
            return arr / 65535.0
        raise ValueError(f"{path}: not a grayscale PNG (mode={img.mode})")


def load_frame_sequence(path: str | Path, format: str = "auto") -> VideoClip:
    """Load a directory of frame files, lexicographic order, into a clip.

    Values are display-referred codes mapped to [0, 1] (8-bit: v/255); apply
    :func:`to_linear` / :func:`linearize_clip` afterwards for linear light.
    """
    if format not in _FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {_FORMATS}")
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"{root}: not a directory")
    suffixes = {".pgm"} if format.startswith("pgm") else (
        {".png"} if format == "png-gray" else {".pgm", ".png"}
    )
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in suffixes)
    if not files:
        raise ValueError(f"{root}: no frames")
    frames = []
    for p in files:
        if p.suffix.lower() == ".pgm":
            arr, maxval = _read_pgm_raw(p)
            if format == "pgm8" and maxval > 255:
                raise ValueError(f"{p}: expected 8-bit PGM, got maxval={maxval}")
            if format == "pgm16" and maxval <= 255:
                raise ValueError(f"{p}: expected 16-bit PGM, got maxval={maxval}")
        else:
            arr = _read_png_gray(p)
        frames.append(Frame(arr))
    return VideoClip.from_frames(frames)


# ---------------------------------------------------------------------------
# Transfer function
# ---------------------------------------------------------------------------


def srgb_to_linear(values: np.ndarray) -> np.ndarray:
    """Inverse standard-display transfer: codes in [0, 1] to linear light."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ValueError("values outside [0, 1]")
    low = values / 12.92
    high = ((values + 0.055) / 1.055) ** 2.4
    return np.where(values <= 0.04045, low, high)


def to_linear(frame: Frame) -> Frame:
    return Frame(srgb_to_linear(frame.data))


def linearize_clip(clip: VideoClip) -> VideoClip:
    return VideoClip(srgb_to_linear(clip.data))


# ---------------------------------------------------------------------------
# Resampling / cropping
# ---------------------------------------------------------------------------


def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """Row-stochastic (n_out, n_in) matrix of exact interval overlaps.

    Output bin i covers [i*r, (i+1)*r) in source pixels, r = n_in/n_out; each
    weight is the overlap with source pixel [j, j+1) divided by r.
    """
    r = n_in / n_out
    w = np.zeros((n_out, n_in))
    for i in range(n_out):
        lo, hi = i * r, (i + 1) * r
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            w[i, j] = (min(j + 1, hi) - max(j, lo)) / r
    return w


def _resample_area(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    wr = _box_weights(h, out_h)
    wc = _box_weights(w, out_w)
    # rows then columns; tensordot keeps any trailing channel axis intact
    out = np.tensordot(wr, img, axes=(1, 0))
    out = np.tensordot(wc, out, axes=(1, 1)).swapaxes(0, 1)
    return out


def to_grayscale(clip: VideoClip, weights: Sequence[float] | None = None) -> VideoClip:
    """Luma-weighted channel mix; input is expected in linear light."""
    if not clip.is_color:
        return clip
    w = _LUMA if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (3,) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("gray weights must be 3 values summing to 1")
    return VideoClip(clip.data @ w)


def preprocess(
    clip: VideoClip,
    short_side: int = 112,
    crop: int = 112,
    gray_weights: Sequence[float] | None = None,
) -> VideoClip:
    """Gray conversion, area downsampling of the shorter side, center crop.

    The longer side scales proportionally (rounded to nearest). Odd crop
    margins put the extra pixel on the right/bottom.
    """
    clip = to_grayscale(clip, gray_weights)
    h, w = clip.height, clip.width
    if min(h, w) < short_side:
        raise ValueError(f"input {h}x{w} smaller than short side {short_side}")
    scale = short_side / min(h, w)
    out_h = short_side if h <= w else int(np.floor(h * scale + 0.5))
    out_w = short_side if w < h else int(np.floor(w * scale + 0.5))
    resized = np.stack([_resample_area(f, out_h, out_w) for f in clip.data])
    if out_h < crop or out_w < crop:
        raise ValueError(f"resized input {out_h}x{out_w} smaller than crop {crop}")
    top = (out_h - crop) // 2
    left = (out_w - crop) // 2
    # clip tiny negative/overshoot round-off so [0, 1] invariants hold exactly
    window = np.clip(resized[:, top : top + crop, left : left + crop], 0.0, 1.0)
    return VideoClip(window)


def window_clips(frames: Sequence[Frame] | VideoClip, num_slots: int, stride: int) -> Iterator[VideoClip]:
    """Yield clips [k*stride, k*stride + num_slots) over a frame stream."""
    if num_slots < 1 or stride < 1:
        raise ValueError("num_slots and stride must be >= 1")
    if isinstance(frames, VideoClip):
        data = frames.data
    else:
        frames = list(frames)
        if not frames:
            return
        data = VideoClip.from_frames(frames).data
    for start in range(0, data.shape[0] - num_slots + 1, stride):
        yield VideoClip(data[start : start + num_slots])
