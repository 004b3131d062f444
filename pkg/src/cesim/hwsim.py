"""Behavioral simulation of the per-pixel exposure-control hardware.

Each pixel owns a photodiode (PD) that integrates light continuously, a
floating diffusion (FD) that accumulates readout charge, and a one-bit DFF.
The DFFs of a tile form a serial shift-register chain; the same tile bits
are streamed in twice per exposure slot:

  1. stream bits, pulse pattern-reset:    bit=1 pixels clear their PD
  2. integrate this slot's irradiance into every PD (unconditionally)
  3. stream bits, pulse pattern-transfer: bit=1 pixels move PD charge to FD

Between phases the DFFs are power-gated with the reset/transfer transistors
held open, so untouched charge just keeps accumulating until the next bit=1
reset clears it. Charge is integer-quantized so the end-to-end capture can
be compared bit-exactly against the mathematical coded-integration sum.

All tiles stream concurrently on their own chains, so per-slot control
latency is M^2 clocks + 2 pulses regardless of frame size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import VideoClip
from .patterns import TilePattern, expand

PATTERN_CLOCK_HZ = 20e6
DEFAULT_CHARGE_LEVELS = 65535  # 16-bit irradiance quantization

SLOT_EVENT_ORDER = (
    "stream_in_1",
    "pattern_reset",
    "integrate",
    "stream_in_2",
    "pattern_transfer",
    "power_gate",
)


@dataclass
class PixelState:
    pd_charge: int
    fd_charge: int
    dff_bit: int | None  # None while the DFF is power-gated
    gated: bool


@dataclass(eq=False)
class SlotTrace:
    """Ordered event log of one exposure slot."""

    slot: int
    events: tuple[str, ...]
    stream_cycles: int  # per stream-in, per tile chain
    reset_pixels: int
    transfer_pixels: int
    gate_pulses: int  # DFFs are gated after reset and again after transfer
    num_pixels: int

    @property
    def cycles(self) -> int:
        # two streams plus one reset and one transfer pulse on the pattern clock
        return 2 * self.stream_cycles + 2


@dataclass(eq=False)
class CaptureResult:
    fd: np.ndarray  # (H, W) integer charge
    traces: list[SlotTrace]
    total_cycles: int
    duration_s: float
    charge_levels: int

    @property
    def num_slots(self) -> int:
        return len(self.traces)


class TileShiftRegister:
    """Serial chain of the M^2 DFFs under one tile.

    Bits are fed last-pixel-first so that after exactly len(chain) clocks,
    DFF k holds the bit destined for pixel k.
    """

    def __init__(self, length: int):
        if length < 1:
            raise ValueError("chain needs at least one DFF")
        self.bits = np.zeros(length, dtype=np.uint8)
        self.clock_count = 0

    def __len__(self) -> int:
        return len(self.bits)

    def clock(self, serial_in: int) -> None:
        self.bits[1:] = self.bits[:-1]
        self.bits[0] = serial_in
        self.clock_count += 1

    def stream(self, bits: Sequence[int]) -> None:
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size != len(self.bits):
            raise ValueError(f"expected {len(self.bits)} bits, got {bits.size}")
        for b in bits[::-1]:
            self.clock(int(b))


def stream_pattern(reg: TileShiftRegister, bits: Sequence[int]) -> TileShiftRegister:
    reg.stream(bits)
    return reg


class PixelArray:
    """The pixel grid plus one shift-register bank row per tile."""

    def __init__(self, height: int, width: int, tile_size: int,
                 pd_cap: int | None = None, fd_cap: int | None = None):
        if height % tile_size or width % tile_size:
            raise ValueError(f"array {height}x{width} not divisible by tile size {tile_size}")
        self.height = height
        self.width = width
        self.tile_size = tile_size
        self.pd = np.zeros((height, width), dtype=np.int64)
        self.fd = np.zeros((height, width), dtype=np.int64)
        self.pd_cap = pd_cap
        self.fd_cap = fd_cap
        self.gated = True
        n_tiles = (height // tile_size) * (width // tile_size)
        self._bank = np.zeros((n_tiles, tile_size * tile_size), dtype=np.uint8)
        self.clock_count = 0

    # -- DFF bank ----------------------------------------------------------

    def _stream_bank(self, tile_bits: np.ndarray) -> None:
        """Clock every tile chain tile_size^2 times, last-pixel-first feed.

        tile_bits: (n_tiles, M^2), one serial word per chain.
        """
        for k in range(tile_bits.shape[1] - 1, -1, -1):
            self._bank[:, 1:] = self._bank[:, :-1]
            self._bank[:, 0] = tile_bits[:, k]
            self.clock_count += 1

    def _dff_image(self) -> np.ndarray:
        m = self.tile_size
        n1, n2 = self.height // m, self.width // m
        return (
            self._bank.reshape(n1, n2, m, m).transpose(0, 2, 1, 3).reshape(self.height, self.width)
        )

    def _tile_words(self, slot_bits: np.ndarray) -> np.ndarray:
        m = self.tile_size
        n1, n2 = self.height // m, self.width // m
        return slot_bits.reshape(n1, m, n2, m).transpose(0, 2, 1, 3).reshape(n1 * n2, m * m)

    def state(self, row: int, col: int) -> PixelState:
        dff = None if self.gated else int(self._dff_image()[row, col])
        return PixelState(int(self.pd[row, col]), int(self.fd[row, col]), dff, self.gated)


def run_slot(array: PixelArray, slot_bits: np.ndarray, irradiance: np.ndarray, slot: int = 0) -> SlotTrace:
    """Advance the array through one exposure slot (mutates the array)."""
    slot_bits = np.asarray(slot_bits, dtype=np.uint8)
    irradiance = np.asarray(irradiance)
    if slot_bits.shape != (array.height, array.width):
        raise ValueError(f"slot bits {slot_bits.shape} != array {(array.height, array.width)}")
    if irradiance.shape != (array.height, array.width):
        raise ValueError(f"irradiance {irradiance.shape} != array {(array.height, array.width)}")
    words = array._tile_words(slot_bits)

    # phase 1: stream, then pattern-reset clears exposed PDs
    array.gated = False
    array._stream_bank(words)
    array.clock_count += 1  # reset pulse
    selected = array._dff_image().astype(bool)
    array.pd[selected] = 0
    reset_pixels = int(selected.sum())
    array.gated = True

    # phase 2: every PD integrates, exposed or not
    array.pd += irradiance.astype(np.int64)
    if array.pd_cap is not None:
        np.minimum(array.pd, array.pd_cap, out=array.pd)

    # phase 3: stream again, then pattern-transfer moves PD charge to FD
    array.gated = False
    array._stream_bank(words)
    array.clock_count += 1  # transfer pulse
    selected = array._dff_image().astype(bool)
    array.fd[selected] += array.pd[selected]
    if array.fd_cap is not None:
        np.minimum(array.fd, array.fd_cap, out=array.fd)
    array.pd[selected] = 0
    transfer_pixels = int(selected.sum())
    array.gated = True

    return SlotTrace(
        slot=slot,
        events=SLOT_EVENT_ORDER,
        stream_cycles=array.tile_size**2,
        reset_pixels=reset_pixels,
        transfer_pixels=transfer_pixels,
        gate_pulses=2,
        num_pixels=array.height * array.width,
    )


def quantize_clip(clip: VideoClip, levels: int = DEFAULT_CHARGE_LEVELS) -> np.ndarray:
    """(T, H, W) integer charge units from a [0, 1] clip."""
    if clip.is_color:
        raise ValueError("capture simulation expects grayscale clips")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    return np.rint(clip.data * levels).astype(np.int64)


def run_capture(
    clip: VideoClip,
    pattern: TilePattern,
    levels: int = DEFAULT_CHARGE_LEVELS,
    pd_cap: int | None = None,
    fd_cap: int | None = None,
    clock_hz: float = PATTERN_CLOCK_HZ,
) -> CaptureResult:
    """Full T-slot capture; the FD image realizes the coded-integration sum."""
    if clip.num_slots != pattern.num_slots:
        raise ValueError(
            f"clip has {clip.num_slots} slots but pattern has {pattern.num_slots}"
        )
    charge = quantize_clip(clip, levels)
    mask = expand(pattern, clip.height, clip.width)
    array = PixelArray(clip.height, clip.width, pattern.tile_size, pd_cap=pd_cap, fd_cap=fd_cap)
    traces = [
        run_slot(array, mask[t], charge[t], slot=t) for t in range(pattern.num_slots)
    ]
    total_cycles = sum(tr.cycles for tr in traces)
    return CaptureResult(
        fd=array.fd,
        traces=traces,
        total_cycles=total_cycles,
        duration_s=total_cycles / clock_hz,
        charge_levels=levels,
    )


def ce_control_energy(traces: Sequence[SlotTrace], e_ce_per_slot_pixel: float = 9.0) -> float:
    """Total pattern-control energy in pJ: e_ce per pixel per slot."""
    return float(sum(tr.num_pixels for tr in traces)) * e_ce_per_slot_pixel
