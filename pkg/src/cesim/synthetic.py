"""Seeded synthetic video corpora for pattern training and evaluation.

Two motion families: translating luminance ramps (smooth, strongly
spatially correlated content) and moving hard-edged blobs (sharp structure
that different exposure codes separate very differently).
"""

from __future__ import annotations

import numpy as np

from .ingest import VideoClip
from .seeding import derive_seed, make_rng


def translating_gradient_clip(
    num_slots: int, height: int, width: int, seed: int = 0
) -> VideoClip:
    """Linear ramp of random orientation drifting at constant velocity."""
    rng = make_rng(seed)
    angle = rng.uniform(0, 2 * np.pi)
    # short wavelengths and brisk drift: slot choice has to matter for the
    # exposure code to change anything, so keep the temporal frequency high
    wavelength = rng.uniform(0.4, 1.2) * max(height, width)
    velocity = rng.uniform(1.5, 5.0, size=2) * rng.choice([-1.0, 1.0], size=2)
    phase = rng.uniform(0, 1)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    frames = []
    for t in range(num_slots):
        proj = (
            (yy - velocity[0] * t) * np.sin(angle) + (xx - velocity[1] * t) * np.cos(angle)
        ) / wavelength + phase
        frames.append(proj % 2.0)
    data = np.stack(frames)
    # fold the sawtooth into a triangle wave so motion never snaps
    data = np.where(data > 1.0, 2.0 - data, data)
    return VideoClip(data)


def moving_blobs_clip(
    num_slots: int, height: int, width: int, seed: int = 0, num_blobs: int = 4
) -> VideoClip:
    """Hard-edged discs on a gray background, constant-velocity motion."""
    rng = make_rng(seed)
    centers = rng.uniform(0, 1, size=(num_blobs, 2)) * (height, width)
    velocity = rng.uniform(-4.5, 4.5, size=(num_blobs, 2))
    radii = rng.uniform(0.06, 0.18, size=num_blobs) * min(height, width)
    shades = rng.uniform(0, 1, size=num_blobs)
    background = rng.uniform(0.3, 0.7)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    frames = np.full((num_slots, height, width), background)
    for t in range(num_slots):
        for b in range(num_blobs):
            cy = (centers[b, 0] + velocity[b, 0] * t) % height
            cx = (centers[b, 1] + velocity[b, 1] * t) % width
            inside = (yy - cy) ** 2 + (xx - cx) ** 2 <= radii[b] ** 2
            frames[t][inside] = shades[b]
    return VideoClip(frames)


def make_corpus(
    num_clips: int,
    num_slots: int = 16,
    height: int = 32,
    width: int = 32,
    seed: int = 0,
) -> list[VideoClip]:
    """Half translating gradients, half moving blobs, all seed-derived."""
    clips = []
    for k in range(num_clips):
        clip_seed = derive_seed(seed, f"clip-{k}")
        if k % 2 == 0:
            clips.append(translating_gradient_clip(num_slots, height, width, seed=clip_seed))
        else:
            clips.append(moving_blobs_clip(num_slots, height, width, seed=clip_seed))
    return clips
