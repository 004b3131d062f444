"""cesim: coded-exposure in-sensor compression toolkit.

Simulates coded-exposure video capture (mask-gated temporal integration
into a single readout), learns decorrelated tile-repetitive exposure
patterns, models the edge energy savings of coded readout, and verifies
the per-pixel control hardware behaviorally against the mathematical
encoding.
"""

from .encoder import CodedImage, compression_ratio, encode, export_quantized, normalize, read_coded, write_coded
from .energy import EnergyConfig, EnergyReport, edge_energy, sweep, transmission_reduction
from .hwsim import CaptureResult, PixelArray, TileShiftRegister, run_capture, run_slot
from .ingest import Frame, VideoClip, linearize_clip, load_frame_sequence, preprocess, to_linear, window_clips
from .optimizer import TrainConfig, TrainReport, binarize_ste_forward, evaluate_pattern, loss_and_grad, train_pattern
from .patterns import TilePattern, expand, load_pattern, long_exposure, random_pattern, save_pattern, short_exposure, sparse_random
from .stats import SampleMatrix, TileMeanTable, collect_tiles, contrast_encode, decorrelation_loss, fit_tile_means, mean_absolute_correlation, pearson

__version__ = "0.1.0"
