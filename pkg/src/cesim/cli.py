"""Command-line front end.

One subcommand per pipeline stage. All randomness flows from --seed through
labeled derivation, so outputs are byte-for-byte reproducible from (inputs,
config, seed). Text outputs start with provenance comment lines (tool
version, seed, config hash). Exit codes: 0 ok, 1 runtime error, 2 usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import energy as energy_mod
from .encoder import compression_ratio, encode, normalize, read_coded, write_coded, CodedImage
from .hwsim import ce_control_energy, quantize_clip, run_capture
from .ingest import linearize_clip, load_frame_sequence, preprocess, window_clips, write_pgm
from .optimizer import TrainConfig, train_pattern
from .patterns import (
    TilePattern,
    expand,
    load_pattern,
    long_exposure,
    random_pattern,
    save_pattern,
    short_exposure,
    sparse_random,
)
from .seeding import derive_seed, make_rng
from .stats import collect_tiles, contrast_encode, decorrelation_loss, fit_tile_means, mean_absolute_correlation, pearson
from .synthetic import make_corpus


def _config_hash(args: argparse.Namespace) -> str:
    pairs = {k: repr(v) for k, v in sorted(vars(args).items()) if k != "func"}
    return hashlib.sha256(json.dumps(pairs).encode()).hexdigest()[:16]


def _provenance(args: argparse.Namespace) -> list[str]:
    seed = getattr(args, "seed", None)
    return [
        f"# cesim {__version__}",
        f"# seed={seed}",
        f"# config_sha256={_config_hash(args)}",
    ]


def _map_workers(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _load_clip(args: argparse.Namespace):
    clip = load_frame_sequence(args.frames, format=args.format)
    if not args.no_linearize:
        clip = linearize_clip(clip)
    return clip


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    clip = _load_clip(args)
    if args.short_side is not None:
        crop = args.crop if args.crop is not None else args.short_side
        clip = preprocess(clip, short_side=args.short_side, crop=crop)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(clip.data):
        write_pgm(out / f"frame_{t:05d}.pgm", frame, maxval=65535)
    print(f"frames={clip.num_slots} height={clip.height} width={clip.width} "
          f"min={clip.data.min():.6f} max={clip.data.max():.6f}")
    return 0


def cmd_gen_pattern(args: argparse.Namespace) -> int:
    if args.kind == "long":
        pattern = long_exposure(args.T, args.M)
    elif args.kind == "short":
        pattern = short_exposure(args.T, args.M, period=args.period, offset=args.offset)
    elif args.kind == "random":
        pattern = random_pattern(args.T, args.M, p=args.p, seed=derive_seed(args.seed, "gen-pattern"))
    else:
        pattern = sparse_random(args.T, args.M, seed=derive_seed(args.seed, "gen-pattern"))
    save_pattern(args.output, pattern)
    counts = pattern.exposure_count()
    print(f"pattern kind={args.kind} T={args.T} M={args.M} "
          f"exposure_count_min={counts.min()} max={counts.max()} -> {args.output}")
    return 0


def cmd_train_pattern(args: argparse.Namespace) -> int:
    if (args.frames is None) == (args.synthetic is None):
        raise ValueError("provide exactly one of --frames or --synthetic")
    if args.synthetic is not None:
        clips = make_corpus(args.synthetic, num_slots=args.T, height=args.frame_size,
                            width=args.frame_size, seed=derive_seed(args.seed, "corpus"))
    else:
        clip = _load_clip(args)
        stride = args.stride if args.stride is not None else args.T
        clips = list(window_clips(clip, args.T, stride))
        if not clips:
            raise ValueError(f"frame directory yields no {args.T}-slot clips")
    cfg = TrainConfig(
        tile_size=args.M, epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
        seed=args.seed, contrast_mode=args.contrast_mode,
        normalize_counts=not args.no_normalize,
    )
    report = train_pattern(clips, cfg)
    save_pattern(args.output, report.pattern)
    if args.loss_csv:
        lines = _provenance(args) + ["step,loss"]
        lines += [f"{i + 1},{float(loss)!r}" for i, loss in enumerate(report.losses)]
        Path(args.loss_csv).write_text("\n".join(lines) + "\n")
    print(f"steps={report.steps} best_step={report.best_step} "
          f"final_l_cor={report.final_loss!r} -> {args.output}")
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    pattern = load_pattern(args.pattern)
    clip = _load_clip(args)
    if clip.num_slots < pattern.num_slots:
        raise ValueError(
            f"need {pattern.num_slots} frames, directory has {clip.num_slots}"
        )
    clips = list(window_clips(clip, pattern.num_slots, pattern.num_slots))
    mask = expand(pattern, clip.height, clip.width)
    coded = _map_workers(lambda c: encode(c, mask), clips, args.threads)
    if args.normalize:
        coded = [normalize(c) for c in coded]
    out = Path(args.output)
    paths = []
    for k, img in enumerate(coded):
        path = out if len(coded) == 1 else out.with_name(f"{out.stem}_{k:04d}{out.suffix}")
        write_coded(path, img)
        paths.append(path)
    ratio = compression_ratio(clips[0], coded[0])
    print(f"coded_images={len(paths)} H={coded[0].height} W={coded[0].width} "
          f"compression_ratio={ratio} -> {paths[0]}{' ...' if len(paths) > 1 else ''}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    batch = [read_coded(p) for p in args.coded]
    sample = collect_tiles(batch, args.M)
    if args.contrast_mode == "sample":
        encoded = contrast_encode(sample, None)
    else:
        encoded = contrast_encode(sample, fit_tile_means(sample, mode=args.contrast_mode))
    corr = pearson(encoded)
    l_cor = decorrelation_loss(corr)
    mean_abs = mean_absolute_correlation(corr)
    if args.matrix_csv:
        lines = _provenance(args)
        lines.append(f"# l_cor={l_cor!r}")
        lines.append(f"# mean_abs_correlation={mean_abs!r}")
        lines += [",".join(repr(float(v)) for v in row) for row in corr]
        Path(args.matrix_csv).write_text("\n".join(lines) + "\n")
    print(f"pixels={corr.shape[0]} samples={sample.samples_per_pixel} "
          f"l_cor={l_cor!r} mean_abs_correlation={mean_abs!r}")
    return 0


def cmd_energy(args: argparse.Namespace) -> int:
    cfg = energy_mod.EnergyConfig(
        e_sense=args.e_sense, adc_mipi_fraction=args.adc_mipi_fraction, e_ce=args.e_ce,
        e_wifi=args.e_wifi, e_lora=args.e_lora, num_slots=args.T,
        bits_per_pixel=args.bits_per_pixel, ce_charge_per_readout=args.ce_per_readout,
    )
    if args.sweep:
        if not args.values:
            raise ValueError("--sweep requires --values")
        values = [float(v) for v in args.values.split(",")]
        rows = energy_mod.sweep(cfg, args.sweep, values, capture=args.capture, link=args.link)
        csv_text = energy_mod.sweep_csv(rows, args.sweep)
        if args.csv:
            Path(args.csv).write_text("\n".join(_provenance(args)) + "\n" + csv_text)
        else:
            sys.stdout.write(csv_text)
        return 0
    report = energy_mod.edge_energy(cfg, capture=args.capture, link=args.link)
    print(energy_mod.format_report(report, cfg))
    print(f"transmission_reduction={energy_mod.transmission_reduction(cfg)!r}")
    if args.csv:
        csv_text = energy_mod.sweep_csv([(cfg.num_slots, report)], "num_slots")
        Path(args.csv).write_text("\n".join(_provenance(args)) + "\n" + csv_text)
    return 0


def cmd_hwsim(args: argparse.Namespace) -> int:
    pattern = load_pattern(args.pattern)
    clip = _load_clip(args)
    clips = list(window_clips(clip, pattern.num_slots, pattern.num_slots))
    if not clips:
        raise ValueError(f"need {pattern.num_slots} frames, directory has {clip.num_slots}")
    result = run_capture(clips[0], pattern, levels=args.levels)
    counts = expand(pattern, clips[0].height, clips[0].width).sum(axis=0)
    write_coded(args.output, CodedImage(result.fd.astype(np.float64), counts))
    trace = {
        "provenance": {"tool": f"cesim {__version__}", "seed": args.seed,
                       "config_sha256": _config_hash(args)},
        "num_slots": pattern.num_slots,
        "tile_size": pattern.tile_size,
        "height": clips[0].height,
        "width": clips[0].width,
        "charge_levels": result.charge_levels,
        "clock_hz": 20e6,
        "cycles_per_slot": result.traces[0].cycles,
        "total_cycles": result.total_cycles,
        "duration_us": result.duration_s * 1e6,
        "ce_control_energy_pj": ce_control_energy(result.traces, args.e_ce),
        "slots": [
            {"slot": tr.slot, "events": list(tr.events), "stream_cycles": tr.stream_cycles,
             "reset_pixels": tr.reset_pixels, "transfer_pixels": tr.transfer_pixels}
            for tr in result.traces
        ],
    }
    if args.trace:
        Path(args.trace).write_text(json.dumps(trace, indent=2) + "\n")
    print(f"fd_image -> {args.output} total_cycles={result.total_cycles} "
          f"duration_us={result.duration_s * 1e6:.3f}")
    return 0


def _verify_instance(seed: int) -> tuple[bool, str]:
    from .ingest import VideoClip

    rng = make_rng(seed)
    tile = int(rng.choice([1, 2, 4, 8]))
    num_slots = int(rng.integers(1, 17))
    height = tile * int(rng.integers(1, max(2, 17 // tile)))
    width = tile * int(rng.integers(1, max(2, 17 // tile)))
    clip = VideoClip(rng.random((num_slots, height, width)))
    style = int(rng.integers(0, 4))
    if style == 0:
        bits = (rng.random((num_slots, tile, tile)) < 0.5).astype(np.uint8)
    elif style == 1:  # consecutive bit=1 slots
        bits = np.zeros((num_slots, tile, tile), dtype=np.uint8)
        start = int(rng.integers(0, num_slots))
        bits[start : start + max(2, num_slots // 2)] = 1
    elif style == 2:  # rows that never expose
        bits = (rng.random((num_slots, tile, tile)) < 0.5).astype(np.uint8)
        bits[:, int(rng.integers(0, tile)), :] = 0
    else:
        bits = np.zeros((num_slots, tile, tile), dtype=np.uint8)
    pattern = TilePattern(bits)
    captured = run_capture(clip, pattern).fd
    charge = quantize_clip(clip)
    reference = encode(VideoClip(charge / 65535.0), expand(pattern, height, width))
    expected = np.rint(reference.values * 65535.0).astype(np.int64)
    ok = np.array_equal(captured, expected)
    return ok, f"T={num_slots} M={tile} {height}x{width} style={style}"


def cmd_verify(args: argparse.Namespace) -> int:
    seeds = [derive_seed(args.seed, f"verify-{k}") for k in range(args.instances)]
    results = _map_workers(_verify_instance, seeds, args.threads)
    bad = [(k, desc) for k, (ok, desc) in enumerate(results) if not ok]
    for k, desc in bad:
        print(f"mismatch: instance {k} ({desc})", file=sys.stderr)
    print(f"verify: {args.instances} capture-vs-encode instances, "
          f"{args.instances - len(bad)} equivalent")
    return 1 if bad else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cesim",
        description="coded-exposure in-sensor compression toolkit",
    )
    parser.add_argument("--version", action="version", version=f"cesim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file; flags override it")
    common.add_argument("--seed", type=int, default=0, help="root seed; stage seeds derive from it")
    common.add_argument("--threads", type=int, default=1, help="worker-thread cap for batch stages")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    frames_opts = argparse.ArgumentParser(add_help=False)
    frames_opts.add_argument("--frames", help="directory of PGM/PNG frame files")
    frames_opts.add_argument("--format", default="auto", choices=["auto", "pgm8", "pgm16", "png-gray"],
                             help="frame file format")
    frames_opts.add_argument("--no-linearize", action="store_true",
                             help="skip display-to-linear conversion of loaded frames")

    p = sub.add_parser("ingest", parents=[common, frames_opts],
                       help="load, linearize, and preprocess a frame directory")
    p.add_argument("--short-side", type=int, default=None,
                   help="area-downsample the shorter side to this size (omit to skip)")
    p.add_argument("--crop", type=int, default=None,
                   help="center-crop size (defaults to --short-side)")
    p.add_argument("-o", "--output", required=True, help="output directory for 16-bit PGM frames")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-pattern", parents=[common],
                       help="generate a baseline exposure pattern")
    p.add_argument("--kind", required=True, choices=["long", "short", "random", "sparse-random"],
                   help="pattern family")
    p.add_argument("--T", type=int, required=True, help="exposure slots")
    p.add_argument("--M", type=int, required=True, help="tile side in pixels")
    p.add_argument("--p", type=float, default=0.5, help="exposure probability for --kind random")
    p.add_argument("--period", type=int, default=8, help="slot period for --kind short")
    p.add_argument("--offset", type=int, default=0, help="first exposed slot for --kind short")
    p.add_argument("-o", "--output", required=True, help="pattern file path")
    p.set_defaults(func=cmd_gen_pattern)

    p = sub.add_parser("train-pattern", parents=[common, frames_opts],
                       help="learn a decorrelated pattern from data")
    p.add_argument("--synthetic", type=int, default=None,
                   help="train on this many generated synthetic clips instead of --frames")
    p.add_argument("--frame-size", type=int, default=32, help="synthetic clip height/width")
    p.add_argument("--T", type=int, default=16, help="exposure slots")
    p.add_argument("--M", type=int, default=8, help="tile side in pixels")
    p.add_argument("--stride", type=int, default=None,
                   help="frame stride between training clips (default: T)")
    p.add_argument("--epochs", type=int, default=5, help="training epochs")
    p.add_argument("--batch-size", type=int, default=8, help="clips per optimizer step")
    p.add_argument("--lr", type=float, default=1e-2, help="Adam learning rate")
    p.add_argument("--contrast-mode", default="position", choices=["position", "global", "sample"],
                   help="zero-mean contrast encoding scope")
    p.add_argument("--no-normalize", action="store_true",
                   help="train on raw sums instead of exposure-count-normalized values")
    p.add_argument("--loss-csv", help="write per-step loss history CSV here")
    p.add_argument("-o", "--output", required=True, help="pattern file path")
    p.set_defaults(func=cmd_train_pattern)

    p = sub.add_parser("encode", parents=[common, frames_opts],
                       help="integrate a masked frame sequence into coded images")
    p.add_argument("--pattern", required=True, help="pattern file")
    p.add_argument("--normalize", action="store_true", help="divide values by exposure counts")
    p.add_argument("-o", "--output", required=True, help="coded-image file path")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("stats", parents=[common],
                       help="correlation matrix and decorrelation loss of coded images")
    p.add_argument("--coded", nargs="+", required=True, help="coded-image files")
    p.add_argument("--M", type=int, required=True, help="tile side in pixels")
    p.add_argument("--contrast-mode", default="position", choices=["position", "global", "sample"],
                   help="zero-mean contrast encoding scope")
    p.add_argument("--matrix-csv", help="write the correlation matrix CSV here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("energy", parents=[common],
                       help="edge sensing + transmission energy model")
    p.add_argument("--e-sense", type=float, default=220.0, help="pJ per pixel readout")
    p.add_argument("--adc-mipi-fraction", type=float, default=0.956,
                   help="share of sensing energy in ADC+MIPI")
    p.add_argument("--e-ce", type=float, default=9.0, help="pJ per pixel per slot of CE control")
    p.add_argument("--e-wifi", type=float, default=43.04, help="pJ per pixel, short-range link")
    p.add_argument("--e-lora", type=float, default=7.4e6, help="pJ per pixel, long-range link")
    p.add_argument("--T", type=int, default=16, help="exposure slots per capture")
    p.add_argument("--bits-per-pixel", type=int, default=8, help="readout bit depth")
    p.add_argument("--ce-per-readout", action="store_true",
                   help="charge CE control once per readout instead of per slot")
    p.add_argument("--capture", default="coded", choices=["conventional", "coded"],
                   help="capture mode the ratio is computed for")
    p.add_argument("--link", default="short_wifi", choices=["short_wifi", "long_lora", "none"],
                   help="transmission link")
    p.add_argument("--sweep", help="EnergyConfig field to sweep")
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--csv", help="write report/sweep CSV here")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("hwsim", parents=[common, frames_opts],
                       help="slot/cycle-level pixel-array capture simulation")
    p.add_argument("--pattern", required=True, help="pattern file")
    p.add_argument("--levels", type=int, default=65535, help="irradiance quantization levels")
    p.add_argument("--e-ce", type=float, default=9.0, help="pJ per pixel per slot of CE control")
    p.add_argument("--trace", help="write JSON timing/energy trace here")
    p.add_argument("-o", "--output", required=True, help="FD image path (coded-image format)")
    p.set_defaults(func=cmd_hwsim)

    p = sub.add_parser("verify", parents=[common],
                       help="check capture-simulation vs encoder equivalence on seeded fixtures")
    p.add_argument("--instances", type=int, default=200, help="number of random instances")
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load 'key = value' defaults for the chosen subcommand; flags still win."""
    if "--config" not in argv or argv.index("--config") + 1 >= len(argv):
        return  # a missing value falls through to argparse's usage error
    path = argv[argv.index("--config") + 1]
    sub_actions = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction) and argv:
            sub_actions = action.choices.get(argv[0])
    if sub_actions is None:
        return
    by_dest = {a.dest: a for a in sub_actions._actions}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        dest = key.strip().replace("-", "_")
        value = value.strip()
        if dest not in by_dest:
            raise ValueError(f"{path}:{lineno}: unknown config key {key.strip()!r}")
        action = by_dest[dest]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            converted: object = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            converted = action.type(value)
        else:
            converted = value
        if action.choices is not None and converted not in action.choices:
            raise ValueError(f"{path}:{lineno}: invalid value {value!r} for {key.strip()!r}")
        action.required = False
        sub_actions.set_defaults(**{dest: converted})


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
