"""Acceptance suite: one test per release criterion, timed, with a summary
line per criterion printed at the end of the pytest run."""

import time

import numpy as np

from cesim.encoder import (
    CodedImage,
    encode,
    export_quantized,
    normalize,
    read_coded,
    write_coded,
)
from cesim.energy import EnergyConfig, edge_energy, format_report, transmission_reduction
from cesim.hwsim import quantize_clip, run_capture
from cesim.ingest import VideoClip
from cesim.optimizer import (
    TrainConfig,
    binarize_ste_forward,
    evaluate_pattern,
    fit_dataset_means,
    loss_and_grad,
    train_pattern,
)
from cesim.patterns import (
    TilePattern,
    expand,
    extract_tile,
    load_pattern,
    long_exposure,
    random_pattern,
    save_pattern,
    short_exposure,
    sparse_random,
)
from cesim.seeding import derive_seed, make_rng
from cesim.stats import decorrelation_loss, pearson
from cesim.synthetic import make_corpus

from _oracles import central_difference, encode_bruteforce


def record(log, number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    log.append(f"criterion {number}: {status} - {description}{suffix}")
    assert ok, f"criterion {number} failed: {description}{suffix}"


def test_criterion_1_encoder_matches_bruteforce_oracle(acceptance_log):
    rng = make_rng(derive_seed(2026, "accept-1"))
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        num_slots = int(rng.integers(1, 17))
        height = int(rng.integers(1, 33))
        width = int(rng.integers(1, 33))
        clip = rng.random((num_slots, height, width))
        mask = (rng.random((num_slots, height, width)) < rng.uniform(0.1, 0.9)).astype(np.uint8)
        coded = encode(VideoClip(clip), mask)
        values, counts = encode_bruteforce(clip.tolist(), mask.tolist())
        if not (np.array_equal(coded.values, np.array(values))
                and np.array_equal(coded.counts, np.array(counts))):
            mismatches += 1
    elapsed = time.perf_counter() - start
    record(acceptance_log, 1, "encoder equals brute-force triple loop bit-exactly",
           mismatches == 0 and elapsed < 10.0,
           f"1000 instances, {mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_2_hardware_equivalence_theorem(acceptance_log):
    rng = make_rng(derive_seed(2026, "accept-2"))
    start = time.perf_counter()
    mismatches = 0
    for k in range(200):
        tile = int(rng.choice([1, 2, 4, 8]))
        num_slots = int(rng.integers(1, 17))
        height = tile * int(rng.integers(1, 33 // tile))
        width = tile * int(rng.integers(1, 33 // tile))
        clip = VideoClip(rng.random((num_slots, height, width)))
        style = k % 4
        if style == 0:  # consecutive bit=1 slots
            bits = np.zeros((num_slots, tile, tile), dtype=np.uint8)
            first = int(rng.integers(0, num_slots))
            bits[first : first + max(2, num_slots // 2)] = 1
        elif style == 1:  # per-pixel rows that never expose
            bits = (rng.random((num_slots, tile, tile)) < 0.5).astype(np.uint8)
            bits[:, int(rng.integers(0, tile))] = 0
        elif style == 2:  # fully dark pattern
            bits = np.zeros((num_slots, tile, tile), dtype=np.uint8)
        else:
            bits = (rng.random((num_slots, tile, tile)) < 0.5).astype(np.uint8)
        pattern = TilePattern(bits)
        fd = run_capture(clip, pattern).fd
        charge = quantize_clip(clip)
        reference = encode(VideoClip(charge / 65535.0), expand(pattern, height, width))
        if not np.array_equal(fd, np.rint(reference.values * 65535.0).astype(np.int64)):
            mismatches += 1
    elapsed = time.perf_counter() - start
    record(acceptance_log, 2, "capture simulation reproduces the encoder exactly",
           mismatches == 0 and elapsed < 30.0,
           f"200 instances incl. dark/consecutive patterns, {mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_3_gradient_against_finite_differences(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    instances = 0
    for k in range(50):
        seed = derive_seed(2026, f"accept-3-{k}")
        rng = make_rng(seed)
        batch = make_corpus(4, num_slots=8, height=4, width=4, seed=seed)  # S = 16 <= 64
        theta = rng.normal(0.0, 1.0, (8, 2, 2))
        mode = ("position", "global", "sample")[k % 3]
        normalize_counts = k % 2 == 0
        if mode == "sample":
            means = None
        else:
            means = fit_dataset_means(batch, binarize_ste_forward(theta),
                                      mode=mode, normalize_counts=normalize_counts)
        _, grad = loss_and_grad(theta, batch, means,
                                normalize_counts=normalize_counts, surrogate=True)
        fd = central_difference(
            lambda th: loss_and_grad(th, batch, means,
                                     normalize_counts=normalize_counts, surrogate=True)[0],
            theta, step=1e-4,
        )
        worst = max(worst, np.linalg.norm(grad - fd) / np.linalg.norm(fd))
        instances += 1
    elapsed = time.perf_counter() - start
    record(acceptance_log, 3, "analytic gradient matches central finite differences",
           worst < 1e-4 and instances >= 50 and elapsed < 60.0,
           f"{instances} instances, worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_4_decorrelation_efficacy(acceptance_log):
    start = time.perf_counter()
    corpus = make_corpus(500, num_slots=16, height=32, width=32, seed=2026)
    report = train_pattern(
        corpus, TrainConfig(tile_size=8, epochs=10, batch_size=16, lr=2e-2, seed=7)
    )
    trained = evaluate_pattern(report.pattern, corpus)
    baselines = {
        "long": evaluate_pattern(long_exposure(16, 8), corpus),
        "short": evaluate_pattern(short_exposure(16, 8), corpus),
        "random": evaluate_pattern(random_pattern(16, 8, p=0.5, seed=11), corpus),
    }
    beats_random = trained.l_cor < 0.8 * baselines["random"].l_cor
    beats_long = trained.l_cor < 0.5 * baselines["long"].l_cor
    mean_abs = [
        baselines["long"].mean_abs_correlation,
        baselines["short"].mean_abs_correlation,
        baselines["random"].mean_abs_correlation,
        trained.mean_abs_correlation,
    ]
    ordered = all(a >= b for a, b in zip(mean_abs, mean_abs[1:]))
    elapsed = time.perf_counter() - start
    record(acceptance_log, 4,
           "trained pattern decorrelates; mean |C| orders long >= short >= random >= trained",
           beats_random and beats_long and ordered and elapsed < 600.0,
           f"L_cor trained {trained.l_cor:.3f} vs random {baselines['random'].l_cor:.3f} "
           f"long {baselines['long'].l_cor:.3f}; mean|C| {['%.3f' % v for v in mean_abs]}, "
           f"{elapsed:.0f}s")


def test_criterion_5_energy_model(acceptance_log, capsys):
    start = time.perf_counter()
    cfg = EnergyConfig()
    reduction_exact = transmission_reduction(cfg) == 16.0
    short = edge_energy(cfg, link="short_wifi")
    short_ok = abs(short.savings_ratio - 7.62) <= 0.1
    long_range = edge_energy(cfg, link="long_lora")
    text = format_report(long_range, cfg)
    print(text)  # the discrepancy must be visible in the report itself
    discrepancy_printed = "15.4" in text and "7.2e3" in "".join(long_range.notes)
    elapsed = time.perf_counter() - start
    record(acceptance_log, 5,
           "transmission reduction 16x exact; short-range 7.62x; long-range discrepancy printed",
           reduction_exact and short_ok and discrepancy_printed and elapsed < 1.0,
           f"short {short.savings_ratio:.3f}x, long computed {long_range.savings_ratio:.2f}x "
           f"vs 15.4x reference, {elapsed:.2f}s")


def test_criterion_6_compression_byte_budget(acceptance_log):
    rng = make_rng(derive_seed(2026, "accept-6"))
    clip = VideoClip(rng.random((16, 32, 32)))
    coded = encode(clip, expand(long_exposure(16, 8), 32, 32))
    raw_bytes = clip.num_slots * clip.height * clip.width  # 8-bit raw frames
    coded_bytes = len(export_quantized(coded, 16).tobytes())
    record(acceptance_log, 6, "coded bytes = raw bytes / 16 at equal bit depth",
           coded_bytes * 16 == raw_bytes,
           f"{raw_bytes} raw -> {coded_bytes} coded")


def test_criterion_7_property_suites(acceptance_log, tmp_path):
    rng = make_rng(derive_seed(2026, "accept-7"))
    checks = {}

    y1, y2 = rng.random((2, 6, 8, 8))
    mask = (rng.random((6, 8, 8)) < 0.5).astype(np.uint8)
    combo = encode(VideoClip(0.4 * y1 + 0.5 * y2), mask).values
    parts = 0.4 * encode(VideoClip(y1), mask).values + 0.5 * encode(VideoClip(y2), mask).values
    checks["encode linearity 1e-6"] = np.allclose(combo, parts, atol=1e-6)

    corr = pearson(rng.random((9, 50)))
    checks["pearson symmetry"] = np.array_equal(corr, corr.T)
    checks["pearson unit diagonal"] = np.array_equal(np.diag(corr), np.ones(9))
    checks["pearson bounds"] = bool(np.all(np.abs(corr) <= 1 + 1e-9))
    checks["loss in [0,1]"] = 0.0 <= decorrelation_loss(corr) <= 1.0

    checks["sparse-random one exposure"] = bool(
        np.all(sparse_random(16, 8, seed=3).exposure_count() == 1)
    )

    tile = random_pattern(5, 4, seed=4)
    full = expand(tile, 16, 20)
    checks["tile repetition"] = all(
        np.array_equal(extract_tile(full, 4, r, c).bits, tile.bits)
        for r in range(4) for c in range(5)
    )

    save_pattern(tmp_path / "p.cepat", tile)
    checks["pattern file round-trip"] = load_pattern(tmp_path / "p.cepat") == tile
    # power-of-two counts keep the normalized values exact in the f32 container
    coded = normalize(CodedImage(rng.random((6, 6)).astype(np.float32).astype(np.float64),
                                 2 ** rng.integers(0, 3, (6, 6))))
    write_coded(tmp_path / "c.snpx", coded)
    back = read_coded(tmp_path / "c.snpx")
    checks["coded file round-trip"] = (np.array_equal(back.values, coded.values)
                                       and np.array_equal(back.counts, coded.counts)
                                       and back.normalized)

    checks["seeded determinism"] = np.array_equal(
        random_pattern(8, 8, seed=99).bits, random_pattern(8, 8, seed=99).bits
    ) and not np.array_equal(
        random_pattern(8, 8, seed=99).bits, random_pattern(8, 8, seed=100).bits
    )

    failed = [name for name, ok in checks.items() if not ok]
    record(acceptance_log, 7, "invariant suite green", not failed,
           f"{len(checks)} properties" + (f", failed: {failed}" if failed else ""))


def test_criterion_8_scope_statement(acceptance_log):
    statement = (
        "not reproducible at desk scale (by design): downstream-model task "
        "accuracies, absolute correlation legend values, backbone pre-training "
        "ablations, and silicon area figures; covered instead by the oracle and "
        "property suites of criteria 1-7"
    )
    record(acceptance_log, 8, statement, True)
