import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cesim.patterns import (
    TilePattern,
    expand,
    extract_tile,
    load_pattern,
    long_exposure,
    mask_exposure_count,
    random_pattern,
    save_pattern,
    short_exposure,
    sparse_random,
)


class TestGenerators:
    def test_long_exposure_all_on(self):
        pat = long_exposure(16, 8)
        assert pat.bits.sum() == 16 * 64
        assert np.all(pat.exposure_count() == 16)

    def test_long_exposure_degenerate_size(self):
        assert np.array_equal(long_exposure(1, 1).bits, [[[1]]])

    def test_short_exposure_every_eighth(self):
        pat = short_exposure(16, 8, period=8)
        on_slots = {t for t in range(16) if pat.bits[t].any()}
        assert on_slots == {0, 8}
        assert np.all(pat.bits[0] == 1) and np.all(pat.bits[8] == 1)

    def test_short_exposure_single_slot(self):
        pat = short_exposure(8, 4, period=8)
        assert {t for t in range(8) if pat.bits[t].any()} == {0}

    @pytest.mark.parametrize("t,period", [(16, 8), (8, 8), (7, 3), (12, 5), (5, 1)])
    def test_short_exposure_count_by_enumeration(self, t, period):
        # oracle: enumerate the slots the definition turns on
        expected = sum(1 for slot in range(t) if slot % period == 0)
        assert expected == math.ceil(t / period)
        pat = short_exposure(t, 3, period=period)
        assert np.all(pat.exposure_count() == expected)

    def test_short_exposure_offset(self):
        pat = short_exposure(16, 2, period=8, offset=7)
        assert {t for t in range(16) if pat.bits[t].any()} == {7, 15}

    def test_random_extremes(self):
        assert random_pattern(4, 4, p=0.0, seed=1).bits.sum() == 0
        assert random_pattern(4, 4, p=1.0, seed=1).bits.sum() == 4 * 16

    def test_random_halfish_density(self):
        # binomial bound: 1024 draws at p=0.5 land in [0.42, 0.58] whp
        pat = random_pattern(16, 8, p=0.5, seed=123)
        assert 0.42 <= pat.bits.mean() <= 0.58

    def test_random_invalid_p(self):
        with pytest.raises(ValueError):
            random_pattern(4, 4, p=1.5, seed=0)

    def test_sparse_exactly_one_everywhere(self):
        pat = sparse_random(16, 8, seed=5)
        assert np.all(pat.exposure_count() == 1)

    def test_sparse_single_slot_equals_long(self):
        assert np.array_equal(sparse_random(1, 4, seed=9).bits, long_exposure(1, 4).bits)

    def test_sparse_slot_choice_uniform(self):
        from scipy.stats import chi2

        num_slots = 16
        pat = sparse_random(num_slots, 100, seed=77)  # 10^4 positions
        slots = pat.bits.argmax(axis=0)
        observed = np.bincount(slots.ravel(), minlength=num_slots)
        expected = slots.size / num_slots
        statistic = ((observed - expected) ** 2 / expected).sum()
        assert statistic < chi2.ppf(1 - 0.001, df=num_slots - 1)

    def test_generators_deterministic_under_seed(self):
        for gen in (lambda s: random_pattern(8, 4, seed=s), lambda s: sparse_random(8, 4, seed=s)):
            assert np.array_equal(gen(42).bits, gen(42).bits)
            assert not np.array_equal(gen(42).bits, gen(43).bits)


class TestValidation:
    def test_non_binary_rejected(self):
        with pytest.raises(ValueError, match="0 or 1"):
            TilePattern(np.full((2, 2, 2), 2))

    def test_bad_shape_rejected(self):
        with pytest.raises(ValueError, match=r"\(T, M, M\)"):
            TilePattern(np.zeros((2, 3, 4)))


class TestExpand:
    def test_full_frame_tiling(self):
        tile = random_pattern(16, 8, seed=3)
        mask = expand(tile, 112, 112)
        assert mask.shape == (16, 112, 112)
        for n1 in range(14):
            for n2 in range(14):
                block = mask[:, n1 * 8 : (n1 + 1) * 8, n2 * 8 : (n2 + 1) * 8]
                assert np.array_equal(block, tile.bits)

    def test_identity_when_frame_equals_tile(self):
        tile = random_pattern(4, 4, seed=1)
        assert np.array_equal(expand(tile, 4, 4), tile.bits)

    def test_index_arithmetic_spot_check(self):
        tile = random_pattern(3, 8, seed=2)
        mask = expand(tile, 16, 16)
        assert np.array_equal(mask[:, 9, 10], tile.bits[:, 1, 2])

    def test_non_divisible_rejected(self):
        with pytest.raises(ValueError, match="not divisible"):
            expand(random_pattern(2, 8, seed=0), 100, 112)

    @given(
        t=st.integers(1, 6),
        m=st.integers(1, 6),
        reps=st.tuples(st.integers(1, 4), st.integers(1, 4)),
        seed=st.integers(0, 2**32),
        pick=st.tuples(st.integers(0, 3), st.integers(0, 3)),
    )
    @settings(max_examples=50, deadline=None)
    def test_extract_inverts_expand(self, t, m, reps, seed, pick):
        tile = random_pattern(t, m, seed=seed)
        mask = expand(tile, m * reps[0], m * reps[1])
        row, col = pick[0] % reps[0], pick[1] % reps[1]
        assert np.array_equal(extract_tile(mask, m, row, col).bits, tile.bits)

    def test_mask_exposure_count(self):
        tile = sparse_random(8, 4, seed=6)
        mask = expand(tile, 8, 8)
        assert np.all(mask_exposure_count(mask) == 1)


class TestPatternFile:
    @pytest.mark.parametrize(
        "pattern",
        [
            long_exposure(16, 8),
            short_exposure(16, 8),
            random_pattern(16, 8, seed=7),
            sparse_random(16, 8, seed=7),
        ],
        ids=["long", "short", "random", "sparse"],
    )
    def test_roundtrip_baselines(self, tmp_path, pattern):
        path = tmp_path / "p.cepat"
        save_pattern(path, pattern)
        assert load_pattern(path) == pattern

    @given(
        t=st.integers(1, 8), m=st.integers(1, 8),
        seed=st.integers(0, 2**32), p=st.floats(0.1, 0.9),
    )
    @settings(max_examples=40, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_roundtrip_random(self, tmp_path, t, m, seed, p):
        pattern = random_pattern(t, m, p=p, seed=seed)
        path = tmp_path / "p.cepat"
        save_pattern(path, pattern)
        assert load_pattern(path) == pattern

    def test_header_format(self, tmp_path):
        path = tmp_path / "p.cepat"
        save_pattern(path, random_pattern(2, 2, seed=5))
        lines = path.read_text().splitlines()
        assert lines[0] == "CEPAT v1"
        assert lines[1] == "T=2 M=2 seed=5"

    def test_seedless_header(self, tmp_path):
        path = tmp_path / "p.cepat"
        save_pattern(path, long_exposure(2, 2))
        assert "seed=none" in path.read_text().splitlines()[1]

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "p.cepat"
        save_pattern(path, long_exposure(4, 4))
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(ValueError, match="truncated"):
            load_pattern(path)

    def test_invalid_digit(self, tmp_path):
        path = tmp_path / "p.cepat"
        save_pattern(path, long_exposure(2, 2))
        path.write_text(path.read_text().replace("11", "21", 1))
        with pytest.raises(ValueError, match="invalid pattern row"):
            load_pattern(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "p.cepat"
        path.write_text("NOPE v9\nT=1 M=1 seed=none\n1\n")
        with pytest.raises(ValueError, match="magic"):
            load_pattern(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "p.cepat"
        path.write_text("CEPAT v1\nT=x M=1 seed=none\n1\n")
        with pytest.raises(ValueError, match="malformed"):
            load_pattern(path)
