import pytest

from cesim.energy import (
    EnergyConfig,
    ITEM_NAMES,
    REFERENCE_LONG_RANGE_SAVING,
    edge_energy,
    format_report,
    sweep,
    sweep_csv,
    transmission_reduction,
)


class TestEdgeEnergy:
    def test_short_range_defaults_reproduce_reference_saving(self):
        report = edge_energy(EnergyConfig(), link="short_wifi")
        # arithmetic oracle straight from the constants
        conventional = 16 * (220.0 + 43.04)
        coded = 16 * (220.0 - 0.956 * 220.0) + 0.956 * 220.0 + 16 * 9.0 + 43.04
        assert report.total_conventional == pytest.approx(conventional, abs=1e-9)
        assert report.total_coded == pytest.approx(coded, abs=1e-9)
        assert report.savings_ratio == pytest.approx(conventional / coded, abs=1e-12)
        assert report.savings_ratio == pytest.approx(7.62, abs=0.005)

    def test_pure_readout_compression_limit(self):
        cfg = EnergyConfig(e_ce=0.0, adc_mipi_fraction=1.0)
        report = edge_energy(cfg, link="none")
        assert report.savings_ratio == 16.0

    def test_single_slot_costs_extra(self):
        report = edge_energy(EnergyConfig(num_slots=1), link="short_wifi")
        assert report.savings_ratio < 1.0

    def test_itemized_sums_equal_totals(self):
        for link in ("short_wifi", "long_lora", "none"):
            report = edge_energy(EnergyConfig(), link=link)
            assert sum(report.items_conventional.values()) == report.total_conventional
            assert sum(report.items_coded.values()) == report.total_coded

    def test_conventional_capture_ratio_is_one(self):
        report = edge_energy(EnergyConfig(), capture="conventional")
        assert report.savings_ratio == 1.0

    def test_long_range_note_flags_unit_discrepancy(self):
        report = edge_energy(EnergyConfig(), link="long_lora")
        # with the printed 7.4 uJ/pixel constant the ratio computes to ~16.0
        assert report.savings_ratio == pytest.approx(16.0, abs=0.01)
        assert any(str(REFERENCE_LONG_RANGE_SAVING) in note for note in report.notes)
        assert any("7.2e3" in note or "7200" in note for note in report.notes)

    def test_link_dominated_limit_is_t(self):
        cfg = EnergyConfig(e_lora=1e15)
        report = edge_energy(cfg, link="long_lora")
        assert report.savings_ratio == pytest.approx(16.0, abs=1e-3)

    def test_ce_per_readout_accounting(self):
        report = edge_energy(EnergyConfig(ce_charge_per_readout=True))
        assert report.items_coded["ce_control"] == 9.0

    def test_validation(self):
        with pytest.raises(ValueError):
            EnergyConfig(e_sense=-1.0)
        with pytest.raises(ValueError):
            EnergyConfig(adc_mipi_fraction=1.5)
        with pytest.raises(ValueError, match="unknown link"):
            edge_energy(EnergyConfig(), link="carrier-pigeon")
        with pytest.raises(ValueError, match="unknown capture"):
            edge_energy(EnergyConfig(), capture="video")


class TestTransmissionReduction:
    def test_sixteen_slots(self):
        assert transmission_reduction(EnergyConfig()) == 16.0

    def test_single_slot(self):
        assert transmission_reduction(EnergyConfig(num_slots=1)) == 1.0

    def test_wider_coded_pixels(self):
        assert transmission_reduction(EnergyConfig(), bits_per_coded_pixel=16) == 8.0


class TestSweep:
    def test_lora_sweep_rises_toward_t(self):
        rows = sweep(EnergyConfig(), "e_lora", [7.4e3, 7.4e6], link="long_lora")
        ratios = [rep.savings_ratio for _, rep in rows]
        assert ratios[0] < ratios[1] <= 16.0

    def test_slot_sweep_monotone(self):
        rows = sweep(EnergyConfig(), "num_slots", range(1, 17), link="short_wifi")
        ratios = [rep.savings_ratio for _, rep in rows]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))

    def test_empty_range(self):
        assert sweep(EnergyConfig(), "e_wifi", []) == []

    def test_unknown_field(self):
        with pytest.raises(ValueError, match="unknown EnergyConfig field"):
            sweep(EnergyConfig(), "e_magic", [1.0])

    def test_csv_shape(self):
        rows = sweep(EnergyConfig(), "num_slots", [1, 16])
        text = sweep_csv(rows, "num_slots")
        lines = text.strip().splitlines()
        assert len(lines) == 3
        assert lines[0].split(",")[0] == "num_slots"
        # param + itemized columns for both captures + totals + ratio
        assert len(lines[1].split(",")) == 2 * len(ITEM_NAMES) + 4


def test_format_report_mentions_reference_figures():
    cfg = EnergyConfig()
    text = format_report(edge_energy(cfg), cfg)
    assert "7.6" in text and "savings ratio" in text
