"""Scenario file dialect: parsing, errors, and write/read round-trips."""

import pytest

from pkgwave.geometry import make_scenario, validate_scenario
from pkgwave.scenario_io import (
    ScenarioFileError,
    format_scenario,
    load_scenario,
    parse_quantity,
    parse_scenario,
    save_scenario,
)


class TestQuantities:
    def test_length_units(self):
        assert parse_quantity("1.5 mm") == pytest.approx(1.5e-3)
        assert parse_quantity("200um") == pytest.approx(200e-6)
        assert parse_quantity("3e-4") == pytest.approx(3e-4)

    def test_frequency_units(self):
        assert parse_quantity("60 GHz") == pytest.approx(60e9)
        assert parse_quantity("1 THz") == pytest.approx(1e12)

    def test_bad_tokens(self):
        with pytest.raises(ScenarioFileError):
            parse_quantity("fast")
        with pytest.raises(ScenarioFileError):
            parse_quantity("3 parsec")


class TestPresetForm:
    def test_minimal(self):
        s = parse_scenario("preset = single_chip_walled\n")
        assert s.n_ports == 9

    def test_overrides(self):
        s = parse_scenario(
            """
            preset = single_chip_walled
            name = my_case
            chip = 4 mm
            antennas = 2x2
            silicon = 0.25 mm
            band = 55 GHz, 65 GHz, 60 GHz
            interconnect = none
            """
        )
        assert s.name == "my_case"
        assert s.n_ports == 4
        assert s.band.f_center == pytest.approx(60e9)
        assert validate_scenario(s) == []

    def test_unknown_key_reports_line(self):
        with pytest.raises(ScenarioFileError, match="line 3"):
            parse_scenario("preset = single_chip_walled\nchip = 4 mm\nfrobnicate = 7\n")

    def test_comments_ignored(self):
        s = parse_scenario("# a comment\npreset = mcm_2x2  # trailing\n")
        assert len(s.chips) == 4


class TestFullFormRoundTrip:
    @pytest.mark.parametrize(
        "preset", ["single_chip_walled", "single_chip_open", "interposer_2x2", "mcm_2x2"]
    )
    def test_save_load_identity(self, preset, tmp_path):
        s = make_scenario(preset)
        path = tmp_path / "case.scn"
        save_scenario(s, path)
        s2 = load_scenario(path)
        assert s2 == s
        assert s2.content_hash() == s.content_hash()

    def test_format_is_reparsable_text(self):
        s = make_scenario("single_chip_walled", chip_size=5e-3, antennas_per_chip="2x2")
        text = format_scenario(s)
        assert parse_scenario(text) == s

    def test_garbage_rejected(self):
        with pytest.raises(ScenarioFileError):
            parse_scenario("this is not a scenario\n")
