import json
import os

import pytest

from pmodsim.cli import main
from pmodsim.config import (ConfigError, parse_campaign, parse_campaign_text,
                            serialize_campaign)
from pmodsim.modes import MimoMode

SMALL_CAMPAIGN = """
[link]
snr_db = [5.0, 15.0]
frames_per_point = 60
symbols_per_frame = 32
master_seed = 3

[modes]
sets = [["PMOD"]]
"""


class TestCampaignParsing:
    def test_defaults_fill_in(self):
        spec = parse_campaign_text(SMALL_CAMPAIGN)
        assert spec.snr_db == (5.0, 15.0)
        assert spec.frames_per_point == 60
        assert spec.mu == 0.05
        assert spec.p0 == 0.01
        assert spec.delay_frames == 7
        assert spec.channel.carrier_hz == 1.6e9
        assert spec.mode_sets == ((MimoMode.PMOD,),)

    def test_round_trip_is_lossless(self):
        spec = parse_campaign_text(SMALL_CAMPAIGN)
        assert parse_campaign_text(serialize_campaign(spec)) == spec

    def test_round_trip_with_every_section(self):
        text = SMALL_CAMPAIGN + """
[channel]
k_factor = 4.5
xpd_db = 7.25
doppler_hz = 33.0
carrier_hz = 2.2e9
speed_kmh = 3.0
seed = 9

[controller]
mu = 0.1
p0 = 0.02
delay_frames = 3

[output]
margin_trace_decimation = 10
"""
        spec = parse_campaign_text(text)
        assert parse_campaign_text(serialize_campaign(spec)) == spec
        assert spec.channel.doppler_hz == 33.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key 'snr_list'"):
            parse_campaign_text("[link]\nsnr_list = [1.0]\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_campaign_text("[links]\n")

    def test_empty_snr_rejected(self):
        with pytest.raises(ConfigError, match="snr_db"):
            parse_campaign_text("[link]\nsnr_db = []\n")

    def test_missing_snr_rejected(self):
        with pytest.raises(ConfigError, match="snr_db"):
            parse_campaign_text("[link]\nframes_per_point = 10\n")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError, match="unknown mode"):
            parse_campaign_text(SMALL_CAMPAIGN.replace('"PMOD"', '"QPSK"'))

    def test_invalid_toml_reports_position(self):
        with pytest.raises(ConfigError, match="invalid TOML"):
            parse_campaign_text("[link\nsnr_db = [1.0]\n")

    def test_mode_sets_expand_to_sim_configs(self):
        text = SMALL_CAMPAIGN.replace('sets = [["PMOD"]]',
                                      'sets = [["SISO"], ["OPTBC", "VBLAST"]]')
        spec = parse_campaign_text(text)
        labels = [label for label, _ in spec.sim_configs()]
        assert labels == ["SISO", "OPTBC+VBLAST"]


def write_campaign(tmp_path, text=SMALL_CAMPAIGN):
    path = tmp_path / "campaign.toml"
    path.write_text(text)
    return str(path)


class TestRunCommand:
    def test_writes_all_outputs(self, tmp_path):
        cfg = write_campaign(tmp_path)
        out = tmp_path / "out"
        assert main(["run", cfg, "--out", str(out)]) == 0
        for name in ["campaign.toml", "metrics.json", "metrics.csv",
                     "fig3_se.csv", "fig4_fer.csv", "fig5_mcs.csv", "plots.gp"]:
            assert (out / name).exists(), name
        header = (out / "metrics.csv").read_text().splitlines()
        assert header[0].startswith("# pmodsim")
        assert header[1].startswith("# seed = 3")
        assert header[2].startswith("# config = ")
        payload = json.loads((out / "metrics.json").read_text())
        assert payload["config"]["master_seed"] == 3
        assert len(payload["results"][0]["points"]) == 2

    def test_existing_out_dir_refused_without_force(self, tmp_path):
        cfg = write_campaign(tmp_path)
        out = tmp_path / "out"
        out.mkdir()
        assert main(["run", cfg, "--out", str(out)]) == 2
        assert main(["run", cfg, "--out", str(out), "--force"]) == 0

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_campaign(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", cfg, "--out", str(a)]) == 0
        assert main(["run", cfg, "--out", str(b), "--jobs", "2"]) == 0
        for name in ["metrics.csv", "fig3_se.csv", "fig4_fer.csv", "fig5_mcs.csv"]:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_seed_override_changes_outputs(self, tmp_path):
        cfg = write_campaign(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", cfg, "--out", str(a)]) == 0
        assert main(["run", cfg, "--out", str(b), "--seed", "99"]) == 0
        assert (a / "metrics.csv").read_bytes() != (b / "metrics.csv").read_bytes()

    def test_out_dir_from_environment(self, tmp_path, monkeypatch):
        cfg = write_campaign(tmp_path)
        out = tmp_path / "env_out"
        monkeypatch.setenv("PMODSIM_OUT_DIR", str(out))
        assert main(["run", cfg]) == 0
        assert (out / "metrics.csv").exists()

    def test_no_out_dir_is_an_error(self, tmp_path, monkeypatch):
        monkeypatch.delenv("PMODSIM_OUT_DIR", raising=False)
        cfg = write_campaign(tmp_path)
        assert main(["run", cfg]) == 2

    def test_config_and_preset_conflict(self, tmp_path):
        cfg = write_campaign(tmp_path)
        assert main(["run", cfg, "--preset", "ci", "--out", str(tmp_path / "x")]) == 2

    def test_invalid_config_fails_cleanly(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[link]\nsnr_db = []\n")
        assert main(["run", str(bad), "--out", str(tmp_path / "x")]) == 2

    def test_presets_parse(self):
        from pmodsim.cli import _RUN_PRESETS, _load_preset
        for name in _RUN_PRESETS:
            spec = _load_preset(name)
            assert spec.snr_db
            assert spec.mode_sets


class TestCapacityCommand:
    def test_grid_rows(self, tmp_path, capsys):
        assert main(["capacity", "--start", "-2", "--stop", "0", "--step", "1",
                     "--samples", "2000"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines()
                 if l and not l.startswith("#")]
        assert lines[0].split(",")[:4] == ["gamma_db", "phi_s", "phi_p", "eq_bound"]
        assert len(lines) == 1 + 3

    def test_fig2_preset_grid(self, tmp_path):
        out = tmp_path / "cap.csv"
        assert main(["capacity", "--preset", "fig2", "--samples", "500",
                     "--out", str(out)]) == 0
        rows = [l for l in out.read_text().splitlines() if l and not l.startswith("#")]
        assert len(rows) == 1 + 41  # header plus -10..10 in half-dB steps

    def test_single_point(self, capsys):
        assert main(["capacity", "--start", "0", "--stop", "0", "--step", "0.5",
                     "--samples", "1000"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines()
                 if l and not l.startswith("#")]
        assert len(lines) == 2

    def test_bad_step_rejected(self):
        assert main(["capacity", "--step", "0"]) == 2

    def test_bound_dominates_monte_carlo(self, tmp_path):
        out = tmp_path / "cap.csv"
        assert main(["capacity", "--start", "-6", "--stop", "6", "--step", "2",
                     "--samples", "20000", "--out", str(out)]) == 0
        rows = [l.split(",") for l in out.read_text().splitlines()
                if l and not l.startswith("#")][1:]
        for row in rows:
            eq_bound, mc_pol = float(row[3]), float(row[4])
            assert eq_bound >= mc_pol - 0.02


class TestTablesCommand:
    def test_symbol_table_print(self, capsys):
        assert main(["tables", "S"]) == 0
        out = capsys.readouterr().out
        rows = [l for l in out.splitlines() if l.strip() and l.lstrip()[0].isdigit()]
        assert len(rows) == 9
        assert all(float(r.split()[-1]) <= 0.01 for r in rows)

    def test_polarization_table_print(self, capsys):
        assert main(["tables", "p"]) == 0
        out = capsys.readouterr().out
        rows = [l for l in out.splitlines() if l.strip() and l.lstrip()[0].isdigit()]
        assert len(rows) == 9
        assert all(float(r.split()[-1]) <= 0.06 for r in rows)


class TestFitCommand:
    def test_polarization_rate_recovery(self, capsys):
        assert main(["fit", "--stream", "polarization", "--terms", "1",
                     "--samples", "20000", "--step", "2"]) == 0
        out = capsys.readouterr().out
        rate = float([l for l in out.splitlines() if "decay rate" in l][0].split()[-1])
        assert rate == pytest.approx(1.30, abs=0.05)
