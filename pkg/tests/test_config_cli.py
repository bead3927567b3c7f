"""Configuration parsing/serialization and the command-line interface."""

import json
import math
import os

import numpy as np
import pytest

from slmsqueeze.cli import main
from slmsqueeze.config import (ConfigError, DEFAULT_PIPELINE_MODES,
                               ExperimentConfig, config_hash, parse_config,
                               parse_length, parse_mode_token, serialize_config)
from slmsqueeze.hologram import import_pgm

# a light-weight bench for CLI smoke tests: quarter-resolution panel
SMALL_BENCH = """
[slm]
width_px = 480
height_px = 270
pixel_pitch = 32 um

[mode]
kind = lg
p = 1
l = 1
w0 = 1.32 mm

[iris]
radius = 1.45 mm

[output]
directory = {out}
"""


class TestParseLength:
    @pytest.mark.parametrize("text,expected", [
        ("1.32 mm", 1.32e-3),
        ("8 um", 8e-6),
        ("45 cm", 0.45),
        ("1558 nm", 1.558e-6),
        ("0.45 m", 0.45),
        ("inf", math.inf),
    ])
    def test_valid(self, text, expected):
        assert parse_length(text) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("text", ["1.32", "fast mm", "3 parsec", "1 2 3"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_length(text)


class TestModeTokens:
    def test_round_trip_tokens(self):
        assert parse_mode_token("lg:2,3") == ("lg", 2, 3, 0, None)
        assert parse_mode_token("bg:1") == ("bg", 0, 0, 1, None)
        assert parse_mode_token("gauss") == ("gauss", 0, 0, 0, None)
        assert parse_mode_token("arbitrary:img.pgm") == ("arbitrary", 0, 0, 0, "img.pgm")

    def test_bad_tokens(self):
        for token in ("lg:2", "bg:x", "hg:0,0"):
            with pytest.raises(ConfigError):
                parse_mode_token(token)


class TestConfig:
    def test_defaults_reproduce_bench_parameters(self):
        cfg = ExperimentConfig()
        assert cfg.grating_period_px == 35
        assert cfg.pixel_pitch == 8e-6
        assert cfg.wavelength == 1558e-9
        assert cfg.w0 == 1.32e-3
        assert cfg.distance == 0.45
        assert cfg.eta_d == 0.90
        assert cfg.eta_r == 0.61
        assert cfg.input_db == -3.0
        assert len(cfg.pipeline_modes) == 12

    def test_parse_overrides(self):
        cfg = parse_config("[mode]\nkind = bg\nn = 2\nw0 = 2 mm\n"
                           "[propagation]\ndistance = 30 cm\n")
        assert cfg.mode_kind == "bg"
        assert cfg.mode_n == 2
        assert cfg.w0 == 2e-3
        assert cfg.distance == pytest.approx(0.30)

    def test_serialize_parse_fixed_point(self):
        cfg = parse_config("[mode]\nkind = lg\np = 3\nl = 2\nw0 = 0.97 mm\n"
                           "[hologram]\nlens_focal_length = 45 cm\n"
                           "[pipeline]\nmodes = lg:3,2 bg:0\n")
        text = serialize_config(cfg)
        again = parse_config(text)
        assert again == cfg
        assert serialize_config(again) == text
        assert config_hash(again) == config_hash(cfg)

    def test_hash_changes_with_content(self):
        a = ExperimentConfig()
        b = parse_config("[hologram]\ngrating_period_px = 20\n")
        assert config_hash(a) != config_hash(b)

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[slm]\neta_d = 1.5\n")
        with pytest.raises(ConfigError):
            parse_config("[mode]\nkind = hermite\n")
        with pytest.raises(ConfigError):
            parse_config("[mode]\nw0 = 1.32\n")   # missing unit
        with pytest.raises(ConfigError):
            parse_config("[hologram]\ngrating_period_px = 1\n")

    def test_with_mode(self):
        cfg = ExperimentConfig().with_mode("bg:2")
        assert cfg.mode_kind == "bg" and cfg.mode_n == 2
        assert cfg.mode_spec().label() == "bg_n2"


class TestCli:
    def write_config(self, tmp_path, extra=""):
        path = tmp_path / "bench.ini"
        path.write_text(SMALL_BENCH.format(out=tmp_path / "out") + extra)
        return str(path)

    def test_holo_default_panel_header(self, tmp_path):
        # full-resolution default panel: 1920x1080 8-bit PGM
        rc = main(["holo", "--out", str(tmp_path)])
        assert rc == 0
        with open(tmp_path / "hologram.pgm", "rb") as fh:
            assert fh.read(16) == b"P5\n1920 1080\n255"
        manifest = json.loads((tmp_path / "hologram_manifest.json").read_text())
        assert manifest["period_px"] == 35
        assert manifest["mode"] == "lg_p1_l1"

    def test_holo_gauss_no_grating_is_uniform(self, tmp_path):
        cfg = tmp_path / "flat.ini"
        cfg.write_text("[mode]\nkind = gauss\nw0 = 0.2 mm\n"
                       "[slm]\nwidth_px = 128\nheight_px = 96\n"
                       "[hologram]\ngrating_period_px = 2\n"
                       f"[output]\ndirectory = {tmp_path / 'o'}\n")
        # period 2 still draws a grating; disable by aperture radius tiny?
        # instead: gauss + no lens means mode layer is flat; check the
        # composed pattern equals the grating alone via import
        rc = main(["holo", "--config", str(cfg)])
        assert rc == 0
        gray = import_pgm(tmp_path / "o" / "hologram.pgm")
        assert gray.shape == (96, 128)
        # rows identical: no mode or lens structure, pure sawtooth
        assert np.all(gray == gray[0:1, :])

    def test_sim_writes_images_and_record(self, tmp_path):
        rc = main(["sim", "--config", self.write_config(tmp_path)])
        assert rc == 0
        out = tmp_path / "out"
        record = json.loads((out / "lg_p1_l1_efficiency.json").read_text())
        assert 0.0 < record["eta_without_iris"] <= 1.0
        assert record["eta_with_iris"] is not None
        for name in record["files"]:
            assert (out / name).exists()

    def test_noise_with_measured_values(self, tmp_path, capsys):
        rc = main(["noise", "--measured", "data/measured_reference.csv"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("mode_id,")
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 12
        assert all(r[-1] == "consistent" for r in rows)

    def test_noise_lossless_stage(self, tmp_path):
        cfg = tmp_path / "lossless.ini"
        cfg.write_text("[slm]\neta_d = 1.0\neta_r = 1.0\n"
                       "[pipeline]\nmodes = gauss\n")
        out_file = tmp_path / "budget.csv"
        rc = main(["noise", "--config", str(cfg), "--out-file", str(out_file)])
        assert rc == 0
        row = out_file.read_text().strip().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(-3.0, abs=1e-9)

    def test_config_command_round_trips(self, capsys):
        rc = main(["config"])
        assert rc == 0
        text = capsys.readouterr().out
        assert parse_config(text) == ExperimentConfig()

    def test_pipeline_single_mode_and_determinism(self, tmp_path):
        config = self.write_config(tmp_path, "[pipeline]\nmodes = lg:1,1\n")
        rc = main(["pipeline", "--config", config, "--out", str(tmp_path / "a")])
        assert rc == 0
        rc = main(["pipeline", "--config", config, "--out", str(tmp_path / "b")])
        assert rc == 0
        body_a = (tmp_path / "a" / "report.csv").read_bytes()
        body_b = (tmp_path / "b" / "report.csv").read_bytes()
        assert body_a == body_b
        lines = body_a.decode().splitlines()
        assert len(lines) == 3      # hash comment, header, one row

    def test_pipeline_manifest_covers_all_outputs(self, tmp_path):
        config = self.write_config(tmp_path, "[pipeline]\nmodes = lg:1,1 bg:0\n")
        out = tmp_path / "out"
        rc = main(["pipeline", "--config", config])
        assert rc == 0
        manifest = (out / "manifest.txt").read_text().splitlines()
        listed = {line for line in manifest[1:]}
        on_disk = {name for name in os.listdir(out) if name != "manifest.txt"}
        assert listed == on_disk

    def test_fit_command(self, tmp_path):
        from slmsqueeze.imageio import write_pgm16
        from slmsqueeze.grids import GridSpec
        from slmsqueeze.modes import ModeSpec, evaluate_mode

        grid = GridSpec.square(256, 8 * 1.32e-3)
        f = evaluate_mode(ModeSpec.lg(1, 1, 1.32e-3), grid, 1558e-9)
        image_path = tmp_path / "mode.pgm"
        write_pgm16(np.abs(f.samples) ** 2, image_path)
        out_csv = tmp_path / "section.csv"
        rc = main(["fit", "--image", str(image_path), "--mode", "lg:1,1",
                   "--pixel-pitch", str(grid.dx), "--out-file", str(out_csv)])
        assert rc == 0
        header = out_csv.read_text().splitlines()[0]
        assert header == "coordinate_m,measured,fitted"

    def test_exit_code_config_error(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[slm]\neta_d = 2.0\n")
        assert main(["sim", "--config", str(bad)]) == 2

    def test_exit_code_physics_guard(self, tmp_path):
        cfg = tmp_path / "alias.ini"
        # a very steep grating on a coarse grid walks out of the window
        cfg.write_text("[slm]\nwidth_px = 256\nheight_px = 256\n"
                       "pixel_pitch = 32 um\n"
                       "[mode]\nkind = gauss\nw0 = 1.32 mm\n"
                       "[hologram]\ngrating_period_px = 2\n"
                       "[propagation]\ndistance = 2 m\npadding_factor = 1\n"
                       f"[output]\ndirectory = {tmp_path / 'o'}\n")
        assert main(["sim", "--config", str(cfg)]) == 3

    def test_exit_code_io_error(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("file, not a directory")
        assert main(["holo", "--out", str(blocker)]) == 4
