"""Command-line behavior: outputs, validation exits, and reproducibility."""

import csv
import json
import math
import os
import subprocess
import sys

import pytest
import yaml

from enantiosim.cli import main

FIG3_CONFIG = """
seed: 7
scenario:
  preset: fig3_gaussian
"""

RAMAN_CONFIG = """
m3wm:
  method: resonant_raman
  omega_drive_rad_per_us: 2.4142135623730951
  omega_twist_rad_per_us: 1.0
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as handle:
        return list(csv.DictReader(handle))


class TestSimulate:
    def test_writes_trajectory_and_manifest(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.yaml", FIG3_CONFIG)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out-dir", str(out)]) == 0
        rows = read_csv(out / "trajectory.csv")
        assert list(rows[0]) == [
            "t_us", "P1L", "P2L", "P3L", "P4L", "P1R", "P2R", "P3R", "P4R", "D",
        ]
        assert float(rows[0]["D"]) == 0.0
        assert float(rows[-1]["D"]) > 0.99
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["run"]["model"] == "rwa3"
        assert manifest["run_config"]["seed"] == 7

    def test_rerun_from_manifest_is_byte_identical(self, tmp_path):
        cfg = write(tmp_path, "run.yaml", FIG3_CONFIG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", cfg, "--out-dir", str(out1)]) == 0
        assert main(["simulate", "--config", str(out1 / "manifest.json"),
                     "--out-dir", str(out2)]) == 0
        assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()

    def test_eta_out_of_range_exits_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.yaml", """
scenario:
  preset: fig3_gaussian
  time_resolution_us: 0.05
  noise:
    p: [{kind: fluctuation, eta: 1.5}]
""")
        assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert "eta" in err and "[0, 1]" in err

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.yaml", "scenario: {preset: fig3_gaussian, omega: 3}\n")
        assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
        assert "omega" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.yaml"),
                     "--out-dir", str(tmp_path)]) == 2

    def test_csv_numbers_have_12_significant_digits(self, tmp_path):
        cfg = write(tmp_path, "run.yaml", FIG3_CONFIG)
        out = tmp_path / "out"
        main(["simulate", "--config", cfg, "--out-dir", str(out)])
        with open(out / "trajectory.csv") as handle:
            handle.readline()
            cells = handle.readline().strip().split(",")
        for cell in cells:
            assert "," not in cell
            mantissa = cell.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
            assert len(mantissa) <= 12


class TestReproduce:
    def test_fig3_emits_three_trajectories(self, tmp_path):
        out = tmp_path / "fig3"
        assert main(["reproduce", "fig3", "--out-dir", str(out)]) == 0
        names = sorted(os.listdir(out))
        assert names == [
            "fig3_cos_ramp_trajectory.csv",
            "fig3_cos_squared_trajectory.csv",
            "fig3_gaussian_trajectory.csv",
            "fig3_manifest.json",
        ]

    def test_unknown_figure_exits_2(self, tmp_path):
        assert main(["reproduce", "fig12", "--out-dir", str(tmp_path)]) == 2

    def test_fig2_columns(self, tmp_path):
        out = tmp_path / "fig2"
        assert main(["reproduce", "fig2", "--out-dir", str(out), "--threads", "4"]) == 0
        rows = read_csv(out / "fig2_transfer.csv")
        assert list(rows[0]) == ["ratio", "P3_square", "P3_shaped"]

    def test_fig8_fast_coarse_grid(self, tmp_path):
        out = tmp_path / "fig8"
        assert main(["reproduce", "fig8", "--fast", "--grid", "3",
                     "--out-dir", str(out), "--threads", "4"]) == 0
        rows = read_csv(out / "fig8_lifetimes.csv")
        assert list(rows[0]) == ["tau2_us", "tau3_us", "D_final"]
        assert len(rows) == 9


class TestM3wm:
    def test_raman_summary(self, tmp_path):
        cfg = write(tmp_path, "m3wm.yaml", RAMAN_CONFIG)
        out = tmp_path / "m3wm"
        assert main(["m3wm", "--config", cfg, "--out-dir", str(out)]) == 0
        summary = read_csv(out / "m3wm_summary.csv")
        by_ee = {float(r["sample_ee"]): r for r in summary}
        assert float(by_ee[0.0]["coherence_abs"]) == pytest.approx(0.5, abs=5e-3)
        # conventional readout is odd in the excess, the transfer-assisted
        # prediction stays finite for the racemic sample
        assert float(by_ee[1.0]["conventional_amplitude"]) == pytest.approx(
            -float(by_ee[-1.0]["conventional_amplitude"])
        )
        assert abs(float(by_ee[0.0]["predicted_amplitude"])) > 0.0
        coh = read_csv(out / "m3wm_coherence.csv")
        assert list(coh[0]) == ["t_us", "coherence_abs", "P_202", "P_303", "P_313"]

    def test_constraint_violation_exits_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.yaml", """
m3wm:
  method: resonant_raman
  omega_drive_rad_per_us: 2.0
  omega_twist_rad_per_us: 1.0
""")
        assert main(["m3wm", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
        assert "ratio" in capsys.readouterr().err


class TestNumericsExit:
    def test_failed_contrast_gate_exits_3(self, tmp_path, capsys):
        cfg = write(tmp_path, "gated.yaml", """
m3wm:
  method: drive_then_twist
  omega_drive_rad_per_us: 1.0
  pipeline:
    scenario: {preset: fig5, model: rwa3}
    gate_d: 0.9999
""")
        assert main(["m3wm", "--config", cfg, "--out-dir", str(tmp_path)]) == 3
        assert "numerical diagnostic" in capsys.readouterr().err


class TestBundledConfigs:
    def test_every_bundled_config_validates(self):
        import glob

        from enantiosim.config import load_config, parse_run_config

        root = os.path.join(os.path.dirname(__file__), "..", "configs")
        paths = sorted(glob.glob(os.path.join(root, "*.yaml")))
        assert len(paths) >= 8
        for path in paths:
            parse_run_config(load_config(path))

    def test_lab_frame_config_reaches_reference_contrast(self, tmp_path):
        cfg = os.path.join(os.path.dirname(__file__), "..", "configs", "fig5.yaml")
        out = tmp_path / "fig5"
        assert main(["simulate", "--config", cfg, "--out-dir", str(out)]) == 0
        rows = read_csv(out / "trajectory.csv")
        assert abs(float(rows[-1]["D"]) - 0.993) <= 0.003


class TestExportPreset:
    def test_round_trips_through_config(self, tmp_path, capsys):
        out_file = tmp_path / "molecule.yaml"
        assert main(["export-preset", "--out", str(out_file)]) == 0
        data = yaml.safe_load(out_file.read_text())
        from enantiosim.molecule import MoleculeSpec, cyclohexylmethanol

        assert MoleculeSpec.from_dict(data["molecule"]) == cyclohexylmethanol()

    def test_stdout_mode(self, capsys):
        assert main(["export-preset"]) == 0
        data = yaml.safe_load(capsys.readouterr().out)
        assert data["molecule"]["name"] == "cyclohexylmethanol"


class TestThreadsEnvironment:
    def test_env_variable_must_be_integer(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ENANTIOSIM_THREADS", "many")
        cfg = write(tmp_path, "sweep.yaml", """
sweep:
  kind: two_photon
  ratios: [2.0, 3.0]
""")
        assert main(["sweep", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
        assert "ENANTIOSIM_THREADS" in capsys.readouterr().err

    def test_flag_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENANTIOSIM_THREADS", "many")
        cfg = write(tmp_path, "sweep.yaml", """
sweep:
  kind: two_photon
  ratios: [2.0, 3.0]
""")
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", cfg, "--out-dir", str(out),
                     "--threads", "2"]) == 0
        rows = read_csv(out / "sweep.csv")
        assert len(rows) == 2


class TestConsoleScript:
    def test_installed_entry_point(self):
        proc = subprocess.run(
            ["enantiosim", "--version"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "enantiosim" in proc.stdout
