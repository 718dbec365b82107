"""Shared fixture: figure CSVs produced by the simulator's own CLI.

The rendering package consumes the simulator only through its command-line
interface and file formats, so the fixture shells out to `enantiosim`.
"""

import shutil
import subprocess

import pytest


def run_cli(*args):
    exe = shutil.which("enantiosim")
    if exe is None:
        pytest.skip("enantiosim CLI not installed")
    proc = subprocess.run([exe, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def figure_data(tmp_path_factory):
    out = tmp_path_factory.mktemp("figure-data")
    run_cli("reproduce", "fig2", "--out-dir", str(out), "--threads", "4")
    run_cli("reproduce", "fig5", "--out-dir", str(out))
    run_cli("reproduce", "fig8", "--fast", "--grid", "5", "--out-dir", str(out),
            "--threads", "4")
    return out
