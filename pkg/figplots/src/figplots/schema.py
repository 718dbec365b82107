"""CSV contracts for the simulator's figure data sets.

Every figure id maps to the files it consumes and the exact header each file
must carry.  Loading validates the header and refuses empty or malformed
inputs; no value is ever recomputed, so anything plotted exists verbatim in a
CSV.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

TRAJECTORY_HEADER = [
    "t_us", "P1L", "P2L", "P3L", "P4L", "P1R", "P2R", "P3R", "P4R", "D",
]
WAVEFORM_HEADER = [
    "t_us", "omega_p_rad_per_us", "omega_q_rad_per_us", "omega_s_rad_per_us",
]

# figure id -> {logical name: (filename, header)}
SCHEMAS: dict[str, dict[str, tuple[str, list[str]]]] = {
    "fig2": {
        "transfer": ("fig2_transfer.csv", ["ratio", "P3_square", "P3_shaped"]),
    },
    "fig3": {
        "cos_ramp": ("fig3_cos_ramp_trajectory.csv", TRAJECTORY_HEADER),
        "gaussian": ("fig3_gaussian_trajectory.csv", TRAJECTORY_HEADER),
        "cos_squared": ("fig3_cos_squared_trajectory.csv", TRAJECTORY_HEADER),
    },
    "fig5": {
        "waveforms": ("fig5_waveforms.csv", WAVEFORM_HEADER),
        "trajectory": ("fig5_trajectory.csv", TRAJECTORY_HEADER),
    },
    "fig6": {
        "awgn_waveforms": ("fig6_awgn_waveforms.csv", WAVEFORM_HEADER),
        "awgn_trajectory": ("fig6_awgn_trajectory.csv", TRAJECTORY_HEADER),
        "fluctuation_waveforms": ("fig6_fluctuation_waveforms.csv", WAVEFORM_HEADER),
        "fluctuation_trajectory": ("fig6_fluctuation_trajectory.csv", TRAJECTORY_HEADER),
    },
    "fig7": {
        "deviation": ("fig7_deviation.csv", ["delta_rad_per_us", "D_p", "D_q", "D_s"]),
    },
    "fig8": {
        "lifetimes": ("fig8_lifetimes.csv", ["tau2_us", "tau3_us", "D_final"]),
    },
}


class SchemaError(ValueError):
    """An input CSV does not match its documented schema."""


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: a figure id, its input directory, and the target file."""

    figure: str
    input_dir: str
    output_path: str
    style: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.figure not in SCHEMAS:
            raise SchemaError(
                f"unknown figure {self.figure!r}; expected one of {sorted(SCHEMAS)}"
            )


def load_csv(path: str, expected_header: list[str]) -> dict[str, np.ndarray]:
    """Read one CSV, enforcing the exact expected header and numeric rows."""
    if not os.path.exists(path):
        raise SchemaError(f"missing input file {path}")
    with open(path) as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        if header != expected_header:
            raise SchemaError(
                f"{path} header mismatch: expected {expected_header}, found {header}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path} contains a header but no data rows")
    try:
        data = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"{path} has a non-numeric cell: {exc}") from exc
    if data.shape[1] != len(expected_header):
        raise SchemaError(f"{path} has ragged rows")
    return {name: data[:, k] for k, name in enumerate(expected_header)}


def load_inputs(job: PlotJob) -> dict[str, dict[str, np.ndarray]]:
    """Load and validate every CSV the figure consumes."""
    out = {}
    for name, (filename, header) in SCHEMAS[job.figure].items():
        out[name] = load_csv(os.path.join(job.input_dir, filename), header)
    return out
