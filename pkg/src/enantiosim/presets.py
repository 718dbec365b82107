"""Bundled parameter sets behind the figure data sets the CLI reproduces.

Everything here composes the public API: solve the pulse-area conditions for a
waveform family, wrap the envelopes in drive fields, and assemble a scenario.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .molecule import cyclohexylmethanol
from .pulses import AwgnNoise, DriveField, NoiseSpec, UniformFluctuation, solve_area_conditions
from .runner import EsstScenario

Q_WAVEFORM_FAMILIES = ("cos_ramp", "gaussian", "cos_squared")

# Rotating-frame demonstration scale (one-photon peak sets the unit).
FIG3_OMEGA_PRIME0 = 1.0
FIG3_OMEGA0 = 10.0 * FIG3_OMEGA_PRIME0
FIG3_DELTA = 50.0 * FIG3_OMEGA_PRIME0

# Molecule-scale parameters (rad/us) for the lab-frame runs.
FIG5_OMEGA0 = 12.0
FIG5_OMEGA_PRIME0 = 2.0
FIG5_DELTA = 60.0
FIG5_DT = 0.05
FIG6_DT = 0.01

FIG6_RSN_DB = 10.0
FIG6_ETA = 0.5

FIG2_DEFAULT_RATIOS = np.round(np.arange(0.5, 12.0 + 1e-9, 0.25), 10)
FIG7_DEFAULT_DEVIATIONS = np.round(np.linspace(-1.0, 1.0, 41), 10)
FIG8_DEFAULT_GRID_SIZE = 21
FIG8_LIFETIME_RANGE = (1.0, 1000.0)


def interference_fields(
    family: str,
    omega0: float,
    delta: float,
    omega_prime0: Optional[float] = None,
    n_l: int = 0,
    n_r: int = 0,
) -> dict[str, DriveField]:
    """Drive fields for one waveform family with solved area conditions."""
    sol = solve_area_conditions(family, omega0, delta, omega_prime0, n_l, n_r)
    return {
        "p": DriveField("p", sol.pump_envelope),
        "s": DriveField("s", sol.stokes_envelope),
        "q": DriveField("q", sol.q_envelope),
    }


def fig3_scenario(family: str, **overrides) -> EsstScenario:
    """Rotating-frame run showing waveform and time-order flexibility."""
    if family not in Q_WAVEFORM_FAMILIES:
        raise ValueError(f"family must be one of {Q_WAVEFORM_FAMILIES}")
    fields = interference_fields(family, FIG3_OMEGA0, FIG3_DELTA, FIG3_OMEGA_PRIME0)
    defaults = dict(model="rwa3", fields=fields, delta=FIG3_DELTA)
    defaults.update(overrides)
    return EsstScenario(**defaults)


def fig5_scenario(**overrides) -> EsstScenario:
    """Lab-frame four-level run with 50 ns waveform resolution and mixed start."""
    fields = interference_fields("gaussian", FIG5_OMEGA0, FIG5_DELTA, FIG5_OMEGA_PRIME0)
    defaults = dict(
        model="lab4",
        fields=fields,
        delta=FIG5_DELTA,
        molecule=cyclohexylmethanol(),
        initial_state="mixed",
        time_resolution=FIG5_DT,
    )
    defaults.update(overrides)
    return EsstScenario(**defaults)


def fig6_noise(kind: str) -> list[NoiseSpec]:
    if kind == "awgn":
        return [AwgnNoise(FIG6_RSN_DB)]
    if kind == "fluctuation":
        return [UniformFluctuation(FIG6_ETA)]
    if kind == "both":
        return [AwgnNoise(FIG6_RSN_DB), UniformFluctuation(FIG6_ETA)]
    raise ValueError("kind must be 'awgn', 'fluctuation', or 'both'")


def fig6_scenario(kind: str = "awgn", seed: int = 0, **overrides) -> EsstScenario:
    """Fig. 5 setup at 10 ns resolution with amplitude noise on all pulses."""
    specs = fig6_noise(kind)
    defaults = dict(
        time_resolution=FIG6_DT,
        noise={role: list(specs) for role in ("p", "q", "s")},
        seed=seed,
    )
    defaults.update(overrides)
    return fig5_scenario(**defaults)


def fig7_base_scenario(**overrides) -> EsstScenario:
    """Clean 10 ns-resolution base used for the frequency-deviation sweeps."""
    defaults = dict(time_resolution=FIG6_DT)
    defaults.update(overrides)
    return fig5_scenario(**defaults)


def fig8_base_scenario(fast: bool = False, **overrides) -> EsstScenario:
    """Base scenario for the lifetime sweeps (lab frame, or rotating frame when fast)."""
    defaults = dict(time_resolution=FIG6_DT)
    if fast:
        defaults["model"] = "rwa3"
    defaults.update(overrides)
    return fig5_scenario(**defaults)


def fig8_lifetime_grid(size: int = FIG8_DEFAULT_GRID_SIZE) -> np.ndarray:
    lo, hi = FIG8_LIFETIME_RANGE
    return np.logspace(np.log10(lo), np.log10(hi), size)
