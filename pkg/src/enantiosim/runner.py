"""Paired left/right simulations, the transfer-contrast measure, and sweeps.

A scenario describes one experiment: which Hamiltonian model to use, the three
drive fields, discretization and noise settings, lifetimes, and frequency
deviations.  Running it propagates both mirror forms with bit-identical pulse
waveforms (same noise realizations) and reports the populations together with
the contrast

    D(t) = | P3_L(t) - P3_R(t) |,

the probability gap on the target level.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from . import __version__
from .dynamics import (
    QuantumState,
    TimeGrid,
    Trajectory,
    propagate_lindblad,
    propagate_schrodinger,
    suggest_step,
)
from .molecule import (
    Handedness,
    MoleculeSpec,
    build_effective_2level,
    build_lab_frame_4level,
    build_rwa_3level,
    cyclohexylmethanol,
    relaxation_channels,
)
from .pulses import (
    DriveField,
    Envelope,
    NoiseSpec,
    PulseSchedule,
    apply_noise,
    discretize,
)
from .serialize import envelope_to_dict, field_to_dict, noise_to_dict

MODELS = ("rwa3", "effective", "lab4")

# Integrator resolution (points per period of the fastest carrier), chosen per
# model by a step-halving convergence study; see tests/test_dynamics.py.
MODEL_CARRIER_RESOLUTION = {"rwa3": 160, "effective": 160, "lab4": 80}

ROLE_ORDER = ("p", "q", "s")

# Imperfectly cooled initial ensemble: a spot of population in the two upper
# working levels.
MIXED_STATE_POPULATIONS = (0.998, 0.001, 0.001)


class PhaseConditionError(ValueError):
    """Field phases leave the two paths neither fully constructive nor destructive."""


@dataclass(frozen=True)
class EsstScenario:
    """Complete description of one paired L/R simulation."""

    model: str
    fields: Mapping[str, DriveField]
    delta: float
    molecule: MoleculeSpec = field(default_factory=cyclohexylmethanol)
    initial_state: Union[str, QuantumState] = "ground"
    time_resolution: Optional[float] = None
    noise: Optional[Mapping[str, Sequence[NoiseSpec]]] = None
    lifetimes: Optional[tuple[float, float]] = None
    deviations: Optional[Mapping[str, float]] = None
    seed: int = 0
    duration: Optional[float] = None
    carrier_resolution: Optional[int] = None
    record_stride: Optional[int] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        fields = dict(self.fields)
        for role in fields:
            if role not in ROLE_ORDER:
                raise ValueError(f"unexpected field role {role!r}")
        for role in ("p", "s"):
            if role not in fields:
                raise ValueError(f"missing drive field role {role!r}")
        object.__setattr__(self, "fields", fields)
        if self.noise is not None:
            noise = {role: tuple(specs) for role, specs in dict(self.noise).items()}
            for role in noise:
                if role not in fields:
                    raise ValueError(f"noise given for unknown field role {role!r}")
            object.__setattr__(self, "noise", noise)
        if self.time_resolution is not None and self.time_resolution <= 0:
            raise ValueError("time_resolution must be > 0")
        if self.lifetimes is not None:
            tau2, tau3 = self.lifetimes
            if not (tau2 > 0 and tau3 > 0):
                raise ValueError("lifetimes must be positive (inf allowed)")
            if self.model == "effective":
                raise ValueError("relaxation is not supported in the effective model")
        if isinstance(self.initial_state, str) and self.initial_state not in ("ground", "mixed"):
            raise ValueError("initial_state must be 'ground', 'mixed', or a QuantumState")

    def with_phases(self, phi_p: float, phi_q: float, phi_s: float) -> "EsstScenario":
        fields = {
            "p": replace(self.fields["p"], phase=phi_p),
            "s": replace(self.fields["s"], phase=phi_s),
        }
        if "q" in self.fields:
            fields["q"] = replace(self.fields["q"], phase=phi_q)
        return replace(self, fields=fields)


@dataclass(frozen=True)
class EsstResult:
    """Time-resolved populations for both mirror forms plus the contrast."""

    times: np.ndarray
    populations_l: np.ndarray  # (n, 4); unused levels stay zero
    populations_r: np.ndarray
    d_trajectory: np.ndarray
    manifest: dict
    schedules: Optional[dict[str, PulseSchedule]] = None
    trajectories: Optional[tuple[Trajectory, Trajectory]] = None

    @property
    def final_d(self) -> float:
        return float(self.d_trajectory[-1])

    @property
    def final_p3(self) -> tuple[float, float]:
        return (float(self.populations_l[-1, 2]), float(self.populations_r[-1, 2]))


def fidelity_D(result: EsstResult) -> float:
    """Final-time contrast |P3_L - P3_R|."""
    return result.final_d


@dataclass(frozen=True)
class SweepTable:
    """Column-oriented sweep results; one row per grid point."""

    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"ragged sweep table: {lengths}")
        object.__setattr__(
            self,
            "columns",
            {name: np.asarray(col) for name, col in self.columns.items()},
        )

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))


def _derived_seed(*key) -> int:
    parts = [
        zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key
    ]
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


def _resolve_noise_seeds(scenario: EsstScenario) -> dict[str, tuple[NoiseSpec, ...]]:
    resolved: dict[str, tuple[NoiseSpec, ...]] = {}
    if scenario.noise is None:
        return resolved
    for role, specs in scenario.noise.items():
        role_idx = ROLE_ORDER.index(role)
        out = []
        for k, spec in enumerate(specs):
            if spec.seed is None:
                spec = replace(spec, seed=_derived_seed(scenario.seed, role_idx, k))
            out.append(spec)
        resolved[role] = tuple(out)
    return resolved


def _resolve_waveforms(
    scenario: EsstScenario,
) -> tuple[dict[str, DriveField], Optional[dict[str, PulseSchedule]], float, dict]:
    """Apply discretization and noise; returns fields, schedules, horizon, seed log."""
    horizon = scenario.duration
    if horizon is None:
        horizon = max(f.envelope.support[1] for f in scenario.fields.values())
    noise = _resolve_noise_seeds(scenario)
    seed_log = {
        role: [noise_to_dict(spec) for spec in specs] for role, specs in noise.items()
    }
    if scenario.time_resolution is None:
        if noise:
            raise ValueError("noise injection requires a finite time_resolution")
        return dict(scenario.fields), None, horizon, seed_log

    dt = scenario.time_resolution
    schedules: dict[str, PulseSchedule] = {}
    fields: dict[str, DriveField] = {}
    for role, f in scenario.fields.items():
        sched = discretize(f.envelope, dt, horizon)
        for spec in noise.get(role, ()):
            sched = apply_noise(sched, spec)
        schedules[role] = sched
        fields[role] = replace(f, envelope=sched)
    t_end = next(iter(schedules.values())).support[1]
    return fields, schedules, t_end, seed_log


def _build_operator(scenario, fields, handedness, dim):
    if scenario.model == "rwa3":
        return build_rwa_3level(
            scenario.molecule, fields, handedness, scenario.delta,
            deviations=scenario.deviations, dim=dim,
        )
    if scenario.model == "effective":
        return build_effective_2level(
            scenario.molecule, fields, handedness, scenario.delta,
            deviations=scenario.deviations,
        )
    return build_lab_frame_4level(
        scenario.molecule, fields, handedness, delta=scenario.delta,
        deviations=scenario.deviations,
    )


def _initial_state(scenario: EsstScenario, dim: int, need_density: bool) -> QuantumState:
    init = scenario.initial_state
    if isinstance(init, QuantumState):
        if init.dim != dim:
            raise ValueError(f"initial state dimension {init.dim} does not match model dimension {dim}")
        return init.as_density() if need_density and init.kind == "vector" else init
    if init == "ground":
        state = QuantumState.basis(dim, 0)
        return state.as_density() if need_density else state
    pops = list(MIXED_STATE_POPULATIONS) + [0.0] * (dim - 3)
    return QuantumState.mixed_diagonal(pops)


def run_esst(scenario: EsstScenario, keep_trajectories: bool = False) -> EsstResult:
    """Propagate both mirror forms through one scenario.

    Both runs consume the identical resolved waveforms (including noise
    realizations), so the contrast D reflects the physics and not the noise
    draw.
    """
    dim = 3
    if scenario.model == "lab4":
        dim = 4
    elif scenario.model == "rwa3" and scenario.lifetimes is not None:
        dim = 4  # relaxation involves the fourth level

    fields, schedules, t_end, seed_log = _resolve_waveforms(scenario)
    channels = (
        relaxation_channels(scenario.molecule, *scenario.lifetimes)
        if scenario.lifetimes is not None
        else []
    )
    need_density = bool(channels) or scenario.initial_state == "mixed" or (
        isinstance(scenario.initial_state, QuantumState)
        and scenario.initial_state.kind == "density"
    )
    state0 = _initial_state(scenario, dim, need_density)

    resolution = scenario.carrier_resolution or MODEL_CARRIER_RESOLUTION[scenario.model]
    op_l = _build_operator(scenario, fields, Handedness.L, dim)
    op_r = _build_operator(scenario, fields, Handedness.R, dim)
    step = suggest_step(op_l, t_end, carrier_resolution=resolution)
    grid = TimeGrid(0.0, t_end, step, record_stride=scenario.record_stride)

    if state0.kind == "density":
        traj_l = propagate_lindblad(op_l, channels, state0, grid)
        traj_r = propagate_lindblad(op_r, channels, state0, grid)
    else:
        traj_l = propagate_schrodinger(op_l, state0, grid)
        traj_r = propagate_schrodinger(op_r, state0, grid)

    pops_l = _pad_populations(traj_l.populations)
    pops_r = _pad_populations(traj_r.populations)
    d_traj = np.abs(pops_l[:, 2] - pops_r[:, 2])

    manifest = {
        "model": scenario.model,
        "molecule": scenario.molecule.name,
        "delta_rad_per_us": scenario.delta,
        "pulses": {role: field_to_dict(f) for role, f in scenario.fields.items()},
        "initial_state": scenario.initial_state
        if isinstance(scenario.initial_state, str)
        else "explicit",
        "time_resolution_us": scenario.time_resolution,
        "noise": seed_log,
        "lifetimes_us": list(scenario.lifetimes) if scenario.lifetimes else None,
        "deviations_rad_per_us": dict(scenario.deviations or {}),
        "seed": scenario.seed,
        "duration_us": t_end,
        "solver": {
            "method": "rk4-fixed-step",
            "step_us": step,
            "n_steps": int(round(t_end / step)),
            "carrier_resolution": resolution,
        },
        "version": __version__,
        "final_d": float(d_traj[-1]),
        "final_p3_l": float(pops_l[-1, 2]),
        "final_p3_r": float(pops_r[-1, 2]),
    }
    return EsstResult(
        times=traj_l.times,
        populations_l=pops_l,
        populations_r=pops_r,
        d_trajectory=d_traj,
        manifest=manifest,
        schedules=schedules,
        trajectories=(traj_l, traj_r) if keep_trajectories else None,
    )


def _pad_populations(populations: np.ndarray) -> np.ndarray:
    n, dim = populations.shape
    if dim == 4:
        return populations
    out = np.zeros((n, 4))
    out[:, :dim] = populations
    return out


def run_esst_ensemble(
    scenario: EsstScenario, n_realizations: int, threads: int = 1
) -> tuple[float, float, np.ndarray]:
    """Mean and standard deviation of the final contrast over noise seeds."""
    seeds = [_derived_seed(scenario.seed, "realization", k) for k in range(n_realizations)]
    scenarios = [replace(scenario, seed=s) for s in seeds]
    finals = np.array([r.final_d for r in _map_runs(run_esst, scenarios, threads)])
    return float(np.mean(finals)), float(np.std(finals)), finals


def _map_runs(func: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def _check_grid(values: Sequence[float], name: str):
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError(f"empty {name} grid")
    diffs = np.diff(arr)
    if arr.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError(f"{name} grid must be strictly monotone")
    return arr


def sweep_two_photon_transfer(
    pulse_kind: str,
    ratios: Sequence[float],
    omega0: float = 1.0,
    molecule: Optional[MoleculeSpec] = None,
    carrier_resolution: Optional[int] = None,
    threads: int = 1,
) -> SweepTable:
    """Final target-level population via the two-photon path alone.

    ``pulse_kind`` selects square or raised-cosine pump/Stokes pulses with the
    full-transfer durations T = 2 pi delta / omega0^2 and
    T = 16 pi delta / (3 omega0^2) respectively.  The one-photon field is off,
    so both mirror forms behave identically.
    """
    from .pulses import solve_area_conditions

    if pulse_kind not in ("square", "cos_ramp"):
        raise ValueError("pulse_kind must be 'square' or 'cos_ramp'")
    grid = _check_grid(ratios, "ratio")
    molecule = molecule or cyclohexylmethanol()
    family = "two_photon_square" if pulse_kind == "square" else "two_photon_cos_ramp"

    def one(ratio: float) -> float:
        delta = ratio * omega0
        sol = solve_area_conditions(family, omega0, delta)
        fields = {
            "p": DriveField("p", sol.pump_envelope),
            "s": DriveField("s", sol.stokes_envelope),
        }
        scenario = EsstScenario(
            model="rwa3",
            fields=fields,
            delta=delta,
            molecule=molecule,
            carrier_resolution=carrier_resolution,
        )
        return run_esst(scenario).final_p3[0]

    finals = _map_runs(one, list(grid), threads)
    return SweepTable(
        columns={"ratio": grid, "p3_final": np.asarray(finals)},
        meta={"pulse_kind": pulse_kind, "omega0_rad_per_us": omega0},
    )


def sweep_frequency_deviation(
    scenario: EsstScenario,
    pulse: str,
    deviations: Sequence[float],
    n_realizations: int = 1,
    threads: int = 1,
) -> SweepTable:
    """Final contrast as one pulse's frequency is shifted off resonance."""
    if pulse not in ROLE_ORDER:
        raise ValueError(f"pulse must be one of {ROLE_ORDER}, got {pulse!r}")
    grid = _check_grid(deviations, "deviation")

    def one(point):
        index, dev = point
        devs = dict(scenario.deviations or {})
        devs[pulse] = dev
        s = replace(scenario, deviations=devs, seed=_derived_seed(scenario.seed, pulse, index))
        if scenario.noise and n_realizations > 1:
            mean, std, _ = run_esst_ensemble(s, n_realizations)
            return mean, std, math.nan, math.nan
        result = run_esst(s)
        return result.final_d, 0.0, *result.final_p3

    results = _map_runs(one, list(enumerate(grid)), threads)
    columns = {
        "deviation_rad_per_us": grid,
        "d_final": np.array([r[0] for r in results]),
        "p3_l_final": np.array([r[2] for r in results]),
        "p3_r_final": np.array([r[3] for r in results]),
    }
    if scenario.noise and n_realizations > 1:
        columns["d_std"] = np.array([r[1] for r in results])
        del columns["p3_l_final"], columns["p3_r_final"]
    return SweepTable(columns=columns, meta={"pulse": pulse})


def sweep_lifetimes(
    scenario: EsstScenario,
    tau2_grid: Sequence[float],
    tau3_grid: Sequence[float],
    threads: int = 1,
) -> SweepTable:
    """Final contrast over a 2-D grid of upper-level lifetimes."""
    g2 = _check_grid(tau2_grid, "tau2")
    g3 = _check_grid(tau3_grid, "tau3")
    points = [(t2, t3) for t2 in g2 for t3 in g3]

    def one(point):
        t2, t3 = point
        result = run_esst(replace(scenario, lifetimes=(t2, t3)))
        return result.final_d, *result.final_p3

    finals = _map_runs(one, points, threads)
    return SweepTable(
        columns={
            "tau2_us": np.array([p[0] for p in points]),
            "tau3_us": np.array([p[1] for p in points]),
            "d_final": np.array([r[0] for r in finals]),
            "p3_l_final": np.array([r[1] for r in finals]),
            "p3_r_final": np.array([r[2] for r in finals]),
        },
        meta={"model": scenario.model},
    )


def phase_switch(
    scenario: EsstScenario, phi_p: float, phi_q: float, phi_s: float
) -> EsstResult:
    """Run with explicit field phases, enforcing the interference condition.

    The accumulated phase chi = phi_q - phi_p + phi_s must equal an integer
    multiple of pi; an even multiple excites the R form, an odd multiple the
    L form.  Other phase triples leave the interference partial and are
    rejected.
    """
    chi = phi_q - phi_p + phi_s
    n = round(chi / math.pi)
    if abs(chi - n * math.pi) > 1e-9:
        raise PhaseConditionError(
            f"phi_q - phi_p + phi_s = {chi} is {abs(chi - n*math.pi):.3e} rad away "
            "from an integer multiple of pi; interference would be partial"
        )
    result = run_esst(scenario.with_phases(phi_p, phi_q, phi_s))
    result.manifest["interference_order"] = int(n)
    result.manifest["excited_handedness"] = "L" if n % 2 else "R"
    return result
