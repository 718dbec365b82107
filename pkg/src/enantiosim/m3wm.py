"""Coherence-transfer readout stage on the second cyclic configuration.

After the selective transfer has parked one mirror form in the 2_02 level,
three alternative pulse protocols prepare the maximum coherence between 2_02
and 3_13 via the intermediate 3_03 level (in-package indices 0, 2, 1 in that
order: 0 = 2_02, 1 = 3_03, 2 = 3_13):

* ``drive_then_twist``  - a pi/2 drive pulse followed by a pi twist pulse,
* ``effective_two_photon`` - both pulses detuned far from the intermediate
  level, with the second-order coupling integrating to pi/2,
* ``resonant_raman``    - both pulses resonant at the amplitude ratio
  1 + sqrt(2), driving the bright superposition through one full cycle.

The emitted free-induction signal is modelled analytically: its amplitude is
proportional to the enantiomeric excess of the emitting population times the
magnitude of the dipole triple product, and its phase offset of +/- pi/2 flips
with the triple-product sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    Carrier,
    CouplingTerm,
    QuantumState,
    TimeDependentOperator,
    TimeGrid,
    coherence,
    population,
    propagate_lindblad,
    propagate_schrodinger,
    suggest_step,
)
from .molecule import Handedness, dipole_triple_product
from .pulses import Square
from .runner import EsstResult, EsstScenario, run_esst

M3WM_METHODS = ("drive_then_twist", "effective_two_photon", "resonant_raman")
RAMAN_RATIO = 1.0 + math.sqrt(2.0)

# Transition frequencies of the readout triple (metadata only; the
# rotating-frame dynamics depend on detunings, not carriers).
DRIVE_FREQUENCY_MHZ = 7035.9
TWIST_FREQUENCY_MHZ = 2017.5
LISTEN_FREQUENCY_MHZ = 9053.4

# Magnitude of the a,b,c dipole triple product for the bundled molecule
# (orthogonal dipole types: 0.4 * 1.2 * 0.8 Debye^3).
DEFAULT_TRIPLE_PRODUCT = 0.384

_AREA_TOL = 1e-9


class M3wmConstraintError(ValueError):
    """A method-specific pulse constraint is violated."""


class M3wmGateError(RuntimeError):
    """The selective-transfer stage did not reach the required contrast."""


@dataclass(frozen=True)
class M3wmConfig:
    """Protocol selection and pulse parameters for the readout stage.

    Durations default to the values implied by each method's area conditions;
    explicit overrides are checked against those conditions.
    """

    method: str
    omega_drive: float = 1.0
    omega_twist: Optional[float] = None
    detuning: Optional[float] = None
    drive_duration: Optional[float] = None
    twist_duration: Optional[float] = None
    duration: Optional[float] = None
    drive_frequency_mhz: float = DRIVE_FREQUENCY_MHZ
    twist_frequency_mhz: float = TWIST_FREQUENCY_MHZ
    listen_frequency_mhz: float = LISTEN_FREQUENCY_MHZ

    def __post_init__(self):
        if self.method not in M3WM_METHODS:
            raise ValueError(f"method must be one of {M3WM_METHODS}, got {self.method!r}")
        if self.omega_drive <= 0:
            raise ValueError("omega_drive must be > 0")
        if self.omega_twist is None:
            default_twist = (
                self.omega_drive / RAMAN_RATIO
                if self.method == "resonant_raman"
                else self.omega_drive
            )
            object.__setattr__(self, "omega_twist", default_twist)
        if self.omega_twist <= 0:
            raise ValueError("omega_twist must be > 0")
        self._validate_method()

    def _validate_method(self):
        w_d, w_t = self.omega_drive, self.omega_twist
        if self.method == "drive_then_twist":
            t_d = self.drive_duration if self.drive_duration is not None else 0.5 * math.pi / w_d
            t_t = self.twist_duration if self.twist_duration is not None else math.pi / w_t
            if abs(w_d * t_d - 0.5 * math.pi) > _AREA_TOL:
                raise M3wmConstraintError(
                    f"drive area {w_d * t_d:.6f} rad must equal pi/2"
                )
            if abs(w_t * t_t - math.pi) > _AREA_TOL:
                raise M3wmConstraintError(
                    f"twist area {w_t * t_t:.6f} rad must equal pi"
                )
        elif self.method == "effective_two_photon":
            if self.detuning is None:
                raise M3wmConstraintError("effective_two_photon requires a detuning")
            if self.detuning < 10.0 * max(w_d, w_t):
                raise M3wmConstraintError(
                    f"detuning {self.detuning} must dominate the Rabi amplitudes "
                    f"(ratio {self.detuning / max(w_d, w_t):.2f} < 10)"
                )
            t = self.duration if self.duration is not None else self._effective_duration()
            area = w_d * w_t / (2.0 * self.detuning) * t
            if abs(area - 0.5 * math.pi) > _AREA_TOL:
                raise M3wmConstraintError(
                    f"second-order area {area:.6f} rad must equal pi/2"
                )
        else:
            if abs(w_d / w_t - RAMAN_RATIO) > 1e-9 * RAMAN_RATIO:
                raise M3wmConstraintError(
                    f"amplitude ratio {w_d / w_t:.9f} must equal 1 + sqrt(2) "
                    f"= {RAMAN_RATIO:.9f}"
                )
            t = self.duration if self.duration is not None else self._raman_duration()
            area = math.hypot(w_d, w_t) * t
            if abs(area - 2.0 * math.pi) > _AREA_TOL:
                raise M3wmConstraintError(
                    f"bright-state rotation {area:.6f} rad must equal 2 pi "
                    "(one full cycle)"
                )

    def _effective_duration(self) -> float:
        return math.pi * self.detuning / (self.omega_drive * self.omega_twist)

    def _raman_duration(self) -> float:
        return 2.0 * math.pi / math.hypot(self.omega_drive, self.omega_twist)

    @property
    def stage_durations(self) -> tuple[float, ...]:
        if self.method == "drive_then_twist":
            t_d = self.drive_duration if self.drive_duration is not None else 0.5 * math.pi / self.omega_drive
            t_t = self.twist_duration if self.twist_duration is not None else math.pi / self.omega_twist
            return (t_d, t_t)
        if self.method == "effective_two_photon":
            return (self.duration if self.duration is not None else self._effective_duration(),)
        return (self.duration if self.duration is not None else self._raman_duration(),)

    @property
    def total_duration(self) -> float:
        return sum(self.stage_durations)


@dataclass(frozen=True)
class ListenSignalModel:
    """Analytic model of the emitted readout signal.

    The carrier frequency is kept opaque (it enters literally as
    cos(2 pi f t + ...)); only the amplitude, its linearity in the excess, and the sign
    flip with the dipole triple product are physically meaningful here.
    """

    ee: float
    triple_product_sign: float
    frequency: float = LISTEN_FREQUENCY_MHZ
    triple_product_magnitude: float = DEFAULT_TRIPLE_PRODUCT

    def __post_init__(self):
        if not -1.0 <= self.ee <= 1.0:
            raise ValueError(f"ee must lie in [-1, 1], got {self.ee}")
        if self.triple_product_sign not in (-1.0, 1.0, -1, 1):
            raise ValueError("triple_product_sign must be +1 or -1")


def listen_signal(model: ListenSignalModel, t) -> float:
    """Emitted signal (arbitrary units) at time t."""
    phase = 0.5 * math.pi * model.triple_product_sign
    return (
        model.ee
        * model.triple_product_magnitude
        * np.cos(2.0 * math.pi * model.frequency * np.asarray(t, dtype=float) + phase)
    )


@dataclass(frozen=True)
class EeEstimate:
    """Excess estimate from a target/reference amplitude comparison."""

    value: float
    clamped: bool


def estimate_ee(
    target_amplitude: float,
    reference_amplitude: float,
    reference_ee: float,
    sign: float = 1.0,
) -> EeEstimate:
    """Infer the enantiomeric excess by normalizing against a known sample."""
    if reference_amplitude == 0.0:
        raise ValueError("reference amplitude must be nonzero")
    raw = sign * reference_ee * target_amplitude / reference_amplitude
    if abs(raw) > 1.0:
        return EeEstimate(value=math.copysign(1.0, raw), clamped=True)
    return EeEstimate(value=raw, clamped=False)


def _ket_bra3(i: int, j: int) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    out[i, j] = 1.0
    return out


def _stage_operators(cfg: M3wmConfig) -> list[tuple[TimeDependentOperator, float]]:
    w_d, w_t = cfg.omega_drive, cfg.omega_twist
    durations = cfg.stage_durations
    if cfg.method == "drive_then_twist":
        t_d, t_t = durations
        drive = TimeDependentOperator(
            3, [CouplingTerm(0.5 * _ket_bra3(1, 0), Square(w_d, t_d))]
        )
        twist = TimeDependentOperator(
            3, [CouplingTerm(0.5 * _ket_bra3(1, 2), Square(w_t, t_t))]
        )
        return [(drive, t_d), (twist, t_t)]
    (t,) = durations
    if cfg.method == "effective_two_photon":
        op = TimeDependentOperator(
            3,
            [
                CouplingTerm(0.5 * _ket_bra3(1, 0), Square(w_d, t)),
                CouplingTerm(0.5 * _ket_bra3(1, 2), Square(w_t, t)),
            ],
            static_diag=[0.0, cfg.detuning, 0.0],
        )
        return [(op, t)]
    op = TimeDependentOperator(
        3,
        [
            CouplingTerm(0.5 * _ket_bra3(1, 0), Square(w_d, t)),
            CouplingTerm(0.5 * _ket_bra3(1, 2), Square(w_t, t)),
        ],
    )
    return [(op, t)]


def prepare_coherence(
    cfg: M3wmConfig, initial: Optional[QuantumState] = None
) -> QuantumState:
    """Run the selected preparation protocol from the 2_02 level.

    Starting from the default ground input, all three methods leave half the
    population on each outer level with |rho_02| = 1/2 and negligibly little
    on the intermediate level.
    """
    state = initial if initial is not None else QuantumState.basis(3, 0)
    if state.dim != 3:
        raise ValueError("readout stage acts on the three-level subspace")
    for op, duration in _stage_operators(cfg):
        step = suggest_step(op, duration)
        grid = TimeGrid(0.0, duration, step)
        if state.kind == "vector":
            state = propagate_schrodinger(op, state, grid).final
        else:
            state = propagate_lindblad(op, [], state, grid).final
    return state


def prepare_coherence_trajectory(
    cfg: M3wmConfig, initial: Optional[QuantumState] = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Time-resolved |rho_02| and populations across all protocol stages.

    Returns (times, coherence magnitudes, populations of shape (n, 3));
    sequential stages are concatenated on a common time axis.
    """
    state = initial if initial is not None else QuantumState.basis(3, 0)
    times = [np.zeros(1)]
    coherences = [np.array([abs(coherence(state, 0, 2))])]
    pops = [np.array([[population(state, k) for k in range(3)]])]
    offset = 0.0
    for op, duration in _stage_operators(cfg):
        grid = TimeGrid(0.0, duration, suggest_step(op, duration))
        if state.kind == "vector":
            traj = propagate_schrodinger(op, state, grid)
            coh = np.abs(traj.data[:, 0] * np.conj(traj.data[:, 2]))
        else:
            traj = propagate_lindblad(op, [], state, grid)
            coh = np.abs(traj.data[:, 0, 2])
        state = traj.final
        times.append(offset + traj.times[1:])
        coherences.append(coh[1:])
        pops.append(traj.populations[1:])
        offset += duration
    return np.concatenate(times), np.concatenate(coherences), np.vstack(pops)


def raman_ratio_scan(
    ratios: Sequence[float], omega_twist: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """|rho_02| after a full bright-state cycle over a grid of amplitude ratios.

    Explores off-optimal ratios directly (the config-level ratio check is
    bypassed); the coherence is maximal at the ratio 1 + sqrt(2).
    """
    ratios = np.asarray(ratios, dtype=float)
    coherences = np.zeros_like(ratios)
    for k, r in enumerate(ratios):
        w_d = r * omega_twist
        t = 2.0 * math.pi / math.hypot(w_d, omega_twist)
        op = TimeDependentOperator(
            3,
            [
                CouplingTerm(0.5 * _ket_bra3(1, 0), Square(w_d, t)),
                CouplingTerm(0.5 * _ket_bra3(1, 2), Square(omega_twist, t)),
            ],
        )
        grid = TimeGrid(0.0, t, suggest_step(op, t))
        final = propagate_schrodinger(op, QuantumState.basis(3, 0), grid).final
        coherences[k] = abs(coherence(final, 0, 2))
    return ratios, coherences


def pipeline_amplitude(
    p3_l: float,
    p3_r: float,
    coherence_magnitude: float,
    sample_ee: float,
    triple_product_magnitude: float = DEFAULT_TRIPLE_PRODUCT,
) -> float:
    """Predicted listen amplitude for a sample of given excess (signed).

    Only molecules parked in the 2_02 level emit; the two mirror forms emit
    with opposite signs (L positive under the package convention), so the
    net amplitude is proportional to

        2 |rho| * |tp| * ( f_L P3_L - f_R P3_R ),

    with f_L/R the handedness fractions of the sample.  A racemic sample
    therefore still emits at a level set by the transfer contrast.
    """
    f_r = 0.5 * (1.0 + sample_ee)
    f_l = 0.5 * (1.0 - sample_ee)
    return (
        2.0
        * coherence_magnitude
        * triple_product_magnitude
        * (f_l * p3_l * Handedness.L.sign + f_r * p3_r * Handedness.R.sign)
    )


@dataclass(frozen=True)
class PipelineResult:
    """Composite transfer-plus-readout prediction."""

    esst: EsstResult
    prepared_state: QuantumState
    coherence_magnitude: float
    predicted_amplitude: float
    excited_handedness: str
    sample_ee: float
    manifest: dict


def run_pipeline(
    scenario: EsstScenario,
    cfg: M3wmConfig,
    sample_ee: float = 0.0,
    gate_d: float = 0.9,
) -> PipelineResult:
    """Selective transfer followed by coherence preparation and signal prediction.

    The readout triple is spectrally distinct from the transfer triple, so the
    transfer state is frozen when the readout stage starts; the readout acts
    on the transferred 2_02 population only.
    """
    if not -1.0 <= sample_ee <= 1.0:
        raise ValueError(f"sample_ee must lie in [-1, 1], got {sample_ee}")
    esst = run_esst(scenario)
    if esst.final_d < gate_d:
        raise M3wmGateError(
            f"transfer contrast {esst.final_d:.4f} below the {gate_d} gate"
        )
    prepared = prepare_coherence(cfg)
    coh = abs(coherence(prepared, 0, 2))
    p3_l, p3_r = esst.final_p3
    tp_mag = abs(dipole_triple_product(scenario.molecule, Handedness.L))
    amplitude = pipeline_amplitude(p3_l, p3_r, coh, sample_ee, tp_mag)
    excited = "R" if p3_r >= p3_l else "L"
    manifest = {
        "esst": esst.manifest,
        "m3wm": {
            "method": cfg.method,
            "omega_drive_rad_per_us": cfg.omega_drive,
            "omega_twist_rad_per_us": cfg.omega_twist,
            "detuning_rad_per_us": cfg.detuning,
            "stage_durations_us": list(cfg.stage_durations),
            "coherence": coh,
            "intermediate_population": population(prepared, 1),
        },
        "sample_ee": sample_ee,
        "predicted_amplitude": amplitude,
        "excited_handedness": excited,
    }
    return PipelineResult(
        esst=esst,
        prepared_state=prepared,
        coherence_magnitude=coh,
        predicted_amplitude=amplitude,
        excited_handedness=excited,
        sample_ee=sample_ee,
        manifest=manifest,
    )
