"""Shaped microwave pulses: envelopes, discretization, noise, and area conditions.

Conventions used across the package: Rabi amplitudes are angular frequencies in
rad/us, times are in us, phases in rad.  Envelopes are strictly zero outside
their declared support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi

# Envelope kind codes shared with the propagation kernels.
ENV_ZERO = 0
ENV_SQUARE = 1
ENV_COS_RAMP = 2
ENV_GAUSSIAN = 3
ENV_COS_SQUARED = 4
ENV_SCHEDULE = 5

# Gaussian envelopes are truncated at 3 widths either side of the center.
GAUSSIAN_CUTOFF_WIDTHS = 3.0
_ERF3 = math.erf(GAUSSIAN_CUTOFF_WIDTHS)


class NoAreaSolutionError(ValueError):
    """The requested interference orders admit no valid pulse timing."""


@dataclass(frozen=True)
class Square:
    """Flat-top pulse of constant amplitude on [start, start + duration)."""

    amplitude: float
    duration: float
    start: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.duration)

    @property
    def peak(self) -> float:
        return self.amplitude

    def value(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        out = np.where((t >= lo) & (t < hi), self.amplitude, 0.0)
        return out if out.ndim else float(out)

    def _kernel_params(self):
        lo, hi = self.support
        return ENV_SQUARE, (self.amplitude, lo, hi, 0.0)


@dataclass(frozen=True)
class CosRamp:
    """Single-period raised-cosine pulse (amplitude/2)(1 - cos(2 pi t / period)).

    Turns on and off smoothly; the peak value equals ``amplitude`` at the
    middle of the support.
    """

    amplitude: float
    period: float
    start: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.period <= 0:
            raise ValueError(f"period must be > 0, got {self.period}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.period)

    @property
    def peak(self) -> float:
        return self.amplitude

    def value(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        x = (self.amplitude / 2.0) * (1.0 - np.cos(TWO_PI * (t - lo) / self.period))
        out = np.where((t >= lo) & (t < hi), x, 0.0)
        return out if out.ndim else float(out)

    def _kernel_params(self):
        return ENV_COS_RAMP, (self.amplitude, self.period, self.start, 0.0)


@dataclass(frozen=True)
class DelayedCosRamp:
    """Raised-cosine pulse imposed after a delay (same shape as CosRamp)."""

    amplitude: float
    period: float
    delay: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.period <= 0:
            raise ValueError(f"period must be > 0, got {self.period}")
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.delay, self.delay + self.period)

    @property
    def peak(self) -> float:
        return self.amplitude

    def value(self, t):
        return CosRamp(self.amplitude, self.period, self.delay).value(t)

    def _kernel_params(self):
        return ENV_COS_RAMP, (self.amplitude, self.period, self.delay, 0.0)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian pulse amp*exp(-((t-center)/width)^2), truncated to 3 widths.

    With the default center of 3 widths the support is [0, 6*width].
    """

    amplitude: float
    width: float
    center: Optional[float] = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.width <= 0:
            raise ValueError(f"width must be > 0, got {self.width}")
        if self.center is None:
            object.__setattr__(self, "center", GAUSSIAN_CUTOFF_WIDTHS * self.width)

    @property
    def support(self) -> tuple[float, float]:
        half = GAUSSIAN_CUTOFF_WIDTHS * self.width
        return (self.center - half, self.center + half)

    @property
    def peak(self) -> float:
        return self.amplitude

    def value(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        x = self.amplitude * np.exp(-(((t - self.center) / self.width) ** 2))
        out = np.where((t >= lo) & (t < hi), x, 0.0)
        return out if out.ndim else float(out)

    def _kernel_params(self):
        return ENV_GAUSSIAN, (self.amplitude, self.width, self.center, 0.0)


@dataclass(frozen=True)
class CosSquared:
    """Single-period squared raised cosine (amplitude/4)(1 - cos(2 pi t/period))^2.

    The peak value equals ``amplitude``.  With amplitude set to the peak of the
    effective two-photon coupling this waveform coincides with it pointwise.
    """

    amplitude: float
    period: float
    start: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.period <= 0:
            raise ValueError(f"period must be > 0, got {self.period}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.period)

    @property
    def peak(self) -> float:
        return self.amplitude

    def value(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        x = (self.amplitude / 4.0) * (1.0 - np.cos(TWO_PI * (t - lo) / self.period)) ** 2
        out = np.where((t >= lo) & (t < hi), x, 0.0)
        return out if out.ndim else float(out)

    def _kernel_params(self):
        return ENV_COS_SQUARED, (self.amplitude, self.period, self.start, 0.0)


class PulseSchedule:
    """Piecewise-constant waveform: contiguous bins of width dt starting at t=0.

    This is both the discretized form of an envelope (finite waveform-generator
    time resolution) and a first-class envelope usable in Hamiltonians.
    """

    __slots__ = ("dt", "values")

    def __init__(self, dt: float, values: Sequence[float]):
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        vals = np.asarray(values, dtype=float).copy()
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("schedule amplitudes must be finite")
        vals.flags.writeable = False
        self.dt = float(dt)
        self.values = vals

    def __eq__(self, other):
        return (
            isinstance(other, PulseSchedule)
            and self.dt == other.dt
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"PulseSchedule(dt={self.dt}, n_bins={self.n_bins})"

    @property
    def n_bins(self) -> int:
        return self.values.size

    @property
    def bin_starts(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.dt

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, self.n_bins * self.dt)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.floor(t / self.dt).astype(int)
        ok = (t >= 0.0) & (idx < self.n_bins)
        out = np.where(ok, self.values[np.clip(idx, 0, self.n_bins - 1)], 0.0)
        return out if out.ndim else float(out)

    def _kernel_params(self):
        return ENV_SCHEDULE, (self.dt, 0.0, 0.0, 0.0)


Envelope = Union[Square, CosRamp, DelayedCosRamp, Gaussian, CosSquared, PulseSchedule]


@dataclass(frozen=True)
class AwgnNoise:
    """Additive white Gaussian noise at a given signal-to-noise ratio in dB.

    Signal power is measured as the mean squared amplitude over the bins inside
    the pulse support; one independent sample is drawn per schedule bin.
    """

    rsn_db: float
    seed: Optional[int] = None

    def __post_init__(self):
        if math.isnan(self.rsn_db):
            raise ValueError("rsn_db must not be NaN")


@dataclass(frozen=True)
class UniformFluctuation:
    """Multiplicative per-bin fluctuation (1 + u) with u uniform on [-eta, eta]."""

    eta: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


NoiseSpec = Union[AwgnNoise, UniformFluctuation]


@dataclass(frozen=True)
class DriveField:
    """One microwave field: a role tag, an amplitude envelope, a phase, and an
    optional explicit carrier frequency (rad/us) and driven transition."""

    role: str
    envelope: Envelope
    phase: float = 0.0
    carrier: Optional[float] = None
    transition: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.role not in ("p", "q", "s", "drive", "twist"):
            raise ValueError(f"unknown field role {self.role!r}")
        if self.carrier is not None and self.carrier <= 0:
            raise ValueError(f"carrier must be > 0, got {self.carrier}")
        if self.transition is not None and self.transition[0] == self.transition[1]:
            raise ValueError("transition levels must be distinct")


def sample_envelope(envelope: Envelope, t) -> float:
    """Evaluate an envelope at time t (scalar or array), zero outside support."""
    if not np.all(np.isfinite(np.asarray(t, dtype=float))):
        raise ValueError("sample time must be finite")
    return envelope.value(t)


def discretize(envelope: Envelope, dt: float, horizon: float) -> PulseSchedule:
    """Resolve an envelope into ceil(horizon/dt) square bins of width dt.

    Each bin carries the envelope value at its midpoint.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if horizon < envelope.support[1] - 1e-12:
        raise ValueError(
            f"horizon {horizon} shorter than envelope support end {envelope.support[1]}"
        )
    n_bins = int(math.ceil(horizon / dt - 1e-12))
    midpoints = (np.arange(n_bins) + 0.5) * dt
    return PulseSchedule(dt, np.asarray(envelope.value(midpoints), dtype=float))


def pulse_area(envelope: Envelope, window: Optional[tuple[float, float]] = None) -> float:
    """Time integral of the envelope over a window (rad).

    Defaults to the full support.  Schedules are summed exactly; closed-form
    envelopes are integrated numerically to better than 1e-9 rad.
    """
    if window is None:
        window = envelope.support
    t1, t2 = window
    if not t1 < t2:
        raise ValueError(f"window must satisfy t1 < t2, got {window}")
    if isinstance(envelope, PulseSchedule):
        edges = np.clip(
            np.concatenate([[t1], envelope.bin_starts, [envelope.support[1]], [t2]]),
            t1,
            t2,
        )
        edges = np.unique(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        return float(np.sum(envelope.value(mids) * np.diff(edges)))
    lo = max(t1, envelope.support[0])
    hi = min(t2, envelope.support[1])
    if hi <= lo:
        return 0.0
    val, _err = integrate.quad(
        lambda x: float(envelope.value(x)), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=400
    )
    return float(val)


def apply_noise(schedule: PulseSchedule, noise: NoiseSpec) -> PulseSchedule:
    """Return a perturbed copy of a schedule; deterministic for a fixed seed."""
    if noise.seed is None:
        raise ValueError("noise seed must be resolved before applying noise")
    rng = np.random.default_rng(noise.seed)
    values = schedule.values
    if isinstance(noise, AwgnNoise):
        nz = values != 0.0
        if not np.any(nz):
            return PulseSchedule(schedule.dt, values)
        power = float(np.mean(values[nz] ** 2))
        snr_linear = 10.0 ** (noise.rsn_db / 10.0)
        sigma = math.sqrt(power / snr_linear) if math.isfinite(snr_linear) else 0.0
        return PulseSchedule(schedule.dt, values + rng.normal(0.0, sigma, values.size))
    if isinstance(noise, UniformFluctuation):
        u = rng.uniform(-noise.eta, noise.eta, values.size)
        return PulseSchedule(schedule.dt, values * (1.0 + u))
    raise TypeError(f"unsupported noise spec {type(noise).__name__}")


# --- Interference area conditions -------------------------------------------
#
# The transfer is controlled by two pulse areas: the difference path must close
# an integer number of half turns while the sum path completes a half-integer
# one,
#     int (Omega_q - Omega_eff)/2 dt = n_l * pi,
#     int (Omega_q + Omega_eff)/2 dt = (n_r + 1/2) * pi,
# with Omega_eff = Omega_p * Omega_s / (2 delta).  Equivalently
#     int Omega_eff dt = (n_r - n_l + 1/2) * pi,
#     int Omega_q   dt = (n_r + n_l + 1/2) * pi.
# For raised-cosine pump/Stokes pulses of peak omega0 and period T0 the
# effective coupling integrates to 3 omega0^2 T0 / (16 delta).

AREA_FAMILIES = (
    "cos_ramp",
    "gaussian",
    "cos_squared",
    "two_photon_square",
    "two_photon_cos_ramp",
)


@dataclass(frozen=True)
class AreaSolution:
    """Pulse timings satisfying the interference area conditions.

    ``t0`` is the pump/Stokes raised-cosine period (or the square-pulse
    duration for the two-photon families), ``q_timing`` the one-photon pulse
    period or Gaussian width, ``q_delay`` the start of the one-photon support,
    and ``duration`` the total operation time T.
    """

    family: str
    omega0: float
    omega_prime0: Optional[float]
    delta: float
    n_l: int
    n_r: int
    t0: float
    q_timing: Optional[float]
    q_delay: float
    duration: float

    @property
    def pump_envelope(self) -> Envelope:
        if self.family == "two_photon_square":
            return Square(self.omega0, self.t0)
        return CosRamp(self.omega0, self.t0)

    @property
    def stokes_envelope(self) -> Envelope:
        return self.pump_envelope

    @property
    def q_envelope(self) -> Optional[Envelope]:
        if self.family == "cos_ramp":
            return DelayedCosRamp(self.omega_prime0, self.q_timing, self.q_delay)
        if self.family == "gaussian":
            return Gaussian(self.omega_prime0, self.q_timing)
        if self.family == "cos_squared":
            return CosSquared(self.omega_prime0, self.t0)
        return None


def solve_area_conditions(
    family: str,
    omega0: float,
    delta: float,
    omega_prime0: Optional[float] = None,
    n_l: int = 0,
    n_r: int = 0,
) -> AreaSolution:
    """Solve the two interference area conditions for one waveform family.

    Raises NoAreaSolutionError when the requested orders (n_l, n_r) admit no
    positive timing in the family.
    """
    if family not in AREA_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {AREA_FAMILIES}")
    if omega0 <= 0:
        raise ValueError(f"omega0 must be > 0, got {omega0}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")

    if family in ("two_photon_square", "two_photon_cos_ramp"):
        # Full population transfer through the two-photon path alone: area pi.
        if family == "two_photon_square":
            t0 = TWO_PI * delta / omega0**2
        else:
            t0 = 16.0 * math.pi * delta / (3.0 * omega0**2)
        return AreaSolution(family, omega0, None, delta, 0, 0, t0, None, 0.0, t0)

    area_eff = (n_r - n_l + 0.5) * math.pi
    area_q = (n_r + n_l + 0.5) * math.pi
    if area_eff <= 0 or area_q <= 0:
        raise NoAreaSolutionError(
            f"orders n_l={n_l}, n_r={n_r} require a negative pulse area"
        )

    if family == "cos_squared":
        eff_peak = omega0**2 / (2.0 * delta)
        if omega_prime0 is None:
            omega_prime0 = eff_peak
        # The squared-cosine one-photon pulse is proportional to the effective
        # coupling, so both areas share one timescale and must be consistent.
        t0 = 8.0 * (area_q + area_eff) / (3.0 * (omega_prime0 + eff_peak))
        residual = (3.0 / 8.0) * (omega_prime0 - eff_peak) * t0 - (area_q - area_eff)
        if abs(residual) > 1e-9 * max(1.0, area_q):
            raise NoAreaSolutionError(
                "cos_squared family requires the one-photon amplitude to match "
                f"omega0^2/(2 delta) = {eff_peak}; got {omega_prime0} "
                f"(area residual {residual:.3e} rad)"
            )
        return AreaSolution(
            family, omega0, omega_prime0, delta, n_l, n_r, t0, t0, 0.0, t0
        )

    if omega_prime0 is None or omega_prime0 <= 0:
        raise ValueError("omega_prime0 must be > 0 for this family")
    t0 = 16.0 * delta * area_eff / (3.0 * omega0**2)

    if family == "cos_ramp":
        q_period = 2.0 * area_q / omega_prime0
        return AreaSolution(
            family, omega0, omega_prime0, delta, n_l, n_r,
            t0, q_period, t0, t0 + q_period,
        )

    # Gaussian: match the truncated-support area exactly so that the
    # re-integrated conditions close to solver precision.
    t_c = area_q / (omega_prime0 * math.sqrt(math.pi) * _ERF3)
    duration = max(2.0 * GAUSSIAN_CUTOFF_WIDTHS * t_c, t0)
    return AreaSolution(
        family, omega0, omega_prime0, delta, n_l, n_r, t0, t_c, 0.0, duration
    )


def effective_coupling_area(
    pump: Envelope, stokes: Envelope, delta: float, window: tuple[float, float]
) -> float:
    """Integral of Omega_p Omega_s / (2 delta) over a window (rad)."""
    t1, t2 = window
    val, _err = integrate.quad(
        lambda x: float(pump.value(x)) * float(stokes.value(x)) / (2.0 * delta),
        t1,
        t2,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=500,
    )
    return float(val)


def area_condition_residuals(solution: AreaSolution) -> tuple[float, float]:
    """Re-integrate both interference conditions; returns (left, right) residuals in rad."""
    if solution.q_envelope is None:
        raise ValueError("two-photon-only solutions have no interference conditions")
    window = (0.0, solution.duration)
    a_eff = effective_coupling_area(
        solution.pump_envelope, solution.stokes_envelope, solution.delta, window
    )
    a_q = pulse_area(solution.q_envelope, window)
    left = (a_q - a_eff) / 2.0 - solution.n_l * math.pi
    right = (a_q + a_eff) / 2.0 - (solution.n_r + 0.5) * math.pi
    return (left, right)
