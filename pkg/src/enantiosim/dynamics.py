"""Deterministic propagation of state vectors and density matrices (dim 2-4).

Hamiltonians are represented structurally: a static real diagonal plus coupling
terms, each an envelope times a carrier factor applied to a fixed matrix
pattern.  Propagation uses fixed-step classical RK4 in the interaction frame of
the static diagonal (an exact transformation that leaves populations untouched
and keeps the integrator norm error at roundoff level); recorded states are
rotated back, so trajectories are reported in the original frame.

Level indices are 0-based throughout: index 0 is the ground state, written
|1> in ket notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .pulses import Envelope, PulseSchedule

VECTOR_NORM_TOL = 1e-9
FINAL_NORM_TOL = 1e-7
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-9
POSITIVITY_TOL = -1e-9

# Step control: resolve the fastest carrier with CARRIER_RESOLUTION points per
# period, and never rotate more than 2 pi / COUPLING_RESOLUTION per step under
# the peak coupling alone.
CARRIER_RESOLUTION = 160
COUPLING_RESOLUTION = 400


class NumericsDiagnosticError(RuntimeError):
    """Propagation produced a state outside its guaranteed tolerances."""


@dataclass(frozen=True)
class QuantumState:
    """A pure state vector or a density matrix over a small Hilbert space."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex).copy()
        if arr.ndim not in (1, 2):
            raise ValueError("state data must be a vector or a square matrix")
        if arr.ndim == 2 and arr.shape[0] != arr.shape[1]:
            raise ValueError("density matrix must be square")
        if not 2 <= arr.shape[0] <= 4:
            raise ValueError(f"supported dimensions are 2-4, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("state entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        self._validate()

    def _validate(self):
        if self.kind == "vector":
            norm = float(np.linalg.norm(self.data))
            if abs(norm**2 - 1.0) > 10 * VECTOR_NORM_TOL:
                raise ValueError(f"state vector not normalized: sum |c|^2 = {norm**2}")
        else:
            defect = float(np.max(np.abs(self.data - self.data.conj().T)))
            if defect > HERMITICITY_TOL:
                raise ValueError(f"density matrix not Hermitian (defect {defect:.2e})")
            tr = complex(np.trace(self.data))
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"density matrix trace {tr} differs from 1")
            eigmin = float(np.min(np.linalg.eigvalsh(self.data)))
            if eigmin < POSITIVITY_TOL:
                raise ValueError(f"density matrix not positive (min eigenvalue {eigmin:.2e})")

    @property
    def kind(self) -> str:
        return "vector" if self.data.ndim == 1 else "density"

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def ket(cls, amplitudes) -> "QuantumState":
        return cls(np.asarray(amplitudes, dtype=complex))

    @classmethod
    def basis(cls, dim: int, level: int) -> "QuantumState":
        vec = np.zeros(dim, dtype=complex)
        vec[level] = 1.0
        return cls(vec)

    @classmethod
    def density(cls, matrix) -> "QuantumState":
        return cls(np.asarray(matrix, dtype=complex))

    @classmethod
    def mixed_diagonal(cls, populations) -> "QuantumState":
        return cls(np.diag(np.asarray(populations, dtype=complex)))

    def as_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        return QuantumState(np.outer(self.data, self.data.conj()))


def population(state: QuantumState, level: int) -> float:
    """Occupation probability of one level (0-based index)."""
    if not 0 <= level < state.dim:
        raise IndexError(f"level {level} out of range for dimension {state.dim}")
    if state.kind == "vector":
        return float(abs(state.data[level]) ** 2)
    return float(state.data[level, level].real)


def coherence(state: QuantumState, m: int, n: int) -> complex:
    """Off-diagonal density-matrix element rho_mn (vectors are lifted first)."""
    if m == n:
        raise ValueError("coherence requires two distinct levels")
    for idx in (m, n):
        if not 0 <= idx < state.dim:
            raise IndexError(f"level {idx} out of range for dimension {state.dim}")
    if state.kind == "vector":
        return complex(state.data[m] * np.conj(state.data[n]))
    return complex(state.data[m, n])


@dataclass(frozen=True)
class RelaxationChannel:
    """Spontaneous jump |to><from| at a fixed rate (1/us)."""

    from_level: int
    to_level: int
    rate: float

    def __post_init__(self):
        if self.from_level == self.to_level:
            raise ValueError("relaxation channel endpoints must differ")
        if self.rate < 0:
            raise ValueError(f"relaxation rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class TimeGrid:
    """Propagation window, target integrator step, and recording stride."""

    t_start: float
    t_end: float
    integrator_step: float
    record_stride: Optional[int] = None

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.integrator_step <= 0:
            raise ValueError("integrator_step must be > 0")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass(frozen=True)
class Carrier:
    """Time factor multiplying a coupling term: constant, cos, or exp(i...)."""

    kind: str
    rate: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("const", "cos", "exp"):
            raise ValueError(f"unknown carrier kind {self.kind!r}")

    @classmethod
    def const(cls) -> "Carrier":
        return cls("const")

    @classmethod
    def cos(cls, rate: float, phase: float = 0.0) -> "Carrier":
        return cls("cos", rate, phase)

    @classmethod
    def exp(cls, rate: float, phase: float = 0.0) -> "Carrier":
        return cls("exp", rate, phase)

    def value(self, t):
        if self.kind == "const":
            return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
        ang = self.rate * np.asarray(t, dtype=float) + self.phase
        if self.kind == "cos":
            out = np.cos(ang)
        else:
            out = np.exp(1j * ang)
        return out if np.ndim(t) else complex(out) if self.kind == "exp" else float(out)


@dataclass(frozen=True)
class EnvelopeProduct:
    """Pointwise product of two envelopes (used for derived couplings)."""

    first: Envelope
    second: Envelope

    def value(self, t):
        return self.first.value(t) * self.second.value(t)

    @property
    def peak(self) -> float:
        return self.first.peak * self.second.peak

    @property
    def support(self) -> tuple[float, float]:
        lo1, hi1 = self.first.support
        lo2, hi2 = self.second.support
        return (max(lo1, lo2), min(hi1, hi2))


@dataclass(frozen=True)
class CouplingTerm:
    """One drive contribution: envelope(t) * carrier(t) * matrix, plus H.c.

    ``matrix`` holds the raising part including any 1/2 factors and signs; the
    Hermitian conjugate is added automatically (diagonal entries therefore
    count twice).
    """

    matrix: np.ndarray
    envelope: Union[Envelope, EnvelopeProduct]
    carrier: Carrier = Carrier.const()

    def __post_init__(self):
        arr = np.asarray(self.matrix, dtype=complex).copy()
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coupling matrix entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "matrix", arr)


@dataclass
class _Lowered:
    """Kernel-ready single-entry terms with the static diagonal rotated in."""

    term_i: np.ndarray
    term_j: np.ndarray
    coef: np.ndarray
    rate: np.ndarray
    phase: np.ndarray
    env_id: np.ndarray
    env_pow: np.ndarray
    env_kind: np.ndarray
    env_params: np.ndarray
    sched_values: np.ndarray
    sched_n: np.ndarray
    prod_pairs: np.ndarray
    max_rate: float
    coupling_bound: float
    min_sched_dt: Optional[float]

    def kernel_args(self):
        return (
            self.term_i, self.term_j, self.coef, self.rate, self.phase,
            self.env_id, self.env_pow, self.env_kind, self.env_params,
            self.sched_values, self.sched_n, self.prod_pairs,
        )


class TimeDependentOperator:
    """Hermitian operator H(t) built from a static diagonal plus drive terms."""

    def __init__(
        self,
        dim: int,
        terms: Sequence[CouplingTerm] = (),
        static_diag: Optional[Sequence[float]] = None,
    ):
        if not 2 <= dim <= 4:
            raise ValueError(f"supported dimensions are 2-4, got {dim}")
        self.dim = dim
        self.terms = tuple(terms)
        diag = np.zeros(dim) if static_diag is None else np.asarray(static_diag, dtype=float).copy()
        if diag.shape != (dim,):
            raise ValueError("static_diag length must equal dim")
        if not np.all(np.isfinite(diag)):
            raise ValueError("static diagonal must be finite")
        diag.flags.writeable = False
        self.static_diag = diag
        for term in self.terms:
            if term.matrix.shape != (dim, dim):
                raise ValueError("coupling matrix dimension mismatch")
        self._lowered: Optional[_Lowered] = None

    def evaluate(self, t: float) -> np.ndarray:
        """The Hermitian matrix H(t) in the original (unrotated) frame."""
        H = np.diag(self.static_diag).astype(complex)
        for term in self.terms:
            env = term.envelope.value(t)
            if env == 0.0:
                continue
            c = term.carrier
            if c.kind == "cos":
                v = env * math.cos(c.rate * t + c.phase)
                H += v * (term.matrix + term.matrix.conj().T)
            elif c.kind == "exp":
                z = env * complex(math.cos(c.rate * t + c.phase), math.sin(c.rate * t + c.phase))
                H += z * term.matrix + np.conj(z) * term.matrix.conj().T
            else:
                H += env * (term.matrix + term.matrix.conj().T)
        return H

    def lowered(self) -> _Lowered:
        if self._lowered is None:
            self._lowered = self._lower()
        return self._lowered

    def _lower(self) -> _Lowered:
        env_slots: list = []
        prod_pairs: list[tuple[int, int]] = []

        def base_slot(env) -> int:
            for k, existing in enumerate(env_slots):
                if existing is env or existing == env:
                    return k
            env_slots.append(env)
            return len(env_slots) - 1

        def slot_ref(envelope) -> tuple[str, int, int]:
            # -> (table, index, power); product slots are numbered within the
            # product table and re-based after all base envelopes are known
            if isinstance(envelope, EnvelopeProduct):
                a, b = envelope.first, envelope.second
                if a is b or a == b:
                    return ("base", base_slot(a), 2)
                pair = (base_slot(a), base_slot(b))
                if pair not in prod_pairs:
                    prod_pairs.append(pair)
                return ("prod", prod_pairs.index(pair), 1)
            return ("base", base_slot(envelope), 1)

        ti, tj, coef, rate, phase, env_refs, env_pow = [], [], [], [], [], [], []
        d = self.static_diag
        coupling_bound = 0.0
        for term in self.terms:
            table, slot, power = slot_ref(term.envelope)
            rows, cols = np.nonzero(term.matrix)
            for i, j in zip(rows.tolist(), cols.tolist()):
                m = complex(term.matrix[i, j])
                rot = d[i] - d[j]
                c = term.carrier
                if c.kind == "cos":
                    entries = [(m / 2.0, rot + c.rate, c.phase), (m / 2.0, rot - c.rate, -c.phase)]
                elif c.kind == "exp":
                    entries = [(m, rot + c.rate, c.phase)]
                else:
                    entries = [(m, rot, 0.0)]
                for cf, rt, ph in entries:
                    ti.append(i)
                    tj.append(j)
                    coef.append(cf)
                    rate.append(rt)
                    phase.append(ph)
                    env_refs.append((table, slot))
                    env_pow.append(power)
                # EnvelopeProduct.peak is already the product of both peaks
                coupling_bound += 2.0 * abs(m) * term.envelope.peak
        n_base = len(env_slots)
        env_id = [idx if table == "base" else n_base + idx for table, idx in env_refs]

        n_env = len(env_slots)
        env_kind = np.zeros(n_env, dtype=np.int64)
        env_params = np.zeros((n_env, 4), dtype=np.float64)
        sched_list: list[np.ndarray] = []
        sched_dts: list[float] = []
        for k, env in enumerate(env_slots):
            kind, params = env._kernel_params()
            env_kind[k] = kind
            env_params[k] = params
            if isinstance(env, PulseSchedule):
                sched_list.append(env.values)
                sched_dts.append(env.dt)
            else:
                sched_list.append(np.zeros(0))
        max_bins = max((s.size for s in sched_list), default=0)
        sched_values = np.zeros((max(n_env, 1), max(max_bins, 1)), dtype=np.float64)
        sched_n = np.zeros(max(n_env, 1), dtype=np.int64)
        for k, s in enumerate(sched_list):
            sched_values[k, : s.size] = s
            sched_n[k] = s.size

        rates = np.asarray(rate, dtype=np.float64)
        return _Lowered(
            term_i=np.asarray(ti, dtype=np.int64),
            term_j=np.asarray(tj, dtype=np.int64),
            coef=np.asarray(coef, dtype=np.complex128),
            rate=rates,
            phase=np.asarray(phase, dtype=np.float64),
            env_id=np.asarray(env_id, dtype=np.int64),
            env_pow=np.asarray(env_pow, dtype=np.int64),
            env_kind=env_kind,
            env_params=env_params,
            sched_values=sched_values,
            sched_n=sched_n,
            prod_pairs=np.asarray(prod_pairs, dtype=np.int64).reshape(-1, 2),
            max_rate=float(np.max(np.abs(rates))) if rates.size else 0.0,
            coupling_bound=coupling_bound,
            min_sched_dt=min(sched_dts) if sched_dts else None,
        )


@dataclass(frozen=True)
class CallableOperator:
    """Adapter for an arbitrary H(t) callable; propagated by the pure-Python path."""

    dim: int
    func: Callable[[float], np.ndarray]

    def evaluate(self, t: float) -> np.ndarray:
        return np.asarray(self.func(t), dtype=complex)


Operator = Union[TimeDependentOperator, CallableOperator]


@dataclass(frozen=True)
class Trajectory:
    """Recorded propagation samples plus end-of-run diagnostics."""

    times: np.ndarray
    data: np.ndarray  # (n, dim) for vectors, (n, dim, dim) for densities
    norm_drift: float
    min_eigenvalue: Optional[float] = None

    @property
    def kind(self) -> str:
        return "vector" if self.data.ndim == 2 else "density"

    @property
    def populations(self) -> np.ndarray:
        if self.kind == "vector":
            return np.abs(self.data) ** 2
        return np.real(np.einsum("nii->ni", self.data))

    def state(self, index: int) -> QuantumState:
        return QuantumState(self.data[index])

    @property
    def final(self) -> QuantumState:
        return self.state(-1)

    @property
    def states(self) -> list[QuantumState]:
        return [self.state(k) for k in range(self.data.shape[0])]


def suggest_step(
    operator: Operator,
    span: float,
    carrier_resolution: int = CARRIER_RESOLUTION,
    schedule_dt: Optional[float] = None,
) -> float:
    """Integrator step resolving the fastest carrier and the peak coupling.

    When a discretized schedule is present the step is snapped to divide the
    bin width so that no RK4 stage straddles a bin edge.
    """
    if isinstance(operator, TimeDependentOperator):
        low = operator.lowered()
        rate = max(
            carrier_resolution * low.max_rate,
            COUPLING_RESOLUTION * low.coupling_bound,
        )
        if schedule_dt is None:
            schedule_dt = low.min_sched_dt
    else:
        rate = 0.0
    h = 2.0 * math.pi / rate if rate > 0 else span
    h = min(h, span / 200.0)
    if schedule_dt is not None:
        h = min(h, schedule_dt)
        h = schedule_dt / math.ceil(schedule_dt / h - 1e-12)
    return h


def _record_steps(n_steps: int, record_stride: Optional[int]) -> np.ndarray:
    stride = record_stride if record_stride is not None else max(1, n_steps // 200)
    steps = list(range(0, n_steps + 1, stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.asarray(steps, dtype=np.int64)


def _resolve_grid(operator: Operator, grid: TimeGrid) -> tuple[float, int, np.ndarray]:
    span = grid.t_end - grid.t_start
    if isinstance(operator, TimeDependentOperator):
        dt = operator.lowered().min_sched_dt
        if dt is not None and grid.integrator_step > dt * (1.0 + 1e-9):
            raise ValueError(
                f"integrator_step {grid.integrator_step} exceeds schedule resolution {dt}"
            )
    n_steps = max(1, round(span / grid.integrator_step))
    h = span / n_steps
    return h, n_steps, _record_steps(n_steps, grid.record_stride)


def _check_operator(operator: Operator, dim: int, t_samples: Sequence[float]):
    if operator.dim != dim:
        raise ValueError(f"operator dimension {operator.dim} does not match state dimension {dim}")
    for t in t_samples:
        H = operator.evaluate(t)
        if not np.all(np.isfinite(H)):
            raise ValueError(f"Hamiltonian has non-finite entries at t={t}")
        defect = float(np.max(np.abs(H - H.conj().T)))
        if defect > HERMITICITY_TOL:
            raise ValueError(f"Hamiltonian not Hermitian at t={t} (defect {defect:.2e})")


def _unrotate(times: np.ndarray, data: np.ndarray, diag: np.ndarray) -> np.ndarray:
    if not np.any(diag):
        return data
    phases = np.exp(-1j * np.outer(times, diag))  # (n, dim)
    if data.ndim == 2:
        return data * phases
    return data * phases[:, :, None] * np.conj(phases)[:, None, :]


def propagate_schrodinger(
    operator: Operator, psi0: QuantumState, grid: TimeGrid
) -> Trajectory:
    """Integrate i d|psi>/dt = H(t)|psi> on a fixed-step RK4 grid.

    Returns recorded samples including both endpoints.  Raises
    NumericsDiagnosticError if the final norm deviates by more than 1e-7.
    """
    if psi0.kind != "vector":
        raise ValueError("propagate_schrodinger requires a vector state")
    h, n_steps, rec = _resolve_grid(operator, grid)
    _check_operator(operator, psi0.dim, _probe_times(grid))

    if isinstance(operator, TimeDependentOperator):
        low = operator.lowered()
        data = _kernels.rk4_schrodinger(
            psi0.data.astype(np.complex128), grid.t_start, h, n_steps, rec, *low.kernel_args()
        )
        times = grid.t_start + rec * h
        data = _unrotate(times, data, operator.static_diag)
    else:
        data, times = _python_rk4(operator.evaluate, psi0.data, grid.t_start, h, n_steps, rec, None)

    norms = np.linalg.norm(data, axis=1)
    drift = float(np.max(np.abs(norms**2 - 1.0)))
    if abs(norms[-1] ** 2 - 1.0) > FINAL_NORM_TOL or not np.all(np.isfinite(data)):
        raise NumericsDiagnosticError(
            f"norm deviation {abs(norms[-1]**2 - 1.0):.3e} exceeds {FINAL_NORM_TOL} "
            "(integrator step too large for this Hamiltonian)"
        )
    return Trajectory(times=times, data=data, norm_drift=drift)


def propagate_lindblad(
    operator: Operator,
    channels: Sequence[RelaxationChannel],
    rho0: QuantumState,
    grid: TimeGrid,
) -> Trajectory:
    """Integrate the Markovian master equation with jump channels.

    With an empty channel list this reduces to unitary evolution of the
    density matrix.  Trace preservation and positivity are monitored on every
    recorded sample; violations raise NumericsDiagnosticError.
    """
    if rho0.kind != "density":
        raise ValueError("propagate_lindblad requires a density state")
    for ch in channels:
        if not (0 <= ch.from_level < rho0.dim and 0 <= ch.to_level < rho0.dim):
            raise ValueError(f"channel levels {ch.from_level}->{ch.to_level} exceed dimension {rho0.dim}")
    h, n_steps, rec = _resolve_grid(operator, grid)
    _check_operator(operator, rho0.dim, _probe_times(grid))

    ch_from = np.asarray([c.from_level for c in channels], dtype=np.int64)
    ch_to = np.asarray([c.to_level for c in channels], dtype=np.int64)
    ch_rate = np.asarray([c.rate for c in channels], dtype=np.float64)

    if isinstance(operator, TimeDependentOperator):
        low = operator.lowered()
        data = _kernels.rk4_lindblad(
            rho0.data.astype(np.complex128), grid.t_start, h, n_steps, rec,
            ch_from, ch_to, ch_rate, *low.kernel_args(),
        )
        times = grid.t_start + rec * h
        data = _unrotate(times, data, operator.static_diag)
    else:
        data, times = _python_rk4(
            operator.evaluate, rho0.data, grid.t_start, h, n_steps, rec,
            (ch_from, ch_to, ch_rate),
        )

    traces = np.real(np.einsum("nii->n", data))
    drift = float(np.max(np.abs(traces - 1.0)))
    eigmin = float(np.min(np.linalg.eigvalsh(data)))
    if abs(traces[-1] - 1.0) > FINAL_NORM_TOL or not np.all(np.isfinite(data)):
        raise NumericsDiagnosticError(
            f"trace deviation {abs(traces[-1]-1.0):.3e} exceeds {FINAL_NORM_TOL}"
        )
    if eigmin < POSITIVITY_TOL:
        raise NumericsDiagnosticError(
            f"density matrix lost positivity (min eigenvalue {eigmin:.3e}); "
            "check integrator step against the fastest timescale"
        )
    return Trajectory(times=times, data=data, norm_drift=drift, min_eigenvalue=eigmin)


def _probe_times(grid: TimeGrid) -> np.ndarray:
    return np.linspace(grid.t_start, grid.t_end, 7)


def _python_rk4(evaluate, y0, t_start, h, n_steps, record_steps, channels):
    """Reference RK4 used for callable operators and kernel cross-checks."""

    def rhs(t, y):
        H = np.asarray(evaluate(t), dtype=complex)
        if y.ndim == 1:
            return -1j * (H @ y)
        out = -1j * (H @ y - y @ H)
        if channels is not None:
            ch_from, ch_to, ch_rate = channels
            for f, d, g in zip(ch_from, ch_to, ch_rate):
                out[d, d] += g * y[f, f]
                out[f, :] -= 0.5 * g * y[f, :]
                out[:, f] -= 0.5 * g * y[:, f]
        return out

    y = np.asarray(y0, dtype=complex).copy()
    recorded = np.zeros((len(record_steps),) + y.shape, dtype=complex)
    rec = 0
    if record_steps[rec] == 0:
        recorded[rec] = y
        rec += 1
    for step in range(n_steps):
        t = t_start + step * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if rec < len(record_steps) and record_steps[rec] == step + 1:
            recorded[rec] = y
            rec += 1
    times = t_start + np.asarray(record_steps) * h
    return recorded, times
