"""Molecule description and Hamiltonian builders for the cyclic drive scheme.

A molecule is a handful of rotational levels plus dipole-typed transitions.
The two mirror forms share all level energies and dipole magnitudes; they
differ only in the sign of the Rabi coupling on the transitions whose dipole
orientation flips between them (the a-type transitions for the bundled
cyclohexylmethanol configuration).  That sign is what the interference scheme
exploits.

Three Hamiltonian models are provided, all as structured operators for the
dynamics core:

* a rotating-frame three-level model with the one-photon coupling resonant and
  the pump/Stokes pair detuned by delta,
* an effective two-level model after adiabatic elimination of the intermediate
  level (valid for delta much larger than the pump/Stokes Rabi amplitudes),
* the full oscillatory lab-frame four-level model including the two unwanted
  transitions that share the one-photon and Stokes fields.

Nominal transition and Rabi "MHz" figures are used directly as angular
frequencies in rad/us; only relative resonance conditions affect the
rotating-frame observables, and the pulse-timing identities (for example
T0 = 8 pi delta / (3 omega0^2) evaluating to 3.49 us at omega0 = 12,
delta = 60) hold only under this direct reading.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .dynamics import Carrier, CouplingTerm, EnvelopeProduct, RelaxationChannel, TimeDependentOperator
from .pulses import DriveField

FREQUENCY_MATCH_TOL = 1e-9


class Handedness(enum.Enum):
    """Mirror form of the molecule.  L carries the +1 sign on the flipped
    coupling, R the -1 sign; this convention is fixed package-wide."""

    L = "L"
    R = "R"

    @property
    def sign(self) -> float:
        return 1.0 if self is Handedness.L else -1.0

    @property
    def other(self) -> "Handedness":
        return Handedness.R if self is Handedness.L else Handedness.L


@dataclass(frozen=True)
class RotationalLevel:
    """One rotational level; energy in rad/us relative to the ground level."""

    index: int
    label: str
    energy: float

    def __post_init__(self):
        if not math.isfinite(self.energy):
            raise ValueError("level energy must be finite")


@dataclass(frozen=True)
class TransitionSpec:
    """A dipole-allowed transition between two levels.

    ``handedness_sign_flips`` marks the dipole type whose Rabi coupling changes
    sign between the two mirror forms.
    """

    levels: tuple[int, int]
    dipole_debye: float
    dipole_type: str
    frequency: float
    handedness_sign_flips: bool = False

    def __post_init__(self):
        if self.levels[0] == self.levels[1]:
            raise ValueError("transition levels must be distinct")
        if self.dipole_type not in ("a", "b", "c"):
            raise ValueError(f"dipole type must be one of a/b/c, got {self.dipole_type!r}")
        if self.dipole_debye < 0:
            raise ValueError("dipole magnitude must be >= 0")

    @property
    def key(self) -> tuple[int, int]:
        return tuple(sorted(self.levels))


@dataclass(frozen=True)
class MoleculeSpec:
    """Levels, transitions, and metadata for one molecule conformer."""

    name: str
    rotational_constants_mhz: tuple[float, float, float]
    levels: tuple[RotationalLevel, ...]
    transitions: tuple[TransitionSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        indices = [lv.index for lv in self.levels]
        if sorted(indices) != list(range(len(self.levels))):
            raise ValueError("level indices must be 0..n-1 without gaps")
        if abs(self.level(0).energy) > 0:
            raise ValueError("level 0 is the zero-energy point")
        for tr in self.transitions:
            m, n = tr.levels
            expected = abs(self.level(n).energy - self.level(m).energy)
            if abs(tr.frequency - expected) > FREQUENCY_MATCH_TOL * max(1.0, expected):
                raise ValueError(
                    f"transition {tr.levels} frequency {tr.frequency} does not match "
                    f"level splitting {expected}"
                )
        # The designated cyclic triple (levels 0, 1, 2) must be fully connected
        # and carry an odd number of sign-flipping couplings so that the triple
        # product of dipoles differs between the two mirror forms.
        triple_keys = {(0, 1), (0, 2), (1, 2)}
        triple = [tr for tr in self.transitions if tr.key in triple_keys]
        if {tr.key for tr in triple} != triple_keys:
            raise ValueError("levels 0, 1, 2 must form a closed cyclic triple")
        flips = sum(tr.handedness_sign_flips for tr in triple)
        if flips % 2 == 0:
            raise ValueError(
                "the cyclic triple needs an odd number of sign-flipping couplings"
            )

    @property
    def dim(self) -> int:
        return len(self.levels)

    def level(self, index: int) -> RotationalLevel:
        return self.levels[index]

    def transition(self, m: int, n: int) -> TransitionSpec:
        key = tuple(sorted((m, n)))
        for tr in self.transitions:
            if tr.key == key:
                return tr
        raise KeyError(f"no transition between levels {m} and {n}")

    def dipole_type_magnitudes(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for tr in self.transitions:
            prev = out.setdefault(tr.dipole_type, tr.dipole_debye)
            if abs(prev - tr.dipole_debye) > 1e-12:
                raise ValueError(f"inconsistent {tr.dipole_type}-type dipole magnitudes")
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rotational_constants_mhz": list(self.rotational_constants_mhz),
            "levels": [
                {"index": lv.index, "label": lv.label, "energy_rad_per_us": lv.energy}
                for lv in self.levels
            ],
            "transitions": [
                {
                    "levels": list(tr.levels),
                    "dipole_debye": tr.dipole_debye,
                    "dipole_type": tr.dipole_type,
                    "frequency_rad_per_us": tr.frequency,
                    "handedness_sign_flips": tr.handedness_sign_flips,
                }
                for tr in self.transitions
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MoleculeSpec":
        return cls(
            name=data["name"],
            rotational_constants_mhz=tuple(data["rotational_constants_mhz"]),
            levels=tuple(
                RotationalLevel(d["index"], d["label"], d["energy_rad_per_us"])
                for d in data["levels"]
            ),
            transitions=tuple(
                TransitionSpec(
                    levels=tuple(d["levels"]),
                    dipole_debye=d["dipole_debye"],
                    dipole_type=d["dipole_type"],
                    frequency=d["frequency_rad_per_us"],
                    handedness_sign_flips=d["handedness_sign_flips"],
                )
                for d in data["transitions"]
            ),
        )


def cyclohexylmethanol() -> MoleculeSpec:
    """Four-level cyclohexylmethanol configuration used throughout.

    Ket labels: |1> = 1_01 (index 0), |2> = 2_12 (1), |3> = 2_02 (2),
    |4> = 1_11 (3).  The a-type transitions flip sign between the mirror
    forms.
    """
    return MoleculeSpec(
        name="cyclohexylmethanol",
        rotational_constants_mhz=(3898.45, 1319.59, 1062.55),
        levels=(
            RotationalLevel(0, "1_01", 0.0),
            RotationalLevel(1, "2_12", 7059.0),
            RotationalLevel(2, "2_02", 4720.0),
            RotationalLevel(3, "1_11", 2575.0),
        ),
        transitions=(
            TransitionSpec((0, 1), 1.2, "b", 7059.0),
            TransitionSpec((0, 2), 0.4, "a", 4720.0, handedness_sign_flips=True),
            TransitionSpec((1, 2), 0.8, "c", 2339.0),
            TransitionSpec((0, 3), 0.8, "c", 2575.0),
            TransitionSpec((1, 3), 0.4, "a", 4484.0, handedness_sign_flips=True),
        ),
    )


# Backwards-friendly alias matching the molecule name used in run manifests.
cyclohexylmethanol_preset = cyclohexylmethanol


def dipole_triple_product(molecule: MoleculeSpec, handedness: Handedness) -> float:
    """Signed triple product of the cyclic-triple dipoles for one mirror form.

    The magnitude is the product of the three dipole magnitudes (the three
    dipole types are mutually orthogonal); the sign follows the package
    handedness convention.
    """
    keys = [(0, 1), (0, 2), (1, 2)]
    value = 1.0
    for m, n in keys:
        tr = molecule.transition(m, n)
        sign = handedness.sign if tr.handedness_sign_flips else 1.0
        value *= sign * tr.dipole_debye
    return value


def _ket_bra(dim: int, i: int, j: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[i, j] = 1.0
    return out


def _role_map(fields: Sequence[DriveField] | Mapping[str, DriveField]) -> dict[str, DriveField]:
    if isinstance(fields, Mapping):
        items = list(fields.values())
    else:
        items = list(fields)
    out: dict[str, DriveField] = {}
    for f in items:
        if f.role in out:
            raise ValueError(f"field role {f.role!r} supplied more than once")
        out[f.role] = f
    return out


def _deviation(deviations, role: str) -> float:
    if deviations is None:
        return 0.0
    return float(deviations.get(role, 0.0))


def build_rwa_3level(
    molecule: MoleculeSpec,
    fields: Sequence[DriveField] | Mapping[str, DriveField],
    handedness: Handedness,
    delta: float,
    deviations: Optional[Mapping[str, float]] = None,
    dim: int = 3,
) -> TimeDependentOperator:
    """Rotating-frame cyclic three-level Hamiltonian.

    The pump (p) and Stokes (s) couplings carry the common detuning factor
    exp(i delta t) on |2><1| and |2><3|; the one-photon coupling (q) is
    resonant and enters with the handedness sign.  Frequency deviations shift
    the respective detunings.  The q field may be omitted to obtain the bare
    two-photon partial Hamiltonian.

    ``dim`` may be 4 to embed the same couplings in the four-level space
    (level 3 stays uncoupled), which supports relaxation channels involving
    the fourth level.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if dim not in (3, 4):
        raise ValueError("rwa model supports dim 3 or 4")
    roles = _role_map(fields)
    for role in ("p", "s"):
        if role not in roles:
            raise ValueError(f"missing drive field role {role!r}")
    p, s = roles["p"], roles["s"]
    q = roles.get("q")

    terms = [
        CouplingTerm(
            0.5 * _ket_bra(dim, 1, 0),
            p.envelope,
            Carrier.exp(delta - _deviation(deviations, "p"), -p.phase),
        ),
        CouplingTerm(
            0.5 * _ket_bra(dim, 1, 2),
            s.envelope,
            Carrier.exp(delta - _deviation(deviations, "s"), -s.phase),
        ),
    ]
    if q is not None:
        terms.append(
            CouplingTerm(
                handedness.sign * 0.5 * _ket_bra(dim, 2, 0),
                q.envelope,
                Carrier.exp(-_deviation(deviations, "q"), -q.phase),
            )
        )
    return TimeDependentOperator(dim, terms)


def build_effective_2level(
    molecule: MoleculeSpec,
    fields: Sequence[DriveField] | Mapping[str, DriveField],
    handedness: Handedness,
    delta: float,
    deviations: Optional[Mapping[str, float]] = None,
) -> TimeDependentOperator:
    """Effective ground/target coupling after eliminating the intermediate level.

    Returns a dim-3 operator acting on levels 0 and 2 so populations stay
    comparable with the three-level model.  The coupling is

        ( Omega_p Omega_s / (4 delta)  -/+  Omega_q / 2 ) |1><3| + H.c.

    with the upper sign for L.  Stark shifts Omega_p^2/(4 delta) and
    Omega_s^2/(4 delta) cancel for identical pump/Stokes envelopes and are
    dropped in that case; otherwise they are included and a warning is issued
    since the scheme assumes matched envelopes.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    roles = _role_map(fields)
    for role in ("p", "q", "s"):
        if role not in roles:
            raise ValueError(f"missing drive field role {role!r}")
    p, q, s = roles["p"], roles["q"], roles["s"]

    dev_p = _deviation(deviations, "p")
    dev_q = _deviation(deviations, "q")
    dev_s = _deviation(deviations, "s")

    terms = [
        CouplingTerm(
            (1.0 / (4.0 * delta)) * _ket_bra(3, 0, 2),
            EnvelopeProduct(p.envelope, s.envelope),
            Carrier.exp(dev_p - dev_s, p.phase - s.phase),
        ),
        CouplingTerm(
            -handedness.sign * 0.5 * _ket_bra(3, 0, 2),
            q.envelope,
            Carrier.exp(dev_q, q.phase),
        ),
    ]
    matched = p.envelope is s.envelope or p.envelope == s.envelope
    if not matched:
        warnings.warn(
            "pump and Stokes envelopes differ; including Stark-shift terms",
            stacklevel=2,
        )
        terms.append(
            CouplingTerm(
                (1.0 / (8.0 * delta)) * _ket_bra(3, 0, 0),
                EnvelopeProduct(p.envelope, p.envelope),
            )
        )
        terms.append(
            CouplingTerm(
                (1.0 / (8.0 * delta)) * _ket_bra(3, 2, 2),
                EnvelopeProduct(s.envelope, s.envelope),
            )
        )
    return TimeDependentOperator(3, terms)


def build_lab_frame_4level(
    molecule: MoleculeSpec,
    fields: Sequence[DriveField] | Mapping[str, DriveField],
    handedness: Handedness,
    delta: Optional[float] = None,
    deviations: Optional[Mapping[str, float]] = None,
) -> TimeDependentOperator:
    """Full oscillatory four-level Hamiltonian in the lab frame.

    H = sum_j w_1j |j><j| + [ Omega_p cos(w_p t + phi_p) |1><2|
        +/- Omega_q cos(w_q t + phi_q) (|1><3| + |2><4|)
        +   Omega_s cos(w_s t + phi_s) (|2><3| + |1><4|) + H.c. ]

    The one-photon field also drives the unwanted |2>-|4> transition and the
    Stokes field the unwanted |1>-|4> one, both at the full main-transition
    Rabi amplitude.  Carriers default to w_q = w_13, w_p = w_12 - delta,
    w_s = w_23 - delta, shifted by any frequency deviations.
    """
    if molecule.dim < 4:
        raise ValueError("lab-frame model needs a molecule with four levels")
    roles = _role_map(fields)
    for role in ("p", "q", "s"):
        if role not in roles:
            raise ValueError(f"missing drive field role {role!r}")
    p, q, s = roles["p"], roles["q"], roles["s"]

    w12 = molecule.level(1).energy
    w13 = molecule.level(2).energy
    w23 = w12 - w13

    def carrier_for(f: DriveField, default: float) -> float:
        base = f.carrier if f.carrier is not None else default
        return base

    if delta is None and (p.carrier is None or s.carrier is None):
        raise ValueError("delta is required when pump/Stokes carriers are not explicit")
    w_q = carrier_for(q, w13) + _deviation(deviations, "q")
    w_p = carrier_for(p, (w12 - delta) if delta is not None else 0.0) + _deviation(deviations, "p")
    w_s = carrier_for(s, (w23 - delta) if delta is not None else 0.0) + _deviation(deviations, "s")

    energies = [molecule.level(k).energy for k in range(4)]
    terms = [
        CouplingTerm(_ket_bra(4, 0, 1), p.envelope, Carrier.cos(w_p, p.phase)),
        CouplingTerm(
            handedness.sign * (_ket_bra(4, 0, 2) + _ket_bra(4, 1, 3)),
            q.envelope,
            Carrier.cos(w_q, q.phase),
        ),
        CouplingTerm(
            _ket_bra(4, 1, 2) + _ket_bra(4, 0, 3),
            s.envelope,
            Carrier.cos(w_s, s.phase),
        ),
    ]
    return TimeDependentOperator(4, terms, static_diag=energies)


def relaxation_channels(
    molecule: MoleculeSpec, tau2: float, tau3: float
) -> list[RelaxationChannel]:
    """Jump channels from the lifetimes of levels |2> and |3>.

    Level |2> decays to |1>, |3>, and |4> with branching ratios given by the
    dipole magnitude of each transition over the summed type magnitudes, so
    the rates add up to 1/tau2 exactly.  Level |3> decays to |1> at 1/tau3.
    Level |4> is treated as steady.  Infinite lifetimes mean no channel.
    """
    for name, tau in (("tau2", tau2), ("tau3", tau3)):
        if not tau > 0:
            raise ValueError(f"{name} must be positive, got {tau}")
    channels: list[RelaxationChannel] = []
    if math.isfinite(tau2):
        denom = sum(molecule.dipole_type_magnitudes().values())
        for target in (0, 2, 3):
            tr = molecule.transition(1, target)
            rate = tr.dipole_debye / (tau2 * denom)
            channels.append(RelaxationChannel(from_level=1, to_level=target, rate=rate))
    if math.isfinite(tau3):
        channels.append(RelaxationChannel(from_level=2, to_level=0, rate=1.0 / tau3))
    return channels
