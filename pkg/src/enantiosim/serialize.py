"""Dict forms of envelopes, noise specs, and drive fields.

Used both for run manifests and for the CLI config schema.  All physical
quantities carry explicit unit suffixes in their keys.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional

from .pulses import (
    AwgnNoise,
    CosRamp,
    CosSquared,
    DelayedCosRamp,
    DriveField,
    Envelope,
    Gaussian,
    NoiseSpec,
    PulseSchedule,
    Square,
    UniformFluctuation,
)


def envelope_to_dict(envelope: Envelope) -> dict:
    if isinstance(envelope, Square):
        return {
            "variant": "square",
            "amplitude_rad_per_us": envelope.amplitude,
            "duration_us": envelope.duration,
            "start_us": envelope.start,
        }
    if isinstance(envelope, CosRamp):
        return {
            "variant": "cos_ramp",
            "amplitude_rad_per_us": envelope.amplitude,
            "period_us": envelope.period,
            "start_us": envelope.start,
        }
    if isinstance(envelope, DelayedCosRamp):
        return {
            "variant": "delayed_cos_ramp",
            "amplitude_rad_per_us": envelope.amplitude,
            "period_us": envelope.period,
            "delay_us": envelope.delay,
        }
    if isinstance(envelope, Gaussian):
        return {
            "variant": "gaussian",
            "amplitude_rad_per_us": envelope.amplitude,
            "width_us": envelope.width,
            "center_us": envelope.center,
        }
    if isinstance(envelope, CosSquared):
        return {
            "variant": "cos_squared",
            "amplitude_rad_per_us": envelope.amplitude,
            "period_us": envelope.period,
            "start_us": envelope.start,
        }
    if isinstance(envelope, PulseSchedule):
        return {
            "variant": "piecewise_constant",
            "dt_us": envelope.dt,
            "amplitudes_rad_per_us": envelope.values.tolist(),
        }
    raise TypeError(f"unsupported envelope {type(envelope).__name__}")


_ENVELOPE_KEYS = {
    "square": {"amplitude_rad_per_us", "duration_us", "start_us"},
    "cos_ramp": {"amplitude_rad_per_us", "period_us", "start_us"},
    "delayed_cos_ramp": {"amplitude_rad_per_us", "period_us", "delay_us"},
    "gaussian": {"amplitude_rad_per_us", "width_us", "center_us"},
    "cos_squared": {"amplitude_rad_per_us", "period_us", "start_us"},
    "piecewise_constant": {"dt_us", "amplitudes_rad_per_us"},
}


def envelope_from_dict(data: Mapping) -> Envelope:
    variant = data.get("variant")
    if variant not in _ENVELOPE_KEYS:
        raise ValueError(
            f"unknown envelope variant {variant!r}; expected one of {sorted(_ENVELOPE_KEYS)}"
        )
    unknown = set(data) - _ENVELOPE_KEYS[variant] - {"variant"}
    if unknown:
        raise ValueError(f"unknown envelope key(s) {sorted(unknown)} for variant {variant!r}")
    if variant == "square":
        return Square(
            data["amplitude_rad_per_us"], data["duration_us"], data.get("start_us", 0.0)
        )
    if variant == "cos_ramp":
        return CosRamp(
            data["amplitude_rad_per_us"], data["period_us"], data.get("start_us", 0.0)
        )
    if variant == "delayed_cos_ramp":
        return DelayedCosRamp(
            data["amplitude_rad_per_us"], data["period_us"], data["delay_us"]
        )
    if variant == "gaussian":
        return Gaussian(
            data["amplitude_rad_per_us"], data["width_us"], data.get("center_us")
        )
    if variant == "cos_squared":
        return CosSquared(
            data["amplitude_rad_per_us"], data["period_us"], data.get("start_us", 0.0)
        )
    return PulseSchedule(data["dt_us"], data["amplitudes_rad_per_us"])


def noise_to_dict(noise: NoiseSpec) -> dict:
    if isinstance(noise, AwgnNoise):
        return {"kind": "awgn", "rsn_db": noise.rsn_db, "seed": noise.seed}
    if isinstance(noise, UniformFluctuation):
        return {"kind": "fluctuation", "eta": noise.eta, "seed": noise.seed}
    raise TypeError(f"unsupported noise spec {type(noise).__name__}")


def noise_from_dict(data: Mapping) -> NoiseSpec:
    kind = data.get("kind")
    if kind == "awgn":
        unknown = set(data) - {"kind", "rsn_db", "seed"}
        if unknown:
            raise ValueError(f"unknown awgn key(s) {sorted(unknown)}")
        if "rsn_db" not in data:
            raise ValueError("awgn noise requires rsn_db")
        return AwgnNoise(float(data["rsn_db"]), data.get("seed"))
    if kind == "fluctuation":
        unknown = set(data) - {"kind", "eta", "seed"}
        if unknown:
            raise ValueError(f"unknown fluctuation key(s) {sorted(unknown)}")
        if "eta" not in data:
            raise ValueError("fluctuation noise requires eta")
        eta = float(data["eta"])
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {eta}")
        return UniformFluctuation(eta, data.get("seed"))
    raise ValueError(f"unknown noise kind {kind!r}; expected 'awgn' or 'fluctuation'")


def field_to_dict(field: DriveField) -> dict:
    out = {
        "envelope": envelope_to_dict(field.envelope),
        "phase_rad": field.phase,
    }
    if field.carrier is not None:
        out["carrier_rad_per_us"] = field.carrier
    return out


def field_from_dict(role: str, data: Mapping) -> DriveField:
    unknown = set(data) - {"envelope", "phase_rad", "carrier_rad_per_us"}
    if unknown:
        raise ValueError(f"unknown field key(s) {sorted(unknown)} in pulse {role!r}")
    if "envelope" not in data:
        raise ValueError(f"pulse {role!r} requires an envelope")
    return DriveField(
        role=role,
        envelope=envelope_from_dict(data["envelope"]),
        phase=float(data.get("phase_rad", 0.0)),
        carrier=data.get("carrier_rad_per_us"),
    )
