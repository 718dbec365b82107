"""Run-configuration schema: strict validation and construction.

Configs are YAML (JSON works too).  Every physical quantity carries a unit
suffix in its key.  Unknown keys are rejected with a message naming the key,
and validation completes before any simulation starts.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping, Optional

import yaml

from .molecule import MoleculeSpec, cyclohexylmethanol
from .m3wm import M3wmConfig
from .runner import EsstScenario
from .serialize import field_from_dict, field_to_dict, noise_from_dict, noise_to_dict
from . import presets


class ConfigError(ValueError):
    """The configuration is malformed; the message names the offending key."""


_SCENARIO_KEYS = {
    "preset",
    "model",
    "delta_rad_per_us",
    "pulses",
    "initial_state",
    "time_resolution_us",
    "noise",
    "lifetimes_us",
    "deviations_rad_per_us",
    "duration_us",
    "carrier_resolution",
}

_SCENARIO_PRESETS = {
    "fig3_cos_ramp": lambda: presets.fig3_scenario("cos_ramp"),
    "fig3_gaussian": lambda: presets.fig3_scenario("gaussian"),
    "fig3_cos_squared": lambda: presets.fig3_scenario("cos_squared"),
    "fig5": presets.fig5_scenario,
    "fig6_awgn": lambda: presets.fig6_scenario("awgn"),
    "fig6_fluctuation": lambda: presets.fig6_scenario("fluctuation"),
    "fig6_both": lambda: presets.fig6_scenario("both"),
    "fig7": presets.fig7_base_scenario,
    "fig8": presets.fig8_base_scenario,
}


def _reject_unknown(data: Mapping, allowed: set, where: str):
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


def load_config(path: str) -> dict:
    with open(path) as handle:
        data = yaml.safe_load(handle)
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a mapping")
    # a manifest written by a previous run doubles as a config
    if "run_config" in data:
        data = data["run_config"]
        if not isinstance(data, Mapping):
            raise ConfigError("manifest run_config must be a mapping")
    return dict(data)


def scenario_from_dict(data: Mapping, molecule: Optional[MoleculeSpec] = None) -> EsstScenario:
    _reject_unknown(data, _SCENARIO_KEYS, "scenario")
    base: Optional[EsstScenario] = None
    if "preset" in data:
        name = data["preset"]
        if name not in _SCENARIO_PRESETS:
            raise ConfigError(
                f"unknown preset {name!r}; available: {sorted(_SCENARIO_PRESETS)}"
            )
        base = _SCENARIO_PRESETS[name]()

    kwargs = {}
    if "model" in data:
        kwargs["model"] = data["model"]
    if "delta_rad_per_us" in data:
        kwargs["delta"] = float(data["delta_rad_per_us"])
    if "pulses" in data:
        pulses = data["pulses"]
        if not isinstance(pulses, Mapping):
            raise ConfigError("pulses must map roles to pulse definitions")
        fields = {}
        for role, spec in pulses.items():
            if role not in ("p", "q", "s"):
                raise ConfigError(f"unknown pulse role {role!r}; allowed: p, q, s")
            try:
                fields[role] = field_from_dict(role, spec)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        kwargs["fields"] = fields
    if "initial_state" in data:
        if data["initial_state"] not in ("ground", "mixed"):
            raise ConfigError("initial_state must be 'ground' or 'mixed'")
        kwargs["initial_state"] = data["initial_state"]
    if "time_resolution_us" in data:
        kwargs["time_resolution"] = (
            None if data["time_resolution_us"] is None else float(data["time_resolution_us"])
        )
    if "noise" in data and data["noise"] is not None:
        noise_map = data["noise"]
        if not isinstance(noise_map, Mapping):
            raise ConfigError("noise must map pulse roles to lists of noise specs")
        noise = {}
        for role, specs in noise_map.items():
            if role not in ("p", "q", "s"):
                raise ConfigError(f"noise given for unknown pulse role {role!r}")
            try:
                noise[role] = tuple(noise_from_dict(spec) for spec in specs)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        kwargs["noise"] = noise
    if "lifetimes_us" in data and data["lifetimes_us"] is not None:
        lt = data["lifetimes_us"]
        _reject_unknown(lt, {"tau2", "tau3"}, "lifetimes_us")
        kwargs["lifetimes"] = (
            _lifetime(lt.get("tau2", math.inf)),
            _lifetime(lt.get("tau3", math.inf)),
        )
    if "deviations_rad_per_us" in data and data["deviations_rad_per_us"] is not None:
        devs = data["deviations_rad_per_us"]
        _reject_unknown(devs, {"p", "q", "s"}, "deviations_rad_per_us")
        kwargs["deviations"] = {role: float(v) for role, v in devs.items()}
    if "duration_us" in data:
        kwargs["duration"] = float(data["duration_us"])
    if "carrier_resolution" in data:
        kwargs["carrier_resolution"] = int(data["carrier_resolution"])
    if molecule is not None:
        kwargs["molecule"] = molecule

    try:
        if base is not None:
            return dataclasses.replace(base, **kwargs)
        return EsstScenario(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def scenario_to_dict(scenario: EsstScenario) -> dict:
    out: dict = {
        "model": scenario.model,
        "delta_rad_per_us": scenario.delta,
        "pulses": {role: field_to_dict(f) for role, f in scenario.fields.items()},
        "initial_state": scenario.initial_state
        if isinstance(scenario.initial_state, str)
        else "ground",
        "time_resolution_us": scenario.time_resolution,
    }
    if scenario.noise:
        out["noise"] = {
            role: [noise_to_dict(spec) for spec in specs]
            for role, specs in scenario.noise.items()
        }
    if scenario.lifetimes is not None:
        out["lifetimes_us"] = {"tau2": scenario.lifetimes[0], "tau3": scenario.lifetimes[1]}
    if scenario.deviations:
        out["deviations_rad_per_us"] = dict(scenario.deviations)
    if scenario.duration is not None:
        out["duration_us"] = scenario.duration
    if scenario.carrier_resolution is not None:
        out["carrier_resolution"] = scenario.carrier_resolution
    return out


def _lifetime(value) -> float:
    if value in ("inf", ".inf", None):
        return math.inf
    return float(value)


_SWEEP_KEYS = {
    "kind",
    "scenario",
    "pulse_kind",
    "ratios",
    "omega0_rad_per_us",
    "pulse",
    "deviations_rad_per_us",
    "realizations",
    "tau2_grid_us",
    "tau3_grid_us",
}


def sweep_from_dict(data: Mapping) -> dict:
    """Validate a sweep description; returns normalized keyword arguments."""
    _reject_unknown(data, _SWEEP_KEYS, "sweep")
    kind = data.get("kind")
    if kind == "two_photon":
        if "ratios" not in data:
            raise ConfigError("two_photon sweep requires ratios")
        return {
            "kind": kind,
            "pulse_kind": data.get("pulse_kind", "cos_ramp"),
            "ratios": [float(r) for r in data["ratios"]],
            "omega0": float(data.get("omega0_rad_per_us", 1.0)),
        }
    if kind == "frequency_deviation":
        if "scenario" not in data or "pulse" not in data:
            raise ConfigError("frequency_deviation sweep requires scenario and pulse")
        return {
            "kind": kind,
            "scenario": scenario_from_dict(data["scenario"]),
            "pulse": data["pulse"],
            "deviations": [float(d) for d in data.get(
                "deviations_rad_per_us", presets.FIG7_DEFAULT_DEVIATIONS.tolist()
            )],
            "realizations": int(data.get("realizations", 1)),
        }
    if kind == "lifetimes":
        if "scenario" not in data:
            raise ConfigError("lifetimes sweep requires scenario")
        return {
            "kind": kind,
            "scenario": scenario_from_dict(data["scenario"]),
            "tau2_grid": [_lifetime(v) for v in data.get(
                "tau2_grid_us", presets.fig8_lifetime_grid().tolist()
            )],
            "tau3_grid": [_lifetime(v) for v in data.get(
                "tau3_grid_us", presets.fig8_lifetime_grid().tolist()
            )],
        }
    raise ConfigError(
        f"unknown sweep kind {kind!r}; expected two_photon, frequency_deviation, or lifetimes"
    )


_M3WM_KEYS = {
    "method",
    "omega_drive_rad_per_us",
    "omega_twist_rad_per_us",
    "detuning_rad_per_us",
    "drive_duration_us",
    "twist_duration_us",
    "duration_us",
    "ee_sweep",
    "pipeline",
}

_PIPELINE_KEYS = {"scenario", "sample_ee", "gate_d"}


def m3wm_from_dict(data: Mapping) -> dict:
    _reject_unknown(data, _M3WM_KEYS, "m3wm")
    if "method" not in data:
        raise ConfigError("m3wm requires a method")
    try:
        cfg = M3wmConfig(
            method=data["method"],
            omega_drive=float(data.get("omega_drive_rad_per_us", 1.0)),
            omega_twist=(
                float(data["omega_twist_rad_per_us"])
                if "omega_twist_rad_per_us" in data
                else None
            ),
            detuning=(
                float(data["detuning_rad_per_us"]) if "detuning_rad_per_us" in data else None
            ),
            drive_duration=(
                float(data["drive_duration_us"]) if "drive_duration_us" in data else None
            ),
            twist_duration=(
                float(data["twist_duration_us"]) if "twist_duration_us" in data else None
            ),
            duration=float(data["duration_us"]) if "duration_us" in data else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = {"config": cfg, "ee_sweep": [float(v) for v in data.get("ee_sweep", [-1.0, 0.0, 1.0])]}
    for ee in out["ee_sweep"]:
        if not -1.0 <= ee <= 1.0:
            raise ConfigError(f"ee_sweep entries must lie in [-1, 1], got {ee}")
    if "pipeline" in data and data["pipeline"] is not None:
        pipe = data["pipeline"]
        _reject_unknown(pipe, _PIPELINE_KEYS, "m3wm.pipeline")
        if "scenario" not in pipe:
            raise ConfigError("m3wm.pipeline requires a scenario")
        sample_ee = float(pipe.get("sample_ee", 0.0))
        if not -1.0 <= sample_ee <= 1.0:
            raise ConfigError(f"pipeline sample_ee must lie in [-1, 1], got {sample_ee}")
        out["pipeline"] = {
            "scenario": scenario_from_dict(pipe["scenario"]),
            "sample_ee": sample_ee,
            "gate_d": float(pipe.get("gate_d", 0.9)),
        }
    return out


_ROOT_KEYS = {"seed", "scenario", "sweep", "m3wm", "molecule"}


def parse_run_config(data: Mapping) -> dict:
    """Validate the top-level config; returns parsed pieces by section."""
    _reject_unknown(data, _ROOT_KEYS, "config")
    out: dict = {"raw": dict(data)}
    out["seed"] = int(data.get("seed", 0))
    molecule = None
    if "molecule" in data and data["molecule"] is not None:
        try:
            molecule = MoleculeSpec.from_dict(data["molecule"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid molecule: {exc}") from exc
    out["molecule"] = molecule
    if "scenario" in data:
        out["scenario"] = scenario_from_dict(data["scenario"], molecule)
    if "sweep" in data:
        out["sweep"] = sweep_from_dict(data["sweep"])
    if "m3wm" in data:
        out["m3wm"] = m3wm_from_dict(data["m3wm"])
    return out
