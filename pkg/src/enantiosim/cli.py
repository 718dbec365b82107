"""Command-line interface: scenario runs, sweeps, figure data, and readout.

Verbs:
    simulate       run one scenario from a config; writes trajectory.csv + manifest.json
    sweep          run a sweep from a config; writes sweep.csv + manifest.json
    reproduce      emit the bundled figure data sets (fig2, fig3, fig5, fig6, fig7, fig8)
    m3wm           coherence preparation and listen-signal prediction
    export-preset  dump the bundled molecule description

Exit codes: 0 success, 2 configuration error, 3 numerical diagnostic failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

import numpy as np

from . import __version__, presets
from .config import ConfigError, load_config, parse_run_config, scenario_to_dict
from .csvio import write_csv, write_manifest
from .dynamics import NumericsDiagnosticError
from .m3wm import (
    DEFAULT_TRIPLE_PRODUCT,
    M3wmGateError,
    pipeline_amplitude,
    prepare_coherence_trajectory,
    run_pipeline,
)
from .molecule import cyclohexylmethanol
from .runner import (
    EsstResult,
    run_esst,
    run_esst_ensemble,
    sweep_frequency_deviation,
    sweep_lifetimes,
    sweep_two_photon_transfer,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3

FIGURES = ("fig2", "fig3", "fig5", "fig6", "fig7", "fig8")

TRAJECTORY_HEADER = ["t_us", "P1L", "P2L", "P3L", "P4L", "P1R", "P2R", "P3R", "P4R", "D"]
WAVEFORM_HEADER = [
    "t_us",
    "omega_p_rad_per_us",
    "omega_q_rad_per_us",
    "omega_s_rad_per_us",
]


def _threads_from(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ENANTIOSIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"ENANTIOSIM_THREADS must be an integer, got {env!r}") from exc
    return 1


def _trajectory_columns(result: EsstResult) -> dict:
    cols = {"t_us": result.times, "D": result.d_trajectory}
    for k in range(4):
        cols[f"P{k + 1}L"] = result.populations_l[:, k]
        cols[f"P{k + 1}R"] = result.populations_r[:, k]
    return cols


def _write_trajectory(path: str, result: EsstResult):
    write_csv(path, TRAJECTORY_HEADER, _trajectory_columns(result))


def _write_waveforms(path: str, result: EsstResult):
    if not result.schedules:
        raise ValueError("scenario has no discretized waveforms to write")
    sched = {role: result.schedules[role] for role in ("p", "q", "s")}
    n = max(s.n_bins for s in sched.values())
    dt = sched["p"].dt
    cols = {"t_us": np.arange(n) * dt}
    for role in ("p", "q", "s"):
        vals = np.zeros(n)
        vals[: sched[role].n_bins] = sched[role].values
        cols[f"omega_{role}_rad_per_us"] = vals
    write_csv(path, WAVEFORM_HEADER, cols)


def _base_manifest(command: str, args_echo: dict, t_started: float) -> dict:
    return {
        "command": command,
        "arguments": args_echo,
        "version": __version__,
        "wall_clock_s": round(time.time() - t_started, 3),
    }


def cmd_simulate(args) -> int:
    t0 = time.time()
    raw = load_config(args.config)
    parsed = parse_run_config(raw)
    if "scenario" not in parsed:
        raise ConfigError("simulate requires a scenario section")
    scenario = parsed["scenario"]
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    elif parsed["seed"]:
        scenario = dataclasses.replace(scenario, seed=parsed["seed"])
    if args.fast and scenario.model == "lab4":
        scenario = dataclasses.replace(scenario, model="rwa3")

    result = run_esst(scenario)
    out = args.out_dir
    _write_trajectory(os.path.join(out, "trajectory.csv"), result)
    outputs = ["trajectory.csv"]
    if result.schedules:
        _write_waveforms(os.path.join(out, "waveforms.csv"), result)
        outputs.append("waveforms.csv")
    manifest = _base_manifest("simulate", {"config": args.config, "fast": args.fast}, t0)
    manifest["run_config"] = {"seed": scenario.seed, "scenario": scenario_to_dict(scenario)}
    manifest["run"] = result.manifest
    manifest["outputs"] = outputs
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    print(f"final D = {result.final_d:.6f} (P3L={result.final_p3[0]:.6f}, P3R={result.final_p3[1]:.6f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.time()
    parsed = parse_run_config(load_config(args.config))
    if "sweep" not in parsed:
        raise ConfigError("sweep requires a sweep section")
    spec = parsed["sweep"]
    threads = _threads_from(args)
    kind = spec["kind"]
    if kind == "two_photon":
        table = sweep_two_photon_transfer(
            spec["pulse_kind"], spec["ratios"], omega0=spec["omega0"], threads=threads
        )
    elif kind == "frequency_deviation":
        scenario = spec["scenario"]
        if args.fast and scenario.model == "lab4":
            scenario = dataclasses.replace(scenario, model="rwa3")
        table = sweep_frequency_deviation(
            scenario, spec["pulse"], spec["deviations"],
            n_realizations=spec["realizations"], threads=threads,
        )
    else:
        scenario = spec["scenario"]
        if args.fast and scenario.model == "lab4":
            scenario = dataclasses.replace(scenario, model="rwa3")
        table = sweep_lifetimes(scenario, spec["tau2_grid"], spec["tau3_grid"], threads=threads)

    out = args.out_dir
    header = list(table.columns)
    write_csv(os.path.join(out, "sweep.csv"), header, table.columns)
    manifest = _base_manifest("sweep", {"config": args.config, "fast": args.fast}, t0)
    manifest["run_config"] = parsed["raw"]
    manifest["sweep_meta"] = table.meta
    manifest["outputs"] = ["sweep.csv"]
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    print(f"sweep.csv written ({table.n_rows} rows)")
    return EXIT_OK


def _reproduce_fig2(out: str, args) -> list[str]:
    ratios = presets.FIG2_DEFAULT_RATIOS
    threads = _threads_from(args)
    square = sweep_two_photon_transfer("square", ratios, threads=threads)
    shaped = sweep_two_photon_transfer("cos_ramp", ratios, threads=threads)
    write_csv(
        os.path.join(out, "fig2_transfer.csv"),
        ["ratio", "P3_square", "P3_shaped"],
        {
            "ratio": ratios,
            "P3_square": square.columns["p3_final"],
            "P3_shaped": shaped.columns["p3_final"],
        },
    )
    return ["fig2_transfer.csv"]


def _reproduce_fig3(out: str, args) -> list[str]:
    files = []
    for family in presets.Q_WAVEFORM_FAMILIES:
        result = run_esst(presets.fig3_scenario(family))
        name = f"fig3_{family}_trajectory.csv"
        _write_trajectory(os.path.join(out, name), result)
        files.append(name)
    return files


def _reproduce_fig5(out: str, args) -> list[str]:
    scenario = presets.fig5_scenario()
    if args.fast:
        scenario = dataclasses.replace(scenario, model="rwa3")
    result = run_esst(scenario)
    _write_trajectory(os.path.join(out, "fig5_trajectory.csv"), result)
    _write_waveforms(os.path.join(out, "fig5_waveforms.csv"), result)
    print(f"fig5 final D = {result.final_d:.6f}")
    return ["fig5_trajectory.csv", "fig5_waveforms.csv"]


def _reproduce_fig6(out: str, args) -> list[str]:
    files = []
    for kind in ("awgn", "fluctuation"):
        scenario = presets.fig6_scenario(kind, seed=args.seed or 0)
        if args.fast:
            scenario = dataclasses.replace(scenario, model="rwa3")
        result = run_esst(scenario)
        traj = f"fig6_{kind}_trajectory.csv"
        wave = f"fig6_{kind}_waveforms.csv"
        _write_trajectory(os.path.join(out, traj), result)
        _write_waveforms(os.path.join(out, wave), result)
        files += [traj, wave]
        print(f"fig6 {kind}: final D = {result.final_d:.6f}")
    return files


def _reproduce_fig7(out: str, args) -> list[str]:
    scenario = presets.fig7_base_scenario()
    if args.fast:
        scenario = dataclasses.replace(scenario, model="rwa3")
    deviations = presets.FIG7_DEFAULT_DEVIATIONS
    threads = _threads_from(args)
    cols = {"delta_rad_per_us": deviations}
    for role in ("p", "q", "s"):
        table = sweep_frequency_deviation(scenario, role, deviations, threads=threads)
        cols[f"D_{role}"] = table.columns["d_final"]
    write_csv(
        os.path.join(out, "fig7_deviation.csv"),
        ["delta_rad_per_us", "D_p", "D_q", "D_s"],
        cols,
    )
    return ["fig7_deviation.csv"]


def _reproduce_fig8(out: str, args) -> list[str]:
    scenario = presets.fig8_base_scenario(fast=args.fast)
    grid = presets.fig8_lifetime_grid(args.grid or presets.FIG8_DEFAULT_GRID_SIZE)
    table = sweep_lifetimes(scenario, grid, grid, threads=_threads_from(args))
    write_csv(
        os.path.join(out, "fig8_lifetimes.csv"),
        ["tau2_us", "tau3_us", "D_final"],
        {
            "tau2_us": table.columns["tau2_us"],
            "tau3_us": table.columns["tau3_us"],
            "D_final": table.columns["d_final"],
        },
    )
    return ["fig8_lifetimes.csv"]


def cmd_reproduce(args) -> int:
    t0 = time.time()
    if args.figure not in FIGURES:
        raise ConfigError(f"unknown figure {args.figure!r}; expected one of {FIGURES}")
    out = args.out_dir
    handler = {
        "fig2": _reproduce_fig2,
        "fig3": _reproduce_fig3,
        "fig5": _reproduce_fig5,
        "fig6": _reproduce_fig6,
        "fig7": _reproduce_fig7,
        "fig8": _reproduce_fig8,
    }[args.figure]
    files = handler(out, args)
    manifest = _base_manifest(
        "reproduce",
        {"figure": args.figure, "fast": args.fast, "seed": args.seed, "grid": args.grid},
        t0,
    )
    manifest["outputs"] = files
    write_manifest(os.path.join(out, f"{args.figure}_manifest.json"), manifest)
    print(f"{args.figure}: wrote {', '.join(files)}")
    return EXIT_OK


def cmd_m3wm(args) -> int:
    t0 = time.time()
    parsed = parse_run_config(load_config(args.config))
    if "m3wm" not in parsed:
        raise ConfigError("m3wm requires an m3wm section")
    spec = parsed["m3wm"]
    cfg = spec["config"]
    out = args.out_dir

    times, coh, pops = prepare_coherence_trajectory(cfg)
    write_csv(
        os.path.join(out, "m3wm_coherence.csv"),
        ["t_us", "coherence_abs", "P_202", "P_303", "P_313"],
        {
            "t_us": times,
            "coherence_abs": coh,
            "P_202": pops[:, 0],
            "P_303": pops[:, 1],
            "P_313": pops[:, 2],
        },
    )

    manifest = _base_manifest("m3wm", {"config": args.config}, t0)
    manifest["run_config"] = parsed["raw"]
    if "pipeline" in spec:
        pipe = spec["pipeline"]
        result = run_pipeline(
            pipe["scenario"], cfg, sample_ee=pipe["sample_ee"], gate_d=pipe["gate_d"]
        )
        p3_l, p3_r = result.esst.final_p3
        coh_final = result.coherence_magnitude
        manifest["pipeline"] = result.manifest
    else:
        # ideal transfer stage: all of one mirror form parked on the target level
        p3_l, p3_r = 0.0, 1.0
        coh_final = float(coh[-1])

    ee_sweep = spec["ee_sweep"]
    amplitudes = [pipeline_amplitude(p3_l, p3_r, coh_final, ee) for ee in ee_sweep]
    # conventional readout for comparison: the whole sample emits, so the
    # net amplitude is directly proportional to the excess
    conventional = [ee * DEFAULT_TRIPLE_PRODUCT * 2.0 * coh_final for ee in ee_sweep]
    write_csv(
        os.path.join(out, "m3wm_summary.csv"),
        [
            "sample_ee",
            "predicted_amplitude",
            "conventional_amplitude",
            "coherence_abs",
            "P3L",
            "P3R",
        ],
        {
            "sample_ee": ee_sweep,
            "predicted_amplitude": amplitudes,
            "conventional_amplitude": conventional,
            "coherence_abs": [coh_final] * len(ee_sweep),
            "P3L": [p3_l] * len(ee_sweep),
            "P3R": [p3_r] * len(ee_sweep),
        },
    )
    manifest["outputs"] = ["m3wm_coherence.csv", "m3wm_summary.csv"]
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    print(f"m3wm {cfg.method}: coherence = {coh_final:.6f}")
    return EXIT_OK


def cmd_export_preset(args) -> int:
    import yaml

    data = cyclohexylmethanol().to_dict()
    text = yaml.safe_dump({"molecule": data}, sort_keys=False)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enantiosim",
        description="Enantiomer-selective state transfer simulator",
    )
    parser.add_argument("--version", action="version", version=f"enantiosim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="YAML/JSON run configuration")
        p.add_argument("--out-dir", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel sweep workers (default: ENANTIOSIM_THREADS or 1)")
        p.add_argument("--fast", action="store_true",
                       help="replace the lab-frame model with the rotating-frame one")

    p_sim = sub.add_parser("simulate", help="run one scenario")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="emit bundled figure data")
    p_rep.add_argument("figure", help=f"one of {', '.join(FIGURES)}")
    common(p_rep, config_required=False)
    p_rep.add_argument("--grid", type=int, default=None,
                       help="lifetime grid size per axis for fig8 (default 21)")
    p_rep.set_defaults(func=cmd_reproduce)

    p_m3wm = sub.add_parser("m3wm", help="coherence preparation and signal prediction")
    common(p_m3wm)
    p_m3wm.set_defaults(func=cmd_m3wm)

    p_exp = sub.add_parser("export-preset", help="dump the bundled molecule description")
    p_exp.add_argument("--out", default=None, help="output file (default: stdout)")
    p_exp.set_defaults(func=cmd_export_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsDiagnosticError, M3wmGateError) as exc:
        print(f"numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except ValueError as exc:
        # covers constraint violations raised past config validation
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
