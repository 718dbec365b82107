"""Paired-run orchestration, contrast measure, sweeps, and phase switching."""

import dataclasses
import math

import numpy as np
import pytest

from enantiosim.pulses import AwgnNoise, DriveField, Square, UniformFluctuation
from enantiosim.presets import (
    fig3_scenario,
    fig5_scenario,
    fig6_scenario,
    interference_fields,
)
from enantiosim.runner import (
    EsstScenario,
    PhaseConditionError,
    SweepTable,
    fidelity_D,
    phase_switch,
    run_esst,
    run_esst_ensemble,
    sweep_frequency_deviation,
    sweep_lifetimes,
    sweep_two_photon_transfer,
)


def quiet_scenario(duration=2.0):
    fields = {
        "p": DriveField("p", Square(1e-12, duration)),
        "q": DriveField("q", Square(1e-12, duration)),
        "s": DriveField("s", Square(1e-12, duration)),
    }
    return EsstScenario(model="rwa3", fields=fields, delta=50.0)


class TestRunEsst:
    def test_all_pulses_off_gives_zero_contrast(self):
        result = run_esst(quiet_scenario())
        np.testing.assert_allclose(result.d_trajectory, 0.0, atol=1e-12)

    def test_contrast_bounds_and_start(self):
        result = run_esst(fig3_scenario("cos_ramp"))
        assert result.d_trajectory[0] == 0.0
        assert np.all(result.d_trajectory >= 0.0)
        assert np.all(result.d_trajectory <= 1.0 + 1e-12)

    def test_sequential_one_photon_after_two_photon(self):
        # two-photon pulse first, one-photon pulse afterwards: the left form
        # returns to the ground state, the right form is excited
        result = run_esst(fig3_scenario("cos_ramp"))
        p3_l, p3_r = result.final_p3
        assert p3_r >= 0.99
        assert p3_l <= 0.01

    def test_fidelity_measure_examples(self):
        result = run_esst(fig3_scenario("gaussian"))
        assert fidelity_D(result) == pytest.approx(
            abs(result.final_p3[0] - result.final_p3[1])
        )

    def test_waveform_and_time_order_flexibility(self):
        finals = {
            fam: run_esst(fig3_scenario(fam)).final_d
            for fam in ("cos_ramp", "gaussian", "cos_squared")
        }
        values = list(finals.values())
        assert max(values) - min(values) < 0.01

    def test_results_are_deterministic(self):
        scenario = fig6_scenario("both", seed=11)
        a = run_esst(scenario)
        b = run_esst(scenario)
        np.testing.assert_array_equal(a.populations_l, b.populations_l)
        np.testing.assert_array_equal(a.populations_r, b.populations_r)
        for role in ("p", "q", "s"):
            np.testing.assert_array_equal(
                a.schedules[role].values, b.schedules[role].values
            )

    def test_noise_seeds_recorded_in_manifest(self):
        result = run_esst(fig6_scenario("awgn", seed=11))
        specs = result.manifest["noise"]
        assert set(specs) == {"p", "q", "s"}
        assert all(entry[0]["seed"] is not None for entry in specs.values())

    def test_noise_requires_time_resolution(self):
        scenario = fig3_scenario("gaussian")
        noisy = dataclasses.replace(
            scenario, noise={"p": (AwgnNoise(10.0),)}
        )
        with pytest.raises(ValueError):
            run_esst(noisy)

    def test_record_length_default(self):
        result = run_esst(fig3_scenario("gaussian"))
        assert 200 <= len(result.times) <= 205

    def test_scenario_validation(self):
        fields = {
            "p": DriveField("p", Square(1.0, 1.0)),
            "s": DriveField("s", Square(1.0, 1.0)),
        }
        with pytest.raises(ValueError):
            EsstScenario(model="floquet", fields=fields, delta=10.0)
        with pytest.raises(ValueError):
            EsstScenario(model="rwa3", fields={"p": fields["p"]}, delta=10.0)
        with pytest.raises(ValueError):
            EsstScenario(model="rwa3", fields=fields, delta=10.0, initial_state="warm")
        with pytest.raises(ValueError):
            EsstScenario(model="rwa3", fields=fields, delta=10.0, lifetimes=(0.0, 1.0))
        with pytest.raises(ValueError):
            EsstScenario(model="effective", fields=fields, delta=10.0, lifetimes=(1.0, 1.0))


class TestTwoPhotonSweep:
    def test_shaped_transfer_near_unity(self):
        table = sweep_two_photon_transfer("cos_ramp", [2.5, 4.0])
        p3 = dict(zip(table.columns["ratio"], table.columns["p3_final"]))
        assert p3[2.5] >= 0.99
        assert p3[4.0] >= 0.998

    def test_square_transfer_at_large_ratio(self):
        table = sweep_two_photon_transfer("square", [10.0])
        assert table.columns["p3_final"][0] >= 0.98

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            sweep_two_photon_transfer("cos_ramp", [])
        with pytest.raises(ValueError):
            sweep_two_photon_transfer("cos_ramp", [1.0, 3.0, 2.0])
        with pytest.raises(ValueError):
            sweep_two_photon_transfer("triangle", [2.0])

    def test_table_shape(self):
        table = sweep_two_photon_transfer("cos_ramp", [2.0, 3.0, 4.0])
        assert table.n_rows == 3
        with pytest.raises(ValueError):
            SweepTable(columns={"a": np.arange(3), "b": np.arange(2)})


class TestFrequencyDeviationSweep:
    def test_zero_deviation_matches_base_run(self):
        scenario = fig3_scenario("gaussian")
        base = run_esst(scenario).final_d
        table = sweep_frequency_deviation(scenario, "q", [0.0])
        assert table.columns["d_final"][0] == pytest.approx(base, abs=1e-12)

    def test_contrast_decreases_away_from_resonance(self):
        scenario = fig3_scenario("gaussian")
        table = sweep_frequency_deviation(scenario, "q", [-0.2, -0.1, 0.0, 0.1, 0.2])
        d = table.columns["d_final"]
        assert d[2] == max(d)
        assert d[1] > d[0] and d[3] > d[4]

    def test_role_validation(self):
        with pytest.raises(ValueError):
            sweep_frequency_deviation(fig3_scenario("gaussian"), "drive", [0.0])


class TestLifetimeSweep:
    def test_infinite_lifetimes_match_clean_run(self):
        scenario = fig3_scenario("gaussian", initial_state="mixed")
        clean = run_esst(scenario).final_d
        table = sweep_lifetimes(scenario, [math.inf], [math.inf])
        assert table.columns["d_final"][0] == pytest.approx(clean, abs=1e-12)

    def test_grid_is_cartesian_product(self):
        scenario = fig3_scenario("gaussian", initial_state="mixed")
        table = sweep_lifetimes(scenario, [10.0, 100.0], [50.0, 500.0, math.inf])
        assert table.n_rows == 6
        assert set(zip(table.columns["tau2_us"], table.columns["tau3_us"])) == {
            (10.0, 50.0), (10.0, 500.0), (10.0, math.inf),
            (100.0, 50.0), (100.0, 500.0), (100.0, math.inf),
        }


class TestEnsemble:
    def test_ensemble_statistics_deterministic(self):
        scenario = fig6_scenario("fluctuation", seed=21, model="rwa3")
        m1, s1, f1 = run_esst_ensemble(scenario, 4)
        m2, s2, f2 = run_esst_ensemble(scenario, 4)
        assert m1 == m2 and s1 == s2
        np.testing.assert_array_equal(f1, f2)

    def test_threads_do_not_change_results(self):
        scenario = fig6_scenario("fluctuation", seed=21, model="rwa3")
        m1, _, f1 = run_esst_ensemble(scenario, 4, threads=1)
        m2, _, f2 = run_esst_ensemble(scenario, 4, threads=4)
        np.testing.assert_array_equal(f1, f2)


class TestPhaseSwitch:
    def test_zero_phases_excite_right_form(self):
        result = phase_switch(fig3_scenario("gaussian"), 0.0, 0.0, 0.0)
        assert result.manifest["excited_handedness"] == "R"
        assert result.final_p3[1] > 0.99 and result.final_p3[0] < 0.01

    def test_pi_shift_on_one_photon_pulse_swaps_forms(self):
        base = phase_switch(fig3_scenario("gaussian"), 0.0, 0.0, 0.0)
        flipped = phase_switch(fig3_scenario("gaussian"), 0.0, math.pi, 0.0)
        assert flipped.manifest["excited_handedness"] == "L"
        assert flipped.final_p3[0] > 0.99 and flipped.final_p3[1] < 0.01
        assert flipped.final_d == pytest.approx(base.final_d, abs=1e-6)

    def test_contrast_depends_only_on_phase_combination(self):
        base = phase_switch(fig3_scenario("gaussian"), 0.0, 0.0, 0.0)
        rotated = phase_switch(fig3_scenario("gaussian"), math.pi / 3, 0.0, math.pi / 3)
        assert rotated.manifest["excited_handedness"] == "R"
        assert rotated.final_d == pytest.approx(base.final_d, abs=1e-6)

    def test_partial_interference_rejected(self):
        with pytest.raises(PhaseConditionError):
            phase_switch(fig3_scenario("gaussian"), 0.0, 0.4, 0.0)


class TestDiscretization:
    def test_halved_resolution_shifts_contrast_below_tolerance(self):
        # finite waveform resolution invariant at the lab-frame parameters
        d_coarse = run_esst(fig5_scenario(time_resolution=0.05)).final_d
        d_fine = run_esst(fig5_scenario(time_resolution=0.025)).final_d
        assert abs(d_coarse - d_fine) < 1e-3


class TestNoisePairing:
    def test_both_forms_consume_the_same_noisy_schedules(self):
        # reconstruct the schedules from the seeds recorded in the manifest;
        # they must match the ones both propagations consumed, bit for bit
        from enantiosim.pulses import AwgnNoise, UniformFluctuation, apply_noise, discretize

        scenario = fig6_scenario("both", seed=33)
        result = run_esst(scenario)
        horizon = max(f.envelope.support[1] for f in scenario.fields.values())
        for role, field in scenario.fields.items():
            sched = discretize(field.envelope, scenario.time_resolution, horizon)
            for spec_dict in result.manifest["noise"][role]:
                if spec_dict["kind"] == "awgn":
                    spec = AwgnNoise(spec_dict["rsn_db"], spec_dict["seed"])
                else:
                    spec = UniformFluctuation(spec_dict["eta"], spec_dict["seed"])
                sched = apply_noise(sched, spec)
            np.testing.assert_array_equal(sched.values, result.schedules[role].values)


class TestManifest:
    def test_manifest_captures_solver_and_parameters(self):
        result = run_esst(fig5_scenario())
        m = result.manifest
        assert m["model"] == "lab4"
        assert m["delta_rad_per_us"] == 60.0
        assert m["initial_state"] == "mixed"
        assert m["solver"]["method"] == "rk4-fixed-step"
        assert m["solver"]["n_steps"] > 0
        assert set(m["pulses"]) == {"p", "q", "s"}
