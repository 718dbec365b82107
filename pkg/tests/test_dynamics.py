"""Propagator correctness: analytic oracles, conservation laws, convergence."""

import math

import numpy as np
import pytest

from enantiosim.dynamics import (
    CallableOperator,
    Carrier,
    CouplingTerm,
    NumericsDiagnosticError,
    QuantumState,
    RelaxationChannel,
    TimeDependentOperator,
    TimeGrid,
    coherence,
    population,
    propagate_lindblad,
    propagate_schrodinger,
    suggest_step,
)
from enantiosim.molecule import Handedness, build_rwa_3level, cyclohexylmethanol
from enantiosim.pulses import CosRamp, Square
from enantiosim.presets import fig3_scenario, interference_fields

PI = math.pi


def two_level_drive(omega, duration):
    m = np.zeros((2, 2), complex)
    m[0, 1] = 0.5
    return TimeDependentOperator(2, [CouplingTerm(m, Square(omega, duration))])


class TestQuantumState:
    def test_vector_normalization_enforced(self):
        with pytest.raises(ValueError):
            QuantumState.ket([1.0, 0.5])

    def test_density_invariants_enforced(self):
        with pytest.raises(ValueError):
            QuantumState.density([[0.5, 0.5], [0.4, 0.5]])  # not Hermitian
        with pytest.raises(ValueError):
            QuantumState.mixed_diagonal([0.6, 0.6])  # trace 1.2
        with pytest.raises(ValueError):
            QuantumState.density([[1.1, 0], [0, -0.1]])  # negative eigenvalue

    def test_population_examples(self):
        assert population(QuantumState.basis(3, 0), 0) == 1.0
        plus = QuantumState.ket([1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
        assert population(plus, 2) == pytest.approx(0.5)
        mixed = QuantumState.mixed_diagonal([0.998, 0.001, 0.001])
        assert population(mixed, 1) == pytest.approx(0.001)
        assert sum(population(mixed, k) for k in range(3)) == pytest.approx(1.0, abs=1e-9)

    def test_population_index_range(self):
        with pytest.raises(IndexError):
            population(QuantumState.basis(3, 0), 3)

    def test_coherence_examples(self):
        plus = QuantumState.ket([1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
        assert coherence(plus, 0, 2) == pytest.approx(0.5)
        diag = QuantumState.mixed_diagonal([0.3, 0.3, 0.4])
        assert coherence(diag, 0, 2) == 0.0
        with pytest.raises(ValueError):
            coherence(plus, 1, 1)

    def test_coherence_cauchy_schwarz(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            state = QuantumState.density(rho)
            for m in range(3):
                for n in range(3):
                    if m == n:
                        continue
                    bound = math.sqrt(population(state, m) * population(state, n))
                    assert abs(coherence(state, m, n)) <= bound + 1e-9


class TestSchrodinger:
    def test_zero_hamiltonian_is_identity(self):
        op = TimeDependentOperator(3, [])
        grid = TimeGrid(0.0, 5.0, 0.05)
        traj = propagate_schrodinger(op, QuantumState.basis(3, 0), grid)
        np.testing.assert_allclose(traj.populations[:, 0], 1.0, atol=1e-12)

    def test_resonant_pi_pulse(self):
        omega = 2.0
        duration = PI / omega
        op = two_level_drive(omega, duration)
        grid = TimeGrid(0.0, duration, suggest_step(op, duration))
        traj = propagate_schrodinger(op, QuantumState.basis(2, 0), grid)
        assert traj.populations[-1, 1] == pytest.approx(1.0, abs=1e-6)

    def test_final_norm_tolerance(self):
        op = two_level_drive(2.0, PI / 2)
        grid = TimeGrid(0.0, PI / 2, suggest_step(op, PI / 2))
        traj = propagate_schrodinger(op, QuantumState.basis(2, 0), grid)
        assert traj.norm_drift < 1e-9

    def test_norm_diagnostic_raised_for_oversized_step(self):
        op = two_level_drive(200.0, 1.0)
        grid = TimeGrid(0.0, 1.0, 0.5, record_stride=1)
        with pytest.raises(NumericsDiagnosticError):
            propagate_schrodinger(op, QuantumState.basis(2, 0), grid)

    def test_dimension_mismatch_rejected(self):
        op = two_level_drive(1.0, 1.0)
        with pytest.raises(ValueError):
            propagate_schrodinger(op, QuantumState.basis(3, 0), TimeGrid(0, 1, 0.01))

    def test_vector_required(self):
        op = two_level_drive(1.0, 1.0)
        rho = QuantumState.mixed_diagonal([1.0, 0.0])
        with pytest.raises(ValueError):
            propagate_schrodinger(op, rho, TimeGrid(0, 1, 0.01))

    def test_non_finite_hamiltonian_rejected(self):
        op = CallableOperator(2, lambda t: np.array([[0, math.nan], [math.nan, 0]]))
        with pytest.raises(ValueError):
            propagate_schrodinger(op, QuantumState.basis(2, 0), TimeGrid(0, 1, 0.01))

    def test_determinism_bit_identical(self):
        scenario = fig3_scenario("gaussian")
        op = build_rwa_3level(
            scenario.molecule, scenario.fields, Handedness.R, scenario.delta
        )
        span = scenario.fields["p"].envelope.support[1]
        grid = TimeGrid(0.0, span, suggest_step(op, span))
        a = propagate_schrodinger(op, QuantumState.basis(3, 0), grid)
        b = propagate_schrodinger(op, QuantumState.basis(3, 0), grid)
        np.testing.assert_array_equal(a.data, b.data)


class TestLindblad:
    def test_exponential_decay(self):
        tau = 2.0
        op = TimeDependentOperator(3, [])
        channels = [RelaxationChannel(2, 0, 1.0 / tau)]
        rho0 = QuantumState.mixed_diagonal([0.0, 0.0, 1.0])
        grid = TimeGrid(0.0, 6.0, 0.01)
        traj = propagate_lindblad(op, channels, rho0, grid)
        expected = np.exp(-traj.times / tau)
        np.testing.assert_allclose(traj.populations[:, 2], expected, atol=1e-6)

    def test_trace_preserved(self):
        tau = 1.0
        op = two_level_drive(3.0, 4.0)
        channels = [RelaxationChannel(1, 0, 1.0 / tau)]
        rho0 = QuantumState.mixed_diagonal([1.0, 0.0])
        traj = propagate_lindblad(op, channels, rho0, TimeGrid(0, 4.0, 1e-3))
        assert traj.norm_drift < 1e-9
        assert traj.min_eigenvalue > -1e-9

    def test_closed_system_matches_schrodinger(self):
        scenario = fig3_scenario("cos_ramp")
        op = build_rwa_3level(
            scenario.molecule, scenario.fields, Handedness.R, scenario.delta
        )
        span = max(f.envelope.support[1] for f in scenario.fields.values())
        grid = TimeGrid(0.0, span, suggest_step(op, span))
        psi = propagate_schrodinger(op, QuantumState.basis(3, 0), grid)
        rho = propagate_lindblad(
            op, [], QuantumState.basis(3, 0).as_density(), grid
        )
        np.testing.assert_allclose(rho.populations, psi.populations, atol=1e-7)

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            RelaxationChannel(1, 0, -0.1)

    def test_channel_levels_in_range(self):
        op = two_level_drive(1.0, 1.0)
        rho = QuantumState.mixed_diagonal([1.0, 0.0])
        with pytest.raises(ValueError):
            propagate_lindblad(op, [RelaxationChannel(2, 0, 0.1)], rho, TimeGrid(0, 1, 0.01))

    def test_density_required(self):
        op = two_level_drive(1.0, 1.0)
        with pytest.raises(ValueError):
            propagate_lindblad(op, [], QuantumState.basis(2, 0), TimeGrid(0, 1, 0.01))


class TestOperatorStructure:
    def test_evaluate_is_hermitian_at_random_times(self):
        molecule = cyclohexylmethanol()
        fields = interference_fields("gaussian", 12.0, 60.0, 2.0)
        from enantiosim.molecule import build_lab_frame_4level

        rng = np.random.default_rng(11)
        for build in (
            lambda h: build_rwa_3level(molecule, fields, h, 60.0),
            lambda h: build_lab_frame_4level(molecule, fields, h, delta=60.0),
        ):
            op = build(Handedness.L)
            for t in rng.uniform(0.0, 3.5, 100):
                H = op.evaluate(t)
                assert np.max(np.abs(H - H.conj().T)) < 1e-12

    def test_lowered_form_matches_evaluate_in_rotated_frame(self):
        # the kernel-side assembly must equal exp(iDt) (H - D) exp(-iDt)
        from enantiosim.molecule import build_lab_frame_4level
        from enantiosim import _kernels

        molecule = cyclohexylmethanol()
        fields = interference_fields("gaussian", 12.0, 60.0, 2.0)
        op = build_lab_frame_4level(molecule, fields, Handedness.R, delta=60.0)
        low = op.lowered()
        rng = np.random.default_rng(3)
        d = op.static_diag
        for t in rng.uniform(0.0, 3.4, 20):
            env_vals = np.zeros(low.env_kind.shape[0] + low.prod_pairs.shape[0])
            _kernels._fill_env_values(
                env_vals, t, t, low.env_kind, low.env_params,
                low.sched_values, low.sched_n, low.prod_pairs,
            )
            H = np.zeros((4, 4), complex)
            _kernels._assemble(
                H, t, low.term_i, low.term_j, low.coef, low.rate, low.phase,
                low.env_id, low.env_pow, env_vals,
            )
            phases = np.exp(1j * d * t)
            expected = np.outer(phases, phases.conj()) * (op.evaluate(t) - np.diag(d))
            np.testing.assert_allclose(H, expected, atol=1e-10)

    def test_kernel_matches_python_reference(self):
        scenario = fig3_scenario("cos_squared")
        op = build_rwa_3level(
            scenario.molecule, scenario.fields, Handedness.R, scenario.delta
        )
        ref = CallableOperator(3, op.evaluate)
        span = max(f.envelope.support[1] for f in scenario.fields.values())
        grid = TimeGrid(0.0, span, suggest_step(op, span), record_stride=2000)
        fast = propagate_schrodinger(op, QuantumState.basis(3, 0), grid)
        slow = propagate_schrodinger(ref, QuantumState.basis(3, 0), grid)
        np.testing.assert_allclose(fast.populations, slow.populations, atol=1e-12)

    def test_lab_frame_matches_adaptive_reference(self):
        # independent oracle: a high-order adaptive integrator on the literal
        # oscillatory lab-frame matrix over an early window of the transfer
        from scipy.integrate import solve_ivp
        from enantiosim.molecule import build_lab_frame_4level

        fields = interference_fields("gaussian", 12.0, 60.0, 2.0)
        op = build_lab_frame_4level(
            cyclohexylmethanol(), fields, Handedness.R, delta=60.0
        )
        t_end = 0.35
        sol = solve_ivp(
            lambda t, y: -1j * (op.evaluate(t) @ y),
            (0.0, t_end),
            np.array([1, 0, 0, 0], complex),
            method="DOP853",
            rtol=1e-11,
            atol=1e-13,
        )
        reference = np.abs(sol.y[:, -1]) ** 2
        grid = TimeGrid(0.0, t_end, suggest_step(op, t_end))
        traj = propagate_schrodinger(op, QuantumState.basis(4, 0), grid)
        np.testing.assert_allclose(traj.populations[-1], reference, atol=1e-10)

    def test_static_diagonal_rotation_preserves_dynamics(self):
        # a detuned two-level problem expressed with a static diagonal must
        # reproduce the generalized Rabi populations
        delta, omega = 4.0, 3.0
        m = np.zeros((2, 2), complex)
        m[0, 1] = 0.5
        op = TimeDependentOperator(
            2, [CouplingTerm(m, Square(omega, 10.0))], static_diag=[0.0, delta]
        )
        grid = TimeGrid(0.0, 10.0, suggest_step(op, 10.0))
        traj = propagate_schrodinger(op, QuantumState.basis(2, 0), grid)
        gen = math.sqrt(omega**2 + delta**2)
        expected = (omega / gen) ** 2 * np.sin(gen * traj.times / 2) ** 2
        np.testing.assert_allclose(traj.populations[:, 1], expected, atol=1e-7)

    def test_step_halving_convergence(self):
        scenario = fig3_scenario("gaussian")
        op = build_rwa_3level(
            scenario.molecule, scenario.fields, Handedness.R, scenario.delta
        )
        span = max(f.envelope.support[1] for f in scenario.fields.values())
        step = suggest_step(op, span)
        base = propagate_schrodinger(
            op, QuantumState.basis(3, 0), TimeGrid(0.0, span, step, record_stride=500)
        )
        halved = propagate_schrodinger(
            op, QuantumState.basis(3, 0), TimeGrid(0.0, span, step / 2, record_stride=1000)
        )
        diff = np.max(np.abs(base.populations - halved.populations))
        assert diff < 1e-6

    def test_schedule_resolution_bounds_step(self):
        from enantiosim.pulses import discretize

        sched = discretize(Square(1.0, 1.0), 0.1, 1.0)
        m = np.zeros((2, 2), complex)
        m[0, 1] = 0.5
        op = TimeDependentOperator(2, [CouplingTerm(m, sched)])
        with pytest.raises(ValueError):
            propagate_schrodinger(op, QuantumState.basis(2, 0), TimeGrid(0, 1.0, 0.2))

    def test_time_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0.5, 0.01)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 0.1, record_stride=0)
