"""Simulator for enantiomer-selective state transfer in driven chiral molecules.

The package models a cyclic three-level microwave drive in which a direct
one-photon coupling interferes with an effective two-photon coupling; the two
mirror forms of the molecule see opposite one-photon signs, so the paths add
for one form and cancel for the other.  On top of the core propagators it
bundles pulse shaping, noise and drift studies, relaxation, and the
coherence-transfer readout stage for enantiomeric-excess estimation.
"""

__version__ = "0.1.0"

from .dynamics import (
    CallableOperator,
    Carrier,
    CouplingTerm,
    NumericsDiagnosticError,
    QuantumState,
    RelaxationChannel,
    TimeDependentOperator,
    TimeGrid,
    Trajectory,
    coherence,
    population,
    propagate_lindblad,
    propagate_schrodinger,
    suggest_step,
)
from .molecule import (
    Handedness,
    MoleculeSpec,
    RotationalLevel,
    TransitionSpec,
    build_effective_2level,
    build_lab_frame_4level,
    build_rwa_3level,
    cyclohexylmethanol,
    dipole_triple_product,
    relaxation_channels,
)
from .pulses import (
    AwgnNoise,
    CosRamp,
    CosSquared,
    DelayedCosRamp,
    DriveField,
    Gaussian,
    NoAreaSolutionError,
    PulseSchedule,
    Square,
    UniformFluctuation,
    apply_noise,
    area_condition_residuals,
    discretize,
    pulse_area,
    sample_envelope,
    solve_area_conditions,
)
from .runner import (
    EsstResult,
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
