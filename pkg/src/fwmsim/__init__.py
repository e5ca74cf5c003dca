"""Photon-pair Rabi oscillations in a three-mode Kerr resonator.

A numpy/scipy library that integrates the Lindblad master equation of three
cavity modes coupled by four-wave mixing (two mode-0 photons <-> one photon
each in modes 1 and 2), extracts occupations, zero-delay pair correlations
and Fock probabilities, and ships the closed-form pair solutions plus a
two-harmonic damped fitting kit used to characterize the oscillations.
"""

from .analytic import (
    TwoPhotonEigensystem,
    closed_form_occupations,
    closed_form_probabilities,
    perturbative_occupation,
    rabi_frequency,
    two_photon_eigensystem,
)
from .evolve import (
    DensityMatrix,
    IntegrationError,
    InvariantViolation,
    Trajectory,
    evolve,
    make_fock_state,
)
from .fitkit import (
    Detrended,
    FitConvergenceError,
    FitResult,
    detrend,
    fit_two_harmonics,
    spectral_peak_frequency,
)
from .fock import FockBasis, annihilation, build_basis, creation, number_operator
from .model import (
    HamiltonianParts,
    ModelSpec,
    PulseEnvelope,
    build_hamiltonian_parts,
    envelope_value,
    lindblad_rhs,
)
from .observables import (
    CorruptStateError,
    ObservableRecord,
    fock_probability,
    g2_zero_delay,
    observe,
    occupation,
)
from .scenarios import (
    PRESETS,
    ConfigError,
    ScenarioConfig,
    convergence_sweep,
    oracle_eval,
    preset_config,
    run_scenario,
)

__version__ = "0.1.0"
