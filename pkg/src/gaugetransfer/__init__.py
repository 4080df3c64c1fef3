"""Nonadiabatic excitation transfer on a non-Hermitian chain driven by a
linearly ramped imaginary gauge field."""

from .analytic import (
    PropagatorMatrix,
    exact_final_state_from_delta,
    exact_final_state_from_eigenstate,
    final_norm_delta,
    gauge_eigenstate,
    hermitian_propagator,
    hermitian_spectrum,
    theta_vector,
    w_matrix,
)
from .chain import (
    EXPONENT_CAP,
    ChainSpec,
    Frame,
    GaugeRamp,
    LatticeState,
    SitePotentials,
    build_gauge_generator,
    build_lab_hamiltonian,
    gauge_map,
)
from .crow import CrowSpec, EffectiveParams, accumulated_phase, bessel_j0, effective_params, evolve_crow
from .disorder import (
    DisorderRealization,
    EnsembleResult,
    Normal,
    UniformSymmetric,
    disorder_sweep_T,
    ensemble_transfer,
    sample_disorder,
)
from .dynamics import (
    EvolutionProblem,
    Trajectory,
    evolve_gauge_frame,
    evolve_lab_frame,
    make_problem,
    transfer_probability,
)

__version__ = "0.1.0"
