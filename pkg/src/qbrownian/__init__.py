"""Gaussian phase-space propagators, generalized uncertainty bounds, and
entanglement witnesses for networks of oscillators in a thermal bath.

The covariance matrix of any initial state evolves as
V_t = R(t) V_0 R(t)^T + S(t); this package constructs R and S for a
declarative model (masses, frequencies, coupling weights, bath spectral
density, temperature), derives the state-independent uncertainty bounds
and PPT entanglement witnesses built from them, and validates the reduced
description against an exact closed-system evolution with an explicit
finite bath.
"""

__version__ = "0.1.0"

from .model import (
    BathState,
    CaseParams,
    ModelSpec,
    SpectralDensity,
    SystemSpec,
    dissipation_kernel,
    noise_kernel,
)
from .phase_space import (
    PhaseSpaceLayout,
    build_symplectic_form,
    factorized_squeezed_covariance,
    min_ppt_eigenvalue,
    partial_transpose_form,
    plus_minus_rotation,
    random_factorized_pure_covariance,
    random_pure_covariance,
    symplectic_eigenvalues,
    thermal_covariance,
    two_mode_squeezed_covariance,
    vacuum_covariance,
)
from .propagator import (
    HomogeneousSolution,
    MasterEqCoefficients,
    PropagatorPair,
    build_propagator,
    classical_transition,
    diffusion_matrix,
    evolve_covariance,
    integrate_master_equation,
    master_coefficients,
    pair_at,
    solve_homogeneous,
)
from .uncertainty import (
    BoundMatrix,
    WitnessCurve,
    area_functions,
    area_lower_bounds,
    disentanglement_time,
    lambda_bound,
    lambda_min_evolved,
    lambda_tilde_bound,
    state_bound,
    tripartite_bounds,
    tripartite_report,
    witness_curves,
)
from .ohmic_pair import (
    AsymptoticS,
    asymptotic_diffusion,
    fokker_planck_bounds,
    leading_order_v,
    local_modal_solution,
    validate_fp_regime,
    weak_damping_thermal_S,
)
from .discrete_bath import (
    BathRealization,
    build_closed_system,
    discretize_bath,
    evolve_closed,
    oracle_covariances,
    reduced_covariance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
