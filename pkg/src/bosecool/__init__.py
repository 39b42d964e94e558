"""Photon-number cooling and heating of bosonic modes.

Linear (Bogoliubov) evolution, Bose-entropy certificates, optimal permutation
cooling of two thermal modes, and chi-squared nonlinear cooling.
"""

__version__ = "0.1.0"

from .cooling import (
    CoolingReport,
    SpectralTable,
    asymptotic_small_alpha,
    build_spectral_table,
    nn_approx_components,
    nn_bound_delta_n,
    optimal_permutation_cool,
    sweep_alpha,
)
from .entropy import (
    Guarantee,
    StochasticCertificate,
    TransferMatrix,
    Verdict,
    check_sufficient_nor,
    check_superstochastic,
    occupation_propagate,
    second_law_verdict,
)
from .errors import (
    BosecoolError,
    ConvergenceError,
    DimensionOverflowError,
    DomainError,
    PreconditionError,
    ShapeMismatchError,
)
from .fock import (
    FockSpace,
    ThermalSpec,
    TruncatedState,
    annihilation_matrix,
    bose_entropy_scalar,
    number_operator,
    tail_mass,
    thermal_state,
)
from .linear import (
    BogoliubovMap,
    MomentState,
    delta_total_number,
    dispersion,
    energy_change,
    is_generalized_diagonal,
    propagate_moments,
    random_bogoliubov,
    validate_symplectic,
)
from .nonlinear import (
    MonomialTable,
    NonlinearConfig,
    build_hamiltonian,
    enumerate_second_order_terms,
    exact_evolve,
    manley_rowe_residual,
    perturbative_delta_n,
    phi_kernel,
    resonance_scan,
    rwa_delta_n,
)
