"""Numerical laboratory for gBBM solitary waves at the critical speed."""

from .grid import (
    DIRICHLET,
    PERIODIC,
    Field,
    Grid,
    GridError,
    derivative,
    field_from_function,
    helmholtz_inverse,
    inner,
    make_grid,
    norm_h1,
    norm_l2,
    quadrature,
    translate,
)
from .ground_state import (
    GroundState,
    IdentityReport,
    closed_form_identities,
    critical_speed,
    normalized_profile_norm_sq,
)
from .functionals import (
    FunctionalValue,
    action,
    energy,
    evolution_rhs,
    gradients,
    hessian_apply,
    momentum,
)
from .structure import (
    StructureSet,
    TableReport,
    build_structure,
    coefficients,
    gamma_direction,
    kappa_closed_form,
    kappa_operator,
    modulation_pairing,
    negativity_form,
    negativity_table,
)
from .spectral import (
    CoercivityReport,
    SpectrumReport,
    constrained_form_minimum,
    discretize_weinstein,
    eigenpairs,
    essential_spectrum_edge,
    inverse_pairing,
    negative_direction_check,
    weinstein_matrix,
)
from .dynamics import BlowupError, SimulationConfig, Trajectory, H_of_u, evolve, step
from .modulation import (
    MODE_FIT,
    MODE_KAPPA,
    ExperimentReport,
    ModulationError,
    ModulationState,
    VirialReport,
    cutoff_profile,
    decompose,
    gamma_curvature_closed,
    gamma_of_lambda,
    instability_experiment,
    parameter_residuals,
    virial_monitor,
)

__version__ = "0.1.0"
