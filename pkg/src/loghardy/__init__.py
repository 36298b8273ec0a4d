"""loghardy: a 2D finite-element laboratory for eigenvalue problems with
the critical Hardy potential 1/(|x|^2 (log a/|x|)^2) and its weighted
Sobolev relatives."""

from .geometry import (
    Disk,
    SectorAnnulus,
    LDomain,
    HalfGraph,
    InvalidDomainError,
    Mesh,
    build_mesh,
    refine,
    weighted_first_moments,
)
from .weights import (
    WeightParams,
    GridSpec,
    ScanReport,
    SingularPointError,
    critical_A,
    hardy_weight,
    radial_log_integral,
    hardy_mass_integral,
    admissible_check,
    muckenhoupt_S,
    adams_quantities,
    scan_sup,
)
from .quadrature import QuadRule, standard_rule, origin_singular_rule, edge_rule
from .assembly import (
    SymmetricOperator,
    ConstraintVector,
    stiffness,
    weighted_stiffness,
    hardy_mass,
    plain_mass,
    boundary_mass,
    constraint_vector,
)
from .eigensolve import (
    EigResult,
    second_neumann_eigen,
    robin_first_eigen,
    robin_eigenpairs,
    pencil_max_eigen,
    radial_oracle_eigen,
    rayleigh_quotient,
    euler_lagrange_residual,
)
from .analysis import (
    FitResult,
    SobolevEstimate,
    alpha_theory,
    test_function_bound_A,
    test_function_bound_L,
    asymptotic_exponent_fit,
    sobolev_constant_estimate,
    radial_hardy_constant,
    scaling_family_quotient,
    radial_lemma_check,
    half_domain_inequality_check,
)

__version__ = "0.1.0"
