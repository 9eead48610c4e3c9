"""Finite hyperbolic interpolation on the unit disc: difference quotients, Pick problems, sequence geometry."""
from .errors import (
    BoundaryCase,
    DegenerateLevel,
    DistinctnessError,
    DomainError,
    InterpolationError,
    PrecisionLoss,
    ShapeError,
)
from .geometry import (
    CarlesonSquare,
    classify_order,
    decompose_separated,
    density_condition,
    r_dense_check,
    separation_constant,
)
from .mobius import (
    BlaschkeChain,
    DiscMap,
    MobiusAutomorphism,
    ScaledMap,
    ConstantMap,
    UnitPoint,
    beta,
    blaschke_derivative,
    blaschke_eval,
    compose,
    cp_distance,
    hyperbolic_derivative,
    in_hyperbolic_disc,
    rho,
)
from .quotients import (
    CompatibilityReport,
    DQTriangle,
    check_compatibility,
    consistency_check,
    dq_of_map,
    last_row_closed_form,
    triangle_from_data,
)
from .sampling import (
    SamplingEstimate,
    TestFamily,
    annulus_harmonic_measure,
    estimate_sampling_constant,
    hyperbolic_norm,
    sampling_ratio,
)
from .solver import (
    PickMatrix,
    SchurChain,
    SolvabilityVerdict,
    boundary_blaschke_candidate,
    build_pick_matrix,
    denjoy_partial_sums,
    is_positive_semidefinite,
    schur_solve,
    solvability_criteria,
)

__version__ = "0.1.0"
