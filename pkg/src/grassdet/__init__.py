"""Finite-scale Grassmannian, Fredholm-pair and determinant-line calculus."""

from .numcore import (
    COMPLEX,
    DEFAULT_TOL,
    REAL,
    ConvergenceError,
    Frame,
    PreconditionError,
    ShapeError,
    TolerancePolicy,
    operator_norm,
    orthonormalize,
    pseudoinverse,
    rank,
)
from .grassmann import (
    GraphChartPoint,
    Subspace,
    TransverseSplitting,
    chart_from,
    chart_to,
    chart_transition,
    complement_in,
    distance,
    graph_intersection,
    intersect_power,
    intersect_transverse,
    oracle_intersection,
    perp,
    projector,
    sum_finite,
    transverse_splitting,
)
from .fredholm import (
    FredholmMap,
    FredholmPair,
    fredholm_map,
    pair_index,
    pair_index_via_operator,
    relative_dimension,
    verify_additivity,
    verify_kernel_range_duality,
)
from .detcalc import (
    DetElement,
    DetLine,
    ExactSequence,
    LineIso,
    SignConvention,
    Splitting,
    appendix_b_identity,
    appendix_b_model,
    appendix_b_sign,
    assoc_check,
    adjoint_identity_check,
    compose_lift,
    composition_convention,
    det_push,
    orthogonal_splitting,
    phi_T,
    phi_T_J_sigma,
    psi_T,
    psi_convention,
    restriction_compat,
    sum_convention,
    wedge_coeff,
)

__version__ = "0.1.0"
