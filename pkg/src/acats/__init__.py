"""Finite AC structures: validation, metrized categories, metric correspondences,
Yoneda images, maximal functorial distances and 2-metric geometry."""

from .core import (
    ACStructure,
    Arrow,
    PrefunctorialMap,
    check_amplitude,
    check_composition_table,
    check_functor,
    check_graphcomp,
    check_knatural,
    check_transitivity,
    cone_combine,
    constant_amplitude,
    epsilon_categoric,
    epsilon_witness,
    extract_composition,
    graphcomp_witness,
    is_separated,
    phi,
    phi_matrix,
    separate,
    validate,
)
from .free import (
    FunctorialDistanceEstimate,
    MoveGraph,
    MoveGraphConfig,
    PathWord,
    build_cmax,
    concat,
    dmax_estimate,
    dmax_from,
    elementary_moves,
    verify_embedding,
    word,
)
from .geometry import (
    PLPath,
    PLPathSet,
    TwoMetric,
    check_2metric_axioms,
    plpath_dmax,
    shoelace_area,
    triangle_area,
    two_metric_to_ac,
)
from .metcat import MetrizedCategory, induce_ac, separate_metcat, sub_ac, validate_metcat
from .metcor import (
    Correspondence,
    FiniteMetricSpace,
    compose,
    corr_distance,
    identity,
    metcor_ac,
    tri_distance,
    validate_correspondence,
    within_d1_d2,
)
from .report import (
    ACError,
    DomainError,
    PreconditionError,
    SeparationError,
    StructureError,
    TruncationError,
    ValidationReport,
    Violation,
)
from .yoneda import (
    co_yoneda_arrow,
    co_yoneda_defect,
    co_yoneda_object,
    yoneda_arrow,
    yoneda_defect,
    yoneda_image,
    yoneda_lower_bound,
    yoneda_object,
)

__version__ = "0.1.0"
