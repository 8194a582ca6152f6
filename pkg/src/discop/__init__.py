"""Composition operators on discrete measure spaces, with exact arithmetic."""

from .classify import (
    Boundedness,
    ClassificationReport,
    SupH,
    almost_surjective,
    check_condition_31,
    check_symmetric,
    classify_normal,
    classify_quasinormal,
    formally_normal_on_basis,
    full_report,
    is_bounded,
    multiplicative_quasinormal_check,
)
from .core import (
    DEFAULT_WINDOW,
    INFINITE_MASS,
    CallbackInstance,
    CRat,
    Cycle,
    FiniteInstance,
    FixedPoint,
    Instance,
    LazyInstance,
    Line,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    canonical_representative,
    check_nonsingular,
    pushforward,
    support,
)
from .decompose import (
    BijectionTemplate,
    GeometricSequences,
    ShiftBlock,
    ShiftDecomposition,
    check_round_trip,
    construct_map_for_measure,
    construct_unbounded_normal_measure,
    orbits,
    rebuild_from_decomposition,
    shift_decomposition,
    verify_unitary_equivalence,
)
from .errors import DiscopError
from .operator import (
    FinSuppFn,
    Functional,
    apply_c,
    apply_c_cstar_basis,
    apply_c_cstar_c_basis,
    apply_c_star,
    apply_cstar_c_basis,
    apply_cstar_c_c_basis,
    densely_defined,
    fiber_mass,
    in_domain,
    inner,
    norm_sq,
    product_domain_functional,
    radon_nikodym,
)
from .oracle import CrosscheckReport, build_matrices, exhaustive_crosscheck
from .serialize import generate, parse_instance, render_instance
from .verdict import Status, Verdict, Witness

__version__ = "0.1.0"
