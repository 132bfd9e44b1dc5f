"""Exact-arithmetic stability thresholds for polarized toric pairs."""

from .errors import (
    AlreadySemistable,
    BudgetError,
    CombinatorialBlowup,
    ConsistencyError,
    DegeneratePolytope,
    DimensionMismatch,
    DimensionTooLarge,
    EmptyLinearSystem,
    EmptyPolytope,
    KStabError,
    NegativeCoefficient,
    NoCertificate,
    NotKlt,
    NotLogFano,
    NotPrimitive,
    ParseError,
    PointOutsidePolytope,
    PolytopeUnbounded,
    SearchBudgetExceeded,
    UnboundedPolytope,
    ValidationError,
    ZeroIdeal,
)
from .filtration import (
    DeltaHatReport,
    GradedWeights,
    delta_hat_sandwich_check,
    extend_filtration,
    jumping_numbers,
    ray_filtration,
    round_to_integers,
    s_m,
    t_m,
)
from .geometry import (
    POS_INFINITY,
    AffineFunctional,
    HalfSpace,
    Polytope,
    Rational,
    mpoint,
    rational,
)
from .ideals import (
    GradedIdealSequence,
    MonomialIdeal,
    StabilizationCertificate,
    base_ideal_sequence,
    gord_stabilize,
    lct_graded_sequence,
    lct_monomial,
)
from .invariants import (
    Classification,
    RayInvariants,
    SandwichReport,
    Verdict,
    alpha,
    alpha_m,
    delta,
    delta_barycentric,
    delta_m_toric,
    dstar,
    interpolation_delta,
    lct_invariant_divisor,
    ray_invariants,
    sandwich_report,
    sw_beta_bound,
    verdict,
)
from .toric import (
    ToricDivisor,
    ToricPairSpec,
    attach_boundary,
    divisor_from_point,
    moment_polytope,
    toric_pair,
    validate,
)

__version__ = "0.1.0"
