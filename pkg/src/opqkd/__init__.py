"""Key distribution over orthogonal two-particle product states: set
constructions, the two-leg protocol, channel attacks, and their exact and
sampled figures of merit."""
from .errors import (
    InsufficientDataError,
    InvalidSetError,
    ProtocolOrderError,
    UnsupportedDimensionError,
)
from .qcore import (
    ATOL_EXACT,
    ATOL_STATE,
    Ket,
    MeasurementBasis,
    RngStream,
    basis_ket,
    born_probabilities,
    canonical_phase,
    inner,
    normalize,
    projective_measure,
    states_equivalent,
    states_orthogonal,
    tensor,
)
from .stateset import (
    ConditionReport,
    DominoLayout,
    ProductState,
    SetParameters,
    StateSet,
    Tile,
    bob_basis,
    build_3x3,
    build_symmetric,
    check_conditions,
    is_four_fold_symmetric,
    states_from_tiles,
    stateset_from_text,
    stateset_to_text,
)
from .adversary import (
    ConditionalInterceptResend,
    EveRecord,
    EveStrategy,
    MeasureSecondOnly,
    SubstituteCollective,
    conditional_b_basis,
    make_strategy,
)
from .protocol import (
    DetectionStats,
    ProtocolConfig,
    RoundRecord,
    SessionResult,
    SimulationReport,
    detection_probability,
    run_round,
    run_session,
    summarize_session,
    wilson_interval,
)
from .analysis import (
    EstimateResult,
    ExactResult,
    SweepRow,
    dimension_sweep,
    exact_undetected_prob,
    min_p,
    min_p_even,
    min_p_odd,
    monte_carlo_estimate,
    p3_formula,
    p_recurrence_step,
)

__version__ = "0.1.0"

__all__ = [
    "ATOL_EXACT",
    "ATOL_STATE",
    "ConditionReport",
    "ConditionalInterceptResend",
    "DetectionStats",
    "DominoLayout",
    "EstimateResult",
    "EveRecord",
    "EveStrategy",
    "ExactResult",
    "InsufficientDataError",
    "InvalidSetError",
    "Ket",
    "MeasureSecondOnly",
    "MeasurementBasis",
    "ProductState",
    "ProtocolConfig",
    "ProtocolOrderError",
    "RngStream",
    "RoundRecord",
    "SessionResult",
    "SetParameters",
    "SimulationReport",
    "StateSet",
    "SubstituteCollective",
    "SweepRow",
    "Tile",
    "UnsupportedDimensionError",
    "basis_ket",
    "bob_basis",
    "born_probabilities",
    "build_3x3",
    "build_symmetric",
    "canonical_phase",
    "check_conditions",
    "conditional_b_basis",
    "detection_probability",
    "dimension_sweep",
    "exact_undetected_prob",
    "inner",
    "is_four_fold_symmetric",
    "make_strategy",
    "min_p",
    "min_p_even",
    "min_p_odd",
    "monte_carlo_estimate",
    "normalize",
    "p3_formula",
    "p_recurrence_step",
    "projective_measure",
    "run_round",
    "run_session",
    "states_equivalent",
    "states_from_tiles",
    "states_orthogonal",
    "stateset_from_text",
    "stateset_to_text",
    "summarize_session",
    "tensor",
    "wilson_interval",
]
