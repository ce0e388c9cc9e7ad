"""Deliberate data reduction for finite-state Markov chains.

Record only the transitions a binary filter matrix selects, certify that the
filter keeps the transition probabilities identifiable, and recover maximum
likelihood estimates with standard errors from the blanked chain via EM and
supplemented EM, plus the matching hypothesis tests.
"""

from .core import (
    CompleteChain,
    CountMatrix,
    ParamVector,
    StateSpace,
    TransitionMatrix,
    complete_mle,
    decode_tuple_state,
    embed_higher_order,
    embedded_support,
    encode_tuple_state,
    project_embedded_params,
    simulate_chain,
    transition_counts,
)
from .em import (
    EMResult,
    GapSegment,
    SplitMatrices,
    e_step,
    gap_expected_counts,
    m_step,
    observed_loglik,
    run_em,
    segment_chain,
    split_p,
    unobserved_step_probs,
)
from .errors import (
    BudgetExceededError,
    ChainTooShortError,
    ConsistencyError,
    EmptyCompletionSetError,
    FileFormatError,
    MarkovFilterError,
    NonFiniteError,
    NonPositiveVarianceError,
    RowNotConvergedError,
    SingularBlockError,
    SingularCovarianceError,
    SingularUpdateError,
    ZeroDenominatorError,
    ZeroRowTotalError,
)
from .filtering import (
    BLANK,
    FilteredChain,
    FilterMatrix,
    IdentifiabilityVerdict,
    TransitionVisibility,
    Verdict,
    apply_filter,
    classify_transitions,
    closure_witness,
    dominates,
    identifiability_verdict,
    in_class_c1,
    in_class_c2,
    in_class_c3,
    reduction_fraction,
    satisfies_r,
    validate_consistency,
)
from .inference import TestReport, chi_square_test, confidence_interval, z_test
from .oracle import (
    CompletionSet,
    distinguishability_check,
    enumerate_completions,
    oracle_expected_counts,
    oracle_observed_likelihood,
)
from .sem import (
    SemResult,
    complete_info,
    default_sem_start,
    run_sem,
    sem_m1,
    symmetry_diagnostic,
    v_com,
    v_obs,
)

__all__ = [
    "BLANK",
    "BudgetExceededError",
    "ChainTooShortError",
    "CompleteChain",
    "CompletionSet",
    "ConsistencyError",
    "CountMatrix",
    "EMResult",
    "EmptyCompletionSetError",
    "FileFormatError",
    "FilterMatrix",
    "FilteredChain",
    "GapSegment",
    "IdentifiabilityVerdict",
    "MarkovFilterError",
    "NonFiniteError",
    "NonPositiveVarianceError",
    "ParamVector",
    "RowNotConvergedError",
    "SemResult",
    "SingularBlockError",
    "SingularCovarianceError",
    "SingularUpdateError",
    "SplitMatrices",
    "StateSpace",
    "TestReport",
    "TransitionMatrix",
    "TransitionVisibility",
    "Verdict",
    "ZeroDenominatorError",
    "ZeroRowTotalError",
    "apply_filter",
    "chi_square_test",
    "classify_transitions",
    "closure_witness",
    "complete_info",
    "complete_mle",
    "confidence_interval",
    "decode_tuple_state",
    "default_sem_start",
    "distinguishability_check",
    "dominates",
    "e_step",
    "embed_higher_order",
    "embedded_support",
    "encode_tuple_state",
    "enumerate_completions",
    "gap_expected_counts",
    "identifiability_verdict",
    "in_class_c1",
    "in_class_c2",
    "in_class_c3",
    "m_step",
    "observed_loglik",
    "oracle_expected_counts",
    "oracle_observed_likelihood",
    "project_embedded_params",
    "reduction_fraction",
    "run_em",
    "run_sem",
    "satisfies_r",
    "segment_chain",
    "sem_m1",
    "simulate_chain",
    "split_p",
    "symmetry_diagnostic",
    "transition_counts",
    "unobserved_step_probs",
    "v_com",
    "v_obs",
    "validate_consistency",
    "z_test",
]

__version__ = "0.1.0"
