"""Covariant error-correcting codes built from finite clock reference frames."""
from .align import AlignmentResult, alignment_probability, alignment_probability_timeavg_oracle
from .clock import (
    ClockState,
    Generator,
    clock_generator,
    embed_L,
    evolve,
    is_t_incoherent,
    make_custom_state,
    make_quasi_ideal_state,
    make_swp_state,
    make_time_basis_state,
)
from .codes import (
    BaseCode,
    CovariantCode,
    check_transversal_compat,
    covariant_encode,
    make_identity_code,
    make_unitary_conjugation_code,
)
from .fidelity import (
    FidelityReport,
    converse_bound,
    f_worst_direct,
    f_worst_lower,
    fidelity_report,
    theorem_curves,
)
from .phase3 import AngleTriple, PhaseErrorSpec, circular_delta, middle_angle, three_clock_pipeline
from .pipeline import (
    SINGLE_CLOCK,
    THREE_CLOCK_MIDDLE,
    ChannelMatrix,
    F_Q,
    choose_k_alpha,
    conditioned_state,
    decode,
    f_tables,
    full_channel,
    p_ratio,
    page_wootters_condition,
    shift_covariance_check,
)

__version__ = "0.1.0"
