"""Conditional smooth Rényi entropy with guessing and prefix-coding applications."""
from .asymptotics import ConvergenceReport, convergence_report, vanishing_vs_zero_error_contrast
from .coding import (
    CodeSpec,
    Escape,
    LengthProfile,
    build_code,
    code_error_probability,
    code_moment,
    coding_exponent_curve,
    converse_length_profile,
    decode,
    encode,
    kraft_holds,
)
from .distributions import (
    JointDistribution,
    MixtureSource,
    SortedConditional,
    conditional_entropy,
    empirical_joint,
    make_mixture,
    mixture_block,
    product_block,
    regime_index,
    sample,
    sorted_conditional,
    validate_joint,
)
from .entropy import (
    EntropyResult,
    TruncatedSlice,
    arimoto_conditional_renyi,
    finite_n_rate,
    inner_score,
    nonnegativity_floor,
    optimize_allocation,
    renner_wolf_entropy,
    smooth_conditional_entropy,
    smooth_unconditional_entropy,
    truncated_q,
    truncation_point,
)
from .estimators import OptimalGuesser, SmoothPrefixCoder, SmoothRenyiEntropy
from .exceptions import (
    AlphabetMismatch,
    BlockTooLarge,
    BudgetError,
    InstanceTooLarge,
    MalformedBitstring,
    MassDeviationTooLarge,
    NegativeEntry,
    SmoothRenyiError,
    ValidationError,
    ZeroMarginal,
)
from .guessing import (
    GuessEvaluation,
    GuessingStrategy,
    converse_bound,
    direct_bound,
    error_probability,
    evaluate,
    expected_cost,
    guessing_exponent_curve,
    optimal_cost,
    optimal_strategy,
    optimize_with_penalty,
    simulate_guessing,
    smooth_entropy_strategy,
    survival_weights,
)
from .oracle import oracle_allocation

__version__ = "0.1.0"
