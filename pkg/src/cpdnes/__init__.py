"""Compression-based privacy-preserving distributed Nash-equilibrium seeking.

Players of an aggregative game track the decision average over a gossip
network while broadcasting compressed state estimates; the library bundles
the update engines, the compressors, the step-size calculus, a privacy-budget
ledger, and a Monte-Carlo harness for communication/accuracy studies.
"""

from .compress import (
    FLOAT_BITS,
    IdentityCompressor,
    QuantizerParams,
    RelativeCompressor,
    StochasticQuantizer,
    bits_for,
    identity_compress,
    quantize,
    relative_compress,
)
from .config import (
    ExperimentConfig,
    Threshold,
    VariantSpec,
    load_config,
    parse_config,
)
from .engines import (
    VARIANT_CONVENTIONAL,
    VARIANT_CP,
    VARIANT_DSC,
    VARIANT_NP,
    VARIANTS,
    EngineConfig,
    PlayerState,
    RunRecord,
    conventional_step,
    cpdnes_step,
    dscdnes_step,
    initial_states,
    npdnes_step,
    run,
    run_batch,
)
from .errors import (
    CompressionRangeError,
    ConfigError,
    ConvergenceError,
    CpdnesError,
    NumericFault,
)
from .game import (
    AggregativeGame,
    BoxConstraint,
    DecisionProfile,
    EnergyGameParams,
    GameBounds,
    energy_game,
    energy_game_bounds,
    game_map,
    with_clipped_gradients,
)
from .harness import (
    AggregateSeries,
    bits_to_threshold,
    emit_csv,
    fit_decay_exponent,
    read_csv,
    run_experiment,
    threshold_report,
    weighted_running_average,
)
from .network import LaplacianView, Topology, laplacian, mixing_matrix, ring
from .oracle import NeSolution, natural_residual, ne_fixed_point, ne_linear
from .privacy import (
    AdjacentPair,
    PrivacyLedger,
    adjacent_energy_pair,
    build_ledger,
    delta_closed_form,
    delta_partial_sum,
    dsc_budget,
    single_step_gap,
)
from .schedule import (
    COND_ALPHA_SQ_BETA_SUMMABLE,
    COND_BETA_SQUARE_SUMMABLE,
    COND_PRODUCT_DIVERGES,
    ScheduleVerdict,
    StepSchedule,
    check_conditions,
    dp_product_check,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacentPair",
    "AggregateSeries",
    "AggregativeGame",
    "BoxConstraint",
    "CompressionRangeError",
    "ConfigError",
    "ConvergenceError",
    "CpdnesError",
    "DecisionProfile",
    "EnergyGameParams",
    "EngineConfig",
    "ExperimentConfig",
    "FLOAT_BITS",
    "GameBounds",
    "IdentityCompressor",
    "LaplacianView",
    "NeSolution",
    "NumericFault",
    "PlayerState",
    "PrivacyLedger",
    "QuantizerParams",
    "RelativeCompressor",
    "RunRecord",
    "ScheduleVerdict",
    "StepSchedule",
    "StochasticQuantizer",
    "Threshold",
    "Topology",
    "VARIANTS",
    "VARIANT_CONVENTIONAL",
    "VARIANT_CP",
    "VARIANT_DSC",
    "VARIANT_NP",
    "VariantSpec",
    "adjacent_energy_pair",
    "bits_for",
    "bits_to_threshold",
    "build_ledger",
    "check_conditions",
    "conventional_step",
    "cpdnes_step",
    "delta_closed_form",
    "delta_partial_sum",
    "dp_product_check",
    "dsc_budget",
    "dscdnes_step",
    "emit_csv",
    "energy_game",
    "energy_game_bounds",
    "fit_decay_exponent",
    "game_map",
    "identity_compress",
    "initial_states",
    "laplacian",
    "load_config",
    "mixing_matrix",
    "natural_residual",
    "ne_fixed_point",
    "ne_linear",
    "npdnes_step",
    "parse_config",
    "quantize",
    "read_csv",
    "relative_compress",
    "ring",
    "run",
    "run_batch",
    "run_experiment",
    "single_step_gap",
    "threshold_report",
    "weighted_running_average",
    "COND_ALPHA_SQ_BETA_SUMMABLE",
    "COND_BETA_SQUARE_SUMMABLE",
    "COND_PRODUCT_DIVERGES",
]
