"""Calibrated abstention for multi-path answer aggregation.

Aggregate sampled answers by score-weighted vote, calibrate an
abstention threshold with a finite-sample confident-error guarantee,
and diagnose when (and by how much) confidence-gated answering beats
the raw vote. The harness subpackage (experiments, reports, CLI) is
imported on demand: ``import votegate.harness``.
"""

from .aggregate import (
    WEIGHT_KINDS,
    VoteOutcome,
    WeightSpec,
    aggregate,
    aggregate_dataset,
    outcome_arrays,
    weight,
)
from .calibrate import (
    Decision,
    Policy,
    RiskCurve,
    apply_policy,
    confident_error_loss,
    crc_slack,
    crc_threshold,
    policy_from_json,
    policy_to_json,
    realized_risk,
    risk_curve,
    risk_curve_from_arrays,
)
from .diagnose import (
    PredictorOutput,
    SeparabilityProfile,
    accuracy_gain,
    bayes_selective_accuracy,
    concentration_bound,
    dkw_epsilon,
    min_calibration_size,
    plugin_predictor,
    plugin_predictor_from_arrays,
    selective_accuracy,
    separability_profile,
    separability_profile_from_arrays,
    survival_from_hazards,
    yield_fraction,
)
from .errors import (
    ConfigError,
    DegenerateStratum,
    DomainError,
    EmptyCalibration,
    EmptyInput,
    EmptySelection,
    InsufficientPoints,
    LengthMismatch,
    NoClosedForm,
    ParseError,
    RangeError,
    SpecError,
    TooLarge,
    UnknownScore,
    ValidationError,
    VotegateError,
)
from .frontier import FrontierPoint, FrontierSummary, frontier_auc, sweep, sweep_from_arrays
from .records import (
    Dataset,
    PathRecord,
    PromptInstance,
    SplitPlan,
    make_dataset,
    parse_dataset,
    split,
    write_dataset,
)
from .synth import (
    PRESETS,
    ExactMVStats,
    GeneratorSpec,
    PromptClass,
    ScoreLaw,
    answer_labels,
    closed_form_targets,
    generate_dataset,
    mv_exact_enumeration,
    preset,
    simulate_outcomes,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # records
    "PathRecord", "PromptInstance", "Dataset", "SplitPlan",
    "make_dataset", "parse_dataset", "write_dataset", "split",
    # aggregate
    "WeightSpec", "VoteOutcome", "WEIGHT_KINDS",
    "weight", "aggregate", "aggregate_dataset", "outcome_arrays",
    # calibrate
    "RiskCurve", "Policy", "Decision",
    "confident_error_loss", "risk_curve", "risk_curve_from_arrays",
    "crc_slack", "crc_threshold", "apply_policy", "realized_risk",
    "policy_to_json", "policy_from_json",
    # diagnose
    "SeparabilityProfile", "PredictorOutput",
    "separability_profile", "separability_profile_from_arrays",
    "survival_from_hazards", "selective_accuracy", "yield_fraction",
    "accuracy_gain", "bayes_selective_accuracy", "dkw_epsilon",
    "concentration_bound", "min_calibration_size",
    "plugin_predictor", "plugin_predictor_from_arrays",
    # frontier
    "FrontierPoint", "FrontierSummary", "sweep", "sweep_from_arrays",
    "frontier_auc",
    # synth
    "ScoreLaw", "PromptClass", "GeneratorSpec", "ExactMVStats", "PRESETS",
    "preset", "answer_labels", "generate_dataset", "simulate_outcomes",
    "mv_exact_enumeration", "closed_form_targets",
    # errors
    "VotegateError", "ParseError", "ValidationError", "RangeError",
    "UnknownScore", "EmptyCalibration", "LengthMismatch",
    "DegenerateStratum", "EmptySelection", "DomainError", "EmptyInput",
    "InsufficientPoints", "SpecError", "TooLarge", "NoClosedForm",
    "ConfigError",
]
