from ._core import (
    AccuracyFailure,
    BrownianConfig,
    CorrelationKernel,
    DegeneratePair,
    DiagonalRegion,
    Error,
    KarlinMcGregorDensity,
    Kernel,
    NotNormalizable,
    NumericalError,
    Solution,
    ValidationError,
    Weight,
    __version__,
    check_normality,
    partition_function,
    sample_positions,
    solve,
    transition_weight,
)

__all__ = [
    "AccuracyFailure",
    "BrownianConfig",
    "CorrelationKernel",
    "DegeneratePair",
    "DiagonalRegion",
    "Error",
    "KarlinMcGregorDensity",
    "Kernel",
    "NotNormalizable",
    "NumericalError",
    "Solution",
    "ValidationError",
    "Weight",
    "__version__",
    "check_normality",
    "partition_function",
    "sample_positions",
    "solve",
    "transition_weight",
]
