"""Subalgebra entropies, conditional entropies and duality checks."""

from modules.entropy.entropy_service import (
    DEFAULT_ALPHAS,
    relative_entropy,
    subalgebra_relative_entropy,
    conjugate_alpha,
    conditional_entropy,
    evaluate,
    duality_check,
    triple_duality_check,
    aep_trace,
    stein_trace,
    hypothesis_testing_bound_check,
    maximal_divergence_check,
)
from modules.entropy.schema import (
    Quantity,
    Route,
    EntropyReport,
    DualityRow,
    DualityReport,
    AepRow,
    AepReport,
    SteinRow,
    BoundCheck,
    MaximalDivergenceRow,
    MaximalDivergenceReport,
)

__all__ = [
    'DEFAULT_ALPHAS',
    'relative_entropy',
    'subalgebra_relative_entropy',
    'conjugate_alpha',
    'conditional_entropy',
    'evaluate',
    'duality_check',
    'triple_duality_check',
    'aep_trace',
    'stein_trace',
    'hypothesis_testing_bound_check',
    'maximal_divergence_check',
    'Quantity',
    'Route',
    'EntropyReport',
    'DualityRow',
    'DualityReport',
    'AepRow',
    'AepReport',
    'SteinRow',
    'BoundCheck',
    'MaximalDivergenceRow',
    'MaximalDivergenceReport',
]
