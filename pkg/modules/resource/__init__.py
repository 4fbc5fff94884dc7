"""Resource theory of subalgebra coherence: MIO/DIO channels and dilution costs."""

from modules.resource.resource_service import (
    mio_deviation,
    dio_deviation,
    is_mio,
    is_dio,
    maximally_coherent_source,
    expectation_channel,
    channel_check,
    build_mio_dilution,
    build_dio_dilution,
    dmax_pinned,
    dmax_pinned_eps,
    one_shot_cost_bracket,
    dio_cost_bracket,
    monotonicity_check,
)
from modules.resource.schema import (
    CHANNEL_TOL,
    ChannelPayload,
    QuantumChannel,
    ChannelCheck,
    DilutionResult,
    CostBracket,
    MonotonicityRow,
    MonotonicityReport,
)

__all__ = [
    'mio_deviation',
    'dio_deviation',
    'is_mio',
    'is_dio',
    'maximally_coherent_source',
    'expectation_channel',
    'channel_check',
    'build_mio_dilution',
    'build_dio_dilution',
    'dmax_pinned',
    'dmax_pinned_eps',
    'one_shot_cost_bracket',
    'dio_cost_bracket',
    'monotonicity_check',
    'CHANNEL_TOL',
    'ChannelPayload',
    'QuantumChannel',
    'ChannelCheck',
    'DilutionResult',
    'CostBracket',
    'MonotonicityRow',
    'MonotonicityReport',
]
