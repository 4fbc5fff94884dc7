"""Stinespring dilations of conditional expectations and purified states."""

from modules.dilation.dilation_service import (
    kraus_operators,
    stinespring,
    range_projection,
    environment_first,
    dilate_state,
    purify,
    build_xi,
    multiplicative_domain_check,
    order_inequality_check,
)
from modules.dilation.schema import (
    StinespringIsometry,
    IsometryPayload,
    TripartitePureState,
    DomainSample,
    MultiplicativeDomainReport,
    OrderInequalityReport,
)

__all__ = [
    'kraus_operators',
    'stinespring',
    'range_projection',
    'environment_first',
    'dilate_state',
    'purify',
    'build_xi',
    'multiplicative_domain_check',
    'order_inequality_check',
    'StinespringIsometry',
    'IsometryPayload',
    'TripartitePureState',
    'DomainSample',
    'MultiplicativeDomainReport',
    'OrderInequalityReport',
]
