import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict

from modules.solver.schema import SolverCertificate

_DISPLAY_DIGITS = 6


class Quantity(str, Enum):
    D = "D"
    D_ALPHA = "D_alpha"
    DMAX = "Dmax"
    DMIN = "Dmin"
    DMAX_EPS = "DmaxEps"
    DMIN_EPS = "DminEps"
    DH = "DH"
    HMIN = "Hmin"
    HMAX = "Hmax"
    HMIN_EPS = "HminEps"
    HMAX_EPS = "HmaxEps"


class Route(str, Enum):
    DIRECT = "direct"
    DILATED = "dilated"


def display(value: float) -> Optional[float]:
    """Bits rounded for reports; +∞ sentinels become None"""
    return round(value, _DISPLAY_DIGITS) if math.isfinite(value) else None


class EntropyReport(BaseModel):
    """One entropy value with its provenance"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    quantity: Quantity
    value: float
    route: Route = Route.DIRECT
    n: int = 1
    epsilon: Optional[float] = None
    alpha: Optional[float] = None
    certificate: Optional[SolverCertificate] = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_row(self) -> Dict[str, Any]:
        return {
            "quantity": self.quantity.value,
            "value_bits": display(self.value),
            "n": self.n,
            "epsilon": self.epsilon,
            "alpha": None if self.alpha is None or math.isinf(self.alpha) else self.alpha,
            "route": self.route.value,
            "certificate_gap": None if self.certificate is None else self.certificate.gap,
            "finite": self.finite,
        }


class DualityRow(BaseModel):
    """Direct subalgebra value against the value computed on the dilated state"""
    quantity: Quantity
    epsilon: float = 0.0
    alpha: Optional[float] = None
    conjugate_alpha: Optional[float] = None
    direct: float
    dilated: float
    tol: float
    local_search: bool = False
    certificate_gap: Optional[float] = None

    @property
    def difference(self) -> float:
        if math.isinf(self.direct) and math.isinf(self.dilated):
            return 0.0
        return abs(self.direct - self.dilated)

    @property
    def passed(self) -> bool:
        return self.difference <= self.tol

    def reports(self) -> List[EntropyReport]:
        """The two sides as entropy reports, one per route"""
        return [
            EntropyReport(quantity=self.quantity, value=value, route=route, epsilon=self.epsilon, alpha=self.alpha)
            for route, value in ((Route.DIRECT, self.direct), (Route.DILATED, self.dilated))
        ]

    def to_row(self) -> Dict[str, Any]:
        return {
            "quantity": self.quantity.value,
            "epsilon": self.epsilon,
            "alpha": None if self.alpha is None or math.isinf(self.alpha) else self.alpha,
            "conjugate_alpha": None if self.conjugate_alpha is None or math.isinf(self.conjugate_alpha)
            else self.conjugate_alpha,
            "direct_bits": display(self.direct),
            "dilated_bits": display(self.dilated),
            "difference": self.difference,
            "local_search": self.local_search,
            "certificate_gap": self.certificate_gap,
            "passed": self.passed,
        }


class DualityReport(BaseModel):
    """Rows of a duality check"""
    kind: str
    rows: List[DualityRow] = []

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


class AepRow(BaseModel):
    """Per-copy smoothed divergences of ρ^⊗n against N^⊗n"""
    n: int
    dmax_eps: float
    dmin_eps: float
    dh_eps: float
    relative_entropy: float
    dmax_fixed: float
    dh_fixed: float
    slack: float

    @property
    def dmax_within_fixed(self) -> bool:
        """(1/n) D_max^ε against N^⊗n stays below the value against E(ρ)^⊗n"""
        return self.dmax_eps <= self.dmax_fixed + self.slack

    @property
    def dh_within_fixed(self) -> bool:
        return self.dh_eps <= self.dh_fixed + self.slack

    @property
    def dmin_below_relative_entropy(self) -> bool:
        """Reported only; not part of the pass criterion"""
        return self.dmin_eps <= self.relative_entropy + self.slack

    @property
    def passed(self) -> bool:
        return self.dmax_within_fixed and self.dh_within_fixed

    def to_row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "dmax_eps_per_copy": display(self.dmax_eps),
            "dmin_eps_per_copy": display(self.dmin_eps),
            "dh_eps_per_copy": display(self.dh_eps),
            "relative_entropy": display(self.relative_entropy),
            "dmax_fixed_per_copy": display(self.dmax_fixed),
            "dh_fixed_per_copy": display(self.dh_fixed),
            "dmin_below_relative_entropy": self.dmin_below_relative_entropy,
            "passed": self.passed,
        }


class AepReport(BaseModel):
    epsilon: float
    rows: List[AepRow] = []

    @property
    def gaps(self) -> List[float]:
        """|(1/n) D_max^ε − D| per row"""
        return [abs(row.dmax_eps - row.relative_entropy) for row in self.rows]

    @property
    def gap_shrinks(self) -> bool:
        """Last row sits strictly closer to D than the first, unless both already agree"""
        if len(self.rows) < 2:
            return True
        first, last = self.gaps[0], self.gaps[-1]
        return last < first or max(first, last) <= self.rows[-1].slack

    @property
    def passed(self) -> bool:
        # without smoothing the per-copy D_max may stay flat
        rows_ok = all(row.passed for row in self.rows)
        return rows_ok and (self.epsilon == 0 or self.gap_shrinks)


class SteinRow(BaseModel):
    """(1/n) D_H^ε(ρ^⊗n‖N^⊗n) next to the rate D(ρ‖N)"""
    n: int
    epsilon: float
    dh_eps: float
    relative_entropy: float
    slack: float = 1e-5

    @property
    def converse_bound(self) -> float:
        """Weak converse (D + 1/n)/(1 − ε), binary entropy bounded by one bit"""
        return (self.relative_entropy + 1 / self.n) / (1 - self.epsilon)

    @property
    def passed(self) -> bool:
        return self.dh_eps <= self.converse_bound + self.slack

    def to_row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "dh_eps_per_copy": display(self.dh_eps),
            "relative_entropy": display(self.relative_entropy),
            "converse_bound": display(self.converse_bound),
            "passed": self.passed,
        }


class BoundCheck(BaseModel):
    """D_max^{√(1−ε)} ≤ D_H^ε + log₂(1/(1−ε))"""
    epsilon: float
    dmax_smooth: float
    dh: float

    @property
    def slack(self) -> float:
        return self.dh + math.log2(1 / (1 - self.epsilon)) - self.dmax_smooth

    @property
    def passed(self) -> bool:
        return self.slack >= -1e-6


class MaximalDivergenceRow(BaseModel):
    alpha: float
    value: float
    expected: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.expected) <= 1e-6


class MaximalDivergenceReport(BaseModel):
    """D_α of the flat index state against log₂ λ⁻¹"""
    rows: List[MaximalDivergenceRow] = []

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)
