"""Problem parameters and regime classification for the focusing NLS profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

DEGENERACY_RTOL = 1e-12


class BarrierCondition(str, Enum):
    STRICT = "strict"          # alpha*d > r - 1
    DEGENERATE = "degenerate"  # alpha*d == r - 1 (within tolerance)
    VIOLATED = "violated"      # alpha*d < r - 1


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``d``, nonlinearity exponent ``p`` and self-similar exponent ``r``.

    ``alpha = (p - 1)/4``, ``gamma = (p + 1)/2`` and the critical Sobolev
    exponent ``s_c = d/2 - 2/(p - 1)`` are derived on construction.
    """

    d: int
    p: float
    r: float
    alpha: float = field(init=False)
    gamma: float = field(init=False)
    s_c: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if not (math.isfinite(self.p) and self.p > 1):
            raise ValueError(f"p must be > 1 (alpha > 0), got {self.p!r}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError(f"r must be > 0, got {self.r!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "alpha", (self.p - 1) / 4)
        object.__setattr__(self, "gamma", (self.p + 1) / 2)
        object.__setattr__(self, "s_c", self.d / 2 - 2 / (self.p - 1))

    @property
    def odd_integer_p(self) -> bool:
        """True when p is an odd integer (polynomial nonlinearity, smooth extension)."""
        return self.p == int(self.p) and int(self.p) % 2 == 1

    @property
    def u0(self) -> float:
        """Limit of U-bar at xi = -inf, equal to U_R'(0)."""
        return -(self.r - 1) / (self.alpha * self.d)

    def barrier_margin(self) -> float:
        return self.alpha * self.d - (self.r - 1)


def new_params(d: int, p: float, r: float) -> ProblemParams:
    return ProblemParams(d, p, r)


@dataclass(frozen=True)
class RegimeVerdict:
    supercritical_mass: bool
    r_window: bool
    barrier_condition: BarrierCondition
    odd_integer_p: bool

    @property
    def admissible(self) -> bool:
        """All hypotheses of the existence result hold."""
        return (self.supercritical_mass and self.r_window
                and self.barrier_condition is BarrierCondition.STRICT)


def barrier_condition(params: ProblemParams) -> BarrierCondition:
    ad = params.alpha * params.d
    margin = ad - (params.r - 1)
    if abs(margin) <= DEGENERACY_RTOL * max(1.0, ad):
        return BarrierCondition.DEGENERATE
    return BarrierCondition.STRICT if margin > 0 else BarrierCondition.VIOLATED


def classify(params: ProblemParams) -> RegimeVerdict:
    return RegimeVerdict(
        supercritical_mass=params.s_c > 0,
        r_window=params.r > 2,
        barrier_condition=barrier_condition(params),
        odd_integer_p=params.odd_integer_p,
    )


def admissible_r_interval(d: int, p: float) -> tuple[float, float] | None:
    """Open interval of r with r > 2 and alpha*d > r - 1, or None if empty.

    Nonempty exactly in the mass-supercritical range p > 1 + 4/d.
    """
    hi = (p - 1) / 4 * d + 1
    if hi <= 2:
        return None
    return (2.0, hi)
