"""The autonomous field (U-bar, S-bar)' = (N_U, N_S) / D and its fixed points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import ProblemParams


class SingularPointError(ArithmeticError):
    """The field was queried at (-1, 0), where D vanishes."""


@dataclass(frozen=True)
class PhaseState:
    xi: float
    u_bar: float
    s_bar: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.xi, self.u_bar, self.s_bar)):
            raise ValueError(f"non-finite phase state {self}")


@dataclass(frozen=True)
class FieldValue:
    D: float
    N_U: float
    N_S: float
    dU: float
    dS: float


def field_terms(u: float, s: float, params: ProblemParams) -> tuple[float, float, float]:
    """(D, N_U, N_S) from the expanded polynomials."""
    a, d, r = params.alpha, params.d, params.r
    s2 = s * s
    D = (1 + u) ** 2 + a * a * s2
    NU = -a * a * d * s2 * u - a * (r - 1) * s2 - u * (u + 1) * (r + u)
    NS = (-a * a * s2 * s + s * u * (-a * d + a * r - r - 1)
          + s * u * u * (-a * d + a - 1) - r * s)
    return D, NU, NS


def field_terms_matrix(u: float, s: float, params: ProblemParams) -> tuple[float, float, float]:
    """(D, N_U, N_S) as the adjugate of the 2x2 system applied to its right-hand side."""
    a, d, r = params.alpha, params.d, params.r
    f1 = -r * u - u * u + a * s * s
    f2 = -r * s - u * s - a * d * u * s
    D = (1 + u) ** 2 + a * a * s * s
    return D, (1 + u) * f1 + a * s * f2, -a * s * f1 + (1 + u) * f2


def field(state: PhaseState, params: ProblemParams) -> FieldValue:
    D, NU, NS = field_terms(state.u_bar, state.s_bar, params)
    if D == 0.0:
        raise SingularPointError("field is singular at (U, S) = (-1, 0)")
    return FieldValue(D, NU, NS, NU / D, NS / D)


def rhs(u: float, s: float, params: ProblemParams) -> tuple[float, float]:
    D, NU, NS = field_terms(u, s, params)
    if D == 0.0:
        raise SingularPointError("field is singular at (U, S) = (-1, 0)")
    return NU / D, NS / D


def jacobian(u: float, s: float, params: ProblemParams) -> np.ndarray:
    """Analytic Jacobian of (N_U/D, N_S/D) with respect to (U, S)."""
    a, d, r = params.alpha, params.d, params.r
    D, NU, NS = field_terms(u, s, params)
    if D == 0.0:
        raise SingularPointError("field is singular at (U, S) = (-1, 0)")
    dD = np.array([2 * (1 + u), 2 * a * a * s])
    dNU = np.array([
        -a * a * d * s * s - (3 * u * u + 2 * (r + 1) * u + r),
        -2 * a * a * d * s * u - 2 * a * (r - 1) * s,
    ])
    c1, c2 = -a * d + a * r - r - 1, -a * d + a - 1
    dNS = np.array([
        s * c1 + 2 * s * u * c2,
        -3 * a * a * s * s + u * c1 + u * u * c2 - r,
    ])
    return np.vstack([(dNU * D - NU * dD) / D ** 2, (dNS * D - NS * dD) / D ** 2])


def jacobian_at_origin(params: ProblemParams) -> np.ndarray:
    return jacobian(0.0, 0.0, params)


@dataclass(frozen=True)
class Equilibrium:
    u_bar: float
    s_bar: float
    kind: Literal["focus", "attractor", "singular"]
    residual: float | None


def equilibria(params: ProblemParams) -> list[Equilibrium]:
    """The fixed points on the S = 0 axis: (0,0), (-r,0), and the singular (-1,0)."""
    out = []
    for u, kind in ((0.0, "focus"), (-params.r, "attractor")):
        _, NU, NS = field_terms(u, 0.0, params)
        res = max(abs(NU), abs(NS))
        if res > 1e-14:
            raise AssertionError(f"({u}, 0) is not an equilibrium: residual {res}")
        out.append(Equilibrium(u, 0.0, kind, res))
    out.append(Equilibrium(-1.0, 0.0, "singular", None))
    return out


def barrier_normal_sign(barrier: Literal["U=-1", "U=0"], s_bar: float,
                        params: ProblemParams) -> float:
    """Normal component N_U of the field on a vertical barrier (D > 0 there).

    On U = -1 this is alpha (1 + alpha d - r) S^2; on U = 0 it is
    -alpha (r - 1) S^2.
    """
    if s_bar <= 0:
        raise ValueError("s_bar must be positive")
    u = {"U=-1": -1.0, "U=0": 0.0}[barrier]
    return field_terms(u, s_bar, params)[1]


def n_s_on_zero_barrier(s_bar: float, params: ProblemParams) -> float:
    """N_S(0, S) = -S (r + alpha^2 S^2), the expression some write for N_U(0, S)."""
    return field_terms(0.0, s_bar, params)[2]


def direction_grid(params: ProblemParams, u_range=(-3.0, 1.0), s_range=(0.0, 3.0),
                   nu: int = 41, ns: int = 31):
    """Rows (U, S, dU, dS) on a rectangular grid; the singular point is skipped."""
    rows = []
    for u in np.linspace(*u_range, nu):
        for s in np.linspace(*s_range, ns):
            D, NU, NS = field_terms(u, s, params)
            if D == 0.0:
                continue
            rows.append((float(u), float(s), NU / D, NS / D))
    return rows
