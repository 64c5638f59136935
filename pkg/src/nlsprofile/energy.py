"""Sign of the focusing energy on a computed profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import simpson

from .core import ProblemParams
from .fd import derivative
from .profile import PhysicalField, Profile


class EnergySign(str, Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    INDETERMINATE = "indeterminate"


@dataclass
class EnergyReport:
    value: float
    tail_bound: float
    sign: EnergySign
    R_max: float
    grid: dict = field(default_factory=dict)
    # value plus the signed power-law tail; the full integral vanishes, so this is ~0
    extrapolated_total: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "tail_bound": self.tail_bound,
                "sign": self.sign.value, "R_max": self.R_max,
                "extrapolated_total": self.extrapolated_total, "grid": self.grid}


def tail_exponent(params: ProblemParams) -> float:
    """Decay q of S^{1/alpha} S^2 ~ R^{-q}, from S, U_R ~ R^{-(r-1)}."""
    return (params.r - 1) * (1 / params.alpha + 2)


def _radial_integral(g: np.ndarray, R: np.ndarray, d: int) -> float:
    """int_0^{R[-1]} g dR on a log-spaced grid; below R[0], g ~ R^{d-1}."""
    xi = np.log(R)
    head = g[0] * R[0] / d
    return float(simpson(g * R, x=xi) + head)


def sign_of(value: float, tail: float) -> EnergySign:
    if value + tail < 0:
        return EnergySign.NEGATIVE
    if value - tail > 0:
        return EnergySign.POSITIVE
    return EnergySign.INDETERMINATE


def energy_sign(profile: Profile, params: ProblemParams, R_max: float | None = None) -> EnergyReport:
    """Integral of S^{1/alpha} (U_R^2/2 - alpha S^2/(p+1)) R^{d-1} over [0, R_max] plus a tail bound.

    The tail bound is ``C R_max^{d-q}`` with C fitted on the last decade of
    the integrand under its known R^{d-1-q} decay and inflated by 2.
    """
    a, d = params.alpha, params.d
    q = tail_exponent(params)
    if not q > d:
        raise ValueError(f"integrand not integrable: (r-1)(1/alpha+2) = {q:.6g} <= d = {d}")
    R = profile.zeta
    if R_max is None:
        R_max = float(R[-1])
    if R_max > R[-1] * (1 + 1e-12):
        raise ValueError(f"profile ends at {R[-1]:.6g} < R_max = {R_max:.6g}")
    keep = R <= R_max * (1 + 1e-12)
    R = R[keep]
    if R[-1] < 10 * R[0] or keep.sum() < 16:
        raise ValueError("profile too short for the tail fit")
    S, U = profile.S[keep], profile.U_R[keep]
    g = np.abs(S) ** (1 / a) * (U ** 2 / 2 - a * S ** 2 / (params.p + 1)) * R ** (d - 1)
    value = _radial_integral(g, R, d)
    last = R >= R[-1] / 10
    c_tail = 2 * float(np.max(np.abs(g[last]) * R[last] ** (q - d + 1))) / (q - d)
    tail = c_tail * R[-1] ** (d - q)
    signed_tail = float(g[-1] * R[-1]) / (q - d)
    return EnergyReport(value, tail, sign_of(value, tail), float(R[-1]),
                        {"n_points": int(keep.sum()), "R_min": float(R[0]),
                         "spacing": "geometric"},
                        extrapolated_total=value + signed_tail)


def energy_terms(fld: PhysicalField, params: ProblemParams) -> dict:
    """Kinetic, quantum (|grad rho|^2 / 8 rho^2) and potential parts of E(rho, psi)."""
    rho, psi, x = fld.rho, fld.psi, fld.x
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise ValueError("x grid must be positive and increasing")
    d, p = params.d, params.p
    lx = np.log(x)
    psi_x = derivative(psi, lx) / x
    rho_x = derivative(rho, lx) / x
    kin = rho * psi_x ** 2 / 2 * x ** (d - 1)
    quant = rho * rho_x ** 2 / (8 * rho ** 2) * x ** (d - 1)
    pot = -rho * rho ** ((p - 1) / 2) / (p + 1) * x ** (d - 1)
    return {k: _radial_integral(v, x, d) for k, v in
            (("kinetic", kin), ("quantum", quant), ("potential", pot))}


def full_energy(fld: PhysicalField, params: ProblemParams) -> float:
    """E = int rho (|grad psi|^2/2 + |grad rho|^2/(8 rho^2) - rho^{(p-1)/2}/(p+1)) R^{d-1} dR."""
    return math.fsum(energy_terms(fld, params).values())
