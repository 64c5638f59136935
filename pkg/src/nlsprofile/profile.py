"""Physical self-similar profile from the series and the integrated trajectory."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from .core import ProblemParams
from .fd import derivative
from .integrate import Termination, Trajectory, integrate
from .series import (DEFAULT_N_MAX, SeriesCoefficients, compute_coefficients,
                     evaluate, psi_antiderivative)

# series is used below this radius, trajectory interpolation above
HANDOVER_ZETA = 0.9 / 8


@dataclass
class Profile:
    params: ProblemParams
    zeta: np.ndarray
    U_R: np.ndarray
    S: np.ndarray
    P: np.ndarray
    Psi: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.zeta) <= 0) or self.zeta[0] <= 0:
            raise ValueError("profile grid must be positive and strictly increasing")


@dataclass
class PhysicalField:
    T: float
    t: float
    s: float
    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    psi: np.ndarray


def geometric_grid(zeta_min: float, zeta_max: float, n: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(zeta_min), math.log(zeta_max), n))


def linear_grid(zeta_min: float, zeta_max: float, n: int) -> np.ndarray:
    return np.linspace(zeta_min, zeta_max, n)


def density_from_S(S, params: ProblemParams):
    """Invert S = 2 r^{1-alpha} P^alpha / sqrt(alpha)."""
    S = np.asarray(S, dtype=float)
    if np.any(S <= 0):
        raise ValueError("S must be positive")
    a, r = params.alpha, params.r
    P = (math.sqrt(a) * S / (2 * r ** (1 - a))) ** (1 / a)
    return P if P.ndim else float(P)


def S_from_density(P, params: ProblemParams):
    a, r = params.alpha, params.r
    return 2 * r ** (1 - a) * np.asarray(P, dtype=float) ** a / math.sqrt(a)


def _bar_values(traj: Trajectory, coeffs: SeriesCoefficients, zeta: np.ndarray):
    xi = np.log(zeta)
    ub = np.empty_like(xi)
    sb = np.empty_like(xi)
    inner = zeta < HANDOVER_ZETA
    for i in np.flatnonzero(inner):
        st, _ = evaluate(coeffs, float(xi[i]))
        ub[i], sb[i] = st.u_bar, st.s_bar
    outer = ~inner
    if outer.any():
        lo, hi = traj.xi[0], traj.xi[-1]
        if xi[outer].min() < lo or xi[outer].max() > hi:
            raise ValueError(f"grid leaves the trajectory range xi in [{lo:.3f}, {hi:.3f}]")
        ub[outer] = CubicHermiteSpline(traj.xi, traj.u, traj.du)(xi[outer])
        sb[outer] = CubicHermiteSpline(traj.xi, traj.s, traj.ds)(xi[outer])
    return ub, sb


def reconstruct(traj: Trajectory, coeffs: SeriesCoefficients, grid) -> Profile:
    """U_R = zeta U-bar, S = zeta S-bar, P from S, Psi = int_0^zeta U_R/2 (Psi(0) = 0)."""
    if traj.termination not in (Termination.CONVERGED_TO_ORIGIN, Termination.REACHED_XI_END):
        raise ValueError(f"trajectory terminated with {traj.termination.value}")
    zeta = np.asarray(grid, dtype=float)
    if zeta[0] <= 0 or np.any(np.diff(zeta) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    if zeta[0] >= HANDOVER_ZETA:
        raise ValueError("grid must start inside the series region zeta < 0.9/8")
    params = traj.params
    ub, sb = _bar_values(traj, coeffs, zeta)
    U_R, S = zeta * ub, zeta * sb
    xi = np.log(zeta)
    # dPsi/dxi = zeta * U_R / 2
    psi0 = psi_antiderivative(coeffs, float(zeta[0]))
    Psi = psi0 + cumulative_simpson(zeta * U_R / 2, x=xi, initial=0.0)
    return Profile(params, zeta, U_R, S, density_from_S(S, params), Psi)


def solve_profile(params: ProblemParams, grid=None, *, n_max: int = DEFAULT_N_MAX,
                  xi_start: float = -4.0, tol: float = 1e-10,
                  zeta_max: float | None = None, n_grid: int = 2001):
    """Series, trajectory and profile in one call.

    When ``zeta_max`` is given the integration runs to ``log(zeta_max)`` with
    purely relative error control instead of stopping near the origin, so the
    far tail keeps its relative accuracy.
    """
    coeffs = compute_coefficients(params, n_max)
    if zeta_max is None:
        traj = integrate(params, coeffs, xi_start, tol=tol)
        zeta_max = math.exp(traj.xi[-1])
    else:
        traj = integrate(params, coeffs, xi_start, math.log(zeta_max), tol=tol,
                         atol=1e-300, stop_at_origin=False)
    if grid is None:
        grid = geometric_grid(1e-6, zeta_max, n_grid)
    return coeffs, traj, reconstruct(traj, coeffs, grid)


def _radial_laplacian(f: np.ndarray, zeta: np.ndarray, d: int) -> np.ndarray:
    # derivatives in xi = log zeta: Lap f = (f_xixi + (d - 2) f_xi) / zeta^2
    xi = np.log(zeta)
    f1 = derivative(f, xi, 1)
    f2 = derivative(f, xi, 2)
    return (f2 + (d - 2) * f1) / zeta ** 2


def quantum_pressure_correction(profile: Profile, params: ProblemParams, s: float) -> np.ndarray:
    """e^{(4 - 2r) s} Lap(S^{1/(2 alpha)}) / S^{1/(2 alpha)} on the profile grid."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if np.any(profile.S <= 0):
        raise ValueError("S must be positive on the grid")
    f = profile.S ** (1 / (2 * params.alpha))
    return math.exp((4 - 2 * params.r) * s) * _radial_laplacian(f, profile.zeta, params.d) / f


def physical_fields(profile: Profile, params: ProblemParams, T: float, t: float) -> PhysicalField:
    """rho, psi at time t from the self-similar ansatz, on x = y (T - t)^{1/r}."""
    if not t < T:
        raise ValueError("need t < T")
    tau = T - t
    a, r = params.alpha, params.r
    s = -math.log(tau) / r
    y = profile.zeta
    x = y * tau ** (1 / r)
    rho = tau ** (1 / (a * r) - 1 / a) / r * profile.P
    psi = tau ** (2 / r - 1) / r * profile.Psi
    return PhysicalField(T, t, s, x, y, rho, psi)


def parity_extension_check(coeffs: SeriesCoefficients) -> bool:
    """U_R = sum U_n zeta^{n+1} must be odd and S = sum S_n zeta^{n+1} even."""
    return (all(n % 2 == 0 for n in coeffs.U) and all(n % 2 == 1 for n in coeffs.S))
