"""Continuation of the series solution by adaptive Runge-Kutta integration in xi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ProblemParams
from .fd import derivative
from .phase import FieldValue, PhaseState, field_terms
from .series import XI_MAX_SERIES, SeriesCoefficients, evaluate

XI_START_DEFAULT = -4.0
HORIZON = 40.0
SINGULAR_RADIUS = 1e-8
EVENT_XTOL = 1e-12
# caps sample spacing so finite-difference residuals and interpolation stay accurate
MAX_STEP = 0.004

# Dormand-Prince 5(4); the 5th-order solution is propagated (FSAL).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class Termination(str, Enum):
    REACHED_XI_END = "reached_xi_end"
    CONVERGED_TO_ORIGIN = "converged_to_origin"
    BARRIER_CROSSED = "barrier_crossed"
    DIVERGED = "diverged"
    SINGULARITY = "singularity"


@dataclass(frozen=True)
class BarrierEvent:
    barrier: str        # "U=-1" or "U=0"
    xi: float
    direction: int      # +1 crossing upward in U, -1 downward


@dataclass
class Trajectory:
    params: ProblemParams
    xi: np.ndarray
    u: np.ndarray
    s: np.ndarray
    du: np.ndarray
    ds: np.ndarray
    D: np.ndarray
    N_U: np.ndarray
    N_S: np.ndarray
    steps_accepted: int
    steps_rejected: int
    termination: Termination
    events: list[BarrierEvent] = field(default_factory=list)
    u0: float | None = None

    def __len__(self):
        return len(self.xi)

    @property
    def states(self) -> list[PhaseState]:
        return [PhaseState(*t) for t in zip(self.xi, self.u, self.s)]

    def field_value(self, i: int) -> FieldValue:
        return FieldValue(self.D[i], self.N_U[i], self.N_S[i], self.du[i], self.ds[i])

    @property
    def final_norm(self) -> float:
        return math.hypot(self.u[-1], self.s[-1])

    def crossed(self, barrier: str) -> bool:
        return any(e.barrier == barrier for e in self.events)


def _f(u, s, params):
    D, NU, NS = field_terms(u, s, params)
    return NU / D, NS / D


def _rk_step(u, s, k1, h, params):
    ks = [k1]
    for i in range(1, 7):
        a = _A[i]
        uu = u + h * sum(a[j] * ks[j][0] for j in range(i))
        ss = s + h * sum(a[j] * ks[j][1] for j in range(i))
        ks.append(_f(uu, ss, params))
    # stage 7 is evaluated at the 5th-order solution (FSAL)
    un, sn = uu, ss
    eu = h * sum(_E[j] * ks[j][0] for j in range(7))
    es = h * sum(_E[j] * ks[j][1] for j in range(7))
    return un, sn, ks[6], eu, es


def _locate(g, u, s, k1, h, params, xtol=EVENT_XTOL):
    """Smallest step in (0, h] where g changes sign, by bisection on re-taken RK steps."""
    g0 = g(u)
    lo, hi = 0.0, h
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        um = _rk_step(u, s, k1, mid, params)[0]
        if (g(um) > 0) == (g0 > 0) and g(um) != 0:
            lo = mid
        else:
            hi = mid
    return hi


def integrate_from_state(params: ProblemParams, state: PhaseState, xi_end: float,
                         tol: float = 1e-10, *, atol: float | None = None,
                         stop_at_origin: bool = True, stop_on_barrier: bool = True,
                         origin_threshold: float | None = None,
                         divergence_bound: float | None = None,
                         max_step: float = MAX_STEP, h0: float = 1e-3) -> Trajectory:
    """Adaptive Dormand-Prince integration of the field from ``state``.

    Step error is measured against ``atol + tol*|y|`` per component; ``atol``
    defaults to ``tol``.  Barrier crossings of U = -1 and U = 0 are located to
    1e-12 in xi.  Steps never exceed ``max_step``; the samples double as a
    dataset for residual checks and interpolation.
    """
    if not xi_end > state.xi:
        raise ValueError("xi_end must exceed the starting xi")
    atol = tol if atol is None else atol
    u0_scale = max(1.0, abs(params.u0))
    if origin_threshold is None:
        origin_threshold = 1e-10 * u0_scale
    if divergence_bound is None:
        divergence_bound = 10 * (1 + params.r + abs(params.u0) + abs(state.s_bar))

    xi, u, s = state.xi, state.u_bar, state.s_bar
    rows = []

    def record(xi, u, s):
        D, NU, NS = field_terms(u, s, params)
        rows.append((xi, u, s, NU / D, NS / D, D, NU, NS))

    def finish(term, events=()):
        a = np.array(rows)
        return Trajectory(params, a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4],
                          a[:, 5], a[:, 6], a[:, 7], accepted, rejected, term,
                          list(events), params.u0)

    if math.hypot(u + 1, s) < SINGULAR_RADIUS:
        raise ValueError("initial state lies on the singular point (-1, 0)")
    record(xi, u, s)
    k1 = _f(u, s, params)
    h = min(h0, max_step, xi_end - xi)
    accepted = rejected = 0
    err_prev = 1.0
    barriers = (("U=-1", lambda v: v + 1.0), ("U=0", lambda v: v))
    events: list[BarrierEvent] = []

    while xi < xi_end:
        h = min(h, max_step, xi_end - xi)
        un, sn, k7, eu, es = _rk_step(u, s, k1, h, params)
        sc_u = atol + tol * max(abs(u), abs(un))
        sc_s = atol + tol * max(abs(s), abs(sn))
        err = math.sqrt(0.5 * ((eu / sc_u) ** 2 + (es / sc_s) ** 2))
        if not math.isfinite(err) or err > 1.0:
            rejected += 1
            fac = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
            if h < 1e-14:
                return finish(Termination.SINGULARITY, events)
            continue

        crossing = None
        for name, g in barriers:
            if g(u) != 0 and g(un) != 0 and (g(u) > 0) != (g(un) > 0):
                hc = _locate(g, u, s, k1, h, params)
                if crossing is None or hc < crossing[1]:
                    crossing = (name, hc, 1 if g(un) > 0 else -1)
        if crossing is not None:
            name, hc, direction = crossing
            uc, scr, _, _, _ = _rk_step(u, s, k1, hc, params)
            accepted += 1
            xi += hc
            record(xi, uc, scr)
            events.append(BarrierEvent(name, xi, direction))
            if stop_on_barrier:
                return finish(Termination.BARRIER_CROSSED, events)

        accepted += 1
        xi = xi + h if xi + h < xi_end or h < xi_end - xi else xi_end
        u, s, k1 = un, sn, k7
        record(xi, u, s)

        if math.hypot(u + 1, s) < SINGULAR_RADIUS:
            return finish(Termination.SINGULARITY, events)
        if math.hypot(u, s) > divergence_bound:
            return finish(Termination.DIVERGED, events)
        if stop_at_origin and math.hypot(u, s) < origin_threshold:
            return finish(Termination.CONVERGED_TO_ORIGIN, events)

        # PI step-size controller
        err = max(err, 1e-10)
        fac = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
        h *= min(5.0, max(0.2, fac))
        err_prev = err
    return finish(Termination.REACHED_XI_END, events)


def integrate(params: ProblemParams, coeffs: SeriesCoefficients,
              xi_start: float = XI_START_DEFAULT, xi_end: float | None = None,
              tol: float = 1e-10, **kwargs) -> Trajectory:
    """Seed from the series at ``xi_start`` and integrate to ``xi_end``.

    ``xi_end`` defaults to ``xi_start + 40``.
    """
    if xi_end is None:
        xi_end = xi_start + HORIZON
    if xi_start > XI_MAX_SERIES - 0.1:
        raise ValueError(f"xi_start={xi_start} must be <= -log 8 - 0.1")
    if not xi_end > xi_start:
        raise ValueError("xi_end must exceed xi_start")
    state, tail = evaluate(coeffs, xi_start)
    if not tail < tol / 10:
        raise ValueError(f"series tail bound {tail:.3e} at xi_start={xi_start} "
                         f"is not below tol/10; lower xi_start or raise n_max")
    return integrate_from_state(params, state, xi_end, tol, **kwargs)


def field_residuals(traj: Trajectory) -> np.ndarray:
    """Per-sample |D dU_num - N_U| + |D dS_num - N_S| with 4th-order FD derivatives."""
    du = derivative(traj.u, traj.xi)
    ds = derivative(traj.s, traj.xi)
    return np.abs(traj.D * du - traj.N_U) + np.abs(traj.D * ds - traj.N_S)


def residual_norm(traj: Trajectory, params: ProblemParams | None = None) -> float:
    """Max over interior samples of the field residual with numerical derivatives."""
    if len(traj) < 3:
        raise ValueError("residual_norm needs at least 3 samples")
    if params is not None and params != traj.params:
        traj = recompute_fields(traj, params)
    if len(traj) < 5:
        raise ValueError("residual_norm needs at least 5 samples for 4th-order stencils")
    return float(np.max(field_residuals(traj)[1:-1]))


def recompute_fields(traj: Trajectory, params: ProblemParams) -> Trajectory:
    D, NU, NS = np.vectorize(lambda u, s: field_terms(u, s, params))(traj.u, traj.s)
    return Trajectory(params, traj.xi, traj.u, traj.s, NU / D, NS / D, D, NU, NS,
                      traj.steps_accepted, traj.steps_rejected, traj.termination,
                      list(traj.events), traj.u0)


def from_samples(params: ProblemParams, xi, u, s) -> Trajectory:
    """Wrap externally sampled (xi, U, S) as a trajectory, e.g. a closed-form solution."""
    xi, u, s = (np.asarray(v, dtype=float) for v in (xi, u, s))
    if np.any(np.diff(xi) <= 0):
        raise ValueError("xi must be strictly increasing")
    D, NU, NS = field_terms(u, s, params)
    return Trajectory(params, xi, u, s, NU / D, NS / D, D, NU, NS, 0, 0,
                      Termination.REACHED_XI_END, [], params.u0)


@dataclass(frozen=True)
class DecayFit:
    rate_U: float
    rate_S: float
    log_coef_U: float
    log_coef_S: float
    n_samples: int


def _fit_rate(xi, y, log_correction):
    y = np.asarray(y)
    sign = np.sign(np.median(y))
    keep = (np.sign(y) == sign) & (y != 0)
    xi, y = xi[keep], y[keep]
    if len(xi) < 8:
        raise ValueError(f"only {len(xi)} usable samples in the decay window (need 8)")
    cols = [np.ones_like(xi), xi]
    if log_correction:
        if np.any(xi <= 0):
            raise ValueError("log-corrected fit needs the window at xi > 0")
        cols.append(np.log(xi))
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), np.log(np.abs(y)), rcond=None)
    return coef[1], (coef[2] if log_correction else 0.0), len(xi)


def decay_fit(traj: Trajectory, window: tuple[float, float] | None = None,
              log_correction: bool = True) -> DecayFit:
    """Fit log|y| = a + rate*xi (+ b log xi) to U-bar and S-bar over ``window``.

    With ``window=None`` the tail where the state norm is below 1e-3 is used.
    """
    xi = traj.xi
    if window is None:
        mask = np.hypot(traj.u, traj.s) < 1e-3
    else:
        mask = (xi >= window[0]) & (xi <= window[1])
    ru, bu, nu = _fit_rate(xi[mask], traj.u[mask], log_correction)
    rs, bs, ns = _fit_rate(xi[mask], traj.s[mask], log_correction)
    return DecayFit(float(ru), float(rs), float(bu), float(bs), min(nu, ns))


def matching_consistency(params: ProblemParams, coeffs: SeriesCoefficients,
                         xi_a: float, xi_b: float, tol: float = 1e-12) -> float:
    """Distance at ``xi_b`` between the integrated series state from ``xi_a`` and the series itself."""
    if xi_b > XI_MAX_SERIES - 0.1 or xi_a > xi_b:
        raise ValueError("need xi_a <= xi_b <= -log 8 - 0.1")
    start, _ = evaluate(coeffs, xi_a)
    end, _ = evaluate(coeffs, xi_b)
    if xi_a == xi_b:
        return 0.0
    traj = integrate_from_state(params, start, xi_b, tol, stop_at_origin=False)
    return math.hypot(traj.u[-1] - end.u_bar, traj.s[-1] - end.s_bar)


def degenerate_solution(params: ProblemParams, xi, s_lead: float = 1.0):
    """Exact solution on the barrier when alpha*d = r - 1.

    U-bar = -1 and S-bar^2 = s_lead^2 e^{-2 xi} - (r - 1)/alpha, which reaches
    the singular point at finite xi.
    """
    xi = np.asarray(xi, dtype=float)
    s2 = s_lead ** 2 * np.exp(-2 * xi) - (params.r - 1) / params.alpha
    return -np.ones_like(xi), np.sqrt(s2)
