"""Power-series expansion of (U-bar, S-bar) around xi = -inf.

    U-bar = sum_{n even >= 0}  U_n e^{n xi}
    S-bar = sum_{n odd >= -1}  S_n e^{n xi}

Coefficients come from the cubic recursion obtained by matching D U' = N_U and
D S' = N_S order by order; the top-order unknown is isolated on the left.
Convolution sums use compensated summation (``math.fsum``).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .core import ProblemParams
from .phase import PhaseState

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 40
CONVERGENCE_RADIUS = 1 / 8
XI_MAX_SERIES = -math.log(8)


class MajorantWarning(UserWarning):
    """Computed coefficients do not satisfy the geometric majorant check."""


@dataclass(frozen=True)
class SeriesCoefficients:
    params: ProblemParams
    n_max: int
    U: Mapping[int, float]
    S: Mapping[int, float]
    p_bar: Mapping[int, float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "U", MappingProxyType(dict(self.U)))
        object.__setattr__(self, "S", MappingProxyType(dict(self.S)))
        p, run = {}, 0.0
        for n in range(-1, self.n_max + 1):
            c = self.coef(n)
            run = max(run, 1.0 + abs(c))
            p[n] = run
        object.__setattr__(self, "p_bar", MappingProxyType(p))

    def coef(self, n: int) -> float:
        """U_n for even n, S_n for odd n (0 when absent)."""
        return self.U.get(n, 0.0) if n % 2 == 0 else self.S.get(n, 0.0)

    def p(self, n: int) -> float:
        return 1.0 + abs(self.coef(n))

    @cached_property
    def majorant(self) -> "MajorantResult":
        return majorant_check(self)


def _orange(lo: int, hi: int, parity: int):
    """Integers in [lo, hi] with the given parity (0 even, 1 odd)."""
    start = lo if (lo - parity) % 2 == 0 else lo + 1
    return range(start, hi + 1, 2)


def _sum_or_overflow(terms, key, kind):
    try:
        total = math.fsum(terms)
    except (OverflowError, ValueError):
        total = math.inf
    if not math.isfinite(total):
        raise OverflowError(f"series coefficient {kind}_{key} is not representable "
                            "(a convolution term overflowed)")
    return total


def compute_coefficients(params: ProblemParams, n_max: int = DEFAULT_N_MAX,
                         s_lead: float = 1.0) -> SeriesCoefficients:
    """Solve the coefficient recursion up to U_{n_max}, S_{n_max - 1}.

    ``s_lead`` is S_{-1}; the scaling symmetry lets it be fixed to 1, other
    values are accepted for checking the symmetry itself.
    """
    if n_max < 0 or n_max % 2:
        raise ValueError(f"n_max must be a nonnegative even integer, got {n_max}")
    a, d, r = params.alpha, params.d, params.r
    a2 = a * a
    U: dict[int, float] = {}
    S: dict[int, float] = {-1: float(s_lead)}

    def u(i):
        return U.get(i, 0.0)

    def s(i):
        return S.get(i, 0.0)

    c_su = -a * d + a * r - r - 1
    c_suu = -a * d + a - 1
    lead2 = s_lead * s_lead

    for n in range(-2, n_max - 1):
        if n % 2 == 0:
            nt = []
            for i in _orange(-1, n + 1, 1):
                for j in _orange(max(-1, -i), n - i, 1):
                    nt.append(-a2 * d * s(i) * s(j) * u(n - i - j))
            for i in _orange(-1, n + 1, 1):
                nt.append(-a * (r - 1) * s(i) * s(n - i))
            for i in _orange(0, n, 0):
                for j in _orange(0, n - i, 0):
                    nt.append(-u(i) * u(j) * u(n - i - j))
                nt.append(-(r + 1) * u(i) * u(n - i))
            nt.append(-r * u(n))

            dt = [n * u(n)]
            for i in _orange(0, n, 0):
                dt.append(2 * i * u(i) * u(n - i))
                for j in _orange(0, n - i, 0):
                    dt.append(i * u(i) * u(j) * u(n - i - j))
                for j in _orange(-1, n + 1 - i, 1):
                    dt.append(a2 * i * u(i) * s(j) * s(n - i - j))
            n_t, d_t = _sum_or_overflow(nt, n + 2, "U"), _sum_or_overflow(dt, n + 2, "U")
            val = (n_t - d_t) / (a2 * lead2 * (n + 2 + d))
            target, key = U, n + 2
        else:
            nt, dt = [], [n * s(n)]
            for i in _orange(-1, n, 1):
                for j in _orange(max(-1, -i), min(n + 1 - i, n), 1):
                    sss = s(i) * s(j) * s(n - i - j)
                    nt.append(-a2 * sss)
                    dt.append(a2 * i * sss)
                nt.append(c_su * s(i) * u(n - i))
                dt.append(2 * i * s(i) * u(n - i))
                for j in _orange(0, n - i, 0):
                    suu = s(i) * u(j) * u(n - i - j)
                    nt.append(c_suu * suu)
                    dt.append(i * suu)
            nt.append(-r * s(n))
            n_t, d_t = _sum_or_overflow(nt, n + 2, "S"), _sum_or_overflow(dt, n + 2, "S")
            val = (n_t - d_t) / (a2 * lead2 * (n + 3))
            target, key = S, n + 2
        if not math.isfinite(val):
            raise OverflowError(
                f"series coefficient {'U' if key % 2 == 0 else 'S'}_{key} is not "
                f"representable (Ntilde={n_t!r}, Dtilde={d_t!r})")
        logger.debug("n=%d Ntilde=%r Dtilde=%r -> coef[%d]=%r", n, n_t, d_t, key, val)
        target[key] = val
    return SeriesCoefficients(params, n_max, U, S)


def _parts(coeffs: SeriesCoefficients, xi: float):
    x = math.exp(xi)
    u_terms = [c * x ** n for n, c in sorted(coeffs.U.items()) if n % 2 == 0]
    s_terms = [c * x ** n for n, c in sorted(coeffs.S.items()) if n % 2 == 1]
    return u_terms, s_terms


def evaluate(coeffs: SeriesCoefficients, xi: float) -> tuple[PhaseState, float]:
    """Truncated series at ``xi`` and a tail estimate from the 8^n majorant.

    The tail estimate ``K (8 e^xi)^{N+1} / (1 - 8 e^xi)`` assumes the fitted
    bound ``p_bar_n <= K 8^n`` persists beyond the computed range; it is not
    certified.
    """
    if not xi < XI_MAX_SERIES:
        raise ValueError(f"xi={xi} is outside the convergence region xi < -log 8")
    maj = coeffs.majorant
    if not maj.ok:
        warnings.warn(f"majorant check failed for {coeffs.params}", MajorantWarning,
                      stacklevel=2)
    u_terms, s_terms = _parts(coeffs, xi)
    q = 8 * math.exp(xi)
    tail = maj.K * q ** (coeffs.n_max + 1) / (1 - q)
    return PhaseState(xi, math.fsum(u_terms), math.fsum(s_terms)), tail


def evaluate_derivative(coeffs: SeriesCoefficients, xi: float) -> tuple[float, float]:
    """d/dxi of the truncated series."""
    x = math.exp(xi)
    du = math.fsum(n * c * x ** n for n, c in coeffs.U.items() if n % 2 == 0)
    ds = math.fsum(n * c * x ** n for n, c in coeffs.S.items() if n % 2 == 1)
    return du, ds


def psi_antiderivative(coeffs: SeriesCoefficients, zeta: float) -> float:
    """Integral of U_R/2 from 0 to zeta, termwise: U_n zeta^{n+2} / (2(n+2))."""
    return math.fsum(c * zeta ** (n + 2) / (2 * (n + 2))
                     for n, c in coeffs.U.items() if n % 2 == 0)


def tri_catalan(n: int) -> int:
    """Ternary-tree numbers: C_0 = 1, C_{m+1} = sum_{i+j+k=m} C_i C_j C_k."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    c = [1]
    for m in range(n):
        # pair convolution first, then one more factor
        pair = [sum(c[i] * c[k - i] for i in range(k + 1)) for k in range(m + 1)]
        c.append(sum(c[i] * pair[m - i] for i in range(m + 1)))
    return c[n]


@dataclass(frozen=True)
class MajorantResult:
    ok: bool
    K: float
    C: float
    C_bound: float
    rate: float


def apriori_constant(params: ProblemParams) -> float:
    """Constant C(alpha, d) for p_{n+2} <= C * sum p_i p_j p_{n-i-j}, read off the recursion.

    Every convolution in Ntilde, Dtilde is bounded by the trilinear sum
    (p_0 >= 1 pads bilinear and linear terms); index weights i/(n+2+d) and
    i/(n+3) are at most 1.  The extra 1 absorbs the ``1 +`` in p.
    """
    a, d, r = params.alpha, params.d, params.r
    a2 = a * a
    d_part = (1 + 2 + 1 + a2) / a2
    cu = (a2 * d + a * abs(r - 1) + 1 + abs(r + 1) + r) / (a2 * (d + 2)) + d_part
    cs = (a2 + abs(-a * d + a * r - r - 1) + abs(-a * d + a - 1) + r) / (3 * a2) + d_part
    return 1 + max(cu, cs)


def _trilinear(coeffs: SeriesCoefficients, n: int) -> float:
    """sum over i, j, k >= -1, i+j+k = n, all <= n+1, of p_i p_j p_k."""
    terms = []
    for i in range(-1, n + 2):
        for j in range(-1, n + 2):
            k = n - i - j
            if -1 <= k <= n + 1:
                terms.append(coeffs.p(i) * coeffs.p(j) * coeffs.p(k))
    return math.fsum(terms)


def majorant_check(coeffs: SeriesCoefficients) -> MajorantResult:
    """Empirical check of the tri-Catalan majorant argument.

    ``C`` is the smallest constant with p_{n+2} <= C * trilinear(n) for all
    computed n >= 0; it must not exceed the a-priori constant read off the
    recursion.  ``rate`` is the geometric growth of p_bar_n fitted on the last
    quarter of indices and must not exceed 8.  ``K = max p_bar_n / 8^n``.
    """
    N = coeffs.n_max
    C = 0.0
    for n in range(0, N - 1):
        C = max(C, coeffs.p(n + 2) / _trilinear(coeffs, n))
    ns = np.arange(-1, N + 1)
    pb = np.array([coeffs.p_bar[n] for n in ns])
    K = float(np.max(pb / 8.0 ** ns))
    q = max(len(ns) // 4, 2)
    if N >= 2:
        slope = np.polyfit(ns[-q:], np.log(pb[-q:]), 1)[0]
        rate = float(np.exp(slope))
    else:
        rate = 1.0
    bound = apriori_constant(coeffs.params)
    ok = bool(C <= bound and rate <= 8.0)
    return MajorantResult(ok=ok, K=K, C=C, C_bound=bound, rate=rate)
