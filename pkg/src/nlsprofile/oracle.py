"""Independent verification kernels.

The exact series solver here works on the *un-inverted* quadratic system

    U' + U U' - a S S' = -r U - U^2 + a S^2
    S' + U S' + a S U' = -r S - U S - a d U S

as formal power series in e^xi, solving for one unknown coefficient at a
time by exploiting that the residual is affine in it.  It shares no code
with the cubic recursion in :mod:`nlsprofile.series`, which works from the
inverted field D, N_U, N_S.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Mapping

import mpmath

from .core import ProblemParams

Series = Mapping[int, object]


def _as_fraction(x) -> Fraction:
    if isinstance(x, (Fraction, Rational, int, str)):
        return Fraction(x)
    if isinstance(x, float):
        # shortest repr round-trips, so "2.1" rather than the binary expansion
        return Fraction(repr(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


@dataclass(frozen=True)
class RationalParams:
    d: int
    alpha: Fraction
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_fraction(self.alpha))
        object.__setattr__(self, "r", _as_fraction(self.r))
        if self.alpha <= 0 or self.r <= 0 or self.d < 1:
            raise ValueError("need d >= 1, alpha > 0, r > 0")

    @classmethod
    def from_pr(cls, d: int, p, r) -> "RationalParams":
        return cls(d, (_as_fraction(p) - 1) / 4, _as_fraction(r))

    @classmethod
    def from_params(cls, params: ProblemParams) -> "RationalParams":
        return cls.from_pr(params.d, params.p, params.r)


def _conv(a: Series, b: Series, n: int, zero=0):
    """Coefficient of e^{n xi} in the product of two sparse series."""
    out = zero
    for i, ai in a.items():
        bj = b.get(n - i)
        if bj is not None:
            out = out + ai * bj
    return out


def _deriv(a: Series) -> dict:
    return {n: n * v for n, v in a.items()}


def quadratic_residual(U: Series, S: Series, alpha, d, r, order: int, zero=0):
    """Order-``order`` coefficients (E1, E2) of the quadratic system residual.

    Works for any number type supporting + and * (Fraction, float, mpf).
    """
    dU, dS = _deriv(U), _deriv(S)
    n = order
    e1 = (dU.get(n, zero) + _conv(U, dU, n, zero) - alpha * _conv(S, dS, n, zero)
          + r * U.get(n, zero) + _conv(U, U, n, zero) - alpha * _conv(S, S, n, zero))
    e2 = (dS.get(n, zero) + _conv(U, dS, n, zero) + alpha * _conv(S, dU, n, zero)
          + r * S.get(n, zero) + (1 + alpha * d) * _conv(U, S, n, zero))
    return e1, e2


def _solve_affine(residual: Callable[[object], object], zero, one):
    r0 = residual(zero)
    slope = residual(one) - r0
    return -r0 / slope


def solve_series(alpha, d: int, r, n_max: int, zero, one, s_lead=None):
    """Coefficients U_0..U_{n_max} (even), S_{-1}..S_{n_max-1} (odd) in a given number type."""
    if n_max % 2:
        raise ValueError("n_max must be even")
    U: dict = {}
    S: dict = {-1: one if s_lead is None else s_lead}
    for k in range(0, n_max + 1):
        if k % 2 == 0:
            # U_k from the second equation at order k - 1
            def res(x, k=k):
                U[k] = x
                return quadratic_residual(U, S, alpha, d, r, k - 1, zero)[1]
            U[k] = _solve_affine(res, zero, one)
        else:
            # S_k from the first equation at order k - 1
            def res(x, k=k):
                S[k] = x
                return quadratic_residual(U, S, alpha, d, r, k - 1, zero)[0]
            S[k] = _solve_affine(res, zero, one)
    return U, S


def exact_coefficients(rparams: RationalParams, n_max: int):
    """Exact rational ``(U, S)`` dictionaries keyed by exponent."""
    return solve_series(rparams.alpha, rparams.d, rparams.r, n_max,
                        Fraction(0), Fraction(1))


def highprec_coefficients(params: ProblemParams, n_max: int, dps: int = 40):
    """Same recursion in mpmath at ``dps`` digits, for irrational inputs."""
    with mpmath.workdps(dps):
        alpha = (mpmath.mpf(params.p) - 1) / 4
        return solve_series(alpha, params.d, mpmath.mpf(params.r), n_max,
                            mpmath.mpf(0), mpmath.mpf(1))


def exact_field(u, s, rparams: RationalParams):
    """Exact (D, N_U, N_S) from the expanded polynomials."""
    u, s = _as_fraction(u), _as_fraction(s)
    a, d, r = rparams.alpha, rparams.d, rparams.r
    D = (1 + u) ** 2 + a * a * s * s
    NU = -a * a * d * s * s * u - a * (r - 1) * s * s - u * (u + 1) * (r + u)
    NS = (-a * a * s ** 3 + s * u * (-a * d + a * r - r - 1)
          + s * u * u * (-a * d + a - 1) - r * s)
    return D, NU, NS


def tri_catalan_closed_form(n: int) -> int:
    """binom(3n, n) / (2n + 1), computed independently of any recursion."""
    from math import comb
    num = comb(3 * n, n)
    q, rem = divmod(num, 2 * n + 1)
    assert rem == 0
    return q


def fd_jacobian(f: Callable, x, h: float = 1e-6):
    """Central-difference Jacobian of a vector function of a vector."""
    import numpy as np
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.column_stack(cols)
