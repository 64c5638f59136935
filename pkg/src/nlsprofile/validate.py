"""Oracle suite: exact-rational and finite-difference cross-checks of the float pipeline."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from . import oracle
from .core import new_params
from .phase import field_terms, jacobian, jacobian_at_origin
from .series import compute_coefficients, tri_catalan


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def run_validation(d: int = 3, p="3", r="21/10", n_max: int = 40, n_field: int = 1000,
                   seed: int = 0) -> dict:
    """Run every oracle check; returns ``{"passed": bool, "checks": [...]}``."""
    rp = oracle.RationalParams.from_pr(d, p, r)
    params = new_params(d, float(Fraction(p)), float(Fraction(r)))
    checks = []

    def add(name, ok, **info):
        checks.append({"name": name, "passed": bool(ok), **info})

    U, S = oracle.exact_coefficients(rp, n_max)
    coeffs = compute_coefficients(params, n_max)
    err = max(max(_rel(coeffs.U[n], float(U[n])) for n in U if U[n] != 0),
              max(_rel(coeffs.S[n], float(S[n])) for n in S if S[n] != 0))
    add("series_vs_exact", err <= 1e-10, max_rel_err=err, tol=1e-10)
    add("normalization", S[-1] == 1 and U[0] == -(rp.r - 1) / (rp.alpha * rp.d),
        U0=str(U[0]))

    exact_res = [oracle.quadratic_residual(U, S, rp.alpha, rp.d, rp.r, k, Fraction(0))
                 for k in range(-3, n_max - 1)]
    add("exact_series_residual_zero", all(e1 == 0 and e2 == 0 for e1, e2 in exact_res),
        orders=f"-3..{n_max - 2}")

    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n_field):
        u = Fraction(rng.randint(-3000, 3000), 1000)
        s = Fraction(rng.randint(0, 3000), 1000)
        if u == -1 and s == 0:
            continue
        ex = oracle.exact_field(u, s, rp)
        fl = field_terms(float(u), float(s), params)
        for a, b in zip(fl, ex):
            if b != 0:
                worst = max(worst, _rel(a, float(b)))
    add("field_vs_exact", worst <= 1e-12, max_rel_err=worst, tol=1e-12)

    J0 = jacobian_at_origin(params)
    add("jacobian_origin", np.allclose(J0, -params.r * np.eye(2), rtol=0, atol=1e-12),
        jacobian=J0.tolist())
    fd_worst = 0.0
    for _ in range(100):
        x = np.array([rng.uniform(-3, 3), rng.uniform(0.05, 3)])
        if np.hypot(x[0] + 1, x[1]) < 0.1:
            continue
        fd = oracle.fd_jacobian(lambda v: np.array(field_terms(v[0], v[1], params)[1:])
                                / field_terms(v[0], v[1], params)[0], x)
        fd_worst = max(fd_worst, float(np.max(np.abs(fd - jacobian(x[0], x[1], params)))))
    add("jacobian_vs_fd", fd_worst <= 1e-6, max_abs_err=fd_worst, tol=1e-6)

    cat_ok = all(tri_catalan(n) == oracle.tri_catalan_closed_form(n) for n in range(21))
    add("tri_catalan_closed_form", cat_ok, n_max=20)
    add("tri_catalan_8n", all(tri_catalan(n) <= 8 ** n for n in range(65)), n_max=64)

    return {"params": {"d": d, "p": str(p), "r": str(r)}, "n_max": n_max,
            "passed": all(c["passed"] for c in checks), "checks": checks}
