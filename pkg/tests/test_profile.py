import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.interpolate import CubicHermiteSpline

from nlsprofile.core import new_params
from nlsprofile.integrate import Termination
from nlsprofile.profile import (HANDOVER_ZETA, Profile, S_from_density, density_from_S,
                                geometric_grid, linear_grid, parity_extension_check,
                                physical_fields, quantum_pressure_correction,
                                reconstruct, solve_profile)
from nlsprofile.series import compute_coefficients, evaluate


def test_origin_normalization(profile3, p3):
    _, _, prof = profile3
    assert prof.zeta[0] == pytest.approx(1e-6)
    assert prof.S[0] == pytest.approx(1.0, abs=1e-5)
    slope = prof.U_R[0] / prof.zeta[0]
    assert slope == pytest.approx(p3.u0, rel=1e-5)
    # finite-difference slope from the first two points
    fd = (prof.U_R[1] - prof.U_R[0]) / (prof.zeta[1] - prof.zeta[0])
    assert fd == pytest.approx(-(p3.r - 1) / (p3.alpha * p3.d), rel=1e-5)


def test_positive_density_and_gauge(profile3, p3):
    coeffs, _, prof = profile3
    assert np.all(prof.P > 0)
    assert abs(prof.Psi[0]) < 1e-11
    assert np.allclose(prof.P, density_from_S(prof.S, p3), rtol=1e-15)


def test_tail_rate():
    P = new_params(3, 3, 2.1)
    _, _, prof = solve_profile(P, zeta_max=math.exp(14), n_grid=4001)
    z = prof.zeta
    i = np.searchsorted(z, math.exp(10))
    j = np.searchsorted(z, 2 * z[i])
    zj = z[j]
    uj = np.interp(np.log(2 * z[i]), np.log(z), prof.U_R)
    sj = np.interp(np.log(2 * z[i]), np.log(z), prof.S)
    target = 2 ** -(P.r - 1)
    assert uj / prof.U_R[i] == pytest.approx(target, rel=0.02)
    assert sj / prof.S[i] == pytest.approx(target, rel=0.02)
    assert zj > z[i]


def test_seam(profile3, p3):
    coeffs, traj, _ = profile3
    xs = math.log(HANDOVER_ZETA)
    st, _ = evaluate(coeffs, xs)
    u_interp = CubicHermiteSpline(traj.xi, traj.u, traj.du)(xs)
    assert abs(HANDOVER_ZETA * (st.u_bar - u_interp)) <= 1e-8


def test_psi_quadrature_converges(profile3):
    coeffs, traj, _ = profile3
    zmax = math.exp(traj.xi[-1])
    values = []
    for n in (251, 501, 1001):
        prof = reconstruct(traj, coeffs, geometric_grid(1e-4, zmax, n))
        values.append(prof.Psi[-1])
    e1, e2 = abs(values[0] - values[1]), abs(values[1] - values[2])
    assert e2 <= e1 / 8 or e2 < 1e-13


def test_reconstruct_errors(profile3):
    coeffs, traj, _ = profile3
    with pytest.raises(ValueError):
        reconstruct(traj, coeffs, [1e-3, 1e-3, 1e-2])
    with pytest.raises(ValueError):
        reconstruct(traj, coeffs, [0.2, 0.3])
    with pytest.raises(ValueError):
        reconstruct(traj, coeffs, [1e-3, math.exp(traj.xi[-1] + 1)])
    with pytest.raises(ValueError):
        reconstruct(dataclasses.replace(traj, termination=Termination.DIVERGED), coeffs, [1e-3])


def test_density_unit_point():
    P = new_params(3, 10 / 3, 2.1)
    s1 = 2 * P.r ** (1 - P.alpha) / math.sqrt(P.alpha)
    assert density_from_S(s1, P) == pytest.approx(1.0, rel=1e-14)


def test_density_exact_value():
    P = new_params(3, 3, 2.1)
    # (sqrt(1/2) / (2 sqrt(21/10)))^2 = 5/84
    assert density_from_S(1.0, P) == pytest.approx(float(Fraction(5, 84)), rel=1e-15)


@pytest.mark.parametrize("s", [1e-3, 0.5, 1.0, 7.0])
def test_density_round_trip(s):
    P = new_params(3, 10 / 3, 2.1)
    assert S_from_density(density_from_S(s, P), P) == pytest.approx(s, rel=1e-14)


def test_density_rejects_nonpositive(p3):
    with pytest.raises(ValueError):
        density_from_S(0.0, p3)
    with pytest.raises(ValueError):
        density_from_S(np.array([1.0, -1.0]), p3)


def test_quantum_pressure_scaling(profile3, p3):
    _, _, prof = profile3
    q0 = quantum_pressure_correction(prof, p3, 2.0)
    q1 = quantum_pressure_correction(prof, p3, 3.0)
    factor = math.exp(4 - 2 * p3.r)
    nz = q0 != 0
    assert np.allclose(q1[nz] / q0[nz], factor, rtol=1e-12, atol=0)
    q10 = quantum_pressure_correction(prof, p3, 10.0)
    qz = quantum_pressure_correction(prof, p3, 0.0)
    assert np.all(np.abs(q10) <= np.abs(qz))
    assert np.allclose(q10[nz] / qz[nz], math.exp(10 * (4 - 2 * p3.r)), rtol=1e-12)


def test_quantum_pressure_constant_S(p3):
    z = geometric_grid(1e-3, 10, 200)
    prof = Profile(p3, z, np.zeros_like(z), np.ones_like(z), np.ones_like(z), np.zeros_like(z))
    assert np.max(np.abs(quantum_pressure_correction(prof, p3, 0.0)[2:-2])) <= 1e-8


def test_quantum_pressure_negative_s(profile3, p3):
    with pytest.raises(ValueError):
        quantum_pressure_correction(profile3[2], p3, -1.0)


def test_physical_unit_rescaling(profile3, p3):
    _, _, prof = profile3
    f = physical_fields(prof, p3, 2.0, 1.0)
    assert f.s == 0.0
    assert np.array_equal(f.x, prof.zeta)
    assert np.allclose(f.rho, prof.P / p3.r, rtol=1e-15)
    assert np.allclose(f.psi, prof.Psi / p3.r, rtol=1e-15)


@pytest.mark.parametrize("tau", [1e-2, 0.37])
def test_physical_ansatz_identity(profile3, p3, tau):
    _, _, prof = profile3
    a, r = p3.alpha, p3.r
    f = physical_fields(prof, p3, 1.0, 1.0 - tau)
    assert np.allclose(f.x, tau ** (1 / r) * prof.zeta, rtol=1e-15)
    back = f.rho * tau ** (1 / a - 1 / (a * r)) * r
    assert np.allclose(back, prof.P, rtol=1e-12, atol=0)
    assert f.s == pytest.approx(-math.log(tau) / r, rel=1e-15)
    assert abs(f.psi[0]) <= tau ** (2 / r - 1) / r * 1e-11


def test_physical_rejects_late_time(profile3, p3):
    with pytest.raises(ValueError):
        physical_fields(profile3[2], p3, 1.0, 1.0)


def test_parity(coeffs3, p3):
    assert parity_extension_check(coeffs3)
    assert parity_extension_check(compute_coefficients(p3, 0))
    bad = dataclasses.replace(coeffs3, U={**coeffs3.U, 1: 0.5})
    assert not parity_extension_check(bad)


def test_grids():
    g = geometric_grid(1e-3, 1e3, 7)
    assert np.allclose(np.log10(g), np.arange(-3, 4))
    assert np.allclose(linear_grid(0.5, 1.5, 3), [0.5, 1.0, 1.5])
    with pytest.raises(ValueError):
        Profile(None, np.array([1.0, 0.5]), *(np.zeros(2),) * 4)
