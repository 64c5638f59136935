import math

import pytest

from nlsprofile.core import new_params
from nlsprofile.integrate import integrate
from nlsprofile.profile import solve_profile
from nlsprofile.series import compute_coefficients


@pytest.fixture(scope="session")
def p3():
    return new_params(3, 3, 2.1)


@pytest.fixture(scope="session")
def coeffs3(p3):
    return compute_coefficients(p3, 40)


@pytest.fixture(scope="session")
def traj3(p3, coeffs3):
    return integrate(p3, coeffs3, -4.0, 36.0, tol=1e-10)


@pytest.fixture(scope="session")
def profile3(p3):
    return solve_profile(p3)


@pytest.fixture(scope="session")
def energy_profile():
    params = new_params(3, 10 / 3, 2.1)
    return params, solve_profile(params, zeta_max=math.exp(14), n_grid=4001)
