import numpy as np
import pytest

from nlsprofile.fd import derivative, fornberg_weights


def test_central_weights():
    w = fornberg_weights(0.0, np.array([-2, -1, 0, 1, 2.0]), 1)
    assert np.allclose(w, [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])
    w2 = fornberg_weights(0.0, np.array([-1, 0, 1.0]), 2)
    assert np.allclose(w2, [1, -2, 1])


def test_polynomial_exact_on_nonuniform_grid():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 2, 40))
    y = x ** 4 - 2 * x ** 3 + x
    assert np.allclose(derivative(y, x), 4 * x ** 3 - 6 * x ** 2 + 1, atol=1e-9)
    assert np.allclose(derivative(y, x, 2), 12 * x ** 2 - 12 * x, atol=1e-7)


def test_fourth_order():
    errs = []
    for n in (51, 101):
        x = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(derivative(np.sin(x), x) - np.cos(x))))
    assert errs[0] / errs[1] > 12


def test_too_few_points():
    with pytest.raises(ValueError):
        derivative(np.ones(4), np.arange(4.0))
