import math

import pytest
from hypothesis import given, settings, strategies as st

from nlsprofile.core import (BarrierCondition, admissible_r_interval, classify,
                             new_params)


def test_reference_tuple_derived_values():
    P = new_params(3, 10 / 3, 21 / 10)
    assert P.alpha == pytest.approx(7 / 12, rel=1e-15)
    assert P.gamma == pytest.approx(13 / 6, rel=1e-15)
    assert P.s_c == pytest.approx(9 / 14, rel=1e-14)


def test_mass_critical_boundary():
    assert new_params(1, 5, 2.5).s_c == 0.0


def test_cubic_3d():
    P = new_params(3, 3, 2.1)
    assert P.alpha == 0.5
    assert P.alpha * P.d == 1.5 > P.r - 1
    assert P.s_c == 0.5
    assert P.odd_integer_p
    assert not new_params(3, 10 / 3, 2.1).odd_integer_p


@pytest.mark.parametrize("d,p,r", [(0, 3, 2), (3, 1, 2), (3, 0.5, 2), (3, 3, 0), (3, 3, -1),
                                   (2.5, 3, 2)])
def test_rejects_invalid(d, p, r):
    with pytest.raises(ValueError):
        new_params(d, p, r)


@pytest.mark.parametrize("d,p,r,expected", [
    (3, 10 / 3, 2.1, BarrierCondition.STRICT),
    (3, 3, 2.5, BarrierCondition.DEGENERATE),
    (1, 3, 3, BarrierCondition.VIOLATED),
])
def test_classify(d, p, r, expected):
    v = classify(new_params(d, p, r))
    assert v.barrier_condition is expected


def test_reference_tuple_fully_admissible():
    v = classify(new_params(3, 10 / 3, 2.1))
    assert v.supercritical_mass and v.r_window and v.admissible


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 12), st.floats(1.01, 20), st.floats(0.01, 20))
def test_derived_fields_recompute(d, p, r):
    P = new_params(d, p, r)
    assert P.alpha == (p - 1) / 4
    assert P.gamma == (p + 1) / 2
    assert abs(P.s_c - (d / 2 - 2 / (p - 1))) <= 4 * math.ulp(max(abs(P.s_c), 1.0))
    assert P.alpha > 0


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10), st.floats(1.01, 15))
def test_admissible_interval_iff_supercritical(d, p):
    iv = admissible_r_interval(d, p)
    supercritical = p > 1 + 4 / d
    assert (iv is not None) == supercritical
    if iv is not None:
        lo, hi = iv
        r = (lo + hi) / 2
        v = classify(new_params(d, p, r))
        assert v.admissible
