import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minnet.integrals import positive_part_moment, ppow_moments

from oracles import quad_integral


def test_linear_positive_part_times_constant():
    assert positive_part_moment(1, -1, 1, 0, 1, 2) == pytest.approx(0.5, abs=1e-15)


def test_negative_integrand_vanishes():
    assert positive_part_moment(-1, -0.5, 1.7, 2.0, 3.0, 4.0) == 0.0


def test_square_on_unit_interval():
    assert positive_part_moment(1, 0, 2, 0, 1, 1) == pytest.approx(1 / 3, abs=1e-15)


finite = dict(allow_nan=False, allow_infinity=False)


@given(
    slope=st.floats(-5, 5, **finite),
    icpt=st.floats(-3, 3, **finite),
    r=st.floats(0, 4, **finite),
    vs=st.floats(-3, 3, **finite),
    vb=st.floats(-3, 3, **finite),
    c=st.floats(0.1, 3, **finite),
)
def test_matches_quadrature(slope, icpt, r, vs, vb, c):
    def f(t):
        u = slope * t + icpt
        return (u**r if u > 0 else 0.0) * (vs * t + vb)

    brk = [-icpt / slope] if slope != 0 and 0 < -icpt / slope < c else None
    expected = quad_integral(f, 0, c, brk)
    scale = max(1.0, abs(expected), quad_integral(lambda t: abs(f(t)), 0, c, brk))
    assert positive_part_moment(slope, icpt, r, vs, vb, c) == pytest.approx(expected, abs=1e-10 * scale)


@given(
    slope=st.floats(-5, 5, **finite),
    icpt=st.floats(0.01, 3, **finite),
    r=st.floats(-0.9, 3, **finite),
    k=st.integers(0, 2),
)
def test_singular_exponents_match_quadrature(slope, icpt, r, k):
    # negative exponents above -1 stay integrable at the sign change
    c = 1.0
    t_star = -icpt / slope if slope < 0 else np.inf
    hi = min(c, t_star)

    def f(t):
        u = slope * t + icpt
        return u**r * t**k if u > 0 else 0.0

    expected = quad_integral(f, 0, hi)
    got = ppow_moments(slope, icpt, r, 0.0, c, k)[k]
    assert got == pytest.approx(expected, rel=1e-7, abs=1e-10)
