import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minnet.basis import build_basic_networks, data_functionals
from minnet.errors import NonConvexData
from minnet.geometry import build_triangulation, validate_scattered
from minnet.lp_gradient import edge_shape
from minnet.lp_solver import newton_solve, network_from_alpha, solve_lp
from minnet.netcore import norms, residuals
from minnet.synthetic import random_convex_instance

from oracles import PYRAMID, quad_integral


def _pyramid():
    data = validate_scattered(PYRAMID)
    return data, build_triangulation(data)


def _sup_diff(a, b):
    return max(abs(x - y) for x, y in zip(a.second_derivative_sup(), b.second_derivative_sup()))


def test_pyramid_p2():
    data, tri = _pyramid()
    sol = solve_lp(data, tri, 2.0)
    assert sol.q == 2.0
    assert sol.final_residual < 1e-10
    for v in sol.residual_report.max_abs().values():
        assert v < 1e-9


def test_affine_data_gives_zero_network():
    rng = np.random.default_rng(5)
    data, tri = random_convex_instance(rng, 7)
    data = data.with_z(0.3 * data.xy[:, 0] - 2 * data.xy[:, 1] + 4)
    for p in (1.5, 2.0, 5.0, 20.0):
        sol = solve_lp(data, tri, p)
        assert np.all(sol.alpha == 0)
        assert sol.achieved_norm == 0.0


def test_single_triangle():
    data = validate_scattered([[0, 0, 1], [2, 0, 3], [0, 1, -1]])
    sol = solve_lp(data, build_triangulation(data), 3.0)
    assert sol.alpha.size == 0
    assert sol.achieved_norm == 0.0
    assert np.abs(sol.residual_report.interpolation).max() < 1e-15


def test_rejects_nonconvex_and_bad_p():
    pts = PYRAMID.copy()
    pts[3, 2] = 0.5
    data = validate_scattered(pts)
    tri = build_triangulation(data)
    with pytest.raises(NonConvexData):
        solve_lp(data, tri, 2.0)
    data, tri = _pyramid()
    for p in (1.0, 0.5, np.inf):
        with pytest.raises(ValueError):
            solve_lp(data, tri, p)


def test_network_is_positive_part_power_of_combination():
    data, tri = _pyramid()
    sol = solve_lp(data, tri, 3.0)
    basics = build_basic_networks(data, tri)
    rebuilt = network_from_alpha(basics, sol.alpha, sol.q - 1, data, tri)
    for e in range(tri.n_edges):
        c = tri.lengths[e]
        for t in np.linspace(0, c, 5):
            assert rebuilt.models[e].value(t) == pytest.approx(sol.network.models[e].value(t), abs=1e-12)
            assert sol.network.models[e].value(t) >= 0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 6.0])
def test_system_residual_by_quadrature(p):
    # recompute int (sum alpha B)_+^(q-1) B_kl by adaptive quadrature
    rng = np.random.default_rng(11)
    data, tri = random_convex_instance(rng, 7)
    sol = solve_lp(data, tri, p)
    basics = build_basic_networks(data, tri)
    for B in basics:
        total = 0.0
        for e, (slope, icpt) in B.pieces().items():
            model = sol.network.models[e]
            c = float(tri.lengths[e])
            brk = None
            if getattr(model, "slope", 0.0) != 0.0:
                t0 = -model.intercept / model.slope
                brk = [t0] if 0 < t0 < c else None
            total += quad_integral(lambda t: model.value(t) * (slope * t + icpt), 0, c, brk)
        assert total == pytest.approx(B.d, abs=1e-8 * max(1.0, abs(B.d)))


@settings(max_examples=8)
@given(seed=st.integers(0, 10**6), p=st.sampled_from([1.5, 2.0, 3.0, 4.0]))
def test_smoothness_emerges(seed, p):
    rng = np.random.default_rng(seed)
    data, tri = random_convex_instance(rng, int(rng.integers(4, 10)))
    sol = solve_lp(data, tri, p)
    worst = sol.residual_report.max_abs()
    assert worst["smoothness"] < 1e-8
    assert worst["lemma4"] < 1e-8


@pytest.mark.parametrize("s", [2.0, 10.0])
def test_scaling_z_scales_second_derivative(s):
    rng = np.random.default_rng(21)
    data, tri = random_convex_instance(rng, 8)
    for p in (2.0, 3.0):
        base = solve_lp(data, tri, p).network
        scaled = solve_lp(data.with_z(s * data.z), tri, p).network
        np.testing.assert_allclose(scaled.second_derivative_sup(), s * base.second_derivative_sup(),
                                   rtol=1e-8, atol=1e-10 * s)


def test_restarts_agree():
    rng = np.random.default_rng(4)
    data, tri = random_convex_instance(rng, 8)
    basics = build_basic_networks(data, tri)
    d = data_functionals(basics)
    for p in (2.0, 3.0):
        q = p / (p - 1)
        ref, _, _ = newton_solve(basics, d, q)
        ref_net = network_from_alpha(basics, ref, q - 1, data, tri)
        for k in range(3):
            start = ref + 0.3 * np.abs(ref).max() * rng.normal(size=ref.size)
            alpha, _, res = newton_solve(basics, d, q, alpha0=start)
            assert res < 1e-9
            assert _sup_diff(network_from_alpha(basics, alpha, q - 1, data, tri), ref_net) < 1e-6


def test_gradient_form_agrees_with_coefficient_newton():
    rng = np.random.default_rng(8)
    data, tri = random_convex_instance(rng, 7)
    for p in (3.0, 6.0):
        a = solve_lp(data, tri, p, method="alpha")
        g = solve_lp(data, tri, p, method="gradient")
        assert g.achieved_norm == pytest.approx(a.achieved_norm, rel=1e-8)
        assert _sup_diff(a.network, g.network) < 1e-6 * a.network.second_derivative_sup().max()
        assert g.residual_report.max_abs()["smoothness"] < 1e-8


def test_large_p_solutions_valid():
    rng = np.random.default_rng(9)
    data, tri = random_convex_instance(rng, 8)
    for p in (16.0, 64.0):
        sol = solve_lp(data, tri, p)
        worst = sol.residual_report.max_abs()
        assert worst["smoothness"] < 1e-8 and worst["lemma4"] < 1e-8
        assert sol.achieved_norm == pytest.approx(norms(sol.network, p))


@given(
    m0=st.floats(1e-3, 10),
    m1=st.floats(1e-3, 10),
    c=st.floats(0.2, 3),
    p=st.sampled_from([1.5, 2.0, 4.0, 16.0, 64.0]),
)
def test_edge_shape_reproduces_moments(m0, m1, c, p):
    shape = edge_shape(m0, m1, c, p)
    k = p - 1
    u0, u1 = shape.uhat

    def h(t):
        u = u0 + (u1 - u0) * t / c
        return shape.Y * u ** (1 / k) if u > 0 else 0.0

    brk = None
    if u0 * u1 < 0:
        brk = [c * u0 / (u0 - u1)]
    got0 = quad_integral(lambda t: h(t) * (1 - t / c), 0, c, brk)
    got1 = quad_integral(lambda t: h(t) * t / c, 0, c, brk)
    assert got0 == pytest.approx(m0, rel=1e-8)
    assert got1 == pytest.approx(m1, rel=1e-8)
    assert max(h(0.0), h(c)) == pytest.approx(shape.Y, rel=1e-12)


def test_edge_shape_outside_domain():
    assert edge_shape(0.0, 1.0, 1.0, 3.0) is None
    assert edge_shape(1.0, -1e-9, 1.0, 3.0) is None
