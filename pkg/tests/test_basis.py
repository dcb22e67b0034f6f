import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minnet.basis import build_basic_networks, build_vertex_star, data_functionals, solve_lambda, solve_window
from minnet.errors import SingularWindow
from minnet.geometry import build_triangulation, validate_scattered
from minnet.synthetic import random_convex_instance

from oracles import PYRAMID, S3, simpson


def _pyramid():
    data = validate_scattered(PYRAMID)
    return data, build_triangulation(data)


def _random(seed, n=None):
    rng = np.random.default_rng(seed)
    return random_convex_instance(rng, n or int(rng.integers(4, 11)))


def test_apex_star_degree_and_angles():
    _, tri = _pyramid()
    star = build_vertex_star(tri, 3)
    assert star.degree == 3
    cosines = [star.directions[a] @ star.directions[b] for a, b in ((0, 1), (1, 2), (2, 0))]
    np.testing.assert_allclose(cosines, -0.5, atol=1e-14)


@given(seed=st.integers(0, 10**6))
def test_clockwise_order(seed):
    data, tri = _random(seed)
    for i in range(tri.n_vertices):
        star = build_vertex_star(tri, i)
        d = star.directions
        for r in range(star.degree - 1):
            # consecutive outgoing directions turn clockwise (negative cross product)
            assert d[r, 0] * d[r + 1, 1] - d[r, 1] * d[r + 1, 0] < 0


def test_single_triangle_has_no_windows():
    data = validate_scattered([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    tri = build_triangulation(data)
    assert build_vertex_star(tri, 0).degree == 2
    assert build_basic_networks(data, tri) == []


def test_fan_of_five_has_three_windows():
    ang = 2 * np.pi * np.arange(5) / 5 + 0.1
    pts = [[0, 0, 0]] + [[np.cos(a), np.sin(a), 1.0] for a in ang]
    data = validate_scattered(pts)
    tri = build_triangulation(data, [[0, 1 + r, 1 + (r + 1) % 5] for r in range(5)])
    star = build_vertex_star(tri, 0)
    assert star.degree == 5 and star.n_windows == 3
    assert [B.window for B in build_basic_networks(data, tri) if B.vertex == 0] == [1, 2, 3]


def test_apex_lambda_is_one_third():
    _, tri = _pyramid()
    np.testing.assert_allclose(solve_lambda(build_vertex_star(tri, 3), 1), [1 / 3] * 3, atol=1e-14)


def test_base_vertex_lambda():
    _, tri = _pyramid()
    star = build_vertex_star(tri, 0)
    angles = np.degrees(np.arctan2(star.directions[:, 1], star.directions[:, 0]))
    np.testing.assert_allclose(angles, [60, 30, 0], atol=1e-12)
    # direct 3x3 solve oracle
    u = np.array([[0.5, S3 / 2], [S3 / 2, 0.5], [1.0, 0.0]])
    oracle = np.linalg.solve(np.vstack([u.T, np.ones(3)]), [0, 0, 1])
    np.testing.assert_allclose(oracle, [2 + S3, -3 - 2 * S3, 2 + S3], rtol=1e-13)
    np.testing.assert_allclose(solve_lambda(star, 1), oracle, rtol=1e-13)


@pytest.mark.parametrize(
    "u",
    [
        [[1, 0], [-1, 0], [1, 0]],
        [[1, 0], [1, 0], [0, 1]],
        [[1, 0], [-1, 0], [0, 1]],
        [[0, 1], [1, 0], [-1, -1]],
    ],
)
def test_window_singularity_matches_rank_oracle(u):
    u = np.array(u, dtype=float)
    u /= np.linalg.norm(u, axis=1)[:, None]
    m = np.vstack([u.T, np.ones(3)])
    if np.linalg.matrix_rank(m) < 3:
        with pytest.raises(SingularWindow):
            solve_window(u)
    else:
        lam = solve_window(u)
        np.testing.assert_allclose(m @ lam, [0, 0, 1], atol=1e-14)


def test_pyramid_functionals():
    data, tri = _pyramid()
    basics = build_basic_networks(data, tri)
    assert len(basics) == 4
    d = {B.vertex: B.d for B in basics}
    assert d[3] == pytest.approx(S3 / 2, abs=1e-14)
    for v in range(3):
        assert d[v] == pytest.approx((3 * S3 + 6) / 2, abs=1e-13)


@given(seed=st.integers(0, 10**6))
def test_window_identities(seed):
    data, tri = _random(seed)
    for B in build_basic_networks(data, tri):
        u = tri.vertices[list(B.targets)] - tri.vertices[B.vertex]
        u /= np.linalg.norm(u, axis=1)[:, None]
        assert abs(B.lambdas.sum() - 1) <= 1e-12
        np.testing.assert_allclose(B.lambdas @ u, 0, atol=1e-12)
        assert abs(B.lambdas[0]) > 1e-10
        # linear piece: lambda_r at the vertex, 0 at the far end
        for r in range(3):
            slope, icpt = B.on_edge(r)
            c = B.lengths[r]
            at_vertex, far = (icpt, slope * c + icpt) if B.starts[r] else (slope * c + icpt, icpt)
            assert at_vertex == pytest.approx(B.lambdas[r], abs=1e-13)
            assert far == pytest.approx(0.0, abs=1e-13)


@given(seed=st.integers(0, 10**6))
def test_gram_matrix_positive_definite(seed):
    data, tri = _random(seed)
    basics = build_basic_networks(data, tri)
    if not basics:
        return
    G = np.zeros((len(basics), len(basics)))
    for k, Bk in enumerate(basics):
        for l, Bl in enumerate(basics):
            pk, pl = Bk.pieces(), Bl.pieces()
            for e in set(pk) & set(pl):
                (sk, bk), (sl, bl) = pk[e], pl[e]
                G[k, l] += simpson(lambda t: (sk * t + bk) * (sl * t + bl), tri.lengths[e])
    np.testing.assert_allclose(G, G.T, atol=1e-14)
    assert np.linalg.eigvalsh(G).min() > 0


@given(seed=st.integers(0, 10**6), shift=st.floats(-100, 100), scale=st.floats(0.01, 100))
def test_functionals_shift_and_scale(seed, shift, scale):
    data, tri = _random(seed)
    d0 = data_functionals(build_basic_networks(data, tri))
    d1 = data_functionals(build_basic_networks(data.with_z(data.z + shift), tri))
    d2 = data_functionals(build_basic_networks(data.with_z(scale * data.z), tri))
    tol = 1e-9 * (1 + abs(shift)) * max(1.0, np.abs(d0).max(initial=0))
    np.testing.assert_allclose(d1, d0, atol=tol)
    np.testing.assert_allclose(d2, scale * d0, rtol=1e-11, atol=1e-12 * scale)


@given(seed=st.integers(0, 10**6), gx=st.floats(-10, 10), gy=st.floats(-10, 10), z0=st.floats(-10, 10))
def test_affine_data_zero_functionals(seed, gx, gy, z0):
    data, tri = _random(seed)
    z = gx * data.xy[:, 0] + gy * data.xy[:, 1] + z0
    d = data_functionals(build_basic_networks(data.with_z(z), tri))
    np.testing.assert_allclose(d, 0, atol=1e-10 * (1 + abs(gx) + abs(gy) + abs(z0)))
