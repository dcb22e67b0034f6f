import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minnet.errors import (
    CollinearProjections,
    DegenerateTriangle,
    DuplicateProjection,
    OverlappingTriangles,
    TooFewPoints,
    VertexMismatch,
)
from minnet.geometry import build_triangulation, check_convexity, validate_scattered

from oracles import PYRAMID, S3, circumcircle_contains, plane_gradient_3pt


def _points(seed, n):
    rng = np.random.default_rng(seed)
    while True:
        xy = rng.uniform(-1, 1, (n, 2))
        d = np.linalg.norm(xy[:, None] - xy[None], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() > 0.05:
            return xy


def test_pyramid_points_valid():
    data = validate_scattered(PYRAMID.tolist())
    assert data.n == 4
    np.testing.assert_array_equal(data.points, PYRAMID)


def test_collinear_rejected():
    with pytest.raises(CollinearProjections):
        validate_scattered([[0, 0, 0], [1, 1, 1], [2, 2, 5]])


def test_duplicate_projection_reports_indices():
    with pytest.raises(DuplicateProjection) as err:
        validate_scattered([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 2]])
    assert (err.value.i, err.value.j) == (1, 3)


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        validate_scattered([[0, 0, 0], [1, 0, 0]])


def test_pyramid_delaunay_triangles_and_apex_lengths():
    data = validate_scattered(PYRAMID)
    tri = build_triangulation(data)
    got = {frozenset(t) for t in tri.triangles.tolist()}
    assert got == {frozenset(t) for t in ((0, 1, 3), (1, 2, 3), (2, 0, 3))}
    for e, (i, j) in enumerate(tri.edges):
        expected = S3 / 3 if 3 in (i, j) else 1.0
        assert tri.lengths[e] == pytest.approx(expected, abs=1e-15)


def test_three_points_one_triangle():
    tri = build_triangulation(validate_scattered([[0, 0, 0], [1, 0, 1], [0, 2, 3]]))
    assert len(tri.triangles) == 1
    assert tri.n_edges == 3


def test_repeated_vertex_triangle_rejected():
    data = validate_scattered(PYRAMID)
    with pytest.raises(DegenerateTriangle):
        build_triangulation(data, [[0, 1, 1], [1, 2, 3], [2, 0, 3]])


def test_overlapping_triangles_rejected():
    data = validate_scattered(PYRAMID)
    with pytest.raises(OverlappingTriangles):
        build_triangulation(data, [[0, 1, 2], [0, 1, 3]])


def test_unused_vertex_rejected():
    data = validate_scattered(PYRAMID)
    with pytest.raises(VertexMismatch):
        build_triangulation(data, [[0, 1, 2]])


def test_user_triangles_returned_unchanged_up_to_orientation():
    data = validate_scattered(PYRAMID)
    given_tris = [[0, 3, 1], [1, 3, 2], [2, 3, 0]]
    tri = build_triangulation(data, given_tris)
    assert [set(t) for t in tri.triangles.tolist()] == [set(t) for t in given_tris]


def test_cocircular_square_is_deterministic():
    base = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
    first = build_triangulation(validate_scattered(base)).triangles.tolist()
    for _ in range(3):
        assert build_triangulation(validate_scattered(base)).triangles.tolist() == first
    # the lexicographically smaller diagonal (0, 2) wins over (1, 3)
    edges = build_triangulation(validate_scattered(base)).edges.tolist()
    assert [0, 2] in edges and [1, 3] not in edges


@given(seed=st.integers(0, 10**6), n=st.integers(3, 14))
def test_delaunay_empty_circumcircle(seed, n):
    xy = _points(seed, n)
    tri = build_triangulation(validate_scattered(np.column_stack([xy, np.zeros(n)])))
    for t in tri.triangles:
        a, b, c = xy[t]
        for v in range(n):
            if v not in t:
                assert not circumcircle_contains(a, b, c, xy[v])


@given(seed=st.integers(0, 10**6), n=st.integers(3, 14))
def test_edge_adjacency_counts(seed, n):
    xy = _points(seed, n)
    tri = build_triangulation(validate_scattered(np.column_stack([xy, np.zeros(n)])))
    pairs = [tuple(e) for e in tri.edges.tolist()]
    assert len(pairs) == len(set(pairs))
    expected = set()
    for t in tri.triangles.tolist():
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            expected.add((min(a, b), max(a, b)))
    assert set(pairs) == expected
    # boundary edges lie on the convex hull for a Delaunay triangulation
    for e, adj in enumerate(tri.edge_triangles):
        assert len(adj) in (1, 2)
        assert tri.is_interior(e) == (len(adj) == 2)
    n_boundary = sum(len(a) == 1 for a in tri.edge_triangles)
    assert len(tri.triangles) == 2 * n - 2 - n_boundary


def test_pyramid_convexity_hand_jumps():
    data = validate_scattered(PYRAMID)
    tri = build_triangulation(data)
    rep = check_convexity(data, tri)
    assert rep.is_convex and rep.is_strictly_convex
    # faces have gradients sqrt(3) times the outward base normals; across an
    # apex edge the normal derivative jumps by sqrt(3) * |n_a - n_b| = 3
    for (i, j), jump in rep.gradient_jumps.items():
        assert 3 in (i, j)
        assert jump == pytest.approx(3.0, abs=1e-12)
    faces = [PYRAMID[list(t)] for t in tri.triangles]
    grads = [plane_gradient_3pt(f) for f in faces]
    for g in grads:
        assert np.linalg.norm(g) == pytest.approx(S3, abs=1e-12)


def test_affine_data_convex_not_strict():
    xy = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.4, 0.6]])
    z = 2 * xy[:, 0] - 3 * xy[:, 1] + 1
    data = validate_scattered(np.column_stack([xy, z]))
    rep = check_convexity(data, build_triangulation(data))
    assert rep.is_convex and not rep.is_strictly_convex
    assert rep.offending_edges == []


def test_flipped_apex_not_convex():
    pts = PYRAMID.copy()
    pts[3, 2] = 0.5
    data = validate_scattered(pts)
    rep = check_convexity(data, build_triangulation(data))
    assert not rep.is_convex
    assert sorted(rep.offending_edges) == [(0, 3), (1, 3), (2, 3)]
    for jump in rep.gradient_jumps.values():
        assert jump == pytest.approx(-3.0, abs=1e-12)


@given(seed=st.integers(0, 10**6), n=st.integers(4, 12))
def test_report_invariants(seed, n):
    xy = _points(seed, n)
    z = np.random.default_rng(seed).normal(size=n)
    data = validate_scattered(np.column_stack([xy, z]))
    rep = check_convexity(data, build_triangulation(data))
    assert (not rep.is_strictly_convex) or rep.is_convex
    assert rep.is_convex == (len(rep.offending_edges) == 0)


@given(seed=st.integers(0, 10**6), n=st.integers(4, 12), a=st.floats(0.1, 5), b=st.floats(-3, 3))
def test_isotropic_quadratic_convex_on_delaunay(seed, n, a, b):
    # Delaunay is the projected lower hull of the paraboloid lift
    xy = _points(seed, n)
    z = a * (xy**2).sum(axis=1) + b * xy[:, 0]
    data = validate_scattered(np.column_stack([xy, z]))
    assert check_convexity(data, build_triangulation(data)).is_convex


@given(seed=st.integers(0, 10**6), n=st.integers(4, 12))
def test_any_convex_quadratic_convex_on_lower_hull(seed, n):
    rng = np.random.default_rng(seed)
    xy = _points(seed, n)
    m = rng.normal(size=(2, 2))
    H = m @ m.T + 0.1 * np.eye(2)
    z = 0.5 * np.einsum("ni,ij,nj->n", xy, H, xy)
    data = validate_scattered(np.column_stack([xy, z]))
    tri = build_triangulation(data, method="lower_hull")
    assert check_convexity(data, tri).is_convex
