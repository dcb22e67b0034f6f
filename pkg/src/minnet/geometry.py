"""Scattered data, triangulations and the data convexity test."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .errors import (
    CollinearProjections,
    DegenerateTriangle,
    DuplicateProjection,
    OverlappingTriangles,
    TooFewPoints,
    VertexMismatch,
)

logger = logging.getLogger(__name__)

_REL_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ScatteredData:
    """Points ``(x_i, y_i, z_i)`` with distinct, non-collinear projections."""

    points: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    @property
    def z(self) -> np.ndarray:
        return self.points[:, 2]

    def with_z(self, z) -> "ScatteredData":
        pts = self.points.copy()
        pts[:, 2] = z
        return ScatteredData(pts)


def validate_scattered(raw_points) -> ScatteredData:
    pts = np.array(raw_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise TooFewPoints("points must be a list of [x, y, z] triples")
    n = len(pts)
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if not np.all(np.isfinite(pts)):
        raise TooFewPoints("points must be finite")

    xy = pts[:, :2]
    extent = float(np.max(np.ptp(xy, axis=0)))
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    for a, b in zip(order[:-1], order[1:]):
        if np.linalg.norm(xy[a] - xy[b]) <= _REL_EPS * max(extent, 1.0):
            i, j = sorted((int(a), int(b)))
            raise DuplicateProjection(i, j)
    # near-duplicates that the lexicographic sweep can miss
    if n <= 2000:
        d = np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() <= _REL_EPS * max(extent, 1.0):
            i, j = np.unravel_index(np.argmin(d), d.shape)
            raise DuplicateProjection(*sorted((int(i), int(j))))

    sv = np.linalg.svd(xy - xy.mean(axis=0), compute_uv=False)
    if sv[1] <= 1e-12 * sv[0]:
        raise CollinearProjections("all (x, y) projections lie on one line")
    return ScatteredData(pts)


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Triangles over the projected points plus the derived edge set.

    Edges are stored as sorted pairs ``(i, j)`` with ``i < j`` in lexicographic
    order; ``edge_triangles[k]`` lists the triangles adjacent to edge ``k``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray = field(init=False)
    lengths: np.ndarray = field(init=False)
    edge_triangles: tuple = field(init=False)
    _edge_lookup: dict = field(init=False, repr=False)

    def __post_init__(self):
        adj: dict[tuple[int, int], list[int]] = {}
        for t, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                adj.setdefault(key, []).append(t)
        keys = sorted(adj)
        edges = np.array(keys, dtype=int).reshape(-1, 2)
        lengths = np.linalg.norm(self.vertices[edges[:, 1]] - self.vertices[edges[:, 0]], axis=1)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "edge_triangles", tuple(tuple(adj[k]) for k in keys))
        object.__setattr__(self, "_edge_lookup", {k: e for e, k in enumerate(keys)})

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, i: int, j: int) -> int:
        return self._edge_lookup[(min(i, j), max(i, j))]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_lookup

    def is_interior(self, e: int) -> bool:
        return len(self.edge_triangles[e]) == 2

    def neighbors(self, i: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(int(b))
            elif b == i:
                out.append(int(a))
        return out

    def boundary_vertices(self) -> set[int]:
        out: set[int] = set()
        for e, (a, b) in enumerate(self.edges):
            if not self.is_interior(e):
                out.update((int(a), int(b)))
        return out

    def has_triangle(self, i: int, j: int, k: int) -> bool:
        key = sorted((i, j, k))
        return any(sorted(t) == key for t in self.triangles.tolist())


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    tris = np.array(triangles, dtype=int).copy()
    for t in tris:
        if _orient(*vertices[t]) < 0:
            t[1], t[2] = t[2], t[1]
    return tris


def _incircle(a, b, c, d) -> float:
    m = np.array([
        [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
        [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
        [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
    ])
    return float(np.linalg.det(m))


def _break_cocircular_ties(vertices: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Flip diagonals of co-circular quads so the lexicographically smaller one wins."""
    scale = float(np.max(np.ptp(vertices, axis=0))) ** 4
    tris = [list(map(int, t)) for t in tris]
    for _ in range(10 * len(tris) + 10):
        tri = Triangulation(vertices, np.array(tris))
        flipped = False
        for e, (i, j) in enumerate(tri.edges):
            if not tri.is_interior(e):
                continue
            t1, t2 = tri.edge_triangles[e]
            k = next(v for v in tris[t1] if v not in (i, j))
            l = next(v for v in tris[t2] if v not in (i, j))
            a, b, c = tris[t1]
            if abs(_incircle(vertices[a], vertices[b], vertices[c], vertices[l])) > 1e-10 * scale:
                continue
            if tuple(sorted((k, l))) >= (int(i), int(j)):
                continue
            # the flipped quad must stay convex
            if _orient(vertices[k], vertices[l], vertices[i]) * _orient(vertices[k], vertices[l], vertices[j]) >= 0:
                continue
            tris[t1] = [k, l, int(i)]
            tris[t2] = [l, k, int(j)]
            tris = _ccw(vertices, np.array(tris)).tolist()
            flipped = True
            break
        if not flipped:
            break
    return np.array(tris, dtype=int)


def _delaunay(data: ScatteredData) -> np.ndarray:
    tris = Delaunay(data.xy).simplices
    tris = _ccw(data.xy, tris)
    return _break_cocircular_ties(data.xy, tris)


def _lower_hull(data: ScatteredData) -> np.ndarray:
    pts = data.points
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # coplanar lift: every triangulation is convex, use Delaunay
        return _delaunay(data)
    span = float(np.ptp(pts[:, 2]))
    tol = 1e-12 * max(span, 1.0)
    lower = hull.simplices[hull.equations[:, 2] < -tol]
    return _ccw(data.xy, lower)


def _triangles_overlap(p: np.ndarray, q: np.ndarray, tol: float) -> bool:
    # separating axis test on the six edge normals
    for poly in (p, q):
        for k in range(3):
            d = poly[(k + 1) % 3] - poly[k]
            axis = np.array([-d[1], d[0]])
            axis /= np.linalg.norm(axis)
            pp = p @ axis
            qq = q @ axis
            if pp.max() <= qq.min() + tol or qq.max() <= pp.min() + tol:
                return False
    return True


def _validate_triangles(data: ScatteredData, triangles) -> np.ndarray:
    tris = np.array(triangles, dtype=int)
    if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
        raise DegenerateTriangle("triangles must be a non-empty list of index triples")
    n = data.n
    if tris.min() < 0 or tris.max() >= n:
        raise VertexMismatch("triangle index out of range")
    xy = data.xy
    extent = float(np.max(np.ptp(xy, axis=0)))
    for t in tris:
        if len(set(t.tolist())) < 3:
            raise DegenerateTriangle(f"triangle {t.tolist()} repeats a vertex")
        if abs(_orient(*xy[t])) <= 1e-12 * extent**2:
            raise DegenerateTriangle(f"triangle {t.tolist()} has zero area")
    used = set(tris.ravel().tolist())
    if used != set(range(n)):
        missing = sorted(set(range(n)) - used)
        raise VertexMismatch(f"vertices {missing} are not used by any triangle")

    lo = np.array([xy[t].min(axis=0) for t in tris])
    hi = np.array([xy[t].max(axis=0) for t in tris])
    tol = 1e-10 * extent
    for a, b in combinations(range(len(tris)), 2):
        if np.any(lo[a] >= hi[b] - tol) or np.any(lo[b] >= hi[a] - tol):
            continue
        if _triangles_overlap(xy[tris[a]], xy[tris[b]], tol):
            raise OverlappingTriangles(f"triangles {tris[a].tolist()} and {tris[b].tolist()} overlap")
    return tris


def _warn_nonconvex_domain(data: ScatteredData, tris: np.ndarray) -> None:
    area = sum(abs(_orient(*data.xy[t])) / 2 for t in tris)
    hull_area = ConvexHull(data.xy).volume
    if area < hull_area * (1 - 1e-9):
        logger.warning("triangulated domain is not convex (area %.6g < hull area %.6g)", area, hull_area)


def build_triangulation(data: ScatteredData, triangles=None, method: str = "delaunay") -> Triangulation:
    """Return the triangulation of the projected points.

    With ``triangles=None`` the Delaunay triangulation is computed
    (``method="lower_hull"`` instead projects the lower convex hull of the
    lifted points, which is the triangulation that makes convex data convex).
    User triangles are validated and returned as given, up to orientation.
    """
    if triangles is None:
        if method == "delaunay":
            tris = _delaunay(data)
        elif method == "lower_hull":
            tris = _lower_hull(data)
        else:
            raise ValueError(f"unknown triangulation method {method!r}")
        tris = _validate_triangles(data, tris)
    else:
        tris = _validate_triangles(data, triangles)
    _warn_nonconvex_domain(data, tris)
    return Triangulation(data.xy.copy(), _ccw(data.xy, tris))


@dataclass
class ConvexityReport:
    is_convex: bool
    is_strictly_convex: bool
    offending_edges: list
    gradient_jumps: dict
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "is_convex": self.is_convex,
            "is_strictly_convex": self.is_strictly_convex,
            "offending_edges": [list(e) for e in self.offending_edges],
            "gradient_jumps": [[i, j, v] for (i, j), v in sorted(self.gradient_jumps.items())],
            "tolerance": self.tolerance,
        }


def plane_gradient(xy: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Gradient of the affine function through three points."""
    m = np.array([xy[1] - xy[0], xy[2] - xy[0]])
    return np.linalg.solve(m, [z[1] - z[0], z[2] - z[0]])


def check_convexity(data: ScatteredData, tri: Triangulation) -> ConvexityReport:
    """Compare the two triangle planes of the linear interpolant across every interior edge.

    The jump is ``(g2 - g1) . n`` where ``n`` is the unit edge normal pointing
    from the first adjacent triangle into the second; convexity requires it to
    be non-negative everywhere.
    """
    xy, z = data.xy, data.z
    zmax = float(np.max(np.abs(z)))
    tol = 1e-10 * zmax / float(np.min(tri.lengths))
    jumps = {}
    offending = []
    for e, (i, j) in enumerate(tri.edges):
        if not tri.is_interior(e):
            continue
        t1, t2 = (tri.triangles[t] for t in tri.edge_triangles[e])
        g1 = plane_gradient(xy[t1], z[t1])
        g2 = plane_gradient(xy[t2], z[t2])
        d = xy[j] - xy[i]
        normal = np.array([-d[1], d[0]]) / np.linalg.norm(d)
        k2 = next(v for v in t2 if v not in (i, j))
        if normal @ (xy[k2] - xy[i]) < 0:
            normal = -normal
        jump = float((g2 - g1) @ normal)
        jumps[(int(i), int(j))] = jump
        if jump < -tol:
            offending.append((int(i), int(j)))
    is_convex = not offending
    strict = is_convex and all(v > tol for v in jumps.values())
    return ConvexityReport(is_convex, strict, offending, jumps, tol)
