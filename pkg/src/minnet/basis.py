"""Vertex stars, window coefficients and the basic curve networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularWindow, StartEdgeChoiceFailed
from .geometry import ScatteredData, Triangulation

LAMBDA1_MIN = 1e-10
_COND_MAX = 1e12


@dataclass(frozen=True)
class VertexStar:
    """Edges incident to one vertex, listed clockwise from the start edge."""

    vertex: int
    neighbors: tuple
    edges: tuple
    directions: np.ndarray
    offset: int
    is_boundary: bool

    @property
    def degree(self) -> int:
        return len(self.edges)

    @property
    def n_windows(self) -> int:
        return max(self.degree - 2, 0)


@dataclass(frozen=True, eq=False)
class BasicCurveNetwork:
    vertex: int
    window: int
    edges: tuple
    targets: tuple
    lambdas: np.ndarray
    d: float
    lengths: np.ndarray
    # True when the vertex is the low-index end of the edge
    starts: tuple

    @property
    def key(self) -> tuple:
        return (self.vertex, self.window)

    def on_edge(self, r: int) -> tuple[float, float]:
        """Linear piece ``(slope, intercept)`` on supporting edge ``r`` in stored orientation."""
        lam, c = float(self.lambdas[r]), float(self.lengths[r])
        if self.starts[r]:
            return -lam / c, lam
        return lam / c, 0.0

    def pieces(self) -> dict:
        return {self.edges[r]: self.on_edge(r) for r in range(3)}


def _window_matrix(u: np.ndarray) -> np.ndarray:
    return np.vstack([u.T, np.ones(3)])


def solve_window(u: np.ndarray) -> np.ndarray:
    """Solve ``sum lam_r u_r = 0, sum lam_r = 1`` for three unit vectors ``u``."""
    m = _window_matrix(np.asarray(u, dtype=float))
    if np.linalg.cond(m) > _COND_MAX:
        raise SingularWindow("window matrix is numerically singular")
    return np.linalg.solve(m, [0.0, 0.0, 1.0])


def solve_lambda(star: VertexStar, s: int) -> np.ndarray:
    """Coefficients of window ``s`` (1-based) of a vertex star."""
    if not 1 <= s <= star.n_windows:
        raise ValueError(f"window {s} outside 1..{star.n_windows}")
    return solve_window(star.directions[s - 1:s + 2])


def _clockwise(tri: Triangulation, i: int) -> tuple[list[int], np.ndarray]:
    nbrs = tri.neighbors(i)
    vecs = tri.vertices[nbrs] - tri.vertices[i]
    angles = np.arctan2(vecs[:, 1], vecs[:, 0])
    order = np.argsort(-angles, kind="stable")
    return [nbrs[k] for k in order], angles[order]


def _windows_ok(dirs: np.ndarray) -> bool:
    for s in range(len(dirs) - 2):
        try:
            lam = solve_window(dirs[s:s + 3])
        except SingularWindow:
            return False
        if abs(lam[0]) <= LAMBDA1_MIN:
            return False
    return True


def build_vertex_star(tri: Triangulation, i: int) -> VertexStar:
    """Incident edges of vertex ``i`` in clockwise order.

    Boundary vertices start right after the boundary gap so windows never
    wrap across it. Interior vertices try every rotation and keep the first
    one for which every window has a nonzero leading coefficient.
    """
    nbrs, angles = _clockwise(tri, i)
    m = len(nbrs)
    boundary = i in tri.boundary_vertices()
    start = 0
    if boundary:
        for k in range(m):
            a, b = nbrs[k], nbrs[(k + 1) % m]
            turn = (angles[k] - angles[(k + 1) % m]) % (2 * np.pi)
            # a wedge covered by a triangle turns clockwise by less than pi
            if not (tri.has_triangle(i, a, b) and turn < np.pi):
                start = (k + 1) % m
                break
    candidates = [start] if boundary else list(range(m))
    chosen = None
    for off in candidates:
        order = nbrs[off:] + nbrs[:off]
        dirs = _unit_dirs(tri, i, order)
        if m < 3 or _windows_ok(dirs):
            chosen = off
            break
    if chosen is None:
        raise StartEdgeChoiceFailed(i)
    order = nbrs[chosen:] + nbrs[:chosen]
    return VertexStar(
        vertex=i,
        neighbors=tuple(order),
        edges=tuple(tri.edge_id(i, j) for j in order),
        directions=_unit_dirs(tri, i, order),
        offset=chosen,
        is_boundary=boundary,
    )


def _unit_dirs(tri: Triangulation, i: int, order) -> np.ndarray:
    v = tri.vertices[list(order)] - tri.vertices[i]
    return v / np.linalg.norm(v, axis=1)[:, None]


def build_basic_networks(data: ScatteredData, tri: Triangulation) -> list[BasicCurveNetwork]:
    """One basic network per vertex window, ordered by vertex then window."""
    z = data.z
    out = []
    for i in range(tri.n_vertices):
        star = build_vertex_star(tri, i)
        for s in range(1, star.n_windows + 1):
            lam = solve_lambda(star, s)
            edges = star.edges[s - 1:s + 2]
            targets = star.neighbors[s - 1:s + 2]
            lengths = tri.lengths[list(edges)]
            d = float(sum(lam[r] * (z[targets[r]] - z[i]) / lengths[r] for r in range(3)))
            out.append(BasicCurveNetwork(
                vertex=i,
                window=s,
                edges=tuple(edges),
                targets=tuple(targets),
                lambdas=lam,
                d=d,
                lengths=lengths,
                starts=tuple(i < t for t in targets),
            ))
    return out


def data_functionals(basics) -> np.ndarray:
    return np.array([b.d for b in basics], dtype=float)
