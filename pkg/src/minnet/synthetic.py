"""Reference and random test instances.

``pyramid`` is the regular triangular pyramid with the apex below the base
plane. ``random_convex_instance`` samples a positive-definite quadratic at
scattered points. ``planted_instance`` builds data whose minimum ``L_inf``
network is known in advance: the network with ``f'' = C (sum alpha B)_+^0``
for chosen ``alpha`` and ``C``, made smooth and interpolating by adjusting
``alpha``, the vertex gradients and the heights together.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basis import build_basic_networks
from .errors import NotConverged
from .geometry import ScatteredData, Triangulation, build_triangulation, validate_scattered
from .netcore import CurveNetwork, piecewise_constant, reconstruct

logger = logging.getLogger(__name__)


def pyramid() -> tuple[ScatteredData, Triangulation]:
    """Unit equilateral base at height 0, apex over the centroid at height -1/2."""
    s3 = np.sqrt(3.0)
    pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s3 / 2, 0.0], [0.5, s3 / 6, -0.5]]
    data = validate_scattered(pts)
    return data, build_triangulation(data)


def _scattered_xy(rng: np.random.Generator, n: int, min_dist: float = 0.15) -> np.ndarray:
    while True:
        xy = rng.uniform(-1.0, 1.0, (n, 2))
        d = np.linalg.norm(xy[:, None] - xy[None], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() > min_dist:
            return xy


def random_convex_instance(rng: np.random.Generator, n: int):
    """Strictly convex data from a random positive-definite quadratic.

    The triangulation is the projected lower hull, on which the linear
    interpolant of convex data is convex.
    """
    xy = _scattered_xy(rng, n)
    M = rng.normal(size=(2, 2))
    H = M @ M.T + 0.3 * np.eye(2)
    z = 0.5 * np.einsum("ni,ij,nj->n", xy, H, xy) + xy @ rng.normal(size=2) + rng.normal()
    data = validate_scattered(np.column_stack([xy, z]))
    return data, build_triangulation(data, method="lower_hull")


@dataclass
class PlantedInstance:
    data: ScatteredData
    tri: Triangulation
    alpha: np.ndarray
    C: float
    network: CurveNetwork


def _edge_lines(basics, tri, alpha):
    """Per edge ``(slope, intercept)`` of ``sum alpha B`` and the per-basic pieces."""
    E = tri.n_edges
    slope, icpt = np.zeros(E), np.zeros(E)
    ds, db = np.zeros((E, len(basics))), np.zeros((E, len(basics)))
    for k, B in enumerate(basics):
        for r in range(3):
            e = B.edges[r]
            s, b = B.on_edge(r)
            ds[e, k] += s
            db[e, k] += b
    slope, icpt = ds @ alpha, db @ alpha
    return slope, icpt, ds, db


def _edge_integrals(slope, icpt, ds, db, c, C):
    """``int h``, ``int t h`` for ``h = C [s t + b > 0]`` and their alpha-derivatives."""
    E = len(c)
    I0, I1 = np.zeros(E), np.zeros(E)
    dI0, dI1 = np.zeros_like(ds), np.zeros_like(ds)
    knots = np.full(E, np.nan)
    for e in range(E):
        s, b, L = slope[e], icpt[e], c[e]
        v0, v1 = b, s * L + b
        if v0 > 0 and v1 > 0:
            I0[e], I1[e] = C * L, C * L * L / 2
        elif v0 > 0 or v1 > 0:
            t0 = -b / s
            knots[e] = t0
            dt0 = -db[e] / s + b * ds[e] / (s * s)
            if v0 > 0:
                I0[e], I1[e] = C * t0, C * t0 * t0 / 2
                dI0[e], dI1[e] = C * dt0, C * t0 * dt0
            else:
                I0[e], I1[e] = C * (L - t0), C * (L * L - t0 * t0) / 2
                dI0[e], dI1[e] = -C * dt0, -C * t0 * dt0
    return I0, I1, dI0, dI1, knots


def _pattern_ok(slope, icpt, c, knots, margin) -> bool:
    ends = np.column_stack([icpt, slope * c + icpt])
    scale = np.abs(ends).max()
    # edges outside every basic support carry f'' = 0 regardless of alpha
    inner = np.isnan(knots) & np.any(ends != 0.0, axis=1)
    if np.any(np.abs(ends[inner]) < margin * scale):
        return False
    frac = knots[~inner] / c[~inner]
    return bool(np.all((frac > margin) & (frac < 1 - margin)))


def _wheel(rng: np.random.Generator, k: int):
    """A centre vertex joined to ``k`` vertices on the unit circle."""
    while True:
        angles = np.sort(rng.uniform(0.0, 2 * np.pi, k))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        if gaps.min() > 0.5 and gaps.max() < np.pi - 0.5:
            break
    centre = rng.uniform(-0.15, 0.15, 2)
    xy = np.vstack([centre, np.column_stack([np.cos(angles), np.sin(angles)])])
    triangles = [(0, 1 + r, 1 + (r + 1) % k) for r in range(k)]
    flat = validate_scattered(np.column_stack([xy, np.zeros(k + 1)]))
    return flat, build_triangulation(flat, triangles)


def _wheel_start(rng, basics, tri):
    """Positive rim coefficients and a centre combination positive on every spoke."""
    alpha = np.zeros(len(basics))
    centre = [m for m, B in enumerate(basics) if B.vertex == 0]
    for m, B in enumerate(basics):
        if B.vertex != 0:
            alpha[m] = rng.uniform(1.0, 2.0)
    # end values at the centre must satisfy sum w_r u_r = 0; aim for w near 1
    lam = np.zeros((tri.n_vertices - 1, len(centre)))
    spokes = {}
    for col, m in enumerate(centre):
        B = basics[m]
        for r in range(3):
            row = spokes.setdefault(B.edges[r], len(spokes))
            lam[row, col] = B.lambdas[r]
    target = rng.uniform(0.8, 1.2, len(spokes))
    alpha[centre] = np.linalg.lstsq(lam, target, rcond=None)[0]
    if np.any(lam @ alpha[centre] <= 0.1):
        return None
    return alpha


def planted_instance(rng: np.random.Generator, k: int = 6, C: float = 1.0, tol: float = 1e-13,
                     max_tries: int = 100) -> PlantedInstance:
    """Data whose network with ``f'' = C (sum alpha B)_+^0`` is smooth and interpolating.

    Unknowns are ``alpha``, the vertex gradients ``g`` and the heights ``z``.
    Each edge gives two equations, the derivative jump ``u.(g_j - g_i) = int h``
    and the height difference ``z_j - z_i = c u.g_i + int (c - t) h``, and the
    underdetermined system is solved by minimum-norm Gauss-Newton steps.
    ``alpha`` only enters through knot positions, so a solution needs many
    edges whose sign changes inside. The instances are wheels: a centre vertex
    joined to ``k`` vertices on a circle, with ``f'' = C`` on the rim and on the
    inner part of every spoke. Wheels with fewer than five spokes rarely
    admit the pattern, so ``k >= 5`` is required.
    """
    if k < 5:
        raise ValueError(f"planted wheels need k >= 5 spokes, got {k}")
    for _ in range(max_tries):
        flat, tri = _wheel(rng, k)
        basics = build_basic_networks(flat, tri)
        alpha = _wheel_start(rng, basics, tri)
        if alpha is None:
            continue
        try:
            alpha, z = _solve_plant(basics, tri, alpha, C, tol)
        except NotConverged:
            continue
        alpha = alpha / np.max(np.abs(alpha))
        slope, icpt, ds, db = _edge_lines(basics, tri, alpha)
        knots = _edge_integrals(slope, icpt, ds, db, tri.lengths, C)[4]
        if not _pattern_ok(slope, icpt, tri.lengths, knots, 5e-3):
            continue
        data = flat.with_z(z)
        models = []
        for e in range(tri.n_edges):
            L = float(tri.lengths[e])
            v0 = icpt[e]
            if np.isnan(knots[e]):
                level = C if v0 > 0 else 0.0
                models.append(piecewise_constant(0.0, level, level, L))
            elif v0 > 0:
                models.append(piecewise_constant(knots[e], C, 0.0, L))
            else:
                models.append(piecewise_constant(knots[e], 0.0, C, L))
        return PlantedInstance(data, tri, alpha, C, reconstruct(models, data, tri))
    raise NotConverged(f"no planted instance found in {max_tries} attempts")


def _plant_system(basics, tri, x, C):
    n, E, N = tri.n_vertices, tri.n_edges, len(basics)
    c = tri.lengths
    i, j = tri.edges[:, 0], tri.edges[:, 1]
    u = (tri.vertices[j] - tri.vertices[i]) / c[:, None]
    a, g, z = x[:N], x[N:N + 2 * n].reshape(n, 2), x[N + 2 * n:]
    slope, icpt, ds, db = _edge_lines(basics, tri, a)
    I0, I1, dI0, dI1, knots = _edge_integrals(slope, icpt, ds, db, c, C)
    ok = _pattern_ok(slope, icpt, c, knots, 1e-6)
    gi = np.einsum("ij,ij->i", u, g[i])
    gj = np.einsum("ij,ij->i", u, g[j])
    res = np.concatenate([gj - gi - I0, z[j] - z[i] - c * gi - c * I0 + I1])
    J = np.zeros((2 * E, N + 3 * n))
    rows = np.arange(E)
    J[:E, :N] = -dI0
    J[E:, :N] = -c[:, None] * dI0 + dI1
    for d in range(2):
        np.add.at(J, (rows, N + 2 * j + d), u[:, d])
        np.add.at(J, (rows, N + 2 * i + d), -u[:, d])
        np.add.at(J, (E + rows, N + 2 * i + d), -c * u[:, d])
    np.add.at(J, (E + rows, N + 2 * n + j), 1.0)
    np.add.at(J, (E + rows, N + 2 * n + i), -1.0)
    return res, J, ok


def _solve_plant(basics, tri, alpha, C, tol, max_iter=100):
    n, N = tri.n_vertices, len(basics)
    x = np.concatenate([alpha, np.zeros(3 * n)])
    res, J, ok = _plant_system(basics, tri, x, C)
    if not ok:
        raise NotConverged("degenerate sign pattern")
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] < 1e-6 * sv[0]:
        raise NotConverged("pattern leaves the system rank deficient")
    # best heights and gradients for the starting alpha
    x[N:] += np.linalg.lstsq(J[:, N:], -res, rcond=None)[0]
    target = tol * max(1.0, C * float(tri.lengths.max()) ** 2)
    for _ in range(max_iter):
        res, J, ok = _plant_system(basics, tri, x, C)
        rn = float(np.linalg.norm(res))
        if np.max(np.abs(res)) <= target:
            return x[:N], x[N + 2 * n:]
        step = np.linalg.lstsq(J, -res, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            tres, _, tok = _plant_system(basics, tri, x + t * step, C)
            if tok and np.linalg.norm(tres) < (1 - 1e-4 * t) * rn:
                break
            t *= 0.5
        else:
            raise NotConverged("planting stalled")
        x = x + t * step
    raise NotConverged("planting did not converge")
