"""Edge-convex minimum L_inf networks.

Working with first derivatives ``g_e = f_e'``, the problem becomes: choose
endpoint slopes ``(a_e, b_e)`` on every edge, subject to the linear
smoothness equalities at the vertices, minimizing ``max_e phi_e(a_e, b_e)``
where ``phi_e`` is the smallest sup-norm of ``g_e'`` over monotone profiles
with those endpoints and integral ``A_e = z_j - z_i``. The per-edge minimizer
is piecewise linear with at most one knot, so the resulting network is a
quadratic spline with at most one knot on every edge.

Each ``phi_e <= t`` is a pair of rotated second-order cone constraints
``(b - a)^2 <= 2 t (A - a c)`` and ``(b - a)^2 <= 2 t (b c - A)``, so the
minimax problem is solved exactly as an SOCP. A projected subgradient method
is kept as an alternative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import least_squares, linprog

from .basis import build_basic_networks, data_functionals
from .errors import Infeasible, NonConvexData, NotConverged
from .geometry import check_convexity
from .integrals import ppow_moments
from .netcore import PiecewiseConstant, Zero, piecewise_constant, reconstruct, residuals

logger = logging.getLogger(__name__)

_FEAS_REL = 1e-12


@dataclass(frozen=True)
class UnivariateMinProfile:
    """Monotone piecewise linear ``g`` on ``[0, c]`` with ``g(0)=a, g(c)=b, int g = A``."""

    a: float
    b: float
    c: float
    A: float
    knot: float
    flat_side: str
    norm: float

    def value(self, t: float) -> float:
        a, b, c, t0 = self.a, self.b, self.c, self.knot
        if self.norm == 0.0:
            return a
        if self.flat_side == "left":
            return a if t <= t0 else a + (t - t0) * (b - a) / (c - t0)
        if self.flat_side == "right":
            return a + t * (b - a) / t0 if t <= t0 else b
        return a + t * (b - a) / c

    def second_derivative_model(self):
        """Model of ``g'``, the second derivative of the network edge."""
        if self.norm == 0.0:
            return Zero()
        if self.flat_side == "left":
            return piecewise_constant(self.knot, 0.0, self.norm, self.c)
        if self.flat_side == "right":
            return piecewise_constant(self.knot, self.norm, 0.0, self.c)
        return PiecewiseConstant(0.0, self.norm, self.norm)


def _check_feasible(a, b, c, A):
    if c <= 0:
        raise Infeasible("edge length must be positive")
    scale = max(abs(a) * c, abs(b) * c, abs(A), 1e-300)
    if a == b or abs(b - a) * c <= _FEAS_REL * scale:
        if abs(A - a * c) > 1e-9 * scale:
            raise Infeasible(f"constant profile a=b={a} cannot have integral {A}")
        return True
    if a > b:
        raise Infeasible("profile must be increasing (a <= b)")
    if not (a * c < A < b * c):
        raise Infeasible(f"integral {A} outside ({a * c}, {b * c})")
    return False


def univariate_min(a: float, b: float, c: float, A: float) -> UnivariateMinProfile:
    """Monotone profile with the smallest sup-norm derivative for given endpoints and integral."""
    if _check_feasible(a, b, c, A):
        return UnivariateMinProfile(a, b, c, A, 0.0, "none", 0.0)
    mid = (a + b) * c / 2
    if abs(A - mid) <= 1e-14 * max(abs(a) * c, abs(b) * c, abs(A)):
        return UnivariateMinProfile(a, b, c, A, 0.0, "none", (b - a) / c)
    if A <= mid:
        t0 = ((a + b) * c - 2 * A) / (b - a)
        return UnivariateMinProfile(a, b, c, A, t0, "left", (b - a) ** 2 / (2 * (A - a * c)))
    t0 = 2 * (b * c - A) / (b - a)
    return UnivariateMinProfile(a, b, c, A, t0, "right", (b - a) ** 2 / (2 * (b * c - A)))


def phi(a: float, b: float, c: float, A: float) -> float:
    if _check_feasible(a, b, c, A):
        return 0.0
    w = (b - a) ** 2 / 2
    return max(w / (A - a * c), w / (b * c - A))


def phi_gradient(a, b, c, A) -> tuple[float, float]:
    """Gradient of the active branch of ``phi`` in ``(a, b)``."""
    if _check_feasible(a, b, c, A):
        return 0.0, 0.0
    w = b - a
    lo, hi = A - a * c, b * c - A
    if lo <= hi:
        return -w / lo + c * w * w / (2 * lo * lo), w / lo
    return -w / hi, w / hi - c * w * w / (2 * hi * hi)


@dataclass
class DerivativeEndpoints:
    a: np.ndarray
    b: np.ndarray
    A: np.ndarray
    c: np.ndarray

    def phis(self) -> np.ndarray:
        return np.array([phi(*v) for v in zip(self.a, self.b, self.c, self.A)])

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("a", "b", "A", "c")}


@dataclass
class Certified:
    C: float
    alpha: np.ndarray
    residual: float
    status = "Certified"


@dataclass
class NotRepresentable:
    reason: str
    status = "NotRepresentable"


@dataclass
class NotAttempted:
    status = "NotAttempted"


@dataclass
class LinfOptions:
    tol: float = 1e-9
    method: str = "socp"
    max_iter: int = 50_000
    stall_iter: int = 200
    certify: bool = True


@dataclass
class LinfSolution:
    endpoints: DerivativeEndpoints
    network: object
    C: float
    certificate: object = field(default_factory=NotAttempted)
    residual_report: object = field(default=None, repr=False)
    iterations: int = 0
    strictly_convex: bool = True


def smoothness_matrix(basics, tri) -> np.ndarray:
    """Rows act on ``x = [a_0..a_{E-1}, b_0..b_{E-1}]``, one row per basic network."""
    E = tri.n_edges
    S = np.zeros((len(basics), 2 * E))
    for k, B in enumerate(basics):
        for r in range(3):
            e = B.edges[r]
            if B.starts[r]:
                S[k, e] += B.lambdas[r]
            else:
                S[k, E + e] -= B.lambdas[r]
    return S


def _socp(S, c, A, tol, margin=0.0):
    """Solve the cone program; ``margin`` keeps both integral gaps strictly positive."""
    import cvxpy as cp

    E = len(c)
    scale = max(float(np.max(np.abs(A / c))), float(np.max(np.abs(A))) / float(np.max(c) ** 2), 1e-300)
    An = A / scale
    a, b, t = cp.Variable(E), cp.Variable(E), cp.Variable()
    y1 = An - cp.multiply(c, a) - margin * c
    y2 = cp.multiply(c, b) - An - margin * c
    w = b - a
    cons = [
        cp.SOC(2 * t + y1, cp.vstack([2 * w, 2 * t - y1]), axis=0),
        cp.SOC(2 * t + y2, cp.vstack([2 * w, 2 * t - y2]), axis=0),
    ]
    if len(S):
        cons.append(S @ cp.hstack([a, b]) == 0)
    prob = cp.Problem(cp.Minimize(t), cons)
    eps = min(tol, 1e-8)
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=eps, tol_gap_rel=eps,
                   tol_feas=eps, max_iter=500)
    except cp.SolverError as exc:
        raise NotConverged(f"SOCP solver failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise NotConverged(f"SOCP status {prob.status}")
    if prob.status == "optimal_inaccurate":
        logger.info("SOCP solved to reduced accuracy")
    return np.asarray(a.value) * scale, np.asarray(b.value) * scale, prob.solver_stats.num_iters or 0


def _polish(S, a, b, c, A):
    """Snap degenerate edges to constant slopes and restore the equalities exactly."""
    E = len(c)
    x = np.concatenate([a, b])
    scale = np.maximum.reduce([np.abs(a) * c, np.abs(b) * c, np.abs(A), np.full(E, 1e-300)])
    degenerate = (b - a) * c <= 1e-9 * scale
    fixed = np.concatenate([degenerate, degenerate])
    x[:E][degenerate] = A[degenerate] / c[degenerate]
    x[E:][degenerate] = A[degenerate] / c[degenerate]
    if len(S) and (~fixed).any():
        free = ~fixed
        rhs = -(S[:, fixed] @ x[fixed]) - S[:, free] @ x[free]
        corr = scipy.linalg.lstsq(S[:, free], rhs, cond=1e-13)[0]
        trial = x.copy()
        trial[free] += corr
        if _all_feasible(trial[:E], trial[E:], c, A):
            x = trial
    if not _all_feasible(x[:E], x[E:], c, A):
        x = np.concatenate([a, b])
    return x[:E], x[E:]


def _branch(a, b, c, A, kind):
    """Value, gradient and Hessian in ``(a, b)`` of one branch ``(b-a)^2 / (2y)``."""
    w = b - a
    if kind == 0:
        y, gy = A - a * c, np.array([-c, 0.0])
    else:
        y, gy = b * c - A, np.array([0.0, c])
    J = np.array([[-1.0, 1.0], gy])
    grad = J.T @ np.array([w / y, -w * w / (2 * y * y)])
    hess = J.T @ np.array([[1 / y, -w / y**2], [-w / y**2, w * w / y**3]]) @ J
    return w * w / (2 * y), grad, hess


def _multipliers_ok(grads, Sf, tol) -> bool:
    """Is there ``mu >= 0, sum mu = 1`` with ``sum mu_j grad_j + Sf^T nu = 0``?"""
    nf, m = grads.shape
    nb = Sf.shape[0]
    # variables: mu (m), nu+ (nb), nu- (nb), slack+ (nf), slack- (nf)
    A_eq = np.zeros((nf + 1, m + 2 * nb + 2 * nf))
    A_eq[:nf, :m] = grads
    A_eq[:nf, m:m + nb] = Sf.T
    A_eq[:nf, m + nb:m + 2 * nb] = -Sf.T
    A_eq[:nf, m + 2 * nb:m + 2 * nb + nf] = np.eye(nf)
    A_eq[:nf, m + 2 * nb + nf:] = -np.eye(nf)
    A_eq[nf, :m] = 1.0
    b_eq = np.zeros(nf + 1)
    b_eq[nf] = 1.0
    cost = np.zeros(A_eq.shape[1])
    cost[m + 2 * nb:] = 1.0
    lp = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return lp.status == 0 and lp.fun <= tol


def _kkt_refine(S, a, b, c, A):
    """Polish an approximate minimax solution to full precision.

    Along some directions ``max phi`` grows only quadratically, so an
    objective accurate to ``eps`` pins the slopes down to ``sqrt(eps)``. For a
    guessed set of active branches we solve the KKT equations of
    ``min t s.t. phi_j <= t, S x = 0`` by Levenberg-Marquardt. The result is
    accepted only if nonnegative multipliers exist and every branch stays
    below ``t``, which by convexity proves global optimality.
    """
    E = len(c)
    x = np.concatenate([a, b])
    scale = np.maximum.reduce([np.abs(a) * c, np.abs(b) * c, np.abs(A), np.full(E, 1e-300)])
    free_edges = np.where((b - a) * c > 1e-9 * scale)[0]
    if len(free_edges) == 0:
        return a, b
    nfe = len(free_edges)
    fidx = np.concatenate([free_edges, E + free_edges])
    nf = 2 * nfe
    Sf = S[:, fidx] if len(S) else np.zeros((0, nf))
    nb = Sf.shape[0]
    branches = [(k, e, kind) for k, e in enumerate(free_edges) for kind in (0, 1)]
    vals = np.array([_branch(a[e], b[e], c[e], A[e], kind)[0] for _, e, kind in branches])
    C0 = float(vals.max())
    if C0 <= 0:
        return a, b

    def kkt(zvec, act):
        m = len(act)
        xf, t, mu, nu = zvec[:nf], zvec[nf], zvec[nf + 1:nf + 1 + m], zvec[nf + 1 + m:]
        xx = x.copy()
        xx[fidx] = xf
        n = len(zvec)
        r_stat = Sf.T @ nu
        J_stat = np.zeros((nf, n))
        J_stat[:, nf + 1 + m:] = Sf.T
        r_act = np.zeros(m)
        J_act = np.zeros((m, n))
        for j, (k, e, kind) in enumerate(act):
            v, g, h = _branch(xx[e], xx[E + e], c[e], A[e], kind)
            ii = [k, nfe + k]
            r_stat[ii] += mu[j] * g
            J_stat[np.ix_(ii, ii)] += mu[j] * h
            J_stat[ii, nf + 1 + j] = g
            r_act[j] = v - t
            J_act[j, ii] = g
            J_act[j, nf] = -1.0
        J_norm = np.zeros((1, n))
        J_norm[0, nf + 1:nf + 1 + m] = 1.0
        J_eq = np.zeros((nb, n))
        J_eq[:, :nf] = Sf
        r = np.concatenate([r_stat, [mu.sum() - 1.0], r_act, S @ xx if nb else np.zeros(0)])
        return r, np.vstack([J_stat, J_norm, J_act, J_eq]), xx

    tried = set()
    for tau in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        act = [br for br, v in zip(branches, vals) if v >= C0 * (1 - tau)]
        key = tuple((e, kind) for _, e, kind in act)
        if key in tried:
            continue
        tried.add(key)
        m = len(act)
        G = np.zeros((nf + 1, m + nb))
        for j, (k, e, kind) in enumerate(act):
            g = _branch(a[e], b[e], c[e], A[e], kind)[1]
            G[[k, nfe + k], j] = g
            G[nf, j] = 1.0
        G[:nf, m:] = Sf.T
        rhs = np.zeros(nf + 1)
        rhs[nf] = 1.0
        z0 = np.concatenate([x[fidx], [C0], np.linalg.lstsq(G, rhs, rcond=None)[0]])
        try:
            with np.errstate(all="ignore"):
                sol = least_squares(lambda v: kkt(v, act)[0], z0, jac=lambda v: kkt(v, act)[1],
                                    method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except (ValueError, np.linalg.LinAlgError):
            continue
        _, _, xx = kkt(sol.x, act)
        t = sol.x[nf]
        aa, bb = xx[:E], xx[E:]
        if not np.all(np.isfinite(xx)) or not _all_feasible(aa, bb, c, A):
            continue
        obj = _objective(aa, bb, c, A)
        if obj > t * (1 + 1e-12) or obj > C0 * (1 + 1e-9):
            continue
        if nb and np.max(np.abs(S @ xx)) > 1e-12 * max(np.max(np.abs(xx)), 1.0):
            continue
        grads = np.zeros((nf, m))
        for j, (k, e, kind) in enumerate(act):
            grads[[k, nfe + k], j] = _branch(aa[e], bb[e], c[e], A[e], kind)[1]
        if not _multipliers_ok(grads, Sf, 1e-8 * max(np.max(np.abs(grads)), 1.0)):
            continue
        return aa, bb
    logger.info("KKT refinement failed; keeping the interior-point solution")
    return a, b


def _all_feasible(a, b, c, A) -> bool:
    try:
        for v in zip(a, b, c, A):
            phi(*v)
    except Infeasible:
        return False
    return True


def _objective(a, b, c, A) -> float:
    try:
        return max((phi(*v) for v in zip(a, b, c, A)), default=0.0)
    except Infeasible:
        return math.inf


def _interior_start(x, c, A):
    E = len(c)
    a, b = x[:E].copy(), x[E:].copy()
    for e in range(E):
        lo, hi = A[e] / c[e], None
        if a[e] < b[e]:
            span = b[e] - a[e]
            if a[e] * c[e] >= A[e]:
                a[e] = A[e] / c[e] - 1e-6 * span
            if b[e] * c[e] <= A[e]:
                b[e] = A[e] / c[e] + 1e-6 * span
    return np.concatenate([a, b])


def _subgradient(S, x0, c, A, opts):
    E = len(c)
    if len(S):
        N = scipy.linalg.null_space(S)
    else:
        N = np.eye(2 * E)
    x = x0.copy()
    f = _objective(x[:E], x[E:], c, A)
    best_x, best_f = x.copy(), f
    last_improve, k = best_f, 0
    f_target = 0.0
    for k in range(1, opts.max_iter + 1):
        phis = np.array([phi(*v) for v in zip(x[:E], x[E:], c, A)])
        e = int(np.argmax(phis))
        g = np.zeros(2 * E)
        g[e], g[E + e] = phi_gradient(x[e], x[E + e], c[e], A[e])
        gy = N.T @ g
        gn = float(gy @ gy)
        if gn == 0.0:
            break
        step = (f - f_target) / gn if f > f_target else 1.0 / k
        d = -N @ gy
        while True:
            trial = x + step * d
            ft = _objective(trial[:E], trial[E:], c, A)
            if ft < math.inf:
                break
            step *= 0.5
        x, f = trial, ft
        if f < best_f:
            best_x, best_f = x.copy(), f
        if f_target >= best_f:
            # the estimated optimum was too optimistic; restart below the best value
            f_target = 0.5 * (f_target + best_f) if f_target < best_f else 0.9 * best_f
        if k % opts.stall_iter == 0:
            if last_improve - best_f < 1e-9 * max(abs(last_improve), 1e-300):
                return best_x, k
            last_improve = best_f
            f_target = 0.5 * (f_target + best_f)
            x = best_x.copy()
            f = best_f
    raise NotConverged(
        f"subgradient method stopped after {k} iterations",
        best=best_x,
        gap=last_improve - best_f,
    )


def minimax_solve(data, tri, basics, opts: LinfOptions | None = None):
    """Endpoint slopes minimizing ``max_e phi_e`` under the smoothness equalities.

    Returns ``(endpoints, C, iterations)``.
    """
    opts = opts or LinfOptions()
    E = tri.n_edges
    c = tri.lengths.astype(float)
    z = data.z
    A = np.array([z[j] - z[i] for i, j in tri.edges], dtype=float)
    S = smoothness_matrix(basics, tri)

    if opts.method == "socp":
        # On sliver edges the integral gap y is tiny and the cone slack of the
        # solver turns into a large error in w^2 / 2y, so the returned point
        # can even be infeasible. Small margins keep y away from zero; the
        # best refined candidate by the true objective wins.
        best, iters = None, 0
        for margin in (0.0, 1e-10, 1e-8):
            try:
                a, b, it = _socp(S, c, A, opts.tol, margin)
            except NotConverged as exc:
                logger.info("SOCP with margin %g failed: %s", margin, exc)
                continue
            iters += it
            a, b = _polish(S, a, b, c, A)
            if not _all_feasible(a, b, c, A):
                logger.info("SOCP solution with margin %g is infeasible", margin)
                continue
            a, b = _kkt_refine(S, a, b, c, A)
            obj = _objective(a, b, c, A)
            if best is None or obj < best[0]:
                best = (obj, a, b)
        if best is None:
            raise NotConverged("no feasible SOCP solution")
        _, a, b = best
    elif opts.method == "subgradient":
        from .lp_solver import solve_lp

        lp = solve_lp(data, tri, 2.0, check_convex=False, basics=basics)
        x0 = np.concatenate([
            lp.network.fprime0,
            [lp.network.fprime_end(e) for e in range(E)],
        ])
        x, iters = _subgradient(S, _interior_start(x0, c, A), c, A, opts)
        a, b = x[:E], x[E:]
    else:
        raise ValueError(f"unknown minimax method {opts.method!r}")

    a, b = _polish(S, a, b, c, A)
    ends = DerivativeEndpoints(a, b, A, c)
    try:
        C = float(np.max(ends.phis(), initial=0.0))
    except Infeasible as exc:
        raise NotConverged(f"minimax iterate left the feasible region: {exc}") from exc
    return ends, C, iters


def build_linf_network(endpoints: DerivativeEndpoints, data, tri):
    models = [
        univariate_min(a, b, c, A).second_derivative_model()
        for a, b, c, A in zip(endpoints.a, endpoints.b, endpoints.c, endpoints.A)
    ]
    return reconstruct(models, data, tri)


def _edge_pattern(model, c):
    """``(kind, knot)`` with kind in zero/full/left/right; left means active on ``[0, knot)``."""
    if isinstance(model, Zero):
        return "zero", None, 0.0
    left, right, t0 = model.left, model.right, model.knot
    if 0.0 < t0 < c and left != right:
        if left == 0.0:
            return "right", t0, right
        if right == 0.0:
            return "left", t0, left
        return "mixed", t0, max(left, right)
    v = left if t0 >= c else right
    return ("full" if v > 0 else "zero"), None, v


def basis_step_moments(basics, alpha, C, n_edges):
    """``int_E C (sum alpha B)_+^0 B_k`` for every basic network ``k``."""
    from .lp_solver import _System

    system = _System(basics)
    out = np.zeros(len(basics))
    for m, e in enumerate(system.edges):
        slope, intercept = system.linear(alpha, m)
        mom = ppow_moments(slope, intercept, 0.0, 0.0, system.lengths[e], 1)
        np.add.at(out, system.idx[m], C * (system.intercepts[m] * mom[0] + system.slopes[m] * mom[1]))
    return out


def certificate_theorem3(solution: LinfSolution, basics, tol: float = 1e-7):
    """Try to write the candidate's second derivative as ``C (sum alpha B)_+^0``.

    The sign pattern of ``sum alpha B`` on each edge must reproduce the
    candidate's active set; this is a linear feasibility problem in ``alpha``
    (maximize a uniform margin). The found ``alpha`` is normalized to
    ``max |alpha| = 1`` and the nonlinear system is then checked directly,
    which also yields the recovered ``C`` by least squares.
    """
    net = solution.network
    tri = net.tri
    C = solution.C
    d = data_functionals(basics)
    N = len(basics)
    dscale = max(float(np.max(np.abs(d), initial=0.0)), 1e-300)
    if C <= tol * max(dscale, 1.0):
        if np.max(np.abs(d), initial=0.0) <= tol:
            return Certified(0.0, np.zeros(N), float(np.max(np.abs(d), initial=0.0)))
        return NotRepresentable("zero candidate does not match nonzero data functionals")

    # value of each basic network at both ends of every edge
    ends = np.zeros((tri.n_edges, 2, N))
    for k, B in enumerate(basics):
        for r in range(3):
            e = B.edges[r]
            slope, intercept = B.on_edge(r)
            ends[e, 0, k] += intercept
            ends[e, 1, k] += slope * tri.lengths[e] + intercept

    A_ub, b_ub, A_eq_rows = [], [], []
    for e in range(tri.n_edges):
        c = float(tri.lengths[e])
        kind, t0, value = _edge_pattern(net.models[e], c)
        if kind == "mixed":
            return NotRepresentable(f"edge {tuple(tri.edges[e])} has two nonzero levels")
        if kind != "zero" and abs(value - C) > tol * C:
            return NotRepresentable(
                f"edge {tuple(tri.edges[e])} has second derivative {value:.6g} strictly between 0 and C={C:.6g}"
            )
        u0, u1 = ends[e, 0], ends[e, 1]
        # rows are "coeffs . alpha + margin_coeff * delta <= 0"
        if kind == "zero":
            A_ub += [np.append(u0, 0.0), np.append(u1, 0.0)]
        elif kind == "full":
            A_ub += [np.append(-u0, 0.0), np.append(-u1, 0.0), np.append(-(u0 + u1), 1.0)]
        else:
            w = t0 / c
            at_knot = (1 - w) * u0 + w * u1
            A_eq_rows.append(at_knot)
            active_end = u0 if kind == "left" else u1
            A_ub.append(np.append(-active_end, 1.0))
    A_ub = np.array(A_ub) if A_ub else np.zeros((0, N + 1))
    b_ub = np.zeros(len(A_ub))
    bounds = [(-1.0, 1.0)] * N + [(None, 1.0)]
    cost = np.zeros(N + 1)
    cost[-1] = -1.0
    lp = None
    if A_eq_rows:
        # exact knots first; the band absorbs knots that are only accurate to solver tolerance
        eq = np.hstack([np.array(A_eq_rows), np.zeros((len(A_eq_rows), 1))])
        lp = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=eq, b_eq=np.zeros(len(eq)), bounds=bounds, method="highs")
        if lp.status != 0 or -lp.fun <= 1e-9:
            band = np.vstack([A_ub, eq, -eq])
            b_band = np.concatenate([b_ub, np.full(2 * len(eq), 1e-9)])
            lp = linprog(cost, A_ub=band, b_ub=b_band, bounds=bounds, method="highs")
    else:
        lp = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if lp.status != 0 or -lp.fun <= 1e-9:
        return NotRepresentable("no coefficients reproduce the candidate's active set")
    alpha = lp.x[:N]
    alpha = alpha / np.max(np.abs(alpha))

    h = basis_step_moments(basics, alpha, 1.0, tri.n_edges)
    C_rec = float(h @ d / (h @ h)) if h @ h > 0 else 0.0
    res = float(np.max(np.abs(C_rec * h - d), initial=0.0))
    if res > tol * max(dscale, 1.0) or C_rec <= 0:
        return NotRepresentable(f"active set matches but the system residual is {res:.3g}")
    return Certified(C_rec, alpha, res)


def solve_linf(data, tri, opts: LinfOptions | None = None, check_convex: bool = True, basics=None) -> LinfSolution:
    opts = opts or LinfOptions()
    report = check_convexity(data, tri)
    if check_convex and not report.is_convex:
        raise NonConvexData(f"data are not convex across edges {report.offending_edges}")
    basics = build_basic_networks(data, tri) if basics is None else basics
    ends, C, iters = minimax_solve(data, tri, basics, opts)
    net = build_linf_network(ends, data, tri)
    sol = LinfSolution(
        endpoints=ends,
        network=net,
        C=C,
        residual_report=residuals(net, basics, data),
        iterations=iters,
        strictly_convex=report.is_strictly_convex,
    )
    if opts.certify:
        sol.certificate = certificate_theorem3(sol, basics)
    return sol
