"""Edge-convex L_p networks parametrized by vertex gradients.

For large ``p`` the coefficient system in ``alpha`` spans hundreds of orders
of magnitude, because ``F'' = (sum alpha B)_+^(1/(p-1))``. This module solves
the same minimization in different unknowns: one gradient vector ``g_v`` per
vertex. The outgoing derivative of edge ``e`` at ``v`` is then ``u_e . g_v``
by construction, so smoothness holds exactly and only the shape of each edge
is left to optimize.

Writing ``f_e'' = h`` on ``[0, c]``, the endpoint derivatives fix the two hat
moments

    m0 = int h (1 - t/c) dt = (z_j - z_i)/c - u . g_i
    m1 = int h t/c dt       = (z_i - z_j)/c + u . g_j

and the best edge is ``h = (l0 (1 - t/c) + l1 t/c)_+^(1/(p-1))``, found by a
one-dimensional root solve. The network norm ``(sum_e int h_e^p)^(1/p)`` is a
smooth convex function of ``g`` with closed-form gradient and Hessian, and is
minimized by damped Newton with a logarithmic barrier keeping every moment
positive.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linprog
from scipy.special import beta as beta_fn

from .errors import MaxIterationsExceeded
from .integrals import ppow_moments
from .netcore import PositivePartPower, reconstruct

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeShape:
    """Minimizer of ``int h^p`` on one edge for given hat moments.

    ``h = Y * uhat_lin^(1/k)`` with ``k = p - 1`` where ``uhat_lin`` is linear
    with end values ``uhat`` and ``max h / Y = 1``. ``rho_hat`` is
    ``int (h/Y)^p`` and ``kinv`` the inverse of ``int uhat_+^(1/k - 1) phi phi^T``
    for the hat functions ``phi``.
    """

    Y: float
    uhat: np.ndarray
    rho_hat: float
    kinv: np.ndarray


def _mid_ends(sigma: float, k: float) -> tuple[float, float]:
    # h stays positive on the whole edge; h/Y is sigma (or 2 - sigma) at the low end
    if sigma <= 1.0:
        return 1.0, sigma**k
    return (2.0 - sigma) ** k, 1.0


def _mid_theta(sigma: float, k: float, c: float) -> float:
    u0, u1 = _mid_ends(sigma, k)
    m = ppow_moments((u1 - u0) / c, u0, 1.0 / k, 0.0, c, 1)
    return m[1] / (c * m[0])


def edge_shape(m0: float, m1: float, c: float, p: float) -> EdgeShape | None:
    """Optimal edge for moments ``(m0, m1)``; ``None`` unless both are positive."""
    if not (m0 > 0.0 and m1 > 0.0):
        return None
    k = p - 1.0
    r = 1.0 / k
    q = p / k
    theta = m1 / (m0 + m1)
    edge_theta = 1.0 / (r + 2.0)
    if theta < edge_theta or 1.0 - theta < edge_theta:
        # support is [0, tau c] (or its mirror): everything in closed form
        mirror = theta > 0.5
        tau = min((1.0 - theta if mirror else theta) * (r + 2.0), 1.0)
        Y = (m0 + m1) * (r + 1.0) / (c * tau)
        uhat = np.array([1.0, 1.0 - 1.0 / tau])
        b0, b1, b2 = beta_fn(1.0, r), beta_fn(2.0, r), beta_fn(3.0, r)
        k00 = c * tau * (b0 - 2.0 * tau * b1 + tau * tau * b2)
        k01 = c * tau * tau * (b1 - tau * b2)
        k11 = c * tau**3 * b2
        det = c * c * tau**4 * (b0 * b2 - b1 * b1)
        kinv = np.array([[k11, -k01], [-k01, k00]]) / det
        rho_hat = c * tau / (q + 1.0)
        if mirror:
            uhat, kinv = uhat[::-1].copy(), kinv[::-1, ::-1].copy()
        return EdgeShape(Y, uhat, rho_hat, kinv)
    sigma = brentq(lambda s: _mid_theta(s, k, c) - theta, 0.0, 2.0, xtol=1e-15, rtol=1e-15, maxiter=200)
    u0, u1 = _mid_ends(sigma, k)
    slope = (u1 - u0) / c
    m = ppow_moments(slope, u0, r, 0.0, c, 1)
    Y = (m0 + m1) / m[0]
    mm = ppow_moments(slope, u0, r - 1.0, 0.0, c, 2)
    K = np.array([
        [mm[0] - 2.0 * mm[1] / c + mm[2] / c**2, mm[1] / c - mm[2] / c**2],
        [mm[1] / c - mm[2] / c**2, mm[2] / c**2],
    ])
    rho_hat = ppow_moments(slope, u0, q, 0.0, c, 0)[0]
    return EdgeShape(Y, np.array([u0, u1]), rho_hat, np.linalg.inv(K))


@dataclass
class GradientOptions:
    tol: float = 1e-13
    max_iter: int = 200
    barrier: float = 1e-12
    start_barrier: float = 1e-6


class GradientForm:
    """Norm of the best network with prescribed vertex gradients, as a function of them."""

    def __init__(self, data, tri, zscale: float = 1.0):
        self.tri = tri
        self.n = tri.n_vertices
        self.E = tri.n_edges
        self.c = tri.lengths.astype(float)
        self.zscale = zscale
        i, j = tri.edges[:, 0], tri.edges[:, 1]
        u = (tri.vertices[j] - tri.vertices[i]) / self.c[:, None]
        # outward unit direction of each edge at its two ends
        self.dirs = np.stack([u, -u], axis=1)
        z = data.z / zscale
        self.D = np.stack([(z[j] - z[i]) / self.c, (z[i] - z[j]) / self.c], axis=1)
        self.ends = np.asarray(tri.edges)

    def moments(self, g: np.ndarray) -> np.ndarray:
        g = g.reshape(self.n, 2)
        proj = np.stack([
            np.einsum("ij,ij->i", self.dirs[:, 0], g[self.ends[:, 0]]),
            np.einsum("ij,ij->i", self.dirs[:, 1], g[self.ends[:, 1]]),
        ], axis=1)
        return self.D - proj

    def shapes(self, g, p):
        m = self.moments(g)
        out = []
        for e in range(self.E):
            s = edge_shape(m[e, 0], m[e, 1], self.c[e], p)
            if s is None:
                return None, m
            out.append(s)
        return out, m

    def evaluate(self, g, p, mu, ref=1.0, order=2):
        """Barrier objective ``||F''||_p / ref - mu sum log m`` with derivatives.

        ``ref`` keeps the norm term of order one. Returns ``None`` outside the
        open domain where every moment is positive.
        """
        shapes, m = self.shapes(g, p)
        if shapes is None:
            return None
        k = p - 1.0
        logY = np.array([math.log(s.Y) for s in shapes])
        top = logY.max()
        w = np.exp(p * (logY - top)) * np.array([s.rho_hat for s in shapes])
        S = w.sum()
        norm = math.exp(top + math.log(S) / p)
        value = norm / ref - mu * float(np.log(m).sum())
        if order == 0:
            return value, None, None, norm
        N = 2 * self.n
        # with S = sum rho_e: dS/S and d^2S/S, using
        # d rho / dm = p Y^k uhat and d^2 rho / dm^2 = p k Y^(k-1) kinv
        G = np.zeros(N)
        H = np.zeros((N, N))
        grad_bar = np.zeros(N)
        H_bar = np.zeros((N, N))
        for e, s in enumerate(shapes):
            J = self._jac(e)
            G += J.T @ (p * math.exp(k * logY[e] - p * top) / S * s.uhat)
            H += J.T @ (p * k * math.exp((k - 1.0) * logY[e] - p * top) / S * s.kinv) @ J
            grad_bar -= J.T @ (mu / m[e])
            H_bar += J.T @ np.diag(mu / m[e] ** 2) @ J
        scale = norm / (ref * p)
        grad = scale * G + grad_bar
        hess = scale * (H + (1.0 / p - 1.0) * np.outer(G, G)) + H_bar
        return value, grad, hess, norm

    def _jac(self, e: int) -> np.ndarray:
        """``d m_e / d g`` as a 2 x 2n matrix."""
        J = np.zeros((2, 2 * self.n))
        a, b = self.ends[e]
        J[0, 2 * a:2 * a + 2] = -self.dirs[e, 0]
        J[1, 2 * b:2 * b + 2] = -self.dirs[e, 1]
        return J

    def incident(self, v: int):
        return [(e, s) for e, pair in enumerate(self.ends) for s in (0, 1) if pair[s] == v]

    def fit_gradients(self, outgoing) -> np.ndarray:
        """Least-squares ``g_v`` from outgoing derivatives ``outgoing(e, v)`` in data units."""
        g = np.zeros((self.n, 2))
        for v in range(self.n):
            inc = self.incident(v)
            A = np.array([self.dirs[e, s] for e, s in inc])
            b = np.array([outgoing(e, v) / self.zscale for e, _ in inc])
            g[v] = np.linalg.lstsq(A, b, rcond=None)[0]
        return g.ravel()

    def push_inside(self, g: np.ndarray, weight: float = 1e-3) -> np.ndarray:
        """Move each ``g_v`` slightly toward the centre of its feasible polygon.

        ``m_e`` at vertex ``v`` depends on ``g_v`` alone, so strict feasibility
        is a set of independent two-dimensional linear programs.
        """
        g = g.reshape(self.n, 2).copy()
        for v in range(self.n):
            inc = self.incident(v)
            A = np.array([self.dirs[e, s] for e, s in inc])
            b = np.array([self.D[e, s] for e, s in inc])
            big = 10.0 * (np.abs(g[v]).max() + np.abs(b).max() + 1.0)
            lp = linprog([0.0, 0.0, -1.0], A_ub=np.hstack([A, np.ones((len(A), 1))]), b_ub=b,
                         bounds=[(-big, big), (-big, big), (0.0, big)], method="highs")
            if lp.status == 0 and lp.x[2] > 0:
                g[v] = (1.0 - weight) * g[v] + weight * lp.x[:2]
        return g.ravel()


def _newton_step(hess, grad):
    # the Hessian is positive semidefinite; drop directions it cannot resolve
    w, V = np.linalg.eigh(hess)
    floor = 1e-14 * max(w.max(), 1e-300)
    inv = np.where(w > floor, 1.0 / np.maximum(w, floor), 0.0)
    return -V @ (inv * (V.T @ grad))


def minimize_norm(form: GradientForm, g, p, mu, opts: GradientOptions):
    """Damped Newton on the barrier objective at fixed ``p`` and ``mu``.

    Returns ``(g, iterations, decrement)``; the Newton decrement bounds the
    remaining decrease of the objective, relative to the norm at the start.
    """
    first = form.evaluate(g, p, mu, order=0)
    if first is None:
        raise ValueError("starting gradients are outside the domain")
    ref = first[3]
    value, grad, hess, norm = form.evaluate(g, p, mu, ref)
    for it in range(opts.max_iter):
        step = _newton_step(hess, grad)
        decrement = -float(grad @ step)
        if decrement <= opts.tol * max(abs(value), 1.0):
            return g, it, decrement
        t = 1.0
        while t > 1e-14:
            trial = form.evaluate(g + t * step, p, mu, ref)
            if trial is not None and trial[0] <= value - 1e-4 * t * decrement:
                break
            t *= 0.5
        else:
            # no measurable decrease left: accept if the model agrees
            if decrement <= 1e3 * opts.tol * max(abs(value), 1.0):
                return g, it, decrement
            raise MaxIterationsExceeded(f"line search failed at p={p:g} (decrement {decrement:.3g})")
        logger.debug("p %g it %d value %.15g decrement %.3e t %.3g", p, it, value, decrement, t)
        g = g + t * step
        value, grad, hess, norm = trial
    raise MaxIterationsExceeded(f"no convergence at p={p:g} within {opts.max_iter} iterations")


def ladder(form: GradientForm, g, p_target, opts: GradientOptions | None = None):
    """Follow ``p = 2, 4, 8, ...`` up to ``p_target``, then tighten the barrier.

    Returns ``(g, total_iterations, final_decrement)``.
    """
    opts = opts or GradientOptions()
    g = form.push_inside(g)
    mu = opts.start_barrier
    p, total = 2.0, 0
    g, it, dec = minimize_norm(form, g, p, mu, opts)
    total += it
    while p < p_target:
        p = min(2.0 * p, p_target)
        g, it, dec = minimize_norm(form, g, p, mu, opts)
        total += it
    while mu > opts.barrier:
        mu = max(mu * 1e-2, opts.barrier)
        g, it, dec = minimize_norm(form, g, p, mu, opts)
        total += it
    return g, total, dec


def edge_multipliers(form: GradientForm, g, p) -> np.ndarray:
    """End values ``(u0, u1)`` per edge with ``f'' = u_+^(1/(p-1))`` in data units."""
    shapes, _ = form.shapes(g, p)
    if shapes is None:
        raise ValueError("gradients are outside the domain")
    k = p - 1.0
    return np.array([(s.Y * form.zscale) ** k * s.uhat for s in shapes])


def network_from_gradients(form: GradientForm, g, p, data, tri):
    """Per-edge optimal shapes for the gradients ``g``, in data units."""
    shapes, _ = form.shapes(g, p)
    if shapes is None:
        raise ValueError("gradients are outside the domain")
    k = p - 1.0
    models = []
    for e, s in enumerate(shapes):
        c = float(form.c[e])
        u0, u1 = s.uhat
        models.append(PositivePartPower((u1 - u0) / c, u0, 1.0 / k, scale=s.Y * form.zscale))
    return reconstruct(models, data, tri)
