"""Edge-convex minimum L_p networks for 1 < p < inf.

The second derivative of the minimizer is ``(sum alpha_k B_k)_+^(q-1)`` with
``1/p + 1/q = 1``, where ``alpha`` solves

    R_k(alpha) = int_E (sum alpha B)_+^(q-1) B_k - d_k = 0.

``R`` is the gradient of the convex function
``Phi(alpha) = (1/q) int_E (sum alpha B)_+^q - alpha . d``, and its Jacobian
``(q-1) int_E (sum alpha B)_+^(q-2) B_k B_l`` is symmetric positive
semidefinite. Both are assembled edge by edge from three closed-form moments.

For large ``p`` the entries of ``alpha`` span too many orders of magnitude
for this system, and ``solve_lp`` switches to the vertex-gradient form in
``lp_gradient``, which minimizes the same norm in better scaled unknowns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import build_basic_networks, data_functionals
from .errors import MaxIterationsExceeded, NonConvexData, SingularJacobian
from . import lp_gradient
from .geometry import check_convexity
from .integrals import positive_part_moment, ppow_moments
from .netcore import PositivePartPower, Zero, reconstruct, residuals, norms

logger = logging.getLogger(__name__)

# above this p the coefficient system is badly scaled; see lp_gradient
GRADIENT_FORM_P = 8.0

__all__ = [
    "GRADIENT_FORM_P",
    "LpSolution",
    "NewtonOptions",
    "newton_solve",
    "positive_part_moment",
    "solve_lp",
]


@dataclass
class NewtonOptions:
    tol: float = 1e-10
    max_iter: int = 200
    max_halvings: int = 30
    continuation: bool = True


class _System:
    """Per-edge supports of the basic networks; everything else is derived from alpha."""

    def __init__(self, basics):
        self.n = len(basics)
        self.lengths: dict[int, float] = {}
        support: dict[int, list] = {}
        for k, B in enumerate(basics):
            for r in range(3):
                e = B.edges[r]
                slope, intercept = B.on_edge(r)
                support.setdefault(e, []).append((k, slope, intercept))
                self.lengths[e] = float(B.lengths[r])
        self.edges = sorted(support)
        self.idx = [np.array([k for k, _, _ in support[e]]) for e in self.edges]
        self.slopes = [np.array([s for _, s, _ in support[e]]) for e in self.edges]
        self.intercepts = [np.array([b for _, _, b in support[e]]) for e in self.edges]

    def linear(self, alpha: np.ndarray, m: int) -> tuple[float, float]:
        a = alpha[self.idx[m]]
        return float(a @ self.slopes[m]), float(a @ self.intercepts[m])

    def edge_functions(self, alpha) -> dict:
        return {e: self.linear(alpha, m) for m, e in enumerate(self.edges)}

    def residual(self, alpha, d, q) -> np.ndarray:
        out = -np.asarray(d, dtype=float).copy()
        for m, e in enumerate(self.edges):
            slope, intercept = self.linear(alpha, m)
            mom = ppow_moments(slope, intercept, q - 1.0, 0.0, self.lengths[e], 1)
            np.add.at(out, self.idx[m], self.intercepts[m] * mom[0] + self.slopes[m] * mom[1])
        return out

    def objective(self, alpha, d, q) -> float:
        total = 0.0
        for m, e in enumerate(self.edges):
            slope, intercept = self.linear(alpha, m)
            total += ppow_moments(slope, intercept, q, 0.0, self.lengths[e], 0)[0]
        return total / q - float(alpha @ d)

    def jacobian(self, alpha, q, weight_exponent=None) -> np.ndarray:
        r = q - 2.0 if weight_exponent is None else weight_exponent
        factor = (q - 1.0) if weight_exponent is None else 1.0
        jac = np.zeros((self.n, self.n))
        for m, e in enumerate(self.edges):
            if weight_exponent is None:
                slope, intercept = self.linear(alpha, m)
            else:
                slope, intercept = 0.0, 1.0
            mom = ppow_moments(slope, intercept, r, 0.0, self.lengths[e], 2)
            s, b = self.slopes[m], self.intercepts[m]
            block = (np.outer(s, s) * mom[2] + (np.outer(s, b) + np.outer(b, s)) * mom[1]
                     + np.outer(b, b) * mom[0])
            jac[np.ix_(self.idx[m], self.idx[m])] += factor * block
        return jac

    def gram(self) -> np.ndarray:
        return self.jacobian(None, 2.0, weight_exponent=0.0)


def _solve_psd(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        c = scipy.linalg.cho_factor(jac)
        return scipy.linalg.cho_solve(c, rhs)
    except (np.linalg.LinAlgError, ValueError):
        pass
    mu = 1e-12 * max(np.trace(jac), np.finfo(float).tiny)
    for _ in range(8):
        try:
            c = scipy.linalg.cho_factor(jac + mu * np.eye(len(jac)))
            return scipy.linalg.cho_solve(c, rhs)
        except (np.linalg.LinAlgError, ValueError):
            mu *= 1e3
    raise SingularJacobian("Jacobian is singular after regularization")


def _peak(system: _System, alpha) -> float:
    peak = 0.0
    for m, e in enumerate(system.edges):
        slope, intercept = system.linear(alpha, m)
        peak = max(peak, intercept, slope * system.lengths[e] + intercept)
    return peak


def _rescale(system, alpha, q_from, q_to) -> np.ndarray:
    # match the largest second-derivative value: (k M)^(q_to-1) = M^(q_from-1)
    peak = _peak(system, alpha)
    if peak <= 0:
        return alpha
    return alpha * peak ** ((q_from - 1.0) / (q_to - 1.0) - 1.0)


def _newton(system: _System, d, q, alpha, opts: NewtonOptions):
    """Damped Newton on ``Phi`` with Levenberg-Marquardt safeguarding.

    Where most of ``sum alpha B`` is non-positive the Jacobian is nearly
    singular and the plain Newton step explodes, so a multiple of the identity
    is added and adapted from the agreement between the model and ``Phi``.
    Once ``Phi`` no longer resolves the decrease, the residual 2-norm decides.
    """
    res = system.residual(alpha, d, q)
    phi = system.objective(alpha, d, q)
    mu = 0.0
    n = len(alpha)
    rmax = float(np.max(np.abs(res), initial=0.0))
    for it in range(opts.max_iter + 1):
        rmax = float(np.max(np.abs(res), initial=0.0))
        if rmax <= opts.tol:
            return alpha, it, rmax
        if it == opts.max_iter:
            break
        jac = system.jacobian(alpha, q)
        floor = 1e-12 * max(np.trace(jac) / n, 1e-300)
        rnorm = np.linalg.norm(res)
        for _ in range(opts.max_halvings + 1):
            try:
                step = _solve_psd(jac + mu * np.eye(n), -res)
            except SingularJacobian:
                mu = max(4.0 * mu, floor)
                continue
            pred = float(res @ step + 0.5 * step @ jac @ step)
            trial = alpha + step
            tphi = system.objective(trial, d, q)
            if not np.isfinite(tphi):
                mu = max(4.0 * mu, floor, np.trace(jac) / n)
                continue
            actual = tphi - phi
            resolved = abs(pred) > 1e-13 * (abs(phi) + float(np.abs(alpha) @ np.abs(d)))
            if resolved and actual < 0:
                rho = actual / pred
                if rho > 0.75:
                    mu = mu / 4.0 if mu > floor else 0.0
                elif rho < 0.25:
                    mu = max(2.0 * mu, floor)
                tres = system.residual(trial, d, q)
                break
            if not resolved:
                tres = system.residual(trial, d, q)
                if np.linalg.norm(tres) < rnorm:
                    break
            mu = max(4.0 * mu, floor, 1e-6 * np.trace(jac) / n if mu == 0.0 else 0.0)
        else:
            break
        logger.debug("it %d rmax %.3e mu %.3e phi %.12e", it, rmax, mu, tphi)
        alpha, res, phi = trial, tres, tphi
    raise MaxIterationsExceeded(
        f"Newton did not reach tol={opts.tol:g} (residual {rmax:.3g})", alpha=alpha, residual=rmax
    )


def newton_solve(basics, d, q: float, opts: NewtonOptions | None = None, alpha0=None):
    """Solve the nonlinear system for ``alpha``.

    Returns ``(alpha, iterations, final_residual)``. The start is the solution
    of the Gram system (exact for ``q = 2`` when already nonnegative), scaled
    so that its peak second derivative is preserved for other ``q``. When
    plain Newton stalls and ``opts.continuation`` is set, the exponent is
    approached through ``p = 2, 4, 8, ...``.
    """
    opts = opts or NewtonOptions()
    d = np.asarray(d, dtype=float)
    system = _System(basics)
    if system.n == 0 or np.all(d == 0):
        return np.zeros(system.n), 0, 0.0
    # the solution is homogeneous in d: alpha(s d) = s^(1/(q-1)) alpha(d)
    gram_alpha = _solve_psd(system.gram(), d)
    scale = _peak(system, gram_alpha)
    if not scale > 0:
        scale = float(np.max(np.abs(d)))
    power = 1.0 / (q - 1.0)
    ds = d / scale
    local = NewtonOptions(opts.tol / max(scale, 1.0), opts.max_iter, opts.max_halvings, opts.continuation)
    if alpha0 is None:
        start = _rescale(system, gram_alpha / scale, 2.0, q)
    else:
        start = np.array(alpha0, dtype=float) / scale**power
    try:
        alpha, it, _ = _newton(system, ds, q, start, local)
    except MaxIterationsExceeded:
        if not opts.continuation or q >= 2.0:
            raise
        logger.info("switching to continuation in p for q=%g", q)
        alpha, it = _continuation(system, ds, q, gram_alpha / scale, local)
    alpha = alpha * scale**power
    rmax = float(np.max(np.abs(system.residual(alpha, d, q))))
    return alpha, it, rmax


def _continuation(system, d, q, alpha, opts):
    p_target = q / (q - 1.0)
    p, q_prev, total = 2.0, 2.0, 0
    while p < p_target:
        p = min(2.0 * p, p_target)
        q_k = p / (p - 1.0)
        alpha, it, _ = _newton(system, d, q_k, _rescale(system, alpha, q_prev, q_k), opts)
        total += it
        q_prev = q_k
    return alpha, total


@dataclass
class LpSolution:
    p: float
    q: float
    alpha: np.ndarray
    keys: list
    network: object
    achieved_norm: float
    iterations: int
    final_residual: float
    strictly_convex: bool = True
    residual_report: object = field(default=None, repr=False)


def network_from_alpha(basics, alpha, exponent, data, tri):
    """Reconstruct the network whose second derivative is ``(sum alpha B)_+^exponent``."""
    system = _System(basics)
    funcs = system.edge_functions(np.asarray(alpha, dtype=float)) if system.n else {}
    models = []
    for e in range(tri.n_edges):
        slope, intercept = funcs.get(e, (0.0, 0.0))
        if slope == 0.0 and intercept == 0.0:
            models.append(Zero())
        else:
            models.append(PositivePartPower(slope, intercept, exponent))
    return reconstruct(models, data, tri)


def _alpha_from_multipliers(basics, tri, ends) -> np.ndarray:
    """Least-squares ``alpha`` whose edge restrictions match the multipliers ``ends``."""
    if not basics:
        return np.zeros(0)
    rows = np.zeros((2 * tri.n_edges, len(basics)))
    for k, B in enumerate(basics):
        for r in range(3):
            e = B.edges[r]
            slope, intercept = B.on_edge(r)
            rows[2 * e, k] += intercept
            rows[2 * e + 1, k] += slope * tri.lengths[e] + intercept
    return np.linalg.lstsq(rows, ends.ravel(), rcond=None)[0]


def _solve_gradient_form(data, tri, p, basics, d, opts):
    """Large-``p`` path: start from the ``p = 2`` solution and follow ``p`` upward."""
    alpha2, it2, _ = newton_solve(basics, d, 2.0, opts)
    net2 = network_from_alpha(basics, alpha2, 1.0, data, tri)
    zscale = float(net2.second_derivative_sup().max(initial=0.0))
    if zscale <= 0:
        return alpha2, net2, it2, 0.0
    form = lp_gradient.GradientForm(data, tri, zscale)
    g = form.fit_gradients(net2.outgoing_derivative)
    g, it, decrement = lp_gradient.ladder(form, g, p)
    net = lp_gradient.network_from_gradients(form, g, p, data, tri)
    alpha = _alpha_from_multipliers(basics, tri, lp_gradient.edge_multipliers(form, g, p))
    return alpha, net, it2 + it, decrement


def solve_lp(data, tri, p: float, opts: NewtonOptions | None = None, check_convex: bool = True,
             basics=None, method: str = "auto") -> LpSolution:
    """Edge-convex minimum ``L_p`` network of the second derivative.

    ``method`` is ``"alpha"`` (Newton on the coefficient system),
    ``"gradient"`` (vertex-gradient form) or ``"auto"``, which uses the
    coefficient system up to ``GRADIENT_FORM_P`` and falls back to the
    gradient form when Newton fails. For the gradient form
    ``final_residual`` is the last Newton decrement of the norm and ``alpha``
    a least-squares fit.
    """
    if not 1.0 < p < np.inf:
        raise ValueError("p must satisfy 1 < p < inf")
    if method not in ("auto", "alpha", "gradient"):
        raise ValueError(f"unknown method {method!r}")
    report = check_convexity(data, tri)
    if check_convex and not report.is_convex:
        raise NonConvexData(f"data are not convex across edges {report.offending_edges}")
    if not report.is_strictly_convex:
        logger.warning("data are not strictly convex; the minimizer may not be unique")
    q = p / (p - 1.0)
    basics = build_basic_networks(data, tri) if basics is None else basics
    d = data_functionals(basics)
    # affine data leave only rounding noise in d
    slopes = np.abs(np.diff(data.z[tri.edges], axis=1).ravel()) / tri.lengths
    lam = max((float(np.abs(B.lambdas).sum()) for B in basics), default=0.0)
    if np.max(np.abs(d), initial=0.0) <= 1e-12 * lam * float(slopes.max(initial=0.0)):
        d = np.zeros_like(d)
    use_gradient = method == "gradient" or (method == "auto" and p > GRADIENT_FORM_P)
    net = None
    if not use_gradient:
        try:
            alpha, iterations, final = newton_solve(basics, d, q, opts)
            net = network_from_alpha(basics, alpha, q - 1.0, data, tri)
        except (MaxIterationsExceeded, SingularJacobian) as exc:
            if method == "alpha" or p < 2.0:
                raise
            logger.info("coefficient Newton failed (%s); using the gradient form", exc)
    if net is None:
        alpha, net, iterations, final = _solve_gradient_form(data, tri, p, basics, d, opts)
    return LpSolution(
        p=p,
        q=q,
        alpha=alpha,
        keys=[B.key for B in basics],
        network=net,
        achieved_norm=norms(net, p),
        iterations=iterations,
        final_residual=final,
        strictly_convex=report.is_strictly_convex,
        residual_report=residuals(net, basics, data),
    )
