"""Curve networks with symbolic per-edge second derivatives.

Every edge ``(i, j)`` with ``i < j`` is parametrized from ``V_i`` to ``V_j``
over ``[0, c]``. The outgoing derivative at ``V_j`` is ``-f'(c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .geometry import ScatteredData, Triangulation
from .integrals import ppow_moments


@dataclass(frozen=True)
class Zero:
    kind = "zero"

    def pieces(self, c):
        return []

    def sup(self, c) -> float:
        return 0.0

    def value(self, t) -> float:
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PositivePartPower:
    """``f''(t) = scale * (slope*t + intercept)_+^exponent``."""

    slope: float
    intercept: float
    exponent: float
    scale: float = 1.0

    kind = "positive_part_power"

    def pieces(self, c):
        return [(0.0, c, self.scale, self.slope, self.intercept, self.exponent)]

    def value(self, t) -> float:
        u = self.slope * t + self.intercept
        return self.scale * u**self.exponent if u > 0 else 0.0

    def sup(self, c) -> float:
        if self.exponent == 0:
            return self.scale if max(self.intercept, self.slope * c + self.intercept) > 0 else 0.0
        return max(self.value(0.0), self.value(c))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "slope": self.slope, "intercept": self.intercept, "exponent": self.exponent}
        if self.scale != 1.0:
            out["scale"] = self.scale
        return out


@dataclass(frozen=True)
class PiecewiseConstant:
    """``left`` on ``[0, knot)`` and ``right`` on ``[knot, c]``."""

    knot: float
    left: float
    right: float

    kind = "piecewise_constant"

    def __post_init__(self):
        if self.left < 0 or self.right < 0:
            raise ValueError("piecewise constant second derivative must be non-negative")

    def pieces(self, c):
        out = []
        if self.knot > 0 and self.left > 0:
            out.append((0.0, min(self.knot, c), self.left, 0.0, 1.0, 0.0))
        if self.knot < c and self.right > 0:
            out.append((max(self.knot, 0.0), c, self.right, 0.0, 1.0, 0.0))
        return out

    def value(self, t) -> float:
        return self.left if t < self.knot else self.right

    def sup(self, c) -> float:
        vals = [v for (_, _, v, *_ ) in self.pieces(c)]
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "knot": self.knot, "left": self.left, "right": self.right}


def piecewise_constant(knot: float, left: float, right: float, c: float):
    """Normalized constructor: a knot outside ``(0, c)`` collapses to a single constant."""
    if knot <= 0:
        left = right
        knot = 0.0
    elif knot >= c:
        right = left
        knot = c
    if left == 0 and right == 0:
        return Zero()
    if left == right:
        return PiecewiseConstant(0.0, left, left)
    return PiecewiseConstant(knot, left, right)


def model_from_dict(d: dict):
    kind = d["kind"]
    if kind == "zero":
        return Zero()
    if kind == "positive_part_power":
        return PositivePartPower(float(d["slope"]), float(d["intercept"]), float(d["exponent"]),
                                 float(d.get("scale", 1.0)))
    if kind == "piecewise_constant":
        return PiecewiseConstant(float(d["knot"]), float(d["left"]), float(d["right"]))
    raise ValueError(f"unknown model kind {kind!r}")


def model_moments(model, c: float, lo: float, hi: float, kmax: int = 1, power: float = 1.0) -> np.ndarray:
    """``int_lo^hi f''(s)^power s^k ds`` for ``k = 0..kmax``."""
    out = np.zeros(kmax + 1)
    for plo, phi, scale, slope, intercept, r in model.pieces(c):
        a, b = max(lo, plo), min(hi, phi)
        if b > a:
            out += scale**power * ppow_moments(slope, intercept, r * power, a, b, kmax)
    return out


@dataclass(frozen=True, eq=False)
class CurveNetwork:
    data: ScatteredData
    tri: Triangulation
    models: tuple
    fprime0: np.ndarray

    def edge_data(self, e: int):
        i, j = self.tri.edges[e]
        return int(i), int(j), float(self.tri.lengths[e])

    def fprime_end(self, e: int) -> float:
        c = float(self.tri.lengths[e])
        return float(self.fprime0[e] + model_moments(self.models[e], c, 0.0, c, 0)[0])

    def outgoing_derivative(self, e: int, vertex: int) -> float:
        i, j, _ = self.edge_data(e)
        if vertex == i:
            return float(self.fprime0[e])
        if vertex == j:
            return -self.fprime_end(e)
        raise ValueError(f"vertex {vertex} is not on edge {e}")

    def second_derivative_sup(self) -> np.ndarray:
        return np.array([m.sup(c) for m, c in zip(self.models, self.tri.lengths)])

    def to_dict(self) -> dict:
        return {
            "edges": [
                {
                    "edge": [int(i), int(j)],
                    "length": float(c),
                    "model": m.to_dict(),
                    "fprime0": float(fp),
                }
                for (i, j), c, m, fp in zip(self.tri.edges, self.tri.lengths, self.models, self.fprime0)
            ]
        }


def evaluate(net: CurveNetwork, edge: int, t: float, order: int = 0) -> float:
    """Closed-form ``f``, ``f'`` or ``f''`` on one edge."""
    i, _, c = net.edge_data(edge)
    if not (0.0 <= t <= c * (1 + 1e-12)):
        raise OutOfRange(f"t={t} outside [0, {c}]")
    t = min(t, c)
    model = net.models[edge]
    if order == 2:
        return float(model.value(t))
    m = model_moments(model, c, 0.0, t, 1)
    if order == 1:
        return float(net.fprime0[edge] + m[0])
    if order == 0:
        return float(net.data.z[i] + net.fprime0[edge] * t + t * m[0] - m[1])
    raise ValueError("order must be 0, 1 or 2")


def basic_pieces(B) -> list:
    return [(B.edges[r], *B.on_edge(r)) for r in range(3)]


def inner_product_basic(net: CurveNetwork, B) -> float:
    """``<F'', B>`` summed over the three supporting edges of ``B``."""
    total = 0.0
    for e, slope, intercept in basic_pieces(B):
        c = float(net.tri.lengths[e])
        m = model_moments(net.models[e], c, 0.0, c, 1)
        total += intercept * m[0] + slope * m[1]
    return total


def norms(net: CurveNetwork, p) -> float:
    """``||F''||_p`` for ``1 < p < inf`` or ``p = inf``.

    Every piece is divided by its peak and by the network maximum before
    raising to ``p``, so large ``p`` neither overflows nor underflows to 0.
    """
    top = float(net.second_derivative_sup().max(initial=0.0))
    if math.isinf(p) or top == 0.0:
        return top
    total = 0.0
    for m, c in zip(net.models, net.tri.lengths):
        for lo, hi, scale, slope, intercept, r in m.pieces(float(c)):
            peak = max(slope * lo + intercept, slope * hi + intercept)
            if peak <= 0:
                continue
            amp = scale * peak**r / top
            total += amp**p * ppow_moments(slope / peak, intercept / peak, r * p, lo, hi, 0)[0]
    return float(top * total ** (1.0 / p))


def reconstruct(models, data: ScatteredData, tri: Triangulation) -> CurveNetwork:
    """Pick ``f'(0)`` per edge so that ``f(c) = z_j``."""
    z = data.z
    fp = np.empty(tri.n_edges)
    for e, ((i, j), c) in enumerate(zip(tri.edges, tri.lengths)):
        m = model_moments(models[e], float(c), 0.0, float(c), 1)
        fp[e] = (z[j] - z[i] - (c * m[0] - m[1])) / c
    return CurveNetwork(data, tri, tuple(models), fp)


@dataclass
class ResidualReport:
    smoothness: np.ndarray
    lemma4: np.ndarray
    interpolation: np.ndarray

    def max_abs(self) -> dict:
        return {
            "smoothness": float(np.max(np.abs(self.smoothness), initial=0.0)),
            "lemma4": float(np.max(np.abs(self.lemma4), initial=0.0)),
            "interpolation": float(np.max(np.abs(self.interpolation), initial=0.0)),
        }


def residuals(net: CurveNetwork, basics, data: ScatteredData) -> ResidualReport:
    smooth = np.array([
        sum(B.lambdas[r] * net.outgoing_derivative(B.edges[r], B.vertex) for r in range(3))
        for B in basics
    ])
    lemma4 = np.array([inner_product_basic(net, B) - B.d for B in basics])
    interp = np.zeros(data.n)
    for e in range(net.tri.n_edges):
        i, j, c = net.edge_data(e)
        for v, t in ((i, 0.0), (j, c)):
            dev = evaluate(net, e, t) - data.z[v]
            if abs(dev) > abs(interp[v]):
                interp[v] = dev
    return ResidualReport(smooth, lemma4, interp)
