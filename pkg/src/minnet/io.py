"""JSON input, network and report serialization.

Input documents look like ``{"points": [[x, y, z], ...], "triangles": [[i, j, k], ...]}``
with optional 0-based triangles. A network document stores the points, the
triangles and one record per edge::

    {"points": [...], "triangles": [...],
     "edges": [{"edge": [i, j], "length": c, "model": {...}, "fprime0": v}, ...]}

Model records are ``{"kind": "zero"}``,
``{"kind": "positive_part_power", "slope", "intercept", "exponent", "scale"?}``
or ``{"kind": "piecewise_constant", "knot", "left", "right"}``. Floats are
written with ``repr``, the shortest string that parses back to the same
double, so reloading a document reproduces every number exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .geometry import ScatteredData, build_triangulation, validate_scattered
from .netcore import CurveNetwork, model_from_dict


def _read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc


def _plain(obj):
    """Convert numpy containers and scalars into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf or nan
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def parse_input(doc) -> tuple[ScatteredData, list | None]:
    if not isinstance(doc, dict) or "points" not in doc:
        raise InvalidInput('input must be an object with a "points" array')
    data = validate_scattered(doc["points"])
    triangles = doc.get("triangles")
    if triangles is not None:
        triangles = _parse_triangles(triangles, data.n)
    return data, triangles


def _parse_triangles(raw, n: int) -> list:
    try:
        tris = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"triangles must be integer triples: {exc}") from exc
    if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
        raise InvalidInput("triangles must be a non-empty list of [i, j, k]")
    if np.any(tris != np.round(tris)) or tris.min() < 0 or tris.max() >= n:
        raise InvalidInput(f"triangle indices must be integers in [0, {n - 1}]")
    return tris.astype(int).tolist()


def load_input(path) -> tuple[ScatteredData, list | None]:
    return parse_input(_read_json(path))


def load_triangles(path, n: int) -> list:
    """Triangles from a file holding either a bare list or an object with ``"triangles"``."""
    doc = _read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("triangles")
    if doc is None:
        raise InvalidInput(f"{path} has no triangles")
    return _parse_triangles(doc, n)


def network_to_dict(net: CurveNetwork) -> dict:
    out = net.to_dict()
    out["points"] = net.data.points.tolist()
    out["triangles"] = net.tri.triangles.tolist()
    return out


def network_from_dict(doc: dict) -> CurveNetwork:
    try:
        data = validate_scattered(doc["points"])
        tri = build_triangulation(data, doc["triangles"])
        records = {tuple(r["edge"]): r for r in doc["edges"]}
        models, fp = [], np.empty(tri.n_edges)
        for e, (i, j) in enumerate(tri.edges):
            r = records[(int(i), int(j))]
            models.append(model_from_dict(r["model"]))
            fp[e] = float(r["fprime0"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed network document: {exc!r}") from exc
    if len(records) != tri.n_edges:
        raise InvalidInput("network edges do not match its triangulation")
    return CurveNetwork(data, tri, tuple(models), fp)


def load_network(path) -> CurveNetwork:
    doc = _read_json(path)
    if isinstance(doc, dict) and "network" in doc:
        doc = doc["network"]
    return network_from_dict(doc)


@dataclass
class SolveReport:
    """Everything a solve produced, self-contained enough to be re-scored.

    ``residuals`` maps each family to a list; smoothness and lemma4 entries
    follow ``basics`` (vertex and window of every basic network),
    interpolation entries follow the vertices. ``timing_seconds`` is the only
    field that differs between repeated runs.
    """

    p: float
    norm: float
    edges: list
    residuals: dict
    max_residuals: dict
    basics: list
    convexity: dict
    certificate: dict | None
    iterations: int
    final_residual: float | None
    threads: int | None
    network: dict
    timing_seconds: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p"] = "inf" if math.isinf(self.p) else self.p
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "SolveReport":
        try:
            doc = dict(doc)
            doc["p"] = math.inf if doc["p"] == "inf" else float(doc["p"])
            return cls(**doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed solve report: {exc!r}") from exc


def load_report(path) -> SolveReport:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InvalidInput(f"{path} is not a solve report")
    return SolveReport.from_dict(doc)


def edge_summary(net: CurveNetwork) -> list:
    sup = net.second_derivative_sup()
    return [
        {"edge": [i, j], "kind": net.models[e].kind, "sup_f2": float(sup[e])}
        for e, (i, j) in enumerate(net.tri.edges.tolist())
    ]

