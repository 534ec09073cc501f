"""File formats: shape JSON, result JSON, CSV tables, SVG renderings, run manifests.

Floats in JSON and CSV are written with 9 significant digits so reruns with
the same inputs produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .geometry import ConvexPolygon, GeometryError, erode, erosion_profile, make_polygon

SIG_DIGITS = 9


class ShapeFileError(ValueError):
    """A shape file that is missing, unparsable or geometrically invalid."""


def fmt(x: float) -> float:
    """Round a float to 9 significant digits (non-finite values unchanged)."""
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def rounded(obj):
    """Recursively round floats (and numpy scalars/arrays) for serialisation."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(rounded(obj), indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row[k] for k in header]
        w.writerow([rounded(v) for v in row])
    Path(path).write_text(buf.getvalue())


# --- shapes --------------------------------------------------------------------

def shape_from_json(data) -> ConvexPolygon:
    try:
        verts = np.asarray(data["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeFileError(f"expected {{\"vertices\": [[x, y], ...]}}: {exc}") from None
    if verts.ndim != 2 or verts.shape[1] != 2 or not np.all(np.isfinite(verts)):
        raise ShapeFileError("vertices must be a list of finite [x, y] pairs")
    try:
        return make_polygon(verts)
    except GeometryError as exc:
        raise ShapeFileError(f"invalid polygon: {exc}") from None


def load_shape(path) -> ConvexPolygon:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ShapeFileError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ShapeFileError(f"{path} is not valid JSON: {exc}") from None
    return shape_from_json(data)


def save_shape(path, P: ConvexPolygon) -> None:
    write_json(path, P.to_json())


def load_fixtures(path) -> list:
    """Fixture file: a list of {"name", "vertices", "p", "avg_dist"} objects.

    Returns ``(name, polygon, p, expected)`` tuples for the verification suite.
    """
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ShapeFileError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ShapeFileError(f"{path} is not valid JSON: {exc}") from None
    if isinstance(data, dict):
        data = data.get("fixtures")
    if not isinstance(data, list):
        raise ShapeFileError("fixture file must hold a list of fixtures")
    out = []
    for i, item in enumerate(data):
        try:
            name = str(item.get("name", f"fixture_{i}"))
            p = float(item["p"])
            expected = float(item["avg_dist"])
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ShapeFileError(f"fixture {i}: needs numeric 'p' and 'avg_dist' ({exc})") from None
        out.append((name, shape_from_json(item), p, expected))
    return out


# --- manifests -----------------------------------------------------------------

@dataclass
class RunManifest:
    """Provenance of one command invocation.

    ``numeric_json`` omits the wall-clock duration so that it can be embedded in
    result files without breaking byte-for-byte reproducibility; the full
    record including the duration is written next to the outputs.
    """

    command: str
    parameters: dict
    seed: int | None
    version: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    duration_s: float | None = None

    def numeric_json(self) -> dict:
        return {"command": self.command, "parameters": self.parameters, "seed": self.seed,
                "version": self.version, "inputs": list(self.inputs), "outputs": list(self.outputs)}

    def to_json(self) -> dict:
        d = self.numeric_json()
        d["duration_s"] = self.duration_s
        return d


# --- SVG -----------------------------------------------------------------------

def _path(P: ConvexPolygon, flip) -> str:
    return " ".join(f"{x:.6f},{y:.6f}" for x, y in (flip(v) for v in P.vertices))


def render_svg(layers, width: int = 600, margin: float = 0.05, title: str = "") -> str:
    """Render polygons into a standalone SVG document.

    ``layers`` is a list of ``(polygon, attrs)`` where attrs is a dict of SVG
    presentation attributes. The viewBox is the bounding box of all layers
    padded by ``margin`` of its larger side; y points up as in the plane.
    """
    polys = [P for P, _ in layers]
    if not polys:
        raise ValueError("nothing to render")
    allv = np.vstack([P.vertices for P in polys])
    lo, hi = allv.min(axis=0), allv.max(axis=0)
    span = float(max(hi - lo))
    pad = margin * span
    x0, y0 = lo[0] - pad, lo[1] - pad
    w, h = hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad
    top = hi[1] + pad

    def flip(v):
        # mirror y within [y0, top] so the viewBox is unchanged
        return v[0], top - v[1] + y0

    height = int(round(width * h / w))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="{x0:.6f} {y0:.6f} {w:.6f} {h:.6f}">']
    if title:
        out.append(f"  <title>{escape(title)}</title>")
    stroke_w = span / 400.0
    for P, attrs in layers:
        a = {"fill": "none", "stroke": "black", "stroke-width": f"{stroke_w:.6g}"}
        a.update(attrs)
        attr = " ".join(f'{k}="{escape(str(v))}"' for k, v in a.items())
        out.append(f'  <polygon points="{_path(P, flip)}" {attr}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def optimization_svg(start: ConvexPolygon, final: ConvexPolygon, levels: int = 5) -> str:
    """Start shape, final shape and ``levels`` erosion level sets of the final shape.

    The level sets sit at t = k * r_in / (levels + 1), k = 1..levels.
    """
    dash = f"{start.diameter / 80:.6g}"
    layers = [(start, {"stroke": "#999999", "stroke-dasharray": dash, "class": "start"}),
              (final, {"stroke": "#1f4e9c", "class": "final"})]
    prof = erosion_profile(final)
    for k in range(1, levels + 1):
        t = k * prof.inradius / (levels + 1)
        E = erode(final, t, prof)
        if E is not None:
            layers.append((E, {"stroke": "#d0602a", "class": f"level-{k}"}))
    return render_svg(layers, title="start (grey), final (blue), erosion level sets (orange)")
