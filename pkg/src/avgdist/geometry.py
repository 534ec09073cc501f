"""Exact convex-polygon primitives.

Everything here works on strictly convex, counterclockwise vertex chains.
Erosion (inner parallel bodies) is computed by translating edge lines
inward; see ``docs/derivations.md`` for the area formula and the
correctness arguments for the distance and Hausdorff routines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

EPS_CONVEX = 1e-12  # cross-product floor, relative to diameter**2
EPS_MERGE = 1e-10  # vertex merge distance, relative to diameter
EPS_EVENT = 1e-12  # simultaneous-collapse window, relative to diameter
MAX_ASPECT = 100.0  # diameter / width cap for generated polygons


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class NotConvex(GeometryError):
    pass


class Degenerate(GeometryError):
    pass


class OutsidePolygon(GeometryError):
    pass


class EmptyOrUnbounded(GeometryError):
    pass


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _shoelace(v: np.ndarray) -> float:
    c = v - v.mean(axis=0)
    w = np.roll(c, -1, axis=0)
    return 0.5 * math.fsum(c[:, 0] * w[:, 1] - c[:, 1] * w[:, 0])


def _max_pairwise(v: np.ndarray) -> float:
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d * d).sum(axis=-1).max()))


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Counterclockwise strictly convex polygon.

    The constructor trusts its input; use :func:`make_polygon` to validate
    arbitrary point lists.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(self.edges[:, 0], self.edges[:, 1])

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals; row k belongs to the edge from vertex k to k+1."""
        e = self.edges / self.edge_lengths[:, None]
        return np.column_stack([e[:, 1], -e[:, 0]])

    @cached_property
    def offsets(self) -> np.ndarray:
        """Support values of the edge lines: the polygon is {x : normals @ x <= offsets}."""
        return np.einsum("ij,ij->i", self.normals, self.vertices)

    @cached_property
    def area(self) -> float:
        return _shoelace(self.vertices)

    @cached_property
    def perimeter(self) -> float:
        return math.fsum(self.edge_lengths)

    @cached_property
    def diameter(self) -> float:
        return _max_pairwise(self.vertices)

    @cached_property
    def width(self) -> float:
        # minimal width of a convex polygon is attained perpendicular to an edge
        depth = self.offsets[:, None] - self.normals @ self.vertices.T
        return float(depth.max(axis=1).min())

    @cached_property
    def centroid(self) -> np.ndarray:
        m = self.vertices.mean(axis=0)
        c = self.vertices - m
        w = np.roll(c, -1, axis=0)
        cr = c[:, 0] * w[:, 1] - c[:, 1] * w[:, 0]
        a = cr.sum() / 2.0
        g = ((c + w) * cr[:, None]).sum(axis=0) / (6.0 * a)
        return g + m

    @cached_property
    def interior_angles(self) -> np.ndarray:
        incoming = np.roll(self.edges, 1, axis=0)
        turn = np.arctan2(_cross(incoming, self.edges), np.einsum("ij,ij->i", incoming, self.edges))
        return math.pi - turn

    def support(self, angles) -> np.ndarray:
        """Support function h(theta) = max_x x . (cos theta, sin theta)."""
        angles = np.asarray(angles, dtype=float)
        u = np.column_stack([np.cos(angles), np.sin(angles)])
        return (u @ self.vertices.T).max(axis=1)

    def scaled(self, r: float, center=(0.0, 0.0)) -> "ConvexPolygon":
        c = np.asarray(center, dtype=float)
        return ConvexPolygon(c + r * (self.vertices - c))

    def translated(self, offset) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(offset, dtype=float))

    def rotated(self, angle: float, center=(0.0, 0.0)) -> "ConvexPolygon":
        c = np.asarray(center, dtype=float)
        ca, sa = math.cos(angle), math.sin(angle)
        rot = np.array([[ca, -sa], [sa, ca]])
        return ConvexPolygon(c + (self.vertices - c) @ rot.T)

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}


@dataclass(frozen=True)
class ShapeMetricReport:
    sym_diff_area: float
    hausdorff: float


def _clean_chain(v: np.ndarray) -> np.ndarray:
    """Merge near-duplicates and elide collinear vertices of a cyclic chain.

    Raises NotConvex on a reflex turn and Degenerate if fewer than three
    vertices survive.
    """
    v = np.asarray(v, dtype=float)
    if len(v) < 3:
        raise Degenerate("need at least 3 distinct points")
    diam = _max_pairwise(v)
    if not np.isfinite(diam) or diam == 0.0:
        raise Degenerate("points coincide")
    merge = EPS_MERGE * diam
    tol = EPS_CONVEX * diam * diam

    keep = []
    for p in v:
        if keep and np.hypot(*(p - keep[-1])) < merge:
            continue
        keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) < merge:
        keep.pop()
    v = np.array(keep)

    while True:
        if len(v) < 3:
            raise Degenerate("fewer than 3 non-collinear points")
        cr = _cross(v - np.roll(v, 1, axis=0), np.roll(v, -1, axis=0) - v)
        if cr.min() < -tol:
            raise NotConvex(f"reflex turn at vertex {int(cr.argmin())}")
        flat = np.abs(cr) <= tol
        if not flat.any():
            return v
        # drop one at a time: removing a vertex changes its neighbours' turns
        v = np.delete(v, int(np.argmin(np.where(flat, np.abs(cr), np.inf))), axis=0)


def make_polygon(points: Sequence[Sequence[float]]) -> ConvexPolygon:
    """Validate a point list as a strictly convex polygon.

    Points are put in counterclockwise angular order about their mean,
    rotated so the first input point stays first when it survives.
    Near-duplicates are merged and collinear points elided.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise Degenerate("need at least 3 two-dimensional points")
    if not np.all(np.isfinite(pts)):
        raise Degenerate("non-finite coordinates")
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]), kind="stable")
    order = np.roll(order, -int(np.flatnonzero(order == 0)[0]))
    return ConvexPolygon(_clean_chain(pts[order]))


def regular_polygon(n: int, circumradius: float = 1.0, rotation: float = 0.0,
                    center=(0.0, 0.0)) -> ConvexPolygon:
    k = np.arange(n)
    a = rotation + 2.0 * np.pi * k / n
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + circumradius * np.column_stack([np.cos(a), np.sin(a)]))


def measures(P: ConvexPolygon):
    """Return ``(area, perimeter, diameter, centroid)``."""
    return P.area, P.perimeter, P.diameter, P.centroid


def signed_depth(P: ConvexPolygon, x) -> np.ndarray:
    """min_k (offset_k - normal_k . x): boundary distance inside, negative outside."""
    x = np.asarray(x, dtype=float)
    return (P.offsets - x @ P.normals.T).min(axis=-1)


def boundary_distance(P: ConvexPolygon, x, tol: float = 1e-12) -> float:
    """dist(x, boundary) for a point of the closed polygon.

    For interior points of a convex polygon the nearest boundary point lies
    on the supporting line that is closest, so the minimum over edge lines is
    exact.
    """
    d = float(signed_depth(P, np.asarray(x, dtype=float)))
    if d < -tol * P.diameter:
        raise OutsidePolygon(f"point {tuple(x)} lies outside by {-d:.3g}")
    return max(d, 0.0)


def point_boundary_distance(P: ConvexPolygon, X) -> np.ndarray:
    """Distance from arbitrary points (inside or outside) to the boundary."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    a = P.vertices
    e = P.edges
    rel = X[:, None, :] - a[None, :, :]
    s = np.clip(np.einsum("mki,ki->mk", rel, e) / (P.edge_lengths ** 2), 0.0, 1.0)
    d = rel - s[..., None] * e[None]
    return np.sqrt((d * d).sum(axis=-1)).min(axis=1)


# --- half-plane intersection -------------------------------------------------

def _lshift(a: np.ndarray, s: int) -> np.ndarray:
    """Cyclic left shift by ``s`` (np.roll(a, -s) for 1-D arrays, without the overhead)."""
    s %= len(a)
    return np.concatenate((a[s:], a[:s])) if s else a


def _line_vertices(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Vertex j = intersection of cyclically consecutive lines j-1 and j."""
    up, hp = np.roll(u, 1, axis=0), np.roll(h, 1)
    det = _cross(up, u)
    x = (hp * u[:, 1] - h * up[:, 1]) / det
    y = (up[:, 0] * h - u[:, 0] * hp) / det
    return np.column_stack([x, y])


def _turns(u: np.ndarray) -> np.ndarray:
    """Counterclockwise angle in [0, 2pi) from normal j-1 to normal j."""
    up = np.roll(u, 1, axis=0)
    return np.mod(np.arctan2(_cross(up, u), np.einsum("ij,ij->i", up, u)), 2 * np.pi)


def _halfplane_polygon(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Vertices of {x : u @ x <= h} for normals in counterclockwise cyclic order.

    A line is redundant exactly when the apex of its two current neighbours
    already satisfies it (the neighbours' cone contains the intersection and
    the line's normal lies inside the apex's normal cone). Non-adjacent
    redundant lines are removed in batches until none is left.
    """
    u = np.asarray(u, dtype=float)
    h = np.asarray(h, dtype=float)
    scale = max(float(np.abs(h).max()), 1e-300)
    tol = 1e-12 * scale
    if len(u) < 3 or _turns(u).max() >= np.pi - 1e-12:
        raise EmptyOrUnbounded("normals do not positively span the plane")
    idx = np.arange(len(u))
    while True:
        if len(idx) < 3:
            raise EmptyOrUnbounded("fewer than 3 constraints remain")
        ui, hi = u[idx], h[idx]
        # apex[j] is the intersection of lines j-1 and j+1
        un, hn = np.roll(ui, -1, axis=0), np.roll(hi, -1)
        up, hp = np.roll(ui, 1, axis=0), np.roll(hi, 1)
        det = _cross(up, un)
        with np.errstate(divide="ignore", invalid="ignore"):
            ax = (hp * un[:, 1] - hn * up[:, 1]) / det
            ay = (up[:, 0] * hn - un[:, 0] * hp) / det
        apex = np.column_stack([ax, ay])
        span = np.mod(np.arctan2(det, np.einsum("ij,ij->i", up, un)), 2 * np.pi)
        ok = span < np.pi - 1e-12
        slack = np.where(ok, np.einsum("ij,ij->i", ui, np.where(ok[:, None], apex, 0.0)) - hi, np.inf)
        flagged = np.flatnonzero(slack <= tol)
        if len(flagged) == 0:
            break
        chosen = []
        m = len(idx)
        taken = np.zeros(m, dtype=bool)
        for j in flagged[np.argsort(slack[flagged], kind="stable")]:
            if taken[(j - 1) % m] or taken[(j + 1) % m]:
                continue
            taken[j] = True
            chosen.append(j)
        idx = np.delete(idx, chosen)
    ui, hi = u[idx], h[idx]
    v = _line_vertices(ui, hi)
    nxt = np.roll(v, -1, axis=0)
    tangent = np.column_stack([-ui[:, 1], ui[:, 0]])
    lengths = np.einsum("ij,ij->i", nxt - v, tangent)
    if lengths.min() <= -tol or _shoelace(v) <= 0.0:
        raise EmptyOrUnbounded("half-plane intersection is empty")
    if (v @ u.T - h).max() > 1e-9 * scale:
        raise EmptyOrUnbounded("half-plane intersection is empty")
    return v


def from_support_samples(h, angles=None) -> ConvexPolygon:
    """Polygon {x : x . u_i <= h_i} for support samples on an angle grid.

    ``angles`` defaults to the uniform grid 2*pi*i/N.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or len(h) < 3:
        raise EmptyOrUnbounded("need at least 3 support values")
    if angles is None:
        angles = 2.0 * np.pi * np.arange(len(h)) / len(h)
    angles = np.asarray(angles, dtype=float)
    order = np.argsort(np.mod(angles, 2 * np.pi), kind="stable")
    u = np.column_stack([np.cos(angles[order]), np.sin(angles[order])])
    v = _halfplane_polygon(u, h[order])
    try:
        return ConvexPolygon(_clean_chain(v))
    except GeometryError as exc:
        raise EmptyOrUnbounded(str(exc)) from exc


# --- erosion -------------------------------------------------------------------

@dataclass(frozen=True)
class ErosionProfile:
    """Piecewise-quadratic area A(t) of the inner parallel body at depth t.

    On ``[breakpoints[k], breakpoints[k+1]]`` the area is
    ``a + b t + c t**2`` with ``(a, b, c) = pieces[k]``.
    """

    breakpoints: tuple
    pieces: tuple
    inradius: float

    def _piece(self, t: float) -> int:
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return min(max(k, 0), len(self.pieces) - 1)

    def area(self, t: float) -> float:
        if t >= self.inradius:
            return 0.0
        a, b, c = self.pieces[self._piece(t)]
        return a + b * t + c * t * t

    def perimeter(self, t: float) -> float:
        """Perimeter of the eroded body, -A'(t)."""
        if t >= self.inradius:
            return 0.0
        _, b, c = self.pieces[self._piece(t)]
        return -(b + 2.0 * c * t)

    def __call__(self, t):
        return np.vectorize(self.area, otypes=[float])(t)


def erosion_profile(P: ConvexPolygon) -> ErosionProfile:
    """Event-driven inward offset of all edges at unit speed.

    Between events the eroded area obeys A(t0+s) = A - P s + s^2 sum tan(phi/2),
    phi being the exterior (turning) angles. An event is an edge collapsing to
    zero length; for convex input there is no other kind.
    """
    tol_t = EPS_EVENT * P.diameter
    turn = _turns(P.normals)  # turning angle at vertex j, between edges j-1 and j
    length = np.array(P.edge_lengths)  # edge j starts at vertex j
    area = P.area
    t = 0.0
    breaks = [0.0]
    pieces = []
    while True:
        k = np.tan(0.5 * turn)  # cot of half the interior angle
        speed = k + _lshift(k, 1)
        perim = float(length.sum())
        c = float(k.sum())
        tau = length / speed
        dt = float(tau.min())
        if dt > 0.0:
            pieces.append((area + perim * t + c * t * t, -perim - 2.0 * c * t, c))
            breaks.append(t + dt)
            area += (c * dt - perim) * dt
            length = np.maximum(length - speed * dt, 0.0)
            t += dt
        gone = tau <= dt + tol_t
        if len(gone) - np.count_nonzero(gone) < 3:
            break
        # a vertex survives iff its incoming edge survives; collapsed runs
        # fold their turning angles into the vertex that starts the run
        keep_vertex = ~_lshift(gone, -1)
        s = int(keep_vertex.argmax())
        group = np.cumsum(_lshift(keep_vertex, s)) - 1
        turn = np.bincount(group, weights=_lshift(turn, s))
        length = _lshift(length, s)[~_lshift(gone, s)]
        if turn.max() >= np.pi - 1e-12:
            break
    if not pieces:
        raise Degenerate("polygon has no interior")
    return ErosionProfile(tuple(breaks), tuple(pieces), t)


def erode(P: ConvexPolygon, t: float, profile: ErosionProfile | None = None):
    """Inner parallel body at depth ``t``; ``None`` stands for the empty set."""
    if t < 0:
        raise ValueError("erosion depth must be non-negative")
    if t == 0:
        return P
    if profile is None:
        profile = erosion_profile(P)
    if t >= profile.inradius:
        return None
    try:
        v = _halfplane_polygon(P.normals, P.offsets - t)
        return ConvexPolygon(_clean_chain(v))
    except GeometryError:
        # a sliver thinner than the merge tolerance
        return None


# --- clipping and metrics ------------------------------------------------------

def clip_halfplane(v: np.ndarray, normal, offset: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep the part of chain ``v`` with normal . x <= offset."""
    if len(v) == 0:
        return v
    s = v @ np.asarray(normal, dtype=float) - offset
    out = []
    m = len(v)
    for i in range(m):
        j = (i + 1) % m
        if s[i] <= 0:
            out.append(v[i])
        if (s[i] < 0 < s[j]) or (s[j] < 0 < s[i]):
            w = s[i] / (s[i] - s[j])
            out.append(v[i] + w * (v[j] - v[i]))
    return np.array(out).reshape(-1, 2)


def intersection_area(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """Area of P ∩ Q by clipping one polygon against the other's half-planes.

    The arguments are put in a canonical order first so the result is
    exactly symmetric in floating point.
    """
    if P.vertices.tobytes() > Q.vertices.tobytes():
        P, Q = Q, P
    v = np.array(P.vertices)
    for nrm, off in zip(Q.normals, Q.offsets):
        v = clip_halfplane(v, nrm, off)
        if len(v) < 3:
            return 0.0
    return max(_shoelace(v), 0.0)


def sym_diff_area(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """Area of the symmetric difference, H2(P) + H2(Q) - 2 H2(P ∩ Q)."""
    return max(P.area + Q.area - 2.0 * intersection_area(P, Q), 0.0)


def _max_min_affine(alpha: np.ndarray, beta: np.ndarray, iters: int = 64) -> np.ndarray:
    """Row-wise max over s in [0, 1] of min_k (alpha_k + beta_k s).

    The function is concave and piecewise linear, so bisecting on the slope
    of the active piece locates the maximiser to machine precision.
    """
    lo = np.zeros(alpha.shape[0])
    hi = np.ones(alpha.shape[0])
    rows = np.arange(alpha.shape[0])
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        g = alpha + beta * mid[:, None]
        rising = beta[rows, g.argmin(axis=1)] > 0
        lo = np.where(rising, mid, lo)
        hi = np.where(rising, hi, mid)
    cand = np.stack([np.zeros_like(lo), lo, hi, np.ones_like(lo)], axis=1)
    vals = (alpha[:, None, :] + beta[:, None, :] * cand[:, :, None]).min(axis=2)
    return vals.max(axis=1)


def directed_hausdorff(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """sup over x on the boundary of P of dist(x, boundary of Q)."""
    best = float(point_boundary_distance(Q, P.vertices).max())
    # inside Q the distance is a concave min of affine functions along each edge
    alpha = Q.offsets[None, :] - P.vertices @ Q.normals.T
    beta = -P.edges @ Q.normals.T
    inner = _max_min_affine(alpha, beta)
    return max(best, float(inner.max()))


def hausdorff_distance(P: ConvexPolygon, Q: ConvexPolygon) -> float:
    """Hausdorff distance between the boundary curves of P and Q."""
    return max(directed_hausdorff(P, Q), directed_hausdorff(Q, P))


def shape_metrics(P: ConvexPolygon, Q: ConvexPolygon) -> ShapeMetricReport:
    return ShapeMetricReport(sym_diff_area(P, Q), hausdorff_distance(P, Q))


# --- random polygons -------------------------------------------------------------

def random_convex_polygon(n: int, seed=None, scale: float = 1.0, stretch: float = 1.0,
                          max_aspect: float = MAX_ASPECT) -> ConvexPolygon:
    """Convex hull of ``n`` uniform points in a disk of radius ``scale``.

    ``stretch`` scales the x axis before a random rotation, for elongated
    test shapes. Draws are repeated until the hull is a valid polygon with
    aspect ratio (diameter / width) at most ``max_aspect``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    while True:
        r = scale * np.sqrt(rng.random(n))
        a = 2.0 * np.pi * rng.random(n)
        pts = np.column_stack([stretch * r * np.cos(a), r * np.sin(a)])
        rot = 2.0 * np.pi * rng.random()
        cr, sr = math.cos(rot), math.sin(rot)
        pts = pts @ np.array([[cr, sr], [-sr, cr]])
        try:
            hull = ConvexHull(pts)
            P = ConvexPolygon(_clean_chain(pts[hull.vertices]))
        except Exception:  # qhull rejects (near-)collinear draws
            continue
        if P.diameter <= max_aspect * P.width:
            return P
