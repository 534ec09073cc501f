"""Energy minimisation over support-function discretisations, plus competitor moves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .energy import (
    EnergyBreakdown,
    EnergyParams,
    energy,
    isoperimetric_deficit,
    optimal_scale,
    stationarity_residual,
    theorem3_residual,
)
from .geometry import (
    ConvexPolygon,
    GeometryError,
    _clean_chain,
    from_support_samples,
    random_convex_polygon,
)


class DegenerateChord(GeometryError):
    pass


class EpsTooLarge(GeometryError):
    pass


# --- competitor constructions --------------------------------------------------

def _boundary_point(P: ConvexPolygon, w):
    i, s = w
    i = int(i) % P.n
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"edge parameter must lie in [0, 1], got {s}")
    if s == 1.0:
        i, s = (i + 1) % P.n, 0.0
    return i, s, P.vertices[i] + s * P.edges[i]


def _edges_through(P: ConvexPolygon, i: int, s: float) -> set:
    return {i} if s > 0.0 else {i, (i - 1) % P.n}


def chord_cut(P: ConvexPolygon, w1, w2) -> ConvexPolygon:
    """Cut P along the segment [w1, w2] and keep the larger piece.

    Boundary points are ``(edge_index, t)`` with t in [0, 1] along the edge
    from vertex ``edge_index`` to the next one. The kept piece is the one with
    more of P's vertices; ties go to the larger area. Endpoints on a common
    edge make the cut a null operation and P is returned; coincident
    endpoints raise DegenerateChord.
    """
    i, s, a = _boundary_point(P, w1)
    j, t, b = _boundary_point(P, w2)
    if np.array_equal(a, b):
        raise DegenerateChord("chord endpoints coincide")
    if _edges_through(P, i, s) & _edges_through(P, j, t):
        return P
    n = P.n
    ia = [(i + 1 + m) % n for m in range((j - i) % n)]  # vertices i+1 .. j
    ib = [(j + 1 + m) % n for m in range((i - j) % n)]  # vertices j+1 .. i
    va = [k for k in ia if not (t == 0.0 and k == j)]
    vb = [k for k in ib if not (s == 0.0 and k == i)]
    chain_a = np.vstack([a, P.vertices[va], b]) if va else None
    chain_b = np.vstack([b, P.vertices[vb], a]) if vb else None
    if chain_a is None or chain_b is None:
        return P
    pa, pb = ConvexPolygon(_clean_chain(chain_a)), ConvexPolygon(_clean_chain(chain_b))
    if len(va) != len(vb):
        return pa if len(va) > len(vb) else pb
    return pa if pa.area > pb.area else pb


def interior_angle(P: ConvexPolygon, k: int) -> float:
    return float(P.interior_angles[k % P.n])


def corner_cut(P: ConvexPolygon, vertex_index: int, eps: float) -> ConvexPolygon:
    """Replace vertex k by the chord joining the points at arc length ``eps`` on either side."""
    if eps == 0:
        return P
    if eps < 0:
        raise ValueError("eps must be non-negative")
    k = vertex_index % P.n
    l_in = P.edge_lengths[(k - 1) % P.n]
    l_out = P.edge_lengths[k]
    if not (eps < 0.5 * l_in and eps < 0.5 * l_out):
        raise EpsTooLarge(f"eps={eps} must be below half of both adjacent edges "
                          f"({l_in:.6g}, {l_out:.6g})")
    v = P.vertices
    q1 = v[k] - (eps / l_in) * P.edges[(k - 1) % P.n]
    q2 = v[k] + (eps / l_out) * P.edges[k]
    return ConvexPolygon(np.vstack([v[:k], q1, q2, v[k + 1:]]))


def curvature_diagnostic(P: ConvexPolygon, h_arc: float, n_grid: int | None = None,
                         window=None) -> float:
    """max |g(t+2h) - 2 g(t) + g(t-2h)| / h**2 over an arc-length grid.

    g is the arc-length parameterisation of the boundary starting at vertex 0.
    For a circle of radius R the quotient is 2 R (1 - cos(2h/R)) / h**2, which
    tends to 4/R as h -> 0. The grid is uniform and also contains every vertex
    position; ``window=(t0, t1)`` restricts it to that arc-length range.
    """
    L = P.perimeter
    if not 0.0 < h_arc < L / 8.0:
        raise ValueError("h_arc must lie in (0, perimeter/8)")
    s_v = np.concatenate([[0.0], np.cumsum(P.edge_lengths)])
    closed = np.vstack([P.vertices, P.vertices[:1]])
    if n_grid is None:
        n_grid = max(2048, int(math.ceil(16.0 * L / h_arc)))
    s = np.concatenate([np.linspace(0.0, s_v[-1], n_grid, endpoint=False), s_v[:-1]])
    if window is not None:
        s = np.concatenate([s[(s >= window[0]) & (s <= window[1])], [window[0], window[1]]])

    def gamma(x):
        x = np.mod(x, s_v[-1])
        return np.column_stack([np.interp(x, s_v, closed[:, 0]), np.interp(x, s_v, closed[:, 1])])

    d = gamma(s + 2 * h_arc) - 2.0 * gamma(s) + gamma(s - 2 * h_arc)
    return float(np.hypot(d[:, 0], d[:, 1]).max() / h_arc ** 2)


# --- support vectors -----------------------------------------------------------

def grid_angles(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(N) / N


@dataclass(frozen=True, eq=False)
class SupportVector:
    h: np.ndarray
    h_max: float = math.inf

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if np.any(h > self.h_max):
            raise GeometryError("support value above the box guard")

    @property
    def N(self) -> int:
        return len(self.h)

    @property
    def angles(self) -> np.ndarray:
        return grid_angles(self.N)

    def polygon(self) -> ConvexPolygon:
        return from_support_samples(self.h)


def project_to_feasible(h) -> SupportVector:
    """Replace h by the support values of the polygon it induces.

    Values of redundant half-planes drop to the support of the intersection;
    the map is idempotent.
    """
    sv = h if isinstance(h, SupportVector) else SupportVector(h)
    P = sv.polygon()
    return SupportVector(P.support(sv.angles), sv.h_max)


# --- pattern search ------------------------------------------------------------

def compass_search(objective: Callable, h0: np.ndarray, value0: float, *, step_init: float,
                   step_min: float, max_iters: int, symmetric: bool = False,
                   renormalize: Optional[Callable] = None, on_iteration: Optional[Callable] = None):
    """Coordinate-wise pattern search with greedy first-improvement acceptance.

    ``objective(h)`` returns ``(value, h_feasible)`` or raises GeometryError.
    Steps are relative to the mean of h. Each sweep visits coordinates in
    index order, trying +step then -step; the step halves after a sweep with
    no strict decrease. ``renormalize(h, value)`` runs before the first sweep
    and after every sweep; it may replace the iterate but must not increase
    the value. Iteration 0 is the start.
    """
    h = np.array(h0, dtype=float)
    value = value0
    step = step_init
    N = len(h)
    coords = range(N // 2) if symmetric else range(N)
    trace = [(0, value, step)]
    if on_iteration:
        on_iteration(0, value, step)
    evals = 0
    it = 1
    while it < max_iters and step >= step_min:
        if it == 1 and renormalize is not None:
            h, value = renormalize(h, value)
        improved = False
        scale = float(h.mean())
        for i in coords:
            for sign in (1.0, -1.0):
                cand = h.copy()
                cand[i] += sign * step * scale
                if symmetric:
                    cand[i + N // 2] += sign * step * scale
                if cand[i] <= 0.0:
                    continue
                try:
                    v, hc = objective(cand)
                except GeometryError:
                    continue
                finally:
                    evals += 1
                if v < value - 1e-15 * abs(value):
                    h, value = hc, v
                    improved = True
                    break
        if renormalize is not None:
            h, value = renormalize(h, value)
        if not improved:
            step *= 0.5
        trace.append((it, value, step))
        if on_iteration:
            on_iteration(it, value, step)
        it += 1
    return h, value, trace, evals


@dataclass
class OptimizationConfig:
    params: EnergyParams = field(default_factory=EnergyParams)
    N: int = 64
    max_iters: int = 400
    step_init: float = 0.02
    step_min: float = 1e-5
    seed: int = 0
    start: str = "regular"
    start_shape: Optional[ConvexPolygon] = None
    symmetric: bool = False
    h_max_factor: float = 1e3

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("N must be at least 8")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.step_min < self.step_init:
            raise ValueError("need 0 < step_min < step_init")
        if self.start not in ("regular", "random", "file"):
            raise ValueError(f"unknown start {self.start!r}")
        if self.start == "file" and self.start_shape is None:
            raise ValueError("start='file' needs start_shape")
        if self.symmetric and self.N % 2:
            raise ValueError("symmetric search needs an even N")

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "N": self.N, "max_iters": self.max_iters,
                "step_init": self.step_init, "step_min": self.step_min, "seed": self.seed,
                "start": self.start, "symmetric": self.symmetric}


@dataclass
class OptimizationResult:
    shape: ConvexPolygon
    energy: EnergyBreakdown
    trace: list
    residual_stationarity: float
    residual_theorem3: float
    isoperimetric_deficit: float
    support: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def minimising_sequence_bounds(params: EnergyParams):
    """Area lower bound C1 and ratio upper bound C2 for late minimising-sequence terms."""
    p, lam = params.p, params.lam
    e1 = 2.0 * math.pi / (p * p + 3.0 * p + 2.0) + 2.0 * lam + 1.0
    return 4.0 * math.pi * lam * lam / e1 ** 2, e1 / lam


def start_support(config: OptimizationConfig) -> np.ndarray:
    ang = grid_angles(config.N)
    if config.start == "regular":
        return np.ones(config.N)
    if config.start == "random":
        P = random_convex_polygon(12, config.seed)
    else:
        P = config.start_shape
    P = P.translated(-P.centroid)
    h = P.support(ang)
    if config.symmetric:
        h = 0.5 * (h + np.roll(h, config.N // 2))
    return h


def start_polygon(config: OptimizationConfig) -> ConvexPolygon:
    """The polygon the search starts from (after feasibility projection)."""
    return project_to_feasible(start_support(config)).polygon()


def minimize(config: OptimizationConfig) -> OptimizationResult:
    """Minimise the energy over N-direction support vectors.

    Every sweep of the pattern search is bracketed by the closed-form optimal
    homothety, with the shape recentred at its centroid.
    """
    params = config.params
    ang = grid_angles(config.N)
    u = np.column_stack([np.cos(ang), np.sin(ang)])

    h0 = project_to_feasible(start_support(config)).h
    h_max = config.h_max_factor * float(h0.max())

    def objective(h):
        if h.max() > h_max:
            raise GeometryError("box guard")
        P = from_support_samples(h)
        return energy(P, params).total, P.support(ang)

    def rescale(h, value):
        P = from_support_samples(h)
        e = energy(P, params)
        r, _ = optimal_scale(e.avg_dist, e.ratio_term / params.lam, params)
        h_new = r * (P.support(ang) - u @ P.centroid)
        try:
            v_new = energy(from_support_samples(h_new), params).total
        except GeometryError:
            return h, value
        if v_new <= value:
            return h_new, v_new
        return h, value

    v0 = energy(from_support_samples(h0), params).total
    h, value, trace, evals = compass_search(
        objective, h0, v0,
        step_init=config.step_init, step_min=config.step_min, max_iters=config.max_iters,
        symmetric=config.symmetric, renormalize=rescale,
    )
    P = from_support_samples(h)
    e = energy(P, params)
    c1, c2 = minimising_sequence_bounds(params)
    diag = {
        "evaluations": evals,
        "C1": c1,
        "C2": c2,
        "area_at_least_C1": e.area >= c1,
        "ratio_at_most_C2": (e.ratio_term / params.lam) <= c2,
        "curvature_quotient": curvature_diagnostic(P, P.perimeter / 32.0),
        "curvature_h_arc": P.perimeter / 32.0,
    }
    return OptimizationResult(
        shape=P,
        energy=e,
        trace=trace,
        residual_stationarity=stationarity_residual(e, params),
        residual_theorem3=theorem3_residual(e, params),
        isoperimetric_deficit=isoperimetric_deficit(P),
        support=h,
        diagnostics=diag,
    )
