"""Average-distance energy of convex polygons.

The distance integral is evaluated exactly through the layer-cake identity

    int_P dist(x, dP)^p dx = p * int_0^r_in t^(p-1) A(t) dt,

with A the piecewise-quadratic erosion profile, so each piece integrates in
closed form for any real p >= 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import ConvexPolygon, ErosionProfile, erosion_profile, signed_depth


class ParameterError(ValueError):
    pass


class OutsideExponentWindow(ParameterError):
    pass


class NonpositiveInput(ValueError):
    pass


def in_exponent_window(p: float, alpha: float, beta: float) -> bool:
    return 2.0 * beta > alpha > p * beta / (p + 1.0) > 0.0


@dataclass(frozen=True)
class EnergyParams:
    """Exponent ``p``, penalty weight ``lam`` and generalized ratio exponents.

    The ratio term is ``lam * perimeter**alpha / area**beta``. Exponents other
    than (1, 1) must satisfy 2*beta > alpha > p*beta/(p+1) > 0; with
    ``strict=False`` a violation only warns.
    """

    p: float = 1.0
    lam: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    strict: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ParameterError(f"lambda must be > 0, got {self.lam}")
        if self.generalized and not in_exponent_window(self.p, self.alpha, self.beta):
            msg = (f"(alpha, beta) = ({self.alpha}, {self.beta}) outside the window "
                   f"2*beta > alpha > p*beta/(p+1) > 0 for p = {self.p}")
            if self.strict:
                raise OutsideExponentWindow(msg)
            warnings.warn(msg, stacklevel=3)

    @property
    def generalized(self) -> bool:
        return (self.alpha, self.beta) != (1.0, 1.0)

    @property
    def ratio_decay(self) -> float:
        """k in ratio_term(rP) = r**(-k) * ratio_term(P); equals 2*beta - alpha."""
        return 2.0 * self.beta - self.alpha

    def to_json(self) -> dict:
        return {"p": self.p, "lambda": self.lam, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class EnergyBreakdown:
    avg_dist: float
    area: float
    perimeter: float
    ratio_term: float
    total: float

    def to_json(self) -> dict:
        return asdict(self)


def layer_cake_integral(profile: ErosionProfile, p: float) -> float:
    """p * int_0^r_in t^(p-1) A(t) dt for the piecewise-quadratic profile."""
    q1, q2 = p / (p + 1.0), p / (p + 2.0)
    terms = []
    bp = profile.breakpoints
    for (a, b, c), t0, t1 in zip(profile.pieces, bp[:-1], bp[1:]):
        terms.append(a * (t1 ** p - t0 ** p))
        terms.append(b * q1 * (t1 ** (p + 1) - t0 ** (p + 1)))
        terms.append(c * q2 * (t1 ** (p + 2) - t0 ** (p + 2)))
    return math.fsum(terms)


def avg_dist_integral(P: ConvexPolygon, p: float, profile: ErosionProfile | None = None) -> float:
    """Exact value of int_P dist(x, dP)^p dx."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if profile is None:
        profile = erosion_profile(P)
    return layer_cake_integral(profile, float(p))


def avg_dist_mc(P: ConvexPolygon, p: float, n_samples: int, seed=None, batch: int = 200_000):
    """Monte-Carlo estimate of int_P dist^p with its standard error.

    Points are drawn uniformly in the bounding box and rejected outside P
    until ``n_samples`` interior points are collected.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    lo = P.vertices.min(axis=0)
    span = P.vertices.max(axis=0) - lo
    vals = []
    have = 0
    while have < n_samples:
        m = min(batch, max(64, int(1.3 * (n_samples - have) * span.prod() / P.area) + 16))
        x = lo + span * rng.random((m, 2))
        d = signed_depth(P, x)
        d = d[d >= 0.0][: n_samples - have]
        vals.append(d)
        have += len(d)
    f = np.concatenate(vals) ** float(p)
    est = P.area * float(f.mean())
    if n_samples > 1:
        se = P.area * float(f.std(ddof=1)) / math.sqrt(n_samples)
    else:
        se = abs(est)  # one sample carries no spread information
    return est, se


def ratio_value(P: ConvexPolygon, params: EnergyParams) -> float:
    """perimeter**alpha / area**beta (the plain perimeter-to-area ratio by default)."""
    if not params.generalized:
        return P.perimeter / P.area
    return P.perimeter ** params.alpha / P.area ** params.beta


def energy(P: ConvexPolygon, params: EnergyParams, profile: ErosionProfile | None = None) -> EnergyBreakdown:
    F = avg_dist_integral(P, params.p, profile)
    rt = params.lam * ratio_value(P, params)
    return EnergyBreakdown(F, P.area, P.perimeter, rt, F + rt)


def disk_energy(p: float, lam: float, r: float = 1.0) -> EnergyBreakdown:
    """Closed-form energy of a disk of radius ``r``."""
    if not r > 0:
        raise NonpositiveInput(f"radius must be positive, got {r}")
    F = 2.0 * math.pi * r ** (p + 2) / ((p + 1.0) * (p + 2.0))
    rt = 2.0 * lam / r
    return EnergyBreakdown(F, math.pi * r * r, 2.0 * math.pi * r, rt, F + rt)


def optimal_disk_radius(p: float, lam: float) -> float:
    """Minimiser of disk_energy over r: 2*pi*r^(p+3)/(p+1) = 2*lam."""
    return (lam * (p + 1.0) / math.pi) ** (1.0 / (p + 3.0))


def optimal_scale(F: float, ratio: float, params: EnergyParams):
    """Best homothety factor for a shape with distance integral F and ``ratio``.

    ``ratio`` is perimeter**alpha / area**beta. Under x -> r x the integral
    scales as r**(p+2) and the ratio as r**(-k) with k = 2*beta - alpha, so
    the minimiser is r* = (k lam ratio / ((p+2) F))**(1/(p+2+k)).
    Returns ``(r_star, total_at_r_star)``.
    """
    if not (F > 0 and ratio > 0):
        raise NonpositiveInput("F and ratio must be positive")
    p, lam = params.p, params.lam
    k = params.ratio_decay
    if params.generalized and not in_exponent_window(p, params.alpha, params.beta):
        raise OutsideExponentWindow("optimal rescaling needs 2*beta > alpha > p*beta/(p+1)")
    r = (k * lam * ratio / ((p + 2.0) * F)) ** (1.0 / (p + 2.0 + k))
    return r, r ** (p + 2.0) * F + lam * ratio * r ** (-k)


def stationarity_residual(e: EnergyBreakdown, params: EnergyParams) -> float:
    """|(p+2) F - k ratio_term| / ((p+2) F); zero when no rescaling helps."""
    lhs = (params.p + 2.0) * e.avg_dist
    return abs(lhs - params.ratio_decay * e.ratio_term) / lhs


def theorem3_residual(e: EnergyBreakdown, params: EnergyParams, min_energy: float | None = None) -> float:
    """|ratio_term - (p+2)/(p+2+k) * E_min| / ratio_term.

    With k = 1 this is |H1/H2 - (p+2)/(lam (p+3)) E_min| / (H1/H2). The
    shape's own total stands in for E_min unless one is given.
    """
    total = e.total if min_energy is None else min_energy
    p, k = params.p, params.ratio_decay
    return abs(e.ratio_term - (p + 2.0) / (p + 2.0 + k) * total) / e.ratio_term


def isoperimetric_deficit(P: ConvexPolygon) -> float:
    return P.perimeter ** 2 / (4.0 * math.pi * P.area) - 1.0


def rescale_optimally(P: ConvexPolygon, params: EnergyParams):
    """Return ``(rP, r)`` with r the optimal homothety factor about the centroid."""
    e = energy(P, params)
    r, _ = optimal_scale(e.avg_dist, e.ratio_term / params.lam, params)
    return P.scaled(r, P.centroid), r
