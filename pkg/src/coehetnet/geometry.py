"""Planar geometry of the coverage-region model.

The biased-association boundary around each micro BS is approximated by a
circle through the two points where the boundary crosses the ray from the
macro BS through the micro BS.  Everything downstream (region areas, the
per-type distance CDFs) reduces to areas of intersections of discs, which
are computed in closed form for two discs and by adaptive 1-D quadrature
of the chord cross-section for three or more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, TYPE_CHECKING

from scipy.integrate import quad

from .config import UserType

if TYPE_CHECKING:  # pragma: no cover
    from .config import ScenarioConfig


class NoRootError(RuntimeError):
    """Coverage-boundary equation has no root in the search bracket."""


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"radius must be positive and finite, got {self.r}")
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ValueError("circle center must be finite")

    @property
    def area(self) -> float:
        return math.pi * self.r * self.r

    def center_distance(self, other: "Circle") -> float:
        return math.hypot(self.cx - other.cx, self.cy - other.cy)

    def contains_circle(self, other: "Circle") -> bool:
        """True when `other` lies entirely inside this circle."""
        return self.center_distance(other) + other.r <= self.r + 1e-12 * self.r


@dataclass(frozen=True)
class ContourPoints:
    """Crossings of the association boundary with the macro-micro axis."""

    p1: float  # inner crossing, between macro and micro (m)
    p2: float  # outer crossing, beyond the micro (m)

    def __post_init__(self):
        if not 0.0 < self.p1 < self.p2:
            raise ValueError(f"need 0 < p1 < p2, got ({self.p1}, {self.p2})")


@dataclass(frozen=True)
class RegionAreas:
    """Partition of the deployment disc into the three association regions."""

    s_dir: float
    s_cre: float
    s_macro: float
    s_tot: float

    def __post_init__(self):
        for name in ("s_dir", "s_cre", "s_macro", "s_tot"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        residual = abs(self.s_dir + self.s_cre + self.s_macro - self.s_tot)
        if residual > 1e-6 * self.s_tot:
            raise ValueError("region areas do not partition the disc")


# ---------------------------------------------------------------------------
# disc intersection areas
# ---------------------------------------------------------------------------

def two_circle_intersection_area(c1: Circle, c2: Circle) -> float:
    """Area of the intersection of two discs (0, lens, or full containment)."""
    r1, r2 = c1.r, c2.r
    if r1 < r2:
        r1, r2 = r2, r1
    d = c1.center_distance(c2)
    if d >= r1 + r2:
        return 0.0
    if d <= r1 - r2:
        return math.pi * r2 * r2
    # circular-segment decomposition along the chord through both crossings
    a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    b = math.sqrt(max(r1 * r1 - a * a, 0.0))
    term1 = r1 * r1 * math.acos(min(1.0, max(-1.0, a / r1))) - a * b
    term2 = r2 * r2 * math.acos(min(1.0, max(-1.0, (d - a) / r2))) - b * (d - a)
    return term1 + term2


def _pair_crossing_xs(c1: Circle, c2: Circle) -> list[float]:
    """x-coordinates of the boundary crossings of two circles, if any."""
    d = c1.center_distance(c2)
    if d <= 1e-15 or d >= c1.r + c2.r or d <= abs(c1.r - c2.r):
        return []
    a = (c1.r * c1.r - c2.r * c2.r + d * d) / (2.0 * d)
    h2 = c1.r * c1.r - a * a
    if h2 <= 0.0:
        return []
    h = math.sqrt(h2)
    ux, uy = (c2.cx - c1.cx) / d, (c2.cy - c1.cy) / d
    mx, my = c1.cx + a * ux, c1.cy + a * uy
    return [mx + h * uy, mx - h * uy]


def convex_intersection_area(circles: Sequence[Circle], epsabs: float = 1e-6) -> float:
    """Area of the common intersection of any number of discs.

    The intersection of discs is convex, so every vertical slice is an
    interval; the area is the integral of the interval length.  Breakpoints
    (circle extremes and pairwise boundary crossings) are passed to the
    quadrature so the sqrt kinks do not degrade convergence.
    """
    if not circles:
        raise ValueError("need at least one circle")

    # prune circles that contain another one (their constraint is redundant)
    kept: list[Circle] = []
    for c in circles:
        if any(c.contains_circle(k) for k in kept):
            continue
        kept = [k for k in kept if not k.contains_circle(c)]
        kept.append(c)

    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            if a.center_distance(b) >= a.r + b.r:
                return 0.0

    if len(kept) == 1:
        return kept[0].area
    if len(kept) == 2:
        return two_circle_intersection_area(kept[0], kept[1])

    lo = max(c.cx - c.r for c in kept)
    hi = min(c.cx + c.r for c in kept)
    if hi <= lo:
        return 0.0

    params = [(c.cx, c.cy, c.r * c.r) for c in kept]

    def chord(x: float) -> float:
        top = math.inf
        bot = -math.inf
        for cx, cy, r2 in params:
            h = math.sqrt(max(r2 - (x - cx) ** 2, 0.0))
            if cy + h < top:
                top = cy + h
            if cy - h > bot:
                bot = cy - h
        return top - bot if top > bot else 0.0

    breaks = {lo, hi}
    for c in kept:
        for x in (c.cx - c.r, c.cx + c.r):
            if lo < x < hi:
                breaks.add(x)
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            for x in _pair_crossing_xs(a, b):
                if lo < x < hi:
                    breaks.add(x)

    pts = sorted(breaks)
    total = 0.0
    for left, right in zip(pts[:-1], pts[1:]):
        if right - left < 1e-14 * max(abs(left), abs(right), 1.0):
            continue
        val, _ = quad(chord, left, right, epsabs=epsabs / len(pts), limit=200)
        total += val
    return max(total, 0.0)


def three_circle_overlap_area(cre_a: Circle, cre_b: Circle, disc: Circle) -> float:
    """Area common to two neighbouring coverage circles and the deployment disc.

    Returns 0 when the two coverage circles do not overlap.  When their lens
    lies fully inside the disc this reduces to the plain two-circle lens.
    """
    d = cre_a.center_distance(cre_b)
    if d >= cre_a.r + cre_b.r:
        return 0.0
    return convex_intersection_area([cre_a, cre_b, disc])


# ---------------------------------------------------------------------------
# association-boundary contour and coverage circles
# ---------------------------------------------------------------------------

def _contour_residual(x: float, bias_db: float, cfg: "ScenarioConfig") -> float:
    """Macro-minus-biased-micro received power along the y=0 ray (W)."""
    gap = abs(x - cfg.ring_radius_m)
    return (cfg.macro_power_w / x ** cfg.alpha1
            - 10.0 ** (bias_db / 10.0) * cfg.micro_power_w / gap ** cfg.alpha2)


def _bisect(f, lo: float, hi: float, xtol: float) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise NoRootError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):  # interval below float resolution
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_cre_contour_points(bias_db: float, cfg: "ScenarioConfig") -> ContourPoints:
    """Roots of the association-boundary equation on the macro-micro axis.

    Bisection on each side of the micro position; solved well below the
    nominal 1e-6 m tolerance so the power residual at the roots stays
    below 1e-9 in relative terms.
    """
    if bias_db < 0:
        raise ValueError("bias must be nonnegative")
    ring = cfg.ring_radius_m
    eps = 1e-6
    xtol = 1e-10

    def f(x: float) -> float:
        return _contour_residual(x, bias_db, cfg)

    p1 = _bisect(f, eps, ring - eps, xtol)
    p2 = _bisect(f, ring + eps, 5.0 * ring, xtol)
    return ContourPoints(p1=p1, p2=p2)


def approximate_coverage_circle(pts: ContourPoints, micro_index: int,
                                cfg: "ScenarioConfig") -> Circle:
    """Coverage circle of one micro BS from its axis crossings.

    Micros sit at angles 2*pi*i/n_micro on the ring; the circle is centered
    on that ray at the midpoint of the two crossings.
    """
    if not 0 <= micro_index < cfg.n_micro:
        raise ValueError(f"micro_index out of range: {micro_index}")
    center_radius = 0.5 * (pts.p1 + pts.p2)
    angle = 2.0 * math.pi * micro_index / cfg.n_micro
    return Circle(cx=center_radius * math.cos(angle),
                  cy=center_radius * math.sin(angle),
                  r=0.5 * abs(pts.p2 - pts.p1))


# ---------------------------------------------------------------------------
# ring geometry and region areas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingGeometry:
    """Prebuilt circles for one (config, bias) pair, exploiting ring symmetry."""

    dir_circle: Circle              # zero-bias coverage circle of micro 0
    cre_circle: Circle              # biased coverage circle of micro 0
    cre_neighbor: Circle | None     # biased coverage circle of micro 1
    disc: Circle
    n_micro: int
    micro_xy: tuple[float, float]
    neighbors_overlap: bool
    dir_inside_disc: bool


def _geometry_key(cfg: "ScenarioConfig") -> tuple:
    return (cfg.macro_power_dbw, cfg.micro_power_dbw, cfg.alpha1, cfg.alpha2,
            cfg.disc_radius_m, cfg.ring_radius_m, cfg.n_micro)


@lru_cache(maxsize=64)
def _ring_geometry_cached(key: tuple, bias_db: float) -> RingGeometry:
    from .config import ScenarioConfig
    (macro_dbw, micro_dbw, a1, a2, disc_r, ring_r, n_micro) = key
    cfg = ScenarioConfig(macro_power_dbw=macro_dbw, micro_power_dbw=micro_dbw,
                         alpha1=a1, alpha2=a2, disc_radius_m=disc_r,
                         ring_radius_m=ring_r, n_micro=n_micro)
    dir_pts = solve_cre_contour_points(0.0, cfg)
    cre_pts = dir_pts if bias_db == 0.0 else solve_cre_contour_points(bias_db, cfg)
    dir_circle = approximate_coverage_circle(dir_pts, 0, cfg)
    cre_circle = approximate_coverage_circle(cre_pts, 0, cfg)
    neighbor = approximate_coverage_circle(cre_pts, 1, cfg) if n_micro > 1 else None
    disc = Circle(0.0, 0.0, disc_r)
    overlap = (neighbor is not None
               and cre_circle.center_distance(neighbor) < cre_circle.r + neighbor.r)
    return RingGeometry(
        dir_circle=dir_circle,
        cre_circle=cre_circle,
        cre_neighbor=neighbor,
        disc=disc,
        n_micro=n_micro,
        micro_xy=(ring_r, 0.0),
        neighbors_overlap=overlap,
        dir_inside_disc=disc.contains_circle(dir_circle),
    )


def ring_geometry(cfg: "ScenarioConfig", bias_db: float) -> RingGeometry:
    return _ring_geometry_cached(_geometry_key(cfg), float(bias_db))


def region_areas(bias_db: float, cfg: "ScenarioConfig") -> RegionAreas:
    """Deployment-disc areas of the three association regions.

    Coverage circles are clipped to the disc; where two neighbouring biased
    circles overlap, the doubly counted in-disc lens is removed once per
    neighbour pair so every point contributes to exactly one region.
    """
    geo = ring_geometry(cfg, bias_db)
    n = geo.n_micro
    a_dir = two_circle_intersection_area(geo.dir_circle, geo.disc)
    a_cre = two_circle_intersection_area(geo.cre_circle, geo.disc)
    lens3 = (three_circle_overlap_area(geo.cre_circle, geo.cre_neighbor, geo.disc)
             if geo.neighbors_overlap else 0.0)
    s_tot = geo.disc.area
    s_dir = n * a_dir
    s_cre = max(n * a_cre - s_dir - n * lens3, 0.0)
    s_macro = s_tot - s_dir - s_cre
    if s_macro < -1e-9 * s_tot:
        raise ValueError("coverage circles exceed the disc; layout outside model scope")
    return RegionAreas(s_dir=s_dir, s_cre=s_cre, s_macro=max(s_macro, 0.0), s_tot=s_tot)


def _direct_partial_area(geo: RingGeometry, d: float) -> float:
    """Area of the zero-bias region of micro 0 within distance d of micro 0."""
    if d <= 0.0:
        return 0.0
    probe = Circle(geo.micro_xy[0], geo.micro_xy[1], d)
    if geo.dir_inside_disc:
        return two_circle_intersection_area(probe, geo.dir_circle)
    return convex_intersection_area([probe, geo.dir_circle, geo.disc])


def _cre_partial_area(geo: RingGeometry, d: float) -> float:
    """Area of the range-expansion region of micro 0 within distance d of it.

    The region is the biased circle minus the zero-bias circle, clipped to
    the disc; in-disc overlap with each neighbouring biased circle counts
    half toward this micro.
    """
    if d <= 0.0:
        return 0.0
    probe = Circle(geo.micro_xy[0], geo.micro_xy[1], d)
    within_cre = convex_intersection_area([probe, geo.cre_circle, geo.disc])
    within_dir = _direct_partial_area(geo, d)
    shared = 0.0
    if geo.neighbors_overlap:
        # both neighbours contribute the same area by mirror symmetry,
        # each attributed half: one full term
        shared = convex_intersection_area(
            [probe, geo.cre_circle, geo.cre_neighbor, geo.disc])
    return max(within_cre - within_dir - shared, 0.0)


def _macro_partial_area(geo: RingGeometry, d: float) -> float:
    """Area of the macro region within distance d of the disc center."""
    if d <= 0.0:
        return 0.0
    d_eff = min(d, geo.disc.r)
    probe = Circle(0.0, 0.0, d_eff)
    covered = geo.n_micro * two_circle_intersection_area(probe, geo.cre_circle)
    if geo.neighbors_overlap and covered > 0.0:
        covered -= geo.n_micro * convex_intersection_area(
            [geo.cre_circle, geo.cre_neighbor, probe])
    return max(math.pi * d_eff * d_eff - covered, 0.0)


def region_cdf_area(zeta: UserType, bias_db: float, d: float,
                    cfg: "ScenarioConfig") -> float:
    """Area of one BS's type-zeta region within distance d of its serving BS.

    Feeds the per-type distance CDF numerators; saturates at the region's
    total per-BS area once d reaches the far edge of the region.
    """
    geo = ring_geometry(cfg, bias_db)
    if zeta == UserType.DIRECT_MICRO:
        return _direct_partial_area(geo, d)
    if zeta == UserType.CRE:
        return _cre_partial_area(geo, d)
    return _macro_partial_area(geo, d)
