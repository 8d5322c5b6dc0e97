"""Planar primitives, the simple-polygon model, and instance validation.

Coordinates are plain floats; every approximate comparison routes through an
explicit :class:`Tolerance` so the rest of the library never invents its own
epsilons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

# orientation results
CCW = 1
CW = -1
COLLINEAR = 0

# point-in-polygon results
INTERIOR = "interior"
BOUNDARY = "boundary"
EXTERIOR = "exterior"


class Point(NamedTuple):
    x: float
    y: float

    def __repr__(self) -> str:  # terser than the NamedTuple default
        return f"({self.x:.9g}, {self.y:.9g})"


def pt(x: float, y: float) -> Point:
    return Point(float(x), float(y))


@dataclass(frozen=True)
class Tolerance:
    """Tolerance policy: geometric coincidence, distance equality, solver stop.

    Must satisfy 0 < eps_solve <= eps_dist and eps_geom > 0.
    """

    eps_geom: float = 1e-9
    eps_dist: float = 1e-7
    eps_solve: float = 1e-10

    def __post_init__(self) -> None:
        if not (0.0 < self.eps_solve <= self.eps_dist):
            raise ValueError("need 0 < eps_solve <= eps_dist")
        if not self.eps_geom > 0.0:
            raise ValueError("eps_geom must be positive")


DEFAULT_TOL = Tolerance()


def dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def cross(o: Point, a: Point, b: Point) -> float:
    """Cross product (a-o) x (b-o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(a: Point, b: Point, c: Point, eps_geom: float = DEFAULT_TOL.eps_geom) -> int:
    """Sign of (b-a) x (c-a): CCW, CW or COLLINEAR.

    |cross| <= eps_geom * scale counts as COLLINEAR, where scale is the largest
    absolute coordinate among the inputs.
    """
    cr = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1]), abs(c[0]), abs(c[1]))
    if abs(cr) <= eps_geom * scale:
        return COLLINEAR
    return CCW if cr > 0.0 else CW


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_properly_cross(a: Point, b: Point, c: Point, d: Point,
                            eps_geom: float = DEFAULT_TOL.eps_geom) -> bool:
    """Strict interior crossing of segments ab and cd (touching does not count)."""
    o1 = orientation(a, b, c, eps_geom)
    o2 = orientation(a, b, d, eps_geom)
    o3 = orientation(c, d, a, eps_geom)
    o4 = orientation(c, d, b, eps_geom)
    return o1 * o2 < 0 and o3 * o4 < 0


def segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Optional[Tuple[float, float]]:
    """Line-line intersection parameters (t on ab, u on cd); None when parallel."""
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = d[0] - c[0], d[1] - c[1]
    den = rx * sy - ry * sx
    if den == 0.0:
        return None
    qx, qy = c[0] - a[0], c[1] - a[1]
    t = (qx * sy - qy * sx) / den
    u = (qx * ry - qy * rx) / den
    return t, u


class SimplePolygon:
    """A simple polygon with vertices in counterclockwise order.

    Derived data (edges, convexity flag, numpy coordinate array) is computed
    once and reused; instances are treated as immutable after construction.
    """

    def __init__(self, vertices: Sequence[Tuple[float, float]], validate: bool = True):
        self.vertices: List[Point] = [pt(x, y) for x, y in vertices]
        self.n = len(self.vertices)
        if validate:
            problems = self.validate()
            if problems:
                raise ValueError("invalid polygon: " + "; ".join(problems))
        self._coords: Optional[np.ndarray] = None
        self._is_convex: Optional[bool] = None
        self._perimeter: Optional[float] = None

    # -- derived data ------------------------------------------------------

    @property
    def coords(self) -> np.ndarray:
        if self._coords is None:
            self._coords = np.asarray(self.vertices, dtype=float)
        return self._coords

    def edge(self, i: int) -> Tuple[Point, Point]:
        return self.vertices[i], self.vertices[(i + 1) % self.n]

    def edges(self) -> Iterable[Tuple[Point, Point]]:
        for i in range(self.n):
            yield self.edge(i)

    def signed_area(self) -> float:
        s = 0.0
        for i in range(self.n):
            a, b = self.edge(i)
            s += a[0] * b[1] - b[0] * a[1]
        return 0.5 * s

    @property
    def is_convex(self) -> bool:
        if self._is_convex is None:
            self._is_convex = all(
                cross(self.vertices[i - 1], self.vertices[i],
                      self.vertices[(i + 1) % self.n]) > -DEFAULT_TOL.eps_geom
                for i in range(self.n)
            )
        return self._is_convex

    @property
    def perimeter(self) -> float:
        if self._perimeter is None:
            self._perimeter = sum(dist(a, b) for a, b in self.edges())
        return self._perimeter

    def is_reflex_vertex(self, i: int) -> bool:
        return cross(self.vertices[i - 1], self.vertices[i],
                     self.vertices[(i + 1) % self.n]) < 0.0

    def bbox(self) -> Tuple[float, float, float, float]:
        c = self.coords
        return float(c[:, 0].min()), float(c[:, 1].min()), float(c[:, 0].max()), float(c[:, 1].max())

    # -- validation --------------------------------------------------------

    def validate(self) -> List[str]:
        problems: List[str] = []
        if self.n < 3:
            problems.append("polygon needs >=3 vertices")
            return problems
        for i in range(self.n):
            if dist(self.vertices[i], self.vertices[(i + 1) % self.n]) == 0.0:
                problems.append(f"consecutive duplicate vertex at index {i}")
        if self.signed_area() <= 0.0:
            problems.append("vertices must be in counterclockwise order (signed area > 0)")
        for i in range(self.n):
            a, b = self.edge(i)
            for j in range(i + 1, self.n):
                if j == i or (j + 1) % self.n == i or (i + 1) % self.n == j:
                    continue  # adjacent edges share an endpoint
                c, d = self.edge(j)
                if segments_properly_cross(a, b, c, d):
                    problems.append(f"edges {i} and {j} intersect")
        return problems

    # -- queries -----------------------------------------------------------

    def location(self, p: Point, eps_geom: float = DEFAULT_TOL.eps_geom) -> str:
        return point_in_polygon(p, self, eps_geom)

    def contains(self, p: Point, eps_geom: float = DEFAULT_TOL.eps_geom) -> bool:
        return point_in_polygon(p, self, eps_geom) != EXTERIOR

    def locations(self, points: np.ndarray, eps_geom: float = DEFAULT_TOL.eps_geom) -> np.ndarray:
        """Vectorized classification of an (k,2) array: 1 interior, 0 boundary, -1 exterior."""
        return _locate_many(np.asarray(points, dtype=float), self._edge_arrays(), eps_geom)

    def _edge_arrays(self):
        if not hasattr(self, "_edge_cache"):
            c = self.coords
            ax, ay = c[:, 0], c[:, 1]
            bx = np.roll(c[:, 0], -1)
            by = np.roll(c[:, 1], -1)
            dx, dy = bx - ax, by - ay
            L2 = dx * dx + dy * dy
            self._edge_cache = (ax, ay, bx, by, dx, dy, np.where(L2 == 0.0, 1.0, L2))
        return self._edge_cache

    def boundary_point(self, s: float) -> Point:
        """Point at arc length s along the boundary (s taken mod perimeter)."""
        s = s % self.perimeter
        for a, b in self.edges():
            L = dist(a, b)
            if s <= L:
                t = s / L if L > 0 else 0.0
                return Point(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            s -= L
        return self.vertices[0]

    def boundary_param(self, p: Point) -> float:
        """Arc-length parameter of a point assumed to lie on the boundary."""
        s = 0.0
        best = (math.inf, 0.0)
        for a, b in self.edges():
            L = dist(a, b)
            d = point_segment_distance(p, a, b)
            if d < best[0]:
                t = 0.0
                if L > 0:
                    t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (L * L)
                    t = min(max(t, 0.0), 1.0)
                best = (d, s + t * L)
            s += L
        return best[1]

    def __repr__(self) -> str:
        return f"SimplePolygon(n={self.n})"


def point_in_polygon(p: Point, poly: SimplePolygon, eps_geom: float = DEFAULT_TOL.eps_geom) -> str:
    """Ray-crossing classification; within eps_geom of an edge counts as BOUNDARY."""
    for a, b in poly.edges():
        if point_segment_distance(p, a, b) <= eps_geom:
            return BOUNDARY
    inside = False
    px, py = p
    verts = poly.vertices
    j = poly.n - 1
    for i in range(poly.n):
        xi, yi = verts[i]
        xj, yj = verts[j]
        if (yi > py) != (yj > py):
            xcross = (xj - xi) * (py - yi) / (yj - yi) + xi
            if px < xcross:
                inside = not inside
        j = i
    return INTERIOR if inside else EXTERIOR


def _locate_many(points: np.ndarray, edge_arrays, eps_geom: float) -> np.ndarray:
    ax, ay, bx, by, dx, dy, L2 = edge_arrays
    px = points[:, 0][:, None]
    py = points[:, 1][:, None]

    # distance to each edge
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = np.clip(t, 0.0, 1.0)
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    edge_d2 = ex * ex + ey * ey
    on_boundary = (edge_d2.min(axis=1) <= eps_geom * eps_geom)

    # crossing number
    cond = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = dx * (py - ay) / np.where(dy == 0.0, 1.0, dy) + ax
    crossings = np.sum(cond & (px < xcross), axis=1)
    inside = (crossings % 2) == 1

    out = np.where(inside, 1, -1)
    out[on_boundary] = 0
    return out


@dataclass
class SiteSet:
    sites: List[Point]

    def __post_init__(self) -> None:
        self.sites = [pt(x, y) for x, y in self.sites]

    @property
    def m(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __getitem__(self, i: int) -> Point:
        return self.sites[i]

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self.sites, dtype=float)


@dataclass
class Violation:
    kind: str
    involved: tuple
    residual: float

    def __str__(self) -> str:
        return f"{self.kind}{self.involved}: residual={self.residual:.3g}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, involved: tuple, residual: float = 0.0) -> None:
        self.violations.append(Violation(kind, involved, residual))

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations)


def validate_instance(poly: SimplePolygon, sites: SiteSet, tol: Tolerance = DEFAULT_TOL,
                      check_four_farthest: Optional[bool] = None) -> ValidationReport:
    """Check polygon simplicity, site containment/distinctness, and the
    general-position requirements: no polygon vertex geodesically equidistant
    from two sites; suspected four-site equidistance among farthest candidates
    is reported (not resolved).

    The four-site scan enumerates site triples and is skipped for large site
    sets unless explicitly requested.
    """
    rep = ValidationReport()
    for msg in poly.validate():
        rep.add("polygon-invalid", (msg,))
    if sites.m < 2:
        rep.add("too-few-sites", (sites.m,))
    if not rep.ok:
        return rep

    for i, s in enumerate(sites):
        if poly.location(s, tol.eps_geom) == EXTERIOR:
            rep.add("site-outside", (i,), 0.0)
    for i in range(sites.m):
        for j in range(i + 1, sites.m):
            d = dist(sites[i], sites[j])
            if d <= tol.eps_geom:
                rep.add("duplicate-site", (i, j), d)
    if not rep.ok:
        return rep

    from .paths import PolygonPaths  # deferred: geometry stays import-light

    ctx = PolygonPaths(poly, tol)
    dmat = np.empty((poly.n, sites.m))
    for j, s in enumerate(sites):
        spt = ctx.shortest_path_tree(s)
        for i in range(poly.n):
            dmat[i, j] = spt.dist[i]
    for i in range(poly.n):
        order = np.argsort(dmat[i])
        diffs = np.diff(dmat[i][order])
        for k, gap in enumerate(diffs):
            if gap <= tol.eps_dist:
                rep.add("vertex-equidistant", (i, int(order[k]), int(order[k + 1])), float(gap))

    if check_four_farthest is None:
        check_four_farthest = sites.m <= 10
    if check_four_farthest and sites.m >= 4 and rep.ok:
        _scan_four_farthest(ctx, sites, tol, rep)
    return rep


def _scan_four_farthest(ctx, sites: SiteSet, tol: Tolerance, rep: ValidationReport) -> None:
    from itertools import combinations

    from .triple_center import triple_center

    pts = sites.sites
    for (i, j, k) in combinations(range(len(pts)), 3):
        try:
            res = triple_center(ctx, pts[i], pts[j], pts[k], tol)
        except Exception:
            continue
        c = res.center
        dists = [ctx.distance(s, c) for s in pts]
        top = max(dists)
        if abs(res.radius - top) > tol.eps_dist:
            continue  # not a farthest candidate point
        near = [l for l, d in enumerate(dists) if abs(d - res.radius) <= tol.eps_dist]
        if len(near) >= 4:
            rep.add("four-farthest-suspect", tuple(near), 0.0)
