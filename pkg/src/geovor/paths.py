"""Geodesic shortest paths inside a simple polygon.

Two-point queries run the funnel algorithm over the triangulation dual, O(n)
per query. `PolygonPaths` bundles the polygon, its triangulation and the
query operations; it is immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .geometry import (BOUNDARY, CCW, COLLINEAR, CW, DEFAULT_TOL, EXTERIOR,
                       Point, SimplePolygon, Tolerance, cross, dist,
                       orientation, point_segment_distance, pt)
from .triangulation import Triangulation, triangulate

P_END = "p"
Q_END = "q"

VERTEX = "vertex"
EDGE = "edge"


class PointOutsidePolygon(ValueError):
    pass


class NonMonotoneOracle(ValueError):
    pass


@dataclass(frozen=True)
class GeodesicPath:
    """A taut polygonal shortest path; interior waypoints are reflex vertices."""

    waypoints: Tuple[Point, ...]
    prefix: Tuple[float, ...]  # cumulative arc length at each waypoint

    @property
    def length(self) -> float:
        return self.prefix[-1]

    @property
    def source(self) -> Point:
        return self.waypoints[0]

    @property
    def target(self) -> Point:
        return self.waypoints[-1]

    def point_at(self, s: float) -> Point:
        """Point at arc length s from the source (clamped to [0, length])."""
        if s <= 0.0:
            return self.waypoints[0]
        if s >= self.length:
            return self.waypoints[-1]
        i = bisect_left(self.prefix, s)
        if self.prefix[i] == s:
            return self.waypoints[i]
        a, b = self.waypoints[i - 1], self.waypoints[i]
        seg = self.prefix[i] - self.prefix[i - 1]
        t = (s - self.prefix[i - 1]) / seg
        return Point(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))

    def reversed(self) -> "GeodesicPath":
        wps = tuple(reversed(self.waypoints))
        return make_path(wps)


def make_path(waypoints: Sequence[Point]) -> GeodesicPath:
    pref = [0.0]
    for i in range(1, len(waypoints)):
        pref.append(pref[-1] + dist(waypoints[i - 1], waypoints[i]))
    return GeodesicPath(tuple(waypoints), tuple(pref))


@dataclass(frozen=True)
class PathLocator:
    kind: str  # VERTEX or EDGE
    index: int  # vertex index, or the first vertex of the edge

    @property
    def edge(self) -> Tuple[int, int]:
        return (self.index, self.index + 1)


@dataclass
class ShortestPathTree:
    source: Point
    dist: List[float]          # per polygon vertex
    parent: List[Optional[int]]  # vertex index of the anchor, None when the source
    parent_point: List[Point]


def anchor(path: GeodesicPath, end: str) -> Point:
    """Waypoint adjacent to the chosen endpoint of the path."""
    if len(path.waypoints) < 2:
        raise ValueError("degenerate single-point path has no anchor")
    return path.waypoints[1] if end == P_END else path.waypoints[-2]


def path_midpoint(path: GeodesicPath, tol: Tolerance = DEFAULT_TOL) -> Point:
    if path.length <= 0.0:
        raise ValueError("zero-length path has no midpoint")
    mid = path.point_at(path.length / 2.0)
    for w in path.waypoints:  # snap to a waypoint hit exactly
        if dist(w, mid) <= tol.eps_solve:
            return w
    return mid


def path_binary_search(path: GeodesicPath,
                       oracle: Callable[[int, Point], bool]) -> PathLocator:
    """Locate the switch point of a monotone oracle along the path vertices.

    oracle(i, v) answers True when the sought w* lies in the prefix from the
    source up to vertex v (index i). Calls the oracle on at most
    ceil(log2(len)) + 2 vertices.
    """
    wps = path.waypoints
    last = len(wps) - 1
    if not oracle(last, wps[last]):
        raise NonMonotoneOracle("oracle rejects the full path")
    if oracle(0, wps[0]):
        return PathLocator(VERTEX, 0)
    lo, hi = 0, last  # oracle(lo) False, oracle(hi) True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if oracle(mid, wps[mid]):
            hi = mid
        else:
            lo = mid
    return PathLocator(EDGE, lo)


class PolygonPaths:
    """Shortest-path queries over one simple polygon."""

    def __init__(self, polygon: SimplePolygon, tol: Tolerance = DEFAULT_TOL):
        self.polygon = polygon
        self.tol = tol
        self.triangulation: Triangulation = triangulate(polygon)
        self._tri_pts = [self.triangulation.triangle_points(t)
                         for t in range(len(self.triangulation.triangles))]
        self._spt_cache: Dict[Point, ShortestPathTree] = {}
        self._vertex_tri: Dict[int, int] = {}
        for t, (i, j, k) in enumerate(self.triangulation.triangles):
            for v in (i, j, k):
                self._vertex_tri.setdefault(v, t)
        self._reflex = [polygon.vertices[i] for i in range(polygon.n)
                        if polygon.is_reflex_vertex(i)]

    # -- triangle location ---------------------------------------------------

    def locate(self, p: Point) -> int:
        best_t, best_margin = -1, -math.inf
        for t, (a, b, c) in enumerate(self._tri_pts):
            m = min(cross(a, b, p), cross(b, c, p), cross(c, a, p))
            if m > best_margin:
                best_margin, best_t = m, t
        scale = max(1.0, abs(p[0]), abs(p[1]))
        if best_margin < -1e-7 * scale:
            if self.polygon.location(p, self.tol.eps_geom) == EXTERIOR:
                raise PointOutsidePolygon(f"point {p} lies outside the polygon")
        return best_t

    # -- two-point queries -----------------------------------------------------

    def shortest_path(self, p: Point, q: Point) -> GeodesicPath:
        p = pt(*p)
        q = pt(*q)
        if p == q:
            return make_path([p])
        if self.polygon.is_convex:
            return make_path([p, q])
        tp = self.locate(p)
        tq = self.locate(q)
        if tp == tq:
            wps = [p, q]
        else:
            corridor = self._corridor(tp, tq)
            portals = self._portals(corridor)
            wps = _funnel(portals, p, q, self.tol.eps_geom)
        return make_path(self._insert_grazed(wps))

    def _insert_grazed(self, wps: List[Point]) -> List[Point]:
        """Insert reflex vertices lying exactly on a path segment.

        A geodesic that grazes a reflex corner passes through it; keeping the
        corner as an explicit waypoint makes anchors and junction vertices of
        coincident paths well defined.
        """
        if not self._reflex:
            return wps
        scale = max(1.0, max(abs(v[0]) for v in self.polygon.vertices),
                    max(abs(v[1]) for v in self.polygon.vertices))
        eps = self.tol.eps_geom * scale
        out: List[Point] = [wps[0]]
        for a, b in zip(wps, wps[1:]):
            seg = dist(a, b)
            hits = []
            for v in self._reflex:
                if v == a or v == b or seg == 0.0:
                    continue
                if point_segment_distance(v, a, b) <= eps:
                    t = ((v[0] - a[0]) * (b[0] - a[0]) + (v[1] - a[1]) * (b[1] - a[1])) / (seg * seg)
                    if eps < t * seg < seg - eps:
                        hits.append((t, v))
            for _, v in sorted(hits):
                out.append(v)
            out.append(b)
        return out

    def distance(self, p: Point, q: Point) -> float:
        return self.shortest_path(p, q).length

    def _corridor(self, t0: int, t1: int) -> List[int]:
        if t0 == t1:
            return [t0]
        prev = {t0: -1}
        stack = [t0]
        while stack:
            t = stack.pop()
            if t == t1:
                break
            for u in self.triangulation.neighbors[t]:
                if u not in prev:
                    prev[u] = t
                    stack.append(u)
        seq = [t1]
        while seq[-1] != t0:
            seq.append(prev[seq[-1]])
        seq.reverse()
        return seq

    def _portals(self, corridor: List[int]) -> List[Tuple[Point, Point]]:
        """Shared edges along the corridor as (left, right) pairs for travel."""
        tris = self.triangulation.triangles
        verts = self.polygon.vertices
        portals: List[Tuple[Point, Point]] = []
        for prev_t, cur_t in zip(corridor, corridor[1:]):
            shared = set(tris[prev_t]) & set(tris[cur_t])
            i, j, k = tris[cur_t]
            # directed edge of the CCW triangle we enter through: left = tail
            for a, b in ((i, j), (j, k), (k, i)):
                if a in shared and b in shared:
                    portals.append((verts[a], verts[b]))
                    break
        return portals

    # -- derived queries -------------------------------------------------------

    def shortest_path_tree(self, source: Point) -> ShortestPathTree:
        source = pt(*source)
        cached = self._spt_cache.get(source)
        if cached is not None:
            return cached
        n = self.polygon.n
        d: List[float] = [0.0] * n
        par: List[Optional[int]] = [None] * n
        par_pt: List[Point] = [source] * n
        if self.polygon.is_convex:
            for i, v in enumerate(self.polygon.vertices):
                d[i] = dist(source, v)
        else:
            vindex = {v: i for i, v in enumerate(self.polygon.vertices)}
            for i, v in enumerate(self.polygon.vertices):
                path = self.shortest_path(source, v)
                d[i] = path.length
                if len(path.waypoints) >= 2:
                    a = path.waypoints[-2]
                    par_pt[i] = a
                    par[i] = vindex.get(a)
        spt = ShortestPathTree(source, d, par, par_pt)
        if len(self._spt_cache) > 256:
            self._spt_cache.clear()
        self._spt_cache[source] = spt
        return spt

    def junction_vertex(self, o: Point, a: Point, b: Point) -> Point:
        """Farthest-from-o endpoint of the common prefix of pi(o,a) and pi(o,b)."""
        pa = self.shortest_path(o, a)
        pb = self.shortest_path(o, b)
        eps = self.tol.eps_geom
        last = pa.waypoints[0]
        for wa, wb in zip(pa.waypoints, pb.waypoints):
            if dist(wa, wb) > eps:
                break
            last = wa
        return last


def _funnel(portals: List[Tuple[Point, Point]], p: Point, q: Point,
            eps_geom: float) -> List[Point]:
    """Standard funnel scan over portal edges (collinear candidates tighten)."""
    pts = [(p, p)] + portals + [(q, q)]
    path = [p]
    apex = p
    left, right = p, p
    apex_i = left_i = right_i = 0

    def orient(a: Point, b: Point, c: Point) -> int:
        return orientation(a, b, c, eps_geom)

    i = 1
    guard = 0
    limit = 8 * len(pts) * len(pts) + 64
    while i < len(pts):
        guard += 1
        if guard > limit:
            raise RuntimeError("funnel failed to converge")
        new_left, new_right = pts[i]

        # candidate must be left-of-or-on apex->right to narrow the funnel
        if orient(apex, right, new_right) >= 0:
            if apex == left or orient(apex, left, new_right) != CCW:
                right, right_i = new_right, i
            else:
                if path[-1] != left:
                    path.append(left)
                apex, apex_i = left, left_i
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue

        if orient(apex, left, new_left) <= 0:
            if apex == right or orient(apex, right, new_left) != CW:
                left, left_i = new_left, i
            else:
                if path[-1] != right:
                    path.append(right)
                apex, apex_i = right, right_i
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue

        i += 1

    if path[-1] != q:
        path.append(q)
    return _dedupe(path, eps_geom)


def _dedupe(path: List[Point], eps: float) -> List[Point]:
    out = [path[0]]
    for w in path[1:]:
        if dist(out[-1], w) > eps:
            out.append(w)
    if len(out) == 1 and len(path) > 1:
        out.append(path[-1])
    return out
