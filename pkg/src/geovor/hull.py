"""Geodesic convex hull of the sites and the geodesic center.

The hull is built incrementally: each site outside the current region is
spliced into the cyclic site sequence at the position that keeps the boundary
chain convex and of minimum perimeter; sites whose local turn becomes
non-convex are dropped (they lie in the hull of the others). In a convex
polygon this degenerates to the Euclidean convex hull, which gets a fast path.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import (CCW, COLLINEAR, CW, DEFAULT_TOL, Point, SimplePolygon,
                       SiteSet, Tolerance, cross, dist, orientation,
                       point_segment_distance, pt)
from .paths import GeodesicPath, PolygonPaths, path_midpoint


class HullError(RuntimeError):
    pass


@dataclass
class GeodesicHull:
    hull_sites: List[Point]       # counterclockwise cyclic order
    boundary: List[Point]         # closed chain, first point not repeated
    interior_sites: List[Point]

    def contains(self, p: Point, eps: float = 1e-9) -> bool:
        return _chain_contains(self.boundary, p, eps)


def euclidean_hull(points: Sequence[Point]) -> List[Point]:
    """Andrew's monotone chain; counterclockwise, no collinear points kept."""
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return [Point(*p) for p in pts]

    def build(seq):
        out: List[Tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(reversed(pts))
    ring = lower[:-1] + upper[:-1]
    return [Point(*p) for p in ring]


def _chain_contains(ring: List[Point], p: Point, eps: float) -> bool:
    """Point in (or on) the closed, possibly weakly simple chain."""
    n = len(ring)
    for i in range(n):
        if point_segment_distance(p, ring[i], ring[(i + 1) % n]) <= eps:
            return True
    inside = False
    px, py = p
    j = n - 1
    for i in range(n):
        xi, yi = ring[i]
        xj, yj = ring[j]
        if (yi > py) != (yj > py):
            if px < (xj - xi) * (py - yi) / (yj - yi) + xi:
                inside = not inside
        j = i
    return inside


def _boundary_chain(ctx: PolygonPaths, sites: List[Point]) -> List[Point]:
    ring: List[Point] = []
    for i in range(len(sites)):
        leg = ctx.shortest_path(sites[i], sites[(i + 1) % len(sites)])
        ring.extend(leg.waypoints[:-1])
    return ring


def _perimeter(ring: List[Point]) -> float:
    return sum(dist(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring)))


def _turn_at(ctx: PolygonPaths, prev: Point, cur: Point, nxt: Point,
             eps: float) -> int:
    """Orientation of the hull boundary at a site: incoming anchor, site,
    outgoing anchor. A whisker tip (both neighbor paths leave through the
    same anchor) is a genuine hull site and counts as convex."""
    pin = ctx.shortest_path(prev, cur)
    pout = ctx.shortest_path(cur, nxt)
    a_in = pin.waypoints[-2] if len(pin.waypoints) >= 2 else prev
    a_out = pout.waypoints[1] if len(pout.waypoints) >= 2 else nxt
    if dist(a_in, a_out) <= eps * max(1.0, abs(a_in[0]), abs(a_in[1])):
        return CCW
    return orientation(a_in, cur, a_out, eps)


def _convexify(ctx: PolygonPaths, seq: List[Point], eps: float,
               keep: Optional[Point] = None) -> Optional[List[Point]]:
    """Drop sites with non-CCW turns until stable; None when `keep` drops or
    the sequence collapses below two sites."""
    seq = list(seq)
    changed = True
    guard = 0
    while changed and len(seq) > 2:
        guard += 1
        if guard > 4 * len(seq) * len(seq) + 16:
            raise HullError("hull convexification failed to stabilize")
        changed = False
        for i in range(len(seq)):
            if len(seq) <= 2:
                break
            prev = seq[i - 1]
            cur = seq[i]
            nxt = seq[(i + 1) % len(seq)]
            if _turn_at(ctx, prev, cur, nxt, eps) != CCW:
                if keep is not None and cur == keep:
                    return None
                seq.pop(i)
                changed = True
                break
    if len(seq) < 2:
        return None
    return seq


def geodesic_hull(ctx: PolygonPaths, sites: SiteSet,
                  tol: Tolerance = DEFAULT_TOL) -> GeodesicHull:
    """Geodesic convex hull of the sites: a site is excluded iff it lies in
    the geodesic hull of the others."""
    if sites.m < 2:
        raise HullError("hull needs at least two sites")
    pts = list(sites.sites)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in ctx.polygon.vertices))
    eps = tol.eps_geom * scale

    if ctx.polygon.is_convex:
        ring = euclidean_hull(pts)
        if len(ring) < 2:
            raise HullError("degenerate site set")
        onhull = []
        interior = []
        ring_set = set(ring)
        for p in pts:
            (onhull if p in ring_set or _on_ring_boundary(ring, p, eps) else interior).append(p)
        hull_sites = ring if len(ring) >= 2 else onhull
        boundary = list(hull_sites) if len(hull_sites) > 2 else _two_site_ring(ctx, hull_sites)
        return GeodesicHull(list(hull_sites), boundary, interior)

    # seed with the two mutually farthest sites, insert the rest
    best_pair = max(((i, j) for i in range(len(pts)) for j in range(i + 1, len(pts))),
                    key=lambda ij: ctx.distance(pts[ij[0]], pts[ij[1]]))
    seq = [pts[best_pair[0]], pts[best_pair[1]]]
    rest = [p for k, p in enumerate(pts) if k not in best_pair]
    interior: List[Point] = []
    processed = list(seq)
    for x in rest:
        processed.append(x)
        ring = _boundary_chain(ctx, seq)
        if _chain_contains(ring, x, eps):
            interior.append(x)
            continue
        best: Optional[Tuple[float, List[Point]]] = None
        for pos in range(len(seq)):
            cand = seq[:pos + 1] + [x] + seq[pos + 1:]
            fixed = _convexify(ctx, cand, tol.eps_geom, keep=x)
            if fixed is None or x not in fixed:
                continue
            fring = _boundary_chain(ctx, fixed)
            if any(not _chain_contains(fring, p, eps) for p in processed
                   if p not in fixed):
                continue
            per = _perimeter(fring)
            if best is None or per < best[0]:
                best = (per, fixed)
        if best is None:
            raise HullError(f"could not insert site {x} into the hull")
        dropped = [p for p in seq if p not in best[1]]
        interior.extend(dropped)
        seq = best[1]

    # re-check previously interior sites (drops can expose them)
    final_interior = []
    ring = _boundary_chain(ctx, seq)
    for p in interior:
        if _chain_contains(ring, p, eps):
            final_interior.append(p)
        else:
            raise HullError(f"hull does not contain site {p}")
    if _ring_area(ring) < 0:
        seq.reverse()
        ring = _boundary_chain(ctx, seq)
    return GeodesicHull(seq, ring, final_interior)


def _on_ring_boundary(ring: List[Point], p: Point, eps: float) -> bool:
    return any(point_segment_distance(p, ring[i], ring[(i + 1) % len(ring)]) <= eps
               for i in range(len(ring)))


def _two_site_ring(ctx: PolygonPaths, sites: List[Point]) -> List[Point]:
    path = ctx.shortest_path(sites[0], sites[1])
    fwd = list(path.waypoints)
    back = list(reversed(path.waypoints))[1:-1]
    return fwd + back


def _ring_area(ring: List[Point]) -> float:
    s = 0.0
    for i in range(len(ring)):
        a, b = ring[i], ring[(i + 1) % len(ring)]
        s += a[0] * b[1] - b[0] * a[1]
    return 0.5 * s


# -- geodesic center -----------------------------------------------------------


@dataclass
class CenterResult:
    center: Point
    radius: float
    support: List[Point]


def min_enclosing_circle(points: Sequence[Point],
                         seed: int = 0) -> Tuple[Point, float]:
    """Welzl's randomized incremental smallest enclosing circle."""
    pts = [Point(float(p[0]), float(p[1])) for p in points]
    rng = random.Random(seed)
    rng.shuffle(pts)

    def circle_two(a: Point, b: Point) -> Tuple[Point, float]:
        c = Point((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        return c, dist(a, b) / 2

    def circle_three(a: Point, b: Point, c: Point) -> Optional[Tuple[Point, float]]:
        d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if d == 0.0:
            return None
        ux = ((a[0] ** 2 + a[1] ** 2) * (b[1] - c[1]) + (b[0] ** 2 + b[1] ** 2) * (c[1] - a[1])
              + (c[0] ** 2 + c[1] ** 2) * (a[1] - b[1])) / d
        uy = ((a[0] ** 2 + a[1] ** 2) * (c[0] - b[0]) + (b[0] ** 2 + b[1] ** 2) * (a[0] - c[0])
              + (c[0] ** 2 + c[1] ** 2) * (b[0] - a[0])) / d
        center = Point(ux, uy)
        return center, dist(center, a)

    def inside(p: Point, circ: Optional[Tuple[Point, float]]) -> bool:
        return circ is not None and dist(p, circ[0]) <= circ[1] * (1 + 1e-12) + 1e-12

    circ: Optional[Tuple[Point, float]] = None
    for i, p in enumerate(pts):
        if inside(p, circ):
            continue
        circ = (p, 0.0)
        for j in range(i):
            q = pts[j]
            if inside(q, circ):
                continue
            circ = circle_two(p, q)
            for k in range(j):
                w = pts[k]
                if inside(w, circ):
                    continue
                c3 = circle_three(p, q, w)
                if c3 is None:
                    far = max((dist(p, q), (p, q)), (dist(p, w), (p, w)),
                              (dist(q, w), (q, w)))[1]
                    c3 = circle_two(*far)
                circ = c3
    if circ is None:
        raise HullError("no points")
    return circ


def geodesic_center(ctx: PolygonPaths, sites: SiteSet,
                    tol: Tolerance = DEFAULT_TOL,
                    backend: str = "bisection",
                    hull: Optional[GeodesicHull] = None) -> CenterResult:
    """Point minimizing the maximum geodesic distance to the sites.

    Candidate enumeration over hull sites: every pair midpoint and every
    interior triple center; a candidate wins when its defining distance
    dominates every site distance, ties broken lexicographically.
    """
    if sites.m < 2:
        raise HullError("center needs at least two sites")

    if ctx.polygon.is_convex:
        center, radius = min_enclosing_circle(sites.sites)
        support = [p for p in sites if abs(dist(p, center) - radius) <= tol.eps_dist]
        return CenterResult(pt(*center), radius, support)

    from .triple_center import INTERIOR, TripleCenterError, triple_center

    h = hull or geodesic_hull(ctx, sites, tol)
    cand_sites = h.hull_sites
    candidates: List[Tuple[Point, float]] = []
    for i in range(len(cand_sites)):
        for j in range(i + 1, len(cand_sites)):
            path = ctx.shortest_path(cand_sites[i], cand_sites[j])
            if path.length <= tol.eps_solve:
                continue
            candidates.append((path_midpoint(path, tol), path.length / 2.0))
    for i in range(len(cand_sites)):
        for j in range(i + 1, len(cand_sites)):
            for k in range(j + 1, len(cand_sites)):
                try:
                    res = triple_center(ctx, cand_sites[i], cand_sites[j],
                                        cand_sites[k], tol, backend)
                except TripleCenterError:
                    continue
                if res.case == INTERIOR:
                    candidates.append((res.center, res.radius))

    best: Optional[Tuple[float, Point]] = None
    for c, r_def in candidates:
        radius = max(ctx.distance(s, c) for s in sites)
        if radius > r_def + tol.eps_dist:
            continue  # defining sites are not the farthest ones
        if best is None or radius < best[0] - tol.eps_dist or (
                abs(radius - best[0]) <= tol.eps_dist and (c[0], c[1]) < (best[1][0], best[1][1])):
            best = (radius, c)
    if best is None:
        raise HullError("no dominating center candidate found")
    radius, center = best
    support = [p for p in sites if abs(ctx.distance(p, center) - radius) <= tol.eps_dist]
    return CenterResult(center, radius, support)
