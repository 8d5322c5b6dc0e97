"""Two-site bisectors traced as chains of straight and hyperbolic arcs.

Locally the bisector of sites s and t is the conic |p-u| - |p-v| = k where u
and v are the current anchors and k the weight offset. Arcs end at
breakpoints: crossings with the extension segments of shortest-path-tree
edges (where an anchor changes) or with the polygon boundary. Marching uses
the two shortest path trees and recomputes anchors just past each breakpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .geometry import (DEFAULT_TOL, EXTERIOR, INTERIOR, Point, SimplePolygon,
                       Tolerance, dist, pt, segment_intersection)
from .paths import PolygonPaths

STRAIGHT = "straight"
HYPERBOLIC = "hyperbolic"


class BisectorError(RuntimeError):
    pass


@dataclass
class BisectorArc:
    kind: str
    focus_s: Point      # anchor u on the s side
    focus_t: Point      # anchor v on the t side
    offset: float       # k = d(t,v) - d(s,u); arc satisfies |p-u| - |p-v| = k
    p0: Point
    p1: Point

    def conic(self) -> "_Conic":
        return _Conic(self.focus_s, self.focus_t, self.offset)

    def sample(self, count: int = 32) -> List[Point]:
        """count points from p0 to p1 along the arc (endpoints included)."""
        conic = self.conic()
        e0 = conic.param(self.p0)
        e1 = conic.param(self.p1)
        out = []
        for i in range(count):
            u = i / (count - 1) if count > 1 else 0.5
            out.append(conic.point(e0 + (e1 - e0) * u))
        out[0] = self.p0
        out[-1] = self.p1
        return out

    @property
    def length_hint(self) -> float:
        return dist(self.p0, self.p1)


@dataclass
class ArcChain:
    arcs: List[BisectorArc]
    source: Point
    target: Point

    @property
    def breakpoint_count(self) -> int:
        return max(len(self.arcs) - 1, 0)

    def polyline(self, per_arc: int = 32) -> List[Point]:
        pts: List[Point] = []
        for a in self.arcs:
            seg = a.sample(per_arc)
            if pts:
                seg = seg[1:]
            pts.extend(seg)
        return pts


@dataclass
class Bisector:
    s: Point
    t: Point
    arcs: List[BisectorArc]

    @property
    def breakpoints(self) -> List[Point]:
        return [a.p1 for a in self.arcs[:-1]]

    @property
    def endpoints(self) -> Tuple[Point, Point]:
        return self.arcs[0].p0, self.arcs[-1].p1

    def polyline(self, per_arc: int = 32) -> List[Point]:
        return ArcChain(self.arcs, *self.endpoints).polyline(per_arc)


class _Conic:
    """The branch of |p-u| - |p-v| = k, parameterized by the transverse
    coordinate eta in the focal frame (straight when k == 0)."""

    def __init__(self, u: Point, v: Point, k: float):
        self.u = u
        self.v = v
        self.k = k
        mx, my = (u[0] + v[0]) / 2.0, (u[1] + v[1]) / 2.0
        self.m = (mx, my)
        dx, dy = v[0] - u[0], v[1] - u[1]
        L = math.hypot(dx, dy)
        if L <= 0:
            raise BisectorError("coincident anchors")
        self.ex = (dx / L, dy / L)
        self.ey = (-dy / L, dx / L)
        self.c = L / 2.0
        self.a = k / 2.0
        scale = max(1.0, abs(u[0]), abs(u[1]), abs(v[0]), abs(v[1]))
        self.straight = abs(k) <= 1e-12 * scale
        if not self.straight:
            b2 = self.c * self.c - self.a * self.a
            if b2 <= 0:
                raise BisectorError(f"degenerate conic: |k|={abs(k)} >= |uv|={2*self.c}")
            self.b = math.sqrt(b2)

    def frame(self, p: Point) -> Tuple[float, float]:
        wx, wy = p[0] - self.m[0], p[1] - self.m[1]
        return (wx * self.ex[0] + wy * self.ex[1],
                wx * self.ey[0] + wy * self.ey[1])

    def unframe(self, xi: float, eta: float) -> Point:
        return Point(self.m[0] + xi * self.ex[0] + eta * self.ey[0],
                     self.m[1] + xi * self.ex[1] + eta * self.ey[1])

    def param(self, p: Point) -> float:
        return self.frame(p)[1]

    def point(self, eta: float) -> Point:
        if self.straight:
            return self.unframe(0.0, eta)
        xi = math.copysign(abs(self.a) * math.sqrt(1.0 + (eta / self.b) ** 2), self.a)
        return self.unframe(xi, eta)

    def tangent(self, p: Point) -> Tuple[float, float]:
        """Unit tangent at p in the direction of increasing eta."""
        if self.straight:
            return self.ey
        _, eta = self.frame(p)
        dxi = abs(self.a) * eta / (self.b * self.b * math.sqrt(1.0 + (eta / self.b) ** 2))
        dxi = math.copysign(dxi, self.a) if eta != 0 else 0.0
        if eta != 0:
            dxi = math.copysign(abs(self.a) * abs(eta) / (self.b * self.b)
                                / math.sqrt(1.0 + (eta / self.b) ** 2), self.a * eta)
        tx = dxi * self.ex[0] + self.ey[0]
        ty = dxi * self.ex[1] + self.ey[1]
        L = math.hypot(tx, ty)
        return (tx / L, ty / L)

    def residual(self, p: Point) -> float:
        return (dist(p, self.u) - dist(p, self.v)) - self.k

    def segment_hits(self, a: Point, b: Point, eps: float) -> List[Tuple[float, Point]]:
        """Intersections with segment ab as (eta, point), filtered to the
        correct branch and the segment span."""
        out: List[Tuple[float, Point]] = []
        if self.straight:
            # line through m with direction ey
            denom_hit = segment_intersection(self.unframe(0.0, -1.0), self.unframe(0.0, 1.0), a, b)
            if denom_hit is None:
                return out
            tline, useg = denom_hit
            if -eps <= useg <= 1 + eps:
                p = Point(a[0] + useg * (b[0] - a[0]), a[1] + useg * (b[1] - a[1]))
                out.append((self.param(p), p))
            return out
        xa, ya = self.frame(a)
        xb, yb = self.frame(b)
        dx, dy = xb - xa, yb - ya
        b2 = self.b * self.b
        a2 = self.a * self.a
        # (xa + t dx)^2 / a2 - (ya + t dy)^2 / b2 = 1
        A = dx * dx * b2 - dy * dy * a2
        B = 2.0 * (xa * dx * b2 - ya * dy * a2)
        C = xa * xa * b2 - ya * ya * a2 - a2 * b2
        roots: List[float] = []
        if abs(A) <= 1e-14 * max(1.0, abs(B), abs(C)):
            if abs(B) > 1e-14:
                roots.append(-C / B)
        else:
            disc = B * B - 4 * A * C
            if disc >= 0:
                sq = math.sqrt(disc)
                roots.extend([(-B - sq) / (2 * A), (-B + sq) / (2 * A)])
        for tseg in roots:
            if not (-eps <= tseg <= 1 + eps):
                continue
            xi = xa + tseg * dx
            if xi * self.a < 0:  # wrong branch
                continue
            p = Point(a[0] + tseg * (b[0] - a[0]), a[1] + tseg * (b[1] - a[1]))
            if abs(self.residual(p)) > 1e-6 * max(1.0, abs(self.k)):
                continue
            out.append((ya + tseg * dy, p))
        return out


# -- shortest path map walls -------------------------------------------------------


def spm_walls(ctx: PolygonPaths, site: Point) -> List[Tuple[Point, Point]]:
    """Extension segments of shortest-path-tree edges, clipped to the polygon.

    Crossing such a wall is exactly where the anchor toward `site` changes.
    """
    poly = ctx.polygon
    spt = ctx.shortest_path_tree(site)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in poly.vertices))
    nudge = 1e-9 * scale
    walls: List[Tuple[Point, Point]] = []
    for i, x in enumerate(poly.vertices):
        w = spt.parent_point[i]
        if dist(w, x) <= nudge:
            continue
        dx, dy = x[0] - w[0], x[1] - w[1]
        L = math.hypot(dx, dy)
        d = (dx / L, dy / L)
        probe = Point(x[0] + 10 * nudge * d[0], x[1] + 10 * nudge * d[1])
        if poly.location(probe, nudge) == EXTERIOR:
            continue  # extension leaves the polygon immediately
        best_t = None
        for a, b in poly.edges():
            hit = segment_intersection(x, Point(x[0] + d[0], x[1] + d[1]), a, b)
            if hit is None:
                continue
            tray, useg = hit
            if tray > 100 * nudge and -1e-12 <= useg <= 1 + 1e-12:
                if best_t is None or tray < best_t:
                    best_t = tray
        if best_t is None:
            continue
        walls.append((x, Point(x[0] + best_t * d[0], x[1] + best_t * d[1])))
    return walls


# -- boundary crossings -------------------------------------------------------------


def boundary_crossings(ctx: PolygonPaths, s: Point, t: Point,
                       tol: Tolerance = DEFAULT_TOL,
                       samples_per_edge: int = 8) -> List[Point]:
    """The two points where B(s,t) meets the polygon boundary."""
    poly = ctx.polygon

    def f(p: Point) -> float:
        return ctx.distance(s, p) - ctx.distance(t, p)

    brackets: List[Tuple[float, float]] = []
    per = poly.perimeter
    params: List[float] = []
    acc = 0.0
    for a, b in poly.edges():
        L = dist(a, b)
        for i in range(samples_per_edge):
            params.append(acc + L * i / samples_per_edge)
        acc += L
    vals = [f(poly.boundary_point(u)) for u in params]
    m = len(params)
    for i in range(m):
        u0, u1 = params[i], params[(i + 1) % m] if i + 1 < m else per
        v0, v1 = vals[i], vals[(i + 1) % m]
        if v0 == 0.0:
            brackets.append((u0, u0))
        elif v0 * v1 < 0:
            brackets.append((u0, u1))
    roots: List[Point] = []
    for u0, u1 in brackets:
        if u0 == u1:
            roots.append(poly.boundary_point(u0))
            continue
        a, b = u0, u1
        fa = f(poly.boundary_point(a))
        for _ in range(80):
            mid = (a + b) / 2
            fm = f(poly.boundary_point(mid))
            if fa * fm <= 0:
                b = mid
            else:
                a, fa = mid, fm
            if b - a <= tol.eps_solve:
                break
        roots.append(poly.boundary_point((a + b) / 2))
    # dedupe near-identical roots
    out: List[Point] = []
    for r in roots:
        if all(dist(r, q) > 1e-6 for q in out):
            out.append(r)
    return out


# -- marching ------------------------------------------------------------------------


@dataclass
class _MarchStop:
    reason: str          # "target" | "boundary"
    point: Point


def _anchor(ctx: PolygonPaths, site: Point, p: Point) -> Tuple[Point, float]:
    path = ctx.shortest_path(site, p)
    if len(path.waypoints) < 2:
        return site, 0.0
    return path.waypoints[-2], path.prefix[-2]


def _march(ctx: PolygonPaths, s: Point, t: Point, start: Point,
           direction: Tuple[float, float], tol: Tolerance,
           walls: List[Tuple[Point, Point]],
           target: Optional[Point] = None,
           max_arcs: Optional[int] = None) -> Tuple[List[BisectorArc], _MarchStop]:
    poly = ctx.polygon
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in poly.vertices))
    eps = tol.eps_geom * scale
    step_eps = 1e-9 * scale
    limit = max_arcs if max_arcs is not None else 2 * poly.n + 8

    arcs: List[BisectorArc] = []
    p = start
    dir_prev = direction
    for _ in range(limit):
        qx = Point(p[0] + 10 * step_eps * dir_prev[0], p[1] + 10 * step_eps * dir_prev[1])
        probe = qx if poly.location(qx, eps) != EXTERIOR else p
        u, wu = _anchor(ctx, s, probe)
        v, wv = _anchor(ctx, t, probe)
        k = wv - wu
        conic = _Conic(u, v, k)
        if abs(conic.residual(p)) > 1e-5 * scale:
            raise BisectorError(
                f"march point off conic: residual={conic.residual(p):.3g}")
        tang = conic.tangent(p)
        sgn = 1.0 if tang[0] * dir_prev[0] + tang[1] * dir_prev[1] >= 0 else -1.0
        eta_p = conic.param(p)

        best: Optional[Tuple[float, Point, str]] = None

        def consider(eta: float, q: Point, reason: str, margin: float) -> None:
            nonlocal best
            ahead = (eta - eta_p) * sgn
            if ahead <= margin:
                return
            if best is None or ahead < best[0]:
                best = (ahead, q, reason)

        for a, b in walls:
            for eta, q in conic.segment_hits(a, b, 1e-12):
                consider(eta, q, "wall", step_eps)
        for a, b in poly.edges():
            for eta, q in conic.segment_hits(a, b, 1e-12):
                consider(eta, q, "boundary", 10 * step_eps)
        if target is not None and abs(conic.residual(target)) <= 1e-7 * scale:
            eta_t = conic.param(target)
            if dist(conic.point(eta_t), target) <= 1e-6 * scale:
                ahead_t = (eta_t - eta_p) * sgn
                # the target wins ties (it may sit exactly on a wall or on
                # the polygon boundary)
                if ahead_t > -1e-12 and (best is None
                                         or ahead_t <= best[0] + 1e-7 * scale):
                    best = (ahead_t, target, "target")

        if best is None:
            raise BisectorError("bisector march found no forward crossing")
        _, q, reason = best
        kind = STRAIGHT if conic.straight else HYPERBOLIC
        arcs.append(BisectorArc(kind, u, v, k, p, q))
        if reason == "target":
            return arcs, _MarchStop("target", q)
        if reason == "boundary":
            return arcs, _MarchStop("boundary", q)
        tang_q = conic.tangent(q)
        if sgn < 0:
            tang_q = (-tang_q[0], -tang_q[1])
        p = q
        dir_prev = tang_q
    raise BisectorError("bisector march exceeded the arc limit")


def _inward_tangent(poly: SimplePolygon, conic: _Conic, p: Point,
                    eps: float) -> Tuple[float, float]:
    tang = conic.tangent(p)
    for cand in (tang, (-tang[0], -tang[1])):
        probe = Point(p[0] + 1e-6 * cand[0], p[1] + 1e-6 * cand[1])
        if poly.location(probe, eps) == INTERIOR:
            return cand
    raise BisectorError("bisector tangent does not enter the polygon")


def bisector(ctx: PolygonPaths, s: Point, t: Point,
             tol: Tolerance = DEFAULT_TOL) -> Bisector:
    """Full bisector of two sites, from boundary to boundary.

    Arcs are oriented so the region closer to s lies locally on the left.
    """
    s, t = pt(*s), pt(*t)
    if s == t:
        raise BisectorError("coincident sites have no bisector")
    poly = ctx.polygon
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in poly.vertices))
    eps = tol.eps_geom * scale

    crossings = boundary_crossings(ctx, s, t, tol)
    if len(crossings) < 2:
        raise BisectorError(f"expected 2 boundary crossings, found {len(crossings)}")
    start = crossings[0]

    u, wu = _anchor(ctx, s, start)
    v, wv = _anchor(ctx, t, start)
    conic = _Conic(u, v, wv - wu)
    direction = _inward_tangent(poly, conic, start, eps)
    walls = spm_walls(ctx, s) + spm_walls(ctx, t)
    arcs, stop = _march(ctx, s, t, start, direction, tol, walls)
    if stop.reason != "boundary":
        raise BisectorError("full bisector march did not reach the boundary")
    end = stop.point
    if min(dist(end, c) for c in crossings[1:]) > 1e-4 * scale:
        raise BisectorError("march ended away from the expected boundary crossing")

    bis = Bisector(s, t, arcs)
    if not _s_side_left(ctx, bis, s, t):
        bis = Bisector(s, t, [BisectorArc(a.kind, a.focus_s, a.focus_t, a.offset,
                                          a.p1, a.p0) for a in reversed(arcs)])
    return bis


def _s_side_left(ctx: PolygonPaths, bis: Bisector, s: Point, t: Point) -> bool:
    arc = max(bis.arcs, key=lambda a: a.length_hint)
    pts = arc.sample(5)
    p = pts[2]
    conic = arc.conic()
    tang = conic.tangent(p)
    e0, e1 = conic.param(arc.p0), conic.param(arc.p1)
    if e1 < e0:
        tang = (-tang[0], -tang[1])
    left = (-tang[1], tang[0])
    probe = Point(p[0] + 1e-5 * left[0], p[1] + 1e-5 * left[1])
    try:
        return ctx.distance(s, probe) <= ctx.distance(t, probe)
    except Exception:
        return True


def trace_edge(ctx: PolygonPaths, s: Point, t: Point, source: Point,
               target: Point, tol: Tolerance = DEFAULT_TOL,
               walls: Optional[List[Tuple[Point, Point]]] = None) -> ArcChain:
    """Portion of B(s,t) marched from `source` toward `target`."""
    s, t = pt(*s), pt(*t)
    source, target = pt(*source), pt(*target)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in ctx.polygon.vertices))
    for p in (source, target):
        res = abs(ctx.distance(s, p) - ctx.distance(t, p))
        if res > 100 * tol.eps_dist * scale:
            raise BisectorError(f"trace endpoint off the bisector: residual={res:.3g}")
    if dist(source, target) <= tol.eps_solve:
        return ArcChain([], source, target)
    if walls is None:
        walls = spm_walls(ctx, s) + spm_walls(ctx, t)

    u, wu = _anchor(ctx, s, source)
    v, wv = _anchor(ctx, t, source)
    conic = _Conic(u, v, wv - wu)
    tang = conic.tangent(source)
    errors = []
    for cand in (tang, (-tang[0], -tang[1])):
        try:
            arcs, stop = _march(ctx, s, t, source, cand, tol, walls, target=target)
        except BisectorError as e:
            errors.append(e)
            continue
        if stop.reason == "target":
            return ArcChain(arcs, source, target)
    raise BisectorError(f"trace_edge never reached the target (tried both "
                        f"directions): {errors}")
