"""Geodesic triangles and the three-point geodesic center query.

The center of three points is either the midpoint of one pairwise geodesic
(when the third point is no farther from it) or the unique interior point
equidistant from all three, found by the chain fixpoint solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .chains import (PseudoConvexChain, SolveResult, chain_from_paths,
                     equidistant_from_anchors, fixpoint_solve_bisection,
                     fixpoint_solve_tentative)
from .geometry import DEFAULT_TOL, Point, Tolerance, dist, orientation, pt
from .paths import GeodesicPath, PolygonPaths, Q_END, anchor, path_midpoint

ON_PATH = "on_path"
INTERIOR = "interior"

BACKEND_BISECTION = "bisection"
BACKEND_TENTATIVE = "tentative"


class TripleCenterError(RuntimeError):
    pass


@dataclass
class GeodesicTriangle:
    inputs: Tuple[Point, Point, Point]
    apexes: Tuple[Point, Point, Point]           # s', t', r'
    sides: Tuple[GeodesicPath, GeodesicPath, GeodesicPath]  # (s't'), (t'r'), (r's')

    def loop_area(self) -> float:
        ring = (list(self.sides[0].waypoints)
                + list(self.sides[1].waypoints[1:])
                + list(self.sides[2].waypoints[1:]))
        s = 0.0
        for i in range(len(ring) - 1):
            a, b = ring[i], ring[i + 1]
            s += a[0] * b[1] - b[0] * a[1]
        return 0.5 * s


def is_convex_chain(path: GeodesicPath, eps_geom: float = DEFAULT_TOL.eps_geom) -> bool:
    """All turns along the polyline share one sign (collinear turns allowed)."""
    wps = path.waypoints
    sign = 0
    for i in range(1, len(wps) - 1):
        o = orientation(wps[i - 1], wps[i], wps[i + 1], eps_geom)
        if o == 0:
            continue
        if sign == 0:
            sign = o
        elif o != sign:
            return False
    return True


def geodesic_triangle(ctx: PolygonPaths, s: Point, t: Point, r: Point,
                      tol: Tolerance = DEFAULT_TOL) -> GeodesicTriangle:
    s, t, r = pt(*s), pt(*t), pt(*r)
    sa = ctx.junction_vertex(s, t, r)
    ta = ctx.junction_vertex(t, s, r)
    ra = ctx.junction_vertex(r, s, t)
    sides = (ctx.shortest_path(sa, ta), ctx.shortest_path(ta, ra),
             ctx.shortest_path(ra, sa))
    for side in sides:
        if not is_convex_chain(side, tol.eps_geom):
            raise TripleCenterError(f"triangle side is not a convex chain: {side.waypoints}")
    return GeodesicTriangle((s, t, r), (sa, ta, ra), sides)


@dataclass
class TripleCenterResult:
    center: Point
    radius: float
    case: str                      # ON_PATH or INTERIOR
    pair: Optional[Tuple[Point, Point]] = None   # defining pair for ON_PATH
    anchors: Optional[Tuple[Point, Point, Point]] = None  # p_s, p_t, p_r
    midpoints: Optional[Tuple[Point, Point, Point]] = None  # p_st, p_sr, p_tr
    solve: Optional[SolveResult] = None
    residual: float = 0.0


def _interior_chains(ctx: PolygonPaths, s: Point, t: Point, r: Point,
                     tri: GeodesicTriangle, tol: Tolerance
                     ) -> Tuple[PseudoConvexChain, PseudoConvexChain, PseudoConvexChain,
                                Tuple[Point, Point, Point]]:
    sa, ta, ra = tri.apexes
    p_st = path_midpoint(ctx.shortest_path(s, t), tol)
    p_sr = path_midpoint(ctx.shortest_path(s, r), tol)
    p_tr = path_midpoint(ctx.shortest_path(t, r), tol)
    gs = chain_from_paths(ctx.shortest_path(sa, p_sr), ctx.shortest_path(sa, p_st),
                          ctx.distance(s, sa))
    gt = chain_from_paths(ctx.shortest_path(ta, p_st), ctx.shortest_path(ta, p_tr),
                          ctx.distance(t, ta))
    gr = chain_from_paths(ctx.shortest_path(ra, p_tr), ctx.shortest_path(ra, p_sr),
                          ctx.distance(r, ra))
    return gs, gt, gr, (p_st, p_sr, p_tr)


def _solve(backend: str, A: PseudoConvexChain, B: PseudoConvexChain,
           C: PseudoConvexChain, tol: Tolerance) -> SolveResult:
    if backend == BACKEND_TENTATIVE:
        return fixpoint_solve_tentative(A, B, C, tol)
    return fixpoint_solve_bisection(A, B, C, tol)


def _anchor_iteration(ctx: PolygonPaths, sites: Tuple[Point, Point, Point],
                      x: Point, tol: Tolerance, iters: int = 4
                      ) -> Tuple[Point, float, Tuple[Point, Point, Point]]:
    """Re-derive anchors from true geodesic paths at x and re-solve; converges
    immediately once the anchors are the correct ones."""
    anchors_pts: Tuple[Point, Point, Point] = (x, x, x)
    for _ in range(iters):
        anchors = []
        try:
            for site in sites:
                path = ctx.shortest_path(site, x)
                if len(path.waypoints) >= 2:
                    anchors.append((path.waypoints[-2], path.prefix[-2]))
                else:
                    anchors.append((site, 0.0))
        except Exception:
            break
        cands = [cr for cr in equidistant_from_anchors(anchors)
                 if ctx.polygon.contains(cr[0], 1e-6)]
        if not cands:
            break
        best = min(cands, key=lambda cr: dist(cr[0], x))
        anchors_pts = tuple(a for a, _ in anchors)  # type: ignore[assignment]
        if dist(best[0], x) <= tol.eps_solve:
            return best[0], best[1], anchors_pts
        x = best[0]
    try:
        radius = max(ctx.distance(site, x) for site in sites)
    except Exception:
        radius = math.inf
    return x, radius, anchors_pts


def triple_center(ctx: PolygonPaths, s: Point, t: Point, r: Point,
                  tol: Tolerance = DEFAULT_TOL,
                  backend: str = BACKEND_BISECTION) -> TripleCenterResult:
    """Geodesic center of three points.

    Tests the three path midpoints first; otherwise the center is interior to
    the geodesic triangle, equidistant from all three inputs, and is computed
    on the pseudo-convex chains bounded by the midpoints.
    """
    s, t, r = pt(*s), pt(*t), pt(*r)
    paths = {("s", "t"): ctx.shortest_path(s, t),
             ("s", "r"): ctx.shortest_path(s, r),
             ("t", "r"): ctx.shortest_path(t, r)}
    third = {("s", "t"): r, ("s", "r"): t, ("t", "r"): s}
    named = {"s": s, "t": t, "r": r}
    mids = {}
    for key, path in paths.items():
        if path.length <= tol.eps_solve:
            mids[key] = path.waypoints[0]
        else:
            mids[key] = path_midpoint(path, tol)
    mid_tuple = (mids[("s", "t")], mids[("s", "r")], mids[("t", "r")])

    best_onpath = None
    for key, path in paths.items():
        half = path.length / 2.0
        d3 = ctx.distance(third[key], mids[key])
        if half >= d3 - tol.eps_dist:
            if best_onpath is None or half < best_onpath[0]:
                best_onpath = (half, key)
    if best_onpath is not None:
        half, key = best_onpath
        return TripleCenterResult(center=mids[key], radius=half, case=ON_PATH,
                                  pair=(named[key[0]], named[key[1]]),
                                  midpoints=mid_tuple,
                                  residual=0.0)

    tri = geodesic_triangle(ctx, s, t, r, tol)
    if tri.loop_area() < 0.0:
        t, r = r, t
        tri = geodesic_triangle(ctx, s, t, r, tol)
    gs, gt, gr, mid3 = _interior_chains(ctx, s, t, r, tri, tol)
    solve = _solve(backend, gs, gt, gr, tol)
    if solve.point is None and not solve.candidates:
        raise TripleCenterError("fixpoint solver produced no candidate")

    seeds = [c[0] for c in (solve.candidates or [])]
    # last resort: a point inside the midpoint triangle
    seeds.append(Point(sum(m[0] for m in mid3) / 3.0, sum(m[1] for m in mid3) / 3.0))
    best = None
    for seed in seeds:
        if not ctx.polygon.contains(seed, 1e-6):
            continue
        x, radius, anchors = _anchor_iteration(ctx, (s, t, r), seed, tol)
        if not math.isfinite(radius):
            continue
        ds, dt, dr = (ctx.distance(s, x), ctx.distance(t, x), ctx.distance(r, x))
        residual = max(ds, dt, dr) - min(ds, dt, dr)
        if best is None or residual < best[0]:
            best = (residual, x, (ds + dt + dr) / 3.0, anchors)
        if residual <= tol.eps_dist:
            break
    if best is None or best[0] > 100 * tol.eps_dist:
        resid = math.inf if best is None else best[0]
        raise TripleCenterError(
            f"interior solve failed: residual={resid:.3g} backend={solve.backend}")
    residual, x, radius, anchors = best
    return TripleCenterResult(center=x, radius=radius, case=INTERIOR,
                              anchors=anchors, midpoints=mid3, solve=solve,
                              residual=residual)
