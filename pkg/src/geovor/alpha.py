"""The adjacent-triple equidistant-point query used by the sweep.

Given adjacent active sites s, t, r (t in the middle) and known Voronoi
vertices on B(s,t) and B(t,r), computes the point equidistant from all three
or returns null. Nulls are fine for non-vertices; genuine Voronoi vertices
must be found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .chains import (PseudoConvexChain, SolveResult, chain_from_paths,
                     fixpoint_solve_bisection, fixpoint_solve_tentative)
from .geometry import DEFAULT_TOL, Point, Tolerance, dist, pt, segments_properly_cross, point_segment_distance
from .hull import _chain_contains
from .paths import PolygonPaths, path_midpoint
from .triple_center import (BACKEND_BISECTION, INTERIOR, TripleCenterError,
                            triple_center)

FOUND = "found"
NULL = "null"

CENTER_EQUIDISTANT = "center_equidistant"
EDGE_UV = "edge_uv"
LEFT_TAIL = "left_tail"
RIGHT_TAIL = "right_tail"
REJECTED_TWOCASES = "rejected_twocases"
FAILED_VALIDATION = "failed_validation"
NO_FIXPOINT = "no_fixpoint"


class AlphaInputError(ValueError):
    """Inconsistent query (a beta point off its bisector); distinct from null."""


@dataclass
class AlphaQuery:
    s: Point
    t: Point
    r: Point
    beta_st: Point
    beta_tr: Point
    center_root: Point  # c*


@dataclass
class AlphaResult:
    status: str
    case_tag: str
    alpha: Optional[Point] = None
    u: Optional[Point] = None
    v: Optional[Point] = None
    u_prime: Optional[Point] = None
    v_prime: Optional[Point] = None
    t_uv: Optional[Point] = None
    anchors: Optional[Tuple[Point, Point, Point]] = None  # p_s, p_t, p_r
    crosses_uv: Optional[bool] = None        # statement 6
    in_triangle: Optional[bool] = None       # Lemma statement 1
    solve: Optional[SolveResult] = None
    residual: float = math.nan

    @property
    def found(self) -> bool:
        return self.status == FOUND


def _check_beta(ctx: PolygonPaths, a: Point, b: Point, beta: Point,
                scale: float) -> None:
    res = abs(ctx.distance(a, beta) - ctx.distance(b, beta))
    if res > 1e-4 * scale:
        raise AlphaInputError(
            f"beta {beta} is not on the bisector of {a},{b} (residual {res:.3g})")


def _solve_chains(backend: str, A: PseudoConvexChain, B: PseudoConvexChain,
                  C: PseudoConvexChain, tol: Tolerance) -> SolveResult:
    if backend == "tentative":
        return fixpoint_solve_tentative(A, B, C, tol)
    return fixpoint_solve_bisection(A, B, C, tol)


def _validated_point(ctx: PolygonPaths, sites: Tuple[Point, Point, Point],
                     solve: SolveResult, tol: Tolerance
                     ) -> Optional[Tuple[Point, float, Tuple[Point, Point, Point]]]:
    """First solver candidate that reproduces equidistance under true geodesic
    distances, refined by re-deriving anchors from the actual paths."""
    from .triple_center import _anchor_iteration

    for cand in (solve.candidates or []):
        seed = cand[0]
        if not ctx.polygon.contains(seed, 1e-6):
            continue
        x, radius, anchors = _anchor_iteration(ctx, sites, seed, tol)
        if not math.isfinite(radius):
            continue
        ds = [ctx.distance(site, x) for site in sites]
        if max(ds) - min(ds) <= tol.eps_dist:
            return x, sum(ds) / 3.0, anchors
    return None


def alpha(ctx: PolygonPaths, query: AlphaQuery, tol: Tolerance = DEFAULT_TOL,
          backend: str = BACKEND_BISECTION) -> AlphaResult:
    s, t, r = pt(*query.s), pt(*query.t), pt(*query.r)
    beta_st, beta_tr = pt(*query.beta_st), pt(*query.beta_tr)
    c_star = pt(*query.center_root)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in ctx.polygon.vertices))
    _check_beta(ctx, s, t, beta_st, scale)
    _check_beta(ctx, t, r, beta_tr, scale)

    tc = triple_center(ctx, s, t, r, tol, backend)
    c = tc.center
    ds, dt, dr = (ctx.distance(s, c), ctx.distance(t, c), ctx.distance(r, c))
    if max(ds, dt, dr) - min(ds, dt, dr) <= tol.eps_dist:
        return _validate(ctx, query, c, CENTER_EQUIDISTANT, tol,
                         result=AlphaResult(FOUND, CENTER_EQUIDISTANT, alpha=c,
                                            residual=max(ds, dt, dr) - min(ds, dt, dr)))

    # c is the midpoint of the two farthest-at-c sites
    if dt >= min(ds, dr) - tol.eps_dist:
        # middle site among the equal-max pair: alpha cannot be a vertex
        return AlphaResult(NULL, REJECTED_TWOCASES)

    return _tail_or_edge(ctx, query, c, tol, backend)


def _locate_on_path(path_wps: Tuple[Point, ...], p: Point, eps: float) -> Optional[int]:
    for i, w in enumerate(path_wps):
        if dist(w, p) <= eps:
            return i
    return None


def _tail_or_edge(ctx: PolygonPaths, query: AlphaQuery, c: Point,
                  tol: Tolerance, backend: str) -> AlphaResult:
    s, t, r = pt(*query.s), pt(*query.t), pt(*query.r)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in ctx.polygon.vertices))
    eps = 1e-7 * scale

    path_sr = ctx.shortest_path(s, r)
    s_ap = ctx.junction_vertex(s, t, r)
    r_ap = ctx.junction_vertex(r, s, t)
    i_s = _locate_on_path(path_sr.waypoints, s_ap, eps)
    i_r = _locate_on_path(path_sr.waypoints, r_ap, eps)
    if i_s is None or i_r is None or i_s > i_r:
        raise TripleCenterError("apexes not found on pi(s,r)")
    L_c = path_sr.length / 2.0
    d_s_ap = path_sr.prefix[i_s]
    d_r_ap = path_sr.prefix[i_r]

    if L_c < d_s_ap - tol.eps_dist:
        return _run_case(ctx, query, c, tol, backend, LEFT_TAIL)
    if L_c > d_r_ap + tol.eps_dist:
        # symmetric to LEFT_TAIL with s and r swapped
        swapped = AlphaQuery(r, t, s, query.beta_tr, query.beta_st, query.center_root)
        res = _run_case(ctx, swapped, c, tol, backend, LEFT_TAIL)
        if res.case_tag == LEFT_TAIL:
            res.case_tag = RIGHT_TAIL
        return res
    return _run_case(ctx, query, c, tol, backend, EDGE_UV)


def _run_case(ctx: PolygonPaths, query: AlphaQuery, c: Point, tol: Tolerance,
              backend: str, tag: str) -> AlphaResult:
    """Lemma 5/8 construction: identical chain geometry for both cases."""
    s, t, r = pt(*query.s), pt(*query.t), pt(*query.r)
    beta = pt(*query.beta_st)
    scale = max(1.0, *(max(abs(v[0]), abs(v[1])) for v in ctx.polygon.vertices))
    eps = 1e-7 * scale

    path_sr = ctx.shortest_path(s, r)
    s_ap = ctx.junction_vertex(s, t, r)
    r_ap = ctx.junction_vertex(r, s, t)
    i_s = _locate_on_path(path_sr.waypoints, s_ap, eps)
    i_r = _locate_on_path(path_sr.waypoints, r_ap, eps)
    sub = path_sr.waypoints[i_s:i_r + 1]  # pi(s', r')

    if tag == LEFT_TAIL:
        if len(sub) < 2:
            return AlphaResult(NULL, NO_FIXPOINT)
        u, v = sub[0], sub[1]
    else:
        # edge of pi(s',r') containing c, d(s,u) < d(s,v), via binary search
        L_c = path_sr.length / 2.0
        lo, hi = i_s, i_r
        if path_sr.prefix[i_s] >= L_c:
            u, v = sub[0], sub[min(1, len(sub) - 1)]
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if path_sr.prefix[mid] >= L_c:
                    hi = mid
                else:
                    lo = mid
            u, v = path_sr.waypoints[lo], path_sr.waypoints[hi]

    u_pr = ctx.junction_vertex(s, r, beta)
    v_pr = ctx.junction_vertex(r, s, beta)
    t_uv = ctx.junction_vertex(t, u, v)

    chain_s = chain_from_paths(ctx.shortest_path(u_pr, beta),
                               ctx.shortest_path(u_pr, v_pr), ctx.distance(s, u_pr))
    chain_r = chain_from_paths(ctx.shortest_path(v_pr, u_pr),
                               ctx.shortest_path(v_pr, beta), ctx.distance(r, v_pr))
    chain_t = chain_from_paths(ctx.shortest_path(t_uv, u),
                               ctx.shortest_path(t_uv, v), ctx.distance(t, t_uv))

    solved = None
    for A, B, C in ((chain_s, chain_t, chain_r),
                    (_rev(chain_s), _rev(chain_r), _rev(chain_t))):
        solve = _solve_chains(backend, A, B, C, tol)
        got = _validated_point(ctx, (s, t, r), solve, tol)
        if got is not None:
            solved = (solve, got)
            break
    if solved is None:
        return AlphaResult(NULL, NO_FIXPOINT, u=u, v=v, u_prime=u_pr,
                           v_prime=v_pr, t_uv=t_uv)
    solve, (x, radius, anchors_raw) = solved

    # anchors labeled per site: recompute from the actual paths at x
    p_anch = []
    for site in (s, t, r):
        path = ctx.shortest_path(site, x)
        p_anch.append(path.waypoints[-2] if len(path.waypoints) >= 2 else site)
    p_s, p_t, p_r = p_anch

    crosses = _segment_meets(x, p_t, u, v, tol.eps_geom * scale)
    ring = (list(ctx.shortest_path(u_pr, v_pr).waypoints)
            + list(ctx.shortest_path(v_pr, beta).waypoints[1:])
            + list(ctx.shortest_path(beta, u_pr).waypoints[1:-1]))
    inside = _chain_contains(ring, x, 1e-6 * scale)

    res = AlphaResult(FOUND, tag, alpha=x, u=u, v=v, u_prime=u_pr, v_prime=v_pr,
                      t_uv=t_uv, anchors=(p_s, p_t, p_r), crosses_uv=crosses,
                      in_triangle=inside, solve=solve)
    return _validate(ctx, query, x, tag, tol, result=res)


def _rev(chain: PseudoConvexChain) -> PseudoConvexChain:
    return PseudoConvexChain(list(reversed(chain.pts)),
                             len(chain.pts) - 1 - chain.apex, chain.base_weight)


def _segment_meets(a: Point, b: Point, c: Point, d: Point, eps: float) -> bool:
    """Proper crossing or endpoint touch within eps."""
    if segments_properly_cross(a, b, c, d):
        return True
    return (point_segment_distance(c, a, b) <= eps
            or point_segment_distance(d, a, b) <= eps
            or point_segment_distance(a, c, d) <= eps
            or point_segment_distance(b, c, d) <= eps)


def _validate(ctx: PolygonPaths, query: AlphaQuery, x: Point, tag: str,
              tol: Tolerance, result: AlphaResult) -> AlphaResult:
    s, t, r = pt(*query.s), pt(*query.t), pt(*query.r)
    c_star = pt(*query.center_root)
    ds = [ctx.distance(p, x) for p in (s, t, r)]
    residual = max(ds) - min(ds)
    result.residual = residual
    if residual > tol.eps_dist:
        return AlphaResult(NULL, FAILED_VALIDATION, residual=residual)
    lim = min(ctx.distance(c_star, query.beta_st), ctx.distance(c_star, query.beta_tr))
    if ctx.distance(c_star, x) > lim + tol.eps_dist:
        return AlphaResult(NULL, FAILED_VALIDATION, residual=residual)
    result.status = FOUND
    result.alpha = x
    return result
