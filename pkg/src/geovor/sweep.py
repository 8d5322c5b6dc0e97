"""Pipeline: boundary-restricted diagram, reverse geodesic sweep, expansion.

The sweep maintains the cyclic list of sites whose farthest cells still meet
the shrinking geodesic circle around the center, popping candidate vertices
from a priority queue ordered by decreasing distance from the center. Only
the topological tree is built here; `expand` turns abstract edges into arc
chains by bisector tracing.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .alpha import FOUND, AlphaQuery, AlphaResult, alpha
from .bisector import ArcChain, boundary_crossings, spm_walls, trace_edge
from .geometry import (DEFAULT_TOL, Point, SimplePolygon, SiteSet, Tolerance,
                       dist, pt, segment_intersection)
from .hull import CenterResult, GeodesicHull, geodesic_center, geodesic_hull
from .paths import PolygonPaths

LEAF = "leaf"
DEGREE3 = "degree3"
ROOT = "root"

BOUNDARY_DNC = "dnc"
BOUNDARY_BRUTE = "brute"


class SweepError(RuntimeError):
    pass


@dataclass
class RunStats:
    alpha_queries: int = 0
    events_popped: int = 0
    queue_pushes: int = 0
    queue_pops: int = 0
    stale_pops: int = 0
    boundary_cells: int = 0
    breakpoints: int = 0
    comparator_rounds_max: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


# -- boundary diagram ----------------------------------------------------------------


@dataclass
class BoundaryDiagram:
    sites: List[Point]            # full indexable site list
    order: List[int]              # site indices in cyclic boundary order
    leaves: List[Point]           # leaves[i] separates order[i] from order[i+1]
    leaf_params: List[float]

    @property
    def cell_count(self) -> int:
        return len(self.order)


def _farthest_site(ctx: PolygonPaths, sites: Sequence[Point],
                   active: Sequence[int], x: Point) -> int:
    best, best_d = active[0], -1.0
    for i in active:
        d = ctx.distance(sites[i], x)
        if d > best_d:
            best, best_d = i, d
    return best


def _pair_crossing_params(ctx: PolygonPaths, a: Point, b: Point, lo: float,
                          hi: float, tol: Tolerance, samples: int = 7) -> List[float]:
    """Zeros of d(a,.) - d(b,.) on the boundary parameter interval [lo, hi]."""
    poly = ctx.polygon
    if poly.is_convex:
        # the difference vanishes on the perpendicular bisector line only
        mx, my = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
        nx, ny = b[0] - a[0], b[1] - a[1]
        out = []
        span = hi - lo
        k = max(2, math.ceil(span / (poly.perimeter / (4 * poly.n))))
        # walk the boundary portion in segments between parameter knots
        knots = [lo + span * i / k for i in range(k + 1)]
        for u0, u1 in zip(knots, knots[1:]):
            p0 = poly.boundary_point(u0)
            p1 = poly.boundary_point(u1)
            f0 = (p0[0] - mx) * nx + (p0[1] - my) * ny
            f1 = (p1[0] - mx) * nx + (p1[1] - my) * ny
            if f0 == 0.0:
                out.append(u0)
            elif f0 * f1 < 0:
                out.append(u0 + (u1 - u0) * f0 / (f0 - f1))
        return out

    def f(u: float) -> float:
        p = poly.boundary_point(u)
        return ctx.distance(a, p) - ctx.distance(b, p)

    knots = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    vals = [f(u) for u in knots]
    out = []
    for (u0, v0), (u1, v1) in zip(zip(knots, vals), zip(knots[1:], vals[1:])):
        if v0 == 0.0:
            out.append(u0)
            continue
        if v0 * v1 >= 0:
            continue
        x0, x1, fx0 = u0, u1, v0
        for _ in range(60):
            mid = (x0 + x1) / 2
            fm = f(mid)
            if fx0 * fm <= 0:
                x1 = mid
            else:
                x0, fx0 = mid, fm
            if x1 - x0 <= tol.eps_solve:
                break
        out.append((x0 + x1) / 2)
    return out


def boundary_fvd(ctx: PolygonPaths, sites: SiteSet, hull: GeodesicHull,
                 tol: Tolerance = DEFAULT_TOL,
                 method: str = BOUNDARY_DNC) -> BoundaryDiagram:
    """Farthest-site partition of the polygon boundary."""
    site_list = list(sites.sites)
    index_of = {p: i for i, p in enumerate(site_list)}
    active = [index_of[p] for p in hull.hull_sites]
    if method == BOUNDARY_BRUTE:
        runs = _boundary_brute(ctx, site_list, active, tol)
    else:
        runs = _boundary_dnc(ctx, site_list, active, tol)
    order = [i for i, _, _ in runs]
    leaves, params = [], []
    for _, _, end_param in runs:
        leaves.append(ctx.polygon.boundary_point(end_param))
        params.append(end_param)
    return BoundaryDiagram(site_list, order, leaves, params)


def _boundary_brute(ctx: PolygonPaths, sites: List[Point], active: List[int],
                    tol: Tolerance) -> List[Tuple[int, float, float]]:
    poly = ctx.polygon
    per = poly.perimeter
    n_samples = max(96, 12 * poly.n)
    params = [per * i / n_samples for i in range(n_samples)]
    labels = [_farthest_site(ctx, sites, active, poly.boundary_point(u)) for u in params]
    runs: List[Tuple[int, float, float]] = []  # (site, start, end)
    # refine each label change by pairwise bisection
    changes: List[Tuple[float, int]] = []  # (param, new owner)
    for i in range(n_samples):
        j = (i + 1) % n_samples
        if labels[i] == labels[j]:
            continue
        lo, hi = params[i], params[j] if j != 0 else per
        za = _pair_crossing_params(ctx, sites[labels[i]], sites[labels[j]],
                                   lo, hi, tol, samples=5)
        cut = za[0] if za else (lo + hi) / 2
        changes.append((cut, labels[j]))
    if not changes:
        return [(labels[0], 0.0, per)]
    changes.sort()
    out: List[Tuple[int, float, float]] = []
    for k in range(len(changes)):
        start = changes[k - 1][0] if k > 0 else changes[-1][0] - per
        out.append((changes[k - 1][1] if k > 0 else changes[-1][1],
                    start % per, changes[k][0]))
    return _merge_runs(out, per)


def _merge_runs(runs: List[Tuple[int, float, float]], per: float
                ) -> List[Tuple[int, float, float]]:
    if not runs:
        return runs
    out = [runs[0]]
    for site, s0, s1 in runs[1:]:
        if site == out[-1][0]:
            out[-1] = (site, out[-1][1], s1)
        else:
            out.append((site, s0, s1))
    if len(out) > 1 and out[0][0] == out[-1][0]:
        first = out.pop(0)
        out[-1] = (out[-1][0], out[-1][1], first[2] + per)
    return out


def _boundary_dnc(ctx: PolygonPaths, sites: List[Point], active: List[int],
                  tol: Tolerance) -> List[Tuple[int, float, float]]:
    per = ctx.polygon.perimeter
    if len(active) == 1:
        return [(active[0], 0.0, per)]
    if len(active) <= 2:
        return _two_site_runs(ctx, sites, active, tol)
    half = len(active) // 2
    left = _boundary_dnc(ctx, sites, active[:half], tol)
    right = _boundary_dnc(ctx, sites, active[half:], tol)
    return _merge_boundary(ctx, sites, left, right, tol)


def _two_site_runs(ctx: PolygonPaths, sites: List[Point], active: List[int],
                   tol: Tolerance) -> List[Tuple[int, float, float]]:
    a, b = active[0], active[1]
    per = ctx.polygon.perimeter
    cuts = sorted(_pair_crossing_params(ctx, sites[a], sites[b], 0.0, per, tol,
                                        samples=max(24, 4 * ctx.polygon.n)))
    if len(cuts) < 2:
        # one cell swallows the boundary
        owner = _farthest_site(ctx, sites, active, ctx.polygon.boundary_point(0.0))
        return [(owner, 0.0, per)]
    runs: List[Tuple[int, float, float]] = []
    for k in range(len(cuts)):
        lo = cuts[k]
        hi = cuts[(k + 1) % len(cuts)]
        if k + 1 == len(cuts):
            hi += per
        mid = ctx.polygon.boundary_point(((lo + hi) / 2) % per)
        owner = a if ctx.distance(sites[a], mid) >= ctx.distance(sites[b], mid) else b
        runs.append((owner, lo, hi))
    return _merge_runs(runs, per)


def _merge_boundary(ctx: PolygonPaths, sites: List[Point],
                    left: List[Tuple[int, float, float]],
                    right: List[Tuple[int, float, float]],
                    tol: Tolerance) -> List[Tuple[int, float, float]]:
    per = ctx.polygon.perimeter
    cuts = sorted({(s0 % per) for _, s0, _ in left} | {(s0 % per) for _, s0, _ in right})
    if not cuts:
        cuts = [0.0]

    def owner_at(runs, u: float) -> int:
        u = u % per
        for site, s0, s1 in runs:
            if s0 <= u < s1 or s0 <= u + per < s1:
                return site
        return runs[-1][0]

    out: List[Tuple[int, float, float]] = []
    for k in range(len(cuts)):
        lo = cuts[k]
        hi = cuts[(k + 1) % len(cuts)] if k + 1 < len(cuts) else cuts[0] + per
        if hi - lo <= 1e-12:
            continue
        eps_in = min(1e-9, (hi - lo) / 4)
        la = owner_at(left, lo + eps_in)
        rb = owner_at(right, lo + eps_in)
        zeros = [] if la == rb else _pair_crossing_params(
            ctx, sites[la], sites[rb], lo, hi, tol)
        pieces = [lo] + [z for z in zeros if lo + 1e-12 < z < hi - 1e-12] + [hi]
        for p0, p1 in zip(pieces, pieces[1:]):
            mid = ctx.polygon.boundary_point(((p0 + p1) / 2) % per)
            da = ctx.distance(sites[la], mid)
            db = ctx.distance(sites[rb], mid)
            out.append((la if da >= db else rb, p0, p1))
    return _merge_runs(out, per)


# -- topological structure -----------------------------------------------------------


@dataclass
class FVDVertex:
    id: int
    point: Point
    kind: str
    sites: Tuple[int, ...]


@dataclass
class FVDEdge:
    id: int
    va: int
    vb: int
    pair: Tuple[int, int]
    chain: Optional[ArcChain] = None


@dataclass
class TopologicalFVD:
    sites: List[Point]
    vertices: List[FVDVertex]
    edges: List[FVDEdge]
    root_id: int
    center: CenterResult
    boundary: BoundaryDiagram
    leaf_ids: List[int] = field(default_factory=list)  # per boundary.order index

    @property
    def root_point(self) -> Point:
        return self.vertices[self.root_id].point

    def degree(self, vid: int) -> int:
        return sum(1 for e in self.edges if vid in (e.va, e.vb))


def sweep(ctx: PolygonPaths, boundary: BoundaryDiagram, center: CenterResult,
          tol: Tolerance = DEFAULT_TOL, backend: str = "bisection",
          stats: Optional[RunStats] = None) -> TopologicalFVD:
    """Reverse geodesic sweep: pop the farthest candidate vertex, retire the
    middle site, update neighbors, repeat until two sites remain."""
    stats = stats if stats is not None else RunStats()
    sites = boundary.sites
    c_star = center.center
    order = boundary.order
    stats.boundary_cells = len(order)
    if len(order) < 2:
        raise SweepError("boundary diagram has fewer than 2 cells")

    vertices: List[FVDVertex] = []
    edges: List[FVDEdge] = []

    def add_vertex(p: Point, kind: str, vsites: Tuple[int, ...]) -> int:
        vertices.append(FVDVertex(len(vertices), p, kind, vsites))
        return len(vertices) - 1

    def add_edge(va: int, vb: int, pair: Tuple[int, int]) -> None:
        edges.append(FVDEdge(len(edges), va, vb, pair))

    nxt: Dict[int, int] = {}
    prv: Dict[int, int] = {}
    beta: Dict[Tuple[int, int], int] = {}
    leaf_ids: List[int] = []
    for k, site in enumerate(order):
        nxt[site] = order[(k + 1) % len(order)]
        prv[site] = order[(k - 1) % len(order)]
        leaf_id = add_vertex(boundary.leaves[k], LEAF,
                             (site, order[(k + 1) % len(order)]))
        beta[(site, order[(k + 1) % len(order)])] = leaf_id
        leaf_ids.append(leaf_id)

    heap: List[Tuple[float, int, int, int]] = []  # (-key, mid, seq, token)
    token: Dict[int, int] = {i: 0 for i in order}
    pending: Dict[Tuple[int, int], Tuple[Point, AlphaResult]] = {}
    seq = 0

    def queue_alpha(mid: int) -> None:
        nonlocal seq
        if len(nxt) < 3:
            return
        sL, sR = prv[mid], nxt[mid]
        if sL == mid or sR == mid or sL == sR:
            return
        q = AlphaQuery(sites[sL], sites[mid], sites[sR],
                       vertices[beta[(sL, mid)]].point,
                       vertices[beta[(mid, sR)]].point, c_star)
        stats.alpha_queries += 1
        res = alpha(ctx, q, tol, backend)
        if res.solve is not None:
            stats.comparator_rounds_max = max(stats.comparator_rounds_max,
                                              res.solve.rounds)
        token[mid] += 1
        if res.found:
            key = ctx.distance(c_star, res.alpha)
            seq += 1
            pending[(mid, token[mid])] = (res.alpha, res)
            heapq.heappush(heap, (-key, mid, seq, token[mid]))
            stats.queue_pushes += 1

    for site in order:
        queue_alpha(site)

    last_key = math.inf
    while len(nxt) > 2:
        if not heap:
            raise SweepError(f"event queue empty with {len(nxt)} active sites")
        negkey, mid, _, tok = heapq.heappop(heap)
        stats.queue_pops += 1
        if mid not in nxt or token[mid] != tok:
            stats.stale_pops += 1
            continue
        point, ares = pending.pop((mid, tok))
        key = -negkey
        sL, sR = prv[mid], nxt[mid]
        lim = min(ctx.distance(c_star, vertices[beta[(sL, mid)]].point),
                  ctx.distance(c_star, vertices[beta[(mid, sR)]].point))
        if key > lim + tol.eps_dist:
            raise SweepError("popped event farther from the center than its "
                             "anchoring vertices")
        if key > last_key + tol.eps_dist:
            raise SweepError("event keys are not non-increasing")
        last_key = min(last_key, key)
        stats.events_popped += 1

        vid = add_vertex(point, DEGREE3, (sL, mid, sR))
        add_edge(beta[(sL, mid)], vid, (sL, mid))
        add_edge(beta[(mid, sR)], vid, (mid, sR))

        del beta[(sL, mid)]
        del beta[(mid, sR)]
        nxt[sL] = sR
        prv[sR] = sL
        del nxt[mid], prv[mid]
        token[mid] += 1
        beta[(sL, sR)] = vid

        if len(nxt) >= 3:
            queue_alpha(sL)
            queue_alpha(sR)

    (s0, r0) = (next(iter(nxt)), nxt[next(iter(nxt))])
    b1 = beta[(s0, r0)]
    b2 = beta[(r0, s0)]
    root_id: int
    if dist(vertices[b1].point, c_star) <= tol.eps_dist:
        root_id = b1
        add_edge(b1, b2, (s0, r0))
    elif dist(vertices[b2].point, c_star) <= tol.eps_dist:
        root_id = b2
        add_edge(b1, b2, (s0, r0))
    else:
        root_id = add_vertex(c_star, ROOT, (s0, r0))
        add_edge(b1, root_id, (s0, r0))
        add_edge(root_id, b2, (s0, r0))

    return TopologicalFVD(sites, vertices, edges, root_id, center, boundary,
                          leaf_ids)


# -- expansion ------------------------------------------------------------------------


@dataclass
class FullFVD:
    topo: TopologicalFVD
    cells: Dict[int, List[Point]]   # site index -> closed polyline (sampled)
    stats: RunStats

    @property
    def breakpoints(self) -> int:
        return sum(e.chain.breakpoint_count for e in self.topo.edges
                   if e.chain is not None)

    def arc_polylines(self, per_arc: int = 32) -> List[np.ndarray]:
        out = []
        for e in self.topo.edges:
            if e.chain is not None and e.chain.arcs:
                out.append(np.asarray(e.chain.polyline(per_arc), dtype=float))
            else:
                out.append(np.asarray([self.topo.vertices[e.va].point,
                                       self.topo.vertices[e.vb].point], dtype=float))
        return out

    def label_points(self, points: np.ndarray) -> np.ndarray:
        """Cell label per point; -1 where containment is ambiguous (on arcs)."""
        from matplotlib.path import Path

        points = np.asarray(points, dtype=float)
        labels = np.full(len(points), -1, dtype=int)
        claimed = np.zeros(len(points), dtype=int)
        for site_idx, ring in self.cells.items():
            path = Path(np.asarray(ring))
            inside = path.contains_points(points, radius=0.0)
            labels[inside & (claimed == 0)] = site_idx
            claimed[inside] += 1
        labels[claimed != 1] = -1
        return labels


def expand(ctx: PolygonPaths, topo: TopologicalFVD,
           tol: Tolerance = DEFAULT_TOL,
           stats: Optional[RunStats] = None) -> FullFVD:
    """Replace abstract edges by bisector arc chains and assemble cells."""
    stats = stats if stats is not None else RunStats()
    walls_cache: Dict[int, list] = {}

    def walls_for(i: int) -> list:
        if i not in walls_cache:
            walls_cache[i] = spm_walls(ctx, topo.sites[i])
        return walls_cache[i]

    for e in topo.edges:
        pa = topo.vertices[e.va].point
        pb = topo.vertices[e.vb].point
        i, j = e.pair
        e.chain = trace_edge(ctx, topo.sites[i], topo.sites[j], pa, pb, tol,
                             walls=walls_for(i) + walls_for(j))
    full = FullFVD(topo, _assemble_cells(ctx, topo), stats)
    stats.breakpoints = full.breakpoints
    return full


def _vertex_params(poly: SimplePolygon) -> List[float]:
    acc = 0.0
    out = []
    for i in range(poly.n):
        out.append(acc)
        acc += dist(poly.vertices[i], poly.vertices[(i + 1) % poly.n])
    return out


def _assemble_cells(ctx: PolygonPaths, topo: TopologicalFVD) -> Dict[int, List[Point]]:
    poly = ctx.polygon
    per = poly.perimeter
    boundary = topo.boundary
    vparams = _vertex_params(poly)
    cells: Dict[int, List[Point]] = {}
    norder = len(boundary.order)
    for k, site in enumerate(boundary.order):
        # boundary arc from leaves[k-1] to leaves[k] (counterclockwise)
        p_start = boundary.leaf_params[(k - 1) % norder]
        p_end = boundary.leaf_params[k]
        span = (p_end - p_start) % per
        if span == 0.0 and norder == 1:
            span = per
        inner: List[Tuple[float, Point]] = []
        for vi in range(poly.n):
            rel = (vparams[vi] - p_start) % per
            if 1e-12 < rel < span - 1e-12:
                inner.append((rel, poly.vertices[vi]))
        inner.sort()
        ring: List[Point] = [poly.boundary_point(p_start)]
        ring.extend(v for _, v in inner)
        ring.append(poly.boundary_point(p_end))
        ring.extend(_edge_walk(topo, site, k))
        if len(ring) > 1 and dist(ring[0], ring[-1]) <= 1e-12:
            ring.pop()
        cells[site] = ring
    return cells


def _edge_walk(topo: TopologicalFVD, site: int, leaf_idx: int) -> List[Point]:
    """Voronoi edges of one cell, walked from its end leaf to its start leaf."""
    by_vertex: Dict[int, List[FVDEdge]] = {}
    for e in topo.edges:
        if site in e.pair:
            by_vertex.setdefault(e.va, []).append(e)
            by_vertex.setdefault(e.vb, []).append(e)
    norder = len(topo.boundary.order)
    end_vid = topo.leaf_ids[leaf_idx]
    start_vid = topo.leaf_ids[(leaf_idx - 1) % norder]
    out: List[Point] = []
    cur = end_vid
    prev_edge: Optional[FVDEdge] = None
    guard = 0
    while cur != start_vid:
        guard += 1
        if guard > len(topo.edges) + 2:
            raise SweepError(f"cell walk for site {site} failed")
        cands = [e for e in by_vertex.get(cur, []) if e is not prev_edge]
        if not cands:
            raise SweepError(f"cell walk for site {site} stuck at vertex {cur}")
        e = cands[0]
        nxt_v = e.vb if e.va == cur else e.va
        pts = _edge_points(topo, e)
        if pts and dist(pts[0], topo.vertices[cur].point) > dist(pts[-1], topo.vertices[cur].point):
            pts = list(reversed(pts))
        out.extend(pts[1:])
        prev_edge = e
        cur = nxt_v
    return out


def _edge_points(topo: TopologicalFVD, e: FVDEdge) -> List[Point]:
    if e.chain is not None and e.chain.arcs:
        return e.chain.polyline(24)
    return [topo.vertices[e.va].point, topo.vertices[e.vb].point]


# -- full pipeline --------------------------------------------------------------------


@dataclass
class FVDConfig:
    backend: str = "bisection"          # bisection | tentative | both
    boundary_method: str = BOUNDARY_DNC
    validate: bool = True


def compute_fvd(poly: SimplePolygon, sites: SiteSet,
                tol: Tolerance = DEFAULT_TOL,
                config: Optional[FVDConfig] = None,
                ctx: Optional[PolygonPaths] = None) -> FullFVD:
    from .geometry import validate_instance

    config = config or FVDConfig()
    stats = RunStats()
    t0 = time.perf_counter()
    if config.validate:
        rep = validate_instance(poly, sites, tol, check_four_farthest=False)
        if not rep.ok:
            raise ValueError(f"invalid instance: {rep}")
    if sites.m < 2:
        raise ValueError("need at least 2 sites (the diagram of one site is "
                         "the whole polygon)")
    ctx = ctx or PolygonPaths(poly, tol)
    hull = geodesic_hull(ctx, sites, tol)
    center = geodesic_center(ctx, sites, tol, hull=hull)
    boundary = boundary_fvd(ctx, sites, hull, tol, config.boundary_method)
    backend = "bisection" if config.backend == "both" else config.backend
    topo = sweep(ctx, boundary, center, tol, backend, stats)
    if config.backend == "both":
        stats2 = RunStats()
        topo2 = sweep(ctx, boundary, center, tol, "tentative", stats2)
        _assert_same_topo(topo, topo2, tol)
    full = expand(ctx, topo, tol, stats)
    stats.wall_time = time.perf_counter() - t0
    return full


def _assert_same_topo(a: TopologicalFVD, b: TopologicalFVD, tol: Tolerance) -> None:
    if len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        raise SweepError("solver backends disagree on the diagram structure")
    for va, vb in zip(a.vertices, b.vertices):
        if dist(va.point, vb.point) > 1e-8:
            raise SweepError(f"solver backends disagree on vertex {va.id}: "
                             f"{va.point} vs {vb.point}")
