"""Brute-force reference machinery used by tests and the `check` command.

Everything here is deliberately independent of the funnel/triangulation code
path: distances come from a visibility graph, regions from dense grids.
Slow is fine; being an oracle is the whole point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import (DEFAULT_TOL, EXTERIOR, Point, SimplePolygon, SiteSet,
                       Tolerance, dist, pt)


class PolygonOracle:
    """Visibility-graph distances and grid scans over one polygon."""

    def __init__(self, polygon: SimplePolygon, tol: Tolerance = DEFAULT_TOL):
        self.polygon = polygon
        self.tol = tol
        self._edges_a = np.roll(polygon.coords, 0, axis=0)
        self._edges_b = np.roll(polygon.coords, -1, axis=0)
        self._vv: Optional[np.ndarray] = None
        self._fields: Dict[Point, DistanceField] = {}

    # -- visibility ----------------------------------------------------------

    def visible_from(self, a: Point, points: np.ndarray) -> np.ndarray:
        """Boolean mask: segment a->points[i] stays inside the closed polygon."""
        points = np.asarray(points, dtype=float)
        ax, ay = a
        c = self._edges_a
        d = self._edges_b
        px = points[:, 0][:, None]
        py = points[:, 1][:, None]

        scale = max(1.0, float(np.abs(self.polygon.coords).max()),
                    abs(ax), abs(ay))
        eps = self.tol.eps_geom * scale

        # orientation signs for proper segment crossing (a,p) x (c,d)
        o1 = (px - ax) * (c[:, 1] - ay) - (py - ay) * (c[:, 0] - ax)
        o2 = (px - ax) * (d[:, 1] - ay) - (py - ay) * (d[:, 0] - ax)
        ex = d[:, 0] - c[:, 0]
        ey = d[:, 1] - c[:, 1]
        o3 = ex * (ay - c[:, 1]) - ey * (ax - c[:, 0])
        o4 = ex[None, :] * (py - c[:, 1][None, :]) - ey[None, :] * (px - c[:, 0][None, :])

        z1 = np.where(np.abs(o1) <= eps, 0.0, o1)
        z2 = np.where(np.abs(o2) <= eps, 0.0, o2)
        z3 = np.where(np.abs(o3) <= eps, 0.0, o3)
        z4 = np.where(np.abs(o4) <= eps, 0.0, o4)
        crossing = (z1 * z2 < 0) & (z3[None, :] * z4 < 0)
        ok = ~crossing.any(axis=1)

        # a segment that only touches the boundary at vertices can still leave
        # the polygon; the midpoint test catches the common cases
        mids = np.column_stack(((points[:, 0] + ax) * 0.5, (points[:, 1] + ay) * 0.5))
        ok &= self.polygon.locations(mids, self.tol.eps_geom) >= 0
        return ok

    def visible_pairs(self, origins: np.ndarray, points: np.ndarray) -> np.ndarray:
        """(k, o) visibility matrix between points and origins (one broadcast).

        Memory grows with k*o*n, so this is for small batches; the per-origin
        loop in `visible_from` is the large-batch path.
        """
        origins = np.asarray(origins, dtype=float)
        points = np.asarray(points, dtype=float)
        c = self._edges_a
        d = self._edges_b
        ox = origins[:, 0][None, :, None]
        oy = origins[:, 1][None, :, None]
        px = points[:, 0][:, None, None]
        py = points[:, 1][:, None, None]
        cx, cy = c[:, 0][None, None, :], c[:, 1][None, None, :]
        dx_, dy_ = d[:, 0][None, None, :], d[:, 1][None, None, :]

        scale = max(1.0, float(np.abs(self.polygon.coords).max()))
        eps = self.tol.eps_geom * scale
        o1 = (px - ox) * (cy - oy) - (py - oy) * (cx - ox)
        o2 = (px - ox) * (dy_ - oy) - (py - oy) * (dx_ - ox)
        ex, ey = dx_ - cx, dy_ - cy
        o3 = ex * (oy - cy) - ey * (ox - cx)
        o4 = ex * (py - cy) - ey * (px - cx)
        z1 = np.where(np.abs(o1) <= eps, 0.0, o1)
        z2 = np.where(np.abs(o2) <= eps, 0.0, o2)
        z3 = np.where(np.abs(o3) <= eps, 0.0, o3)
        z4 = np.where(np.abs(o4) <= eps, 0.0, o4)
        crossing = (z1 * z2 < 0) & (z3 * z4 < 0)
        ok = ~crossing.any(axis=2)

        mids = np.empty((len(points), len(origins), 2))
        mids[:, :, 0] = (points[:, 0][:, None] + origins[:, 0][None, :]) * 0.5
        mids[:, :, 1] = (points[:, 1][:, None] + origins[:, 1][None, :]) * 0.5
        loc = self.polygon.locations(mids.reshape(-1, 2), self.tol.eps_geom)
        ok &= (loc >= 0).reshape(len(points), len(origins))
        return ok

    def _vertex_visibility(self) -> np.ndarray:
        if self._vv is None:
            n = self.polygon.n
            vv = np.zeros((n, n), dtype=bool)
            for i, v in enumerate(self.polygon.vertices):
                vv[i] = self.visible_from(v, self.polygon.coords)
                vv[i, i] = False
            self._vv = vv & vv.T
        return self._vv

    # -- distances -----------------------------------------------------------

    def distance(self, p: Point, q: Point) -> float:
        return self.path(p, q)[1]

    def path(self, p: Point, q: Point) -> Tuple[List[Point], float]:
        """Dijkstra over polygon vertices augmented with p and q."""
        p = pt(*p)
        q = pt(*q)
        if self.polygon.location(p, self.tol.eps_geom) == EXTERIOR:
            raise ValueError(f"{p} outside polygon")
        if self.polygon.location(q, self.tol.eps_geom) == EXTERIOR:
            raise ValueError(f"{q} outside polygon")
        if p == q:
            return [p], 0.0
        verts = self.polygon.vertices
        n = self.polygon.n
        vv = self._vertex_visibility()
        vis_p = self.visible_from(p, self.polygon.coords)
        vis_q = self.visible_from(q, self.polygon.coords)
        direct = bool(self.visible_from(p, np.array([q]))[0])

        # node ids: 0..n-1 vertices, n = p, n+1 = q
        dist_to = [math.inf] * (n + 2)
        prev: List[int] = [-1] * (n + 2)
        dist_to[n] = 0.0
        heap = [(0.0, n)]
        coords = verts + [p, q]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist_to[u] + 1e-15:
                continue
            if u == n + 1:
                break
            if u == n:
                nbrs = [(i, vis_p[i]) for i in range(n)] + [(n + 1, direct)]
            elif u == n + 1:
                nbrs = []
            else:
                nbrs = [(i, vv[u, i]) for i in range(n)] + [(n + 1, vis_q[u])]
            for v, ok in nbrs:
                if not ok:
                    continue
                nd = du + dist(coords[u], coords[v])
                if nd < dist_to[v] - 1e-15:
                    dist_to[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if math.isinf(dist_to[n + 1]):
            raise ValueError("no visibility path found (inconsistent polygon?)")
        seq = [n + 1]
        while seq[-1] != n:
            seq.append(prev[seq[-1]])
        way = [coords[i] for i in reversed(seq)]
        return way, dist_to[n + 1]

    def field(self, site: Point) -> "DistanceField":
        site = pt(*site)
        f = self._fields.get(site)
        if f is None:
            f = DistanceField(self, site)
            self._fields[site] = f
        return f

    # -- grids ---------------------------------------------------------------

    def grid_points(self, resolution: float, include_boundary: bool = False) -> np.ndarray:
        x0, y0, x1, y1 = self.polygon.bbox()
        xs = np.arange(x0 + resolution / 2, x1, resolution)
        ys = np.arange(y0 + resolution / 2, y1, resolution)
        gx, gy = np.meshgrid(xs, ys)
        pts = np.column_stack((gx.ravel(), gy.ravel()))
        loc = self.polygon.locations(pts, self.tol.eps_geom)
        keep = loc >= (0 if include_boundary else 1)
        return pts[keep]


class DistanceField:
    """Geodesic distance from one site, evaluated in bulk on point arrays.

    d(s,x) = min over anchors a visible from x of d_graph(s,a) + |a - x|,
    with the site itself as one candidate anchor.
    """

    def __init__(self, oracle: PolygonOracle, site: Point):
        self.oracle = oracle
        self.site = site
        self.vert_dist = np.array(
            [oracle.distance(site, v) for v in oracle.polygon.vertices])
        self._origins = np.vstack([np.asarray([site], dtype=float),
                                   oracle.polygon.coords])
        self._origin_w = np.concatenate([[0.0], self.vert_dist])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.size == 0:
            return np.zeros(0)
        if len(points) <= 128:
            return self._evaluate_small(points)
        oracle = self.oracle
        best = np.full(len(points), np.inf)
        svis = oracle.visible_from(self.site, points)
        d_direct = np.hypot(points[:, 0] - self.site[0], points[:, 1] - self.site[1])
        best[svis] = d_direct[svis]
        for j, v in enumerate(oracle.polygon.vertices):
            mask = oracle.visible_from(v, points)
            if not mask.any():
                continue
            dj = self.vert_dist[j] + np.hypot(points[mask, 0] - v[0],
                                              points[mask, 1] - v[1])
            best[mask] = np.minimum(best[mask], dj)
        return best

    def _evaluate_small(self, points: np.ndarray) -> np.ndarray:
        vis = self.oracle.visible_pairs(self._origins, points)
        dd = np.hypot(points[:, 0][:, None] - self._origins[:, 0][None, :],
                      points[:, 1][:, None] - self._origins[:, 1][None, :])
        dd = dd + self._origin_w[None, :]
        dd[~vis] = np.inf
        return dd.min(axis=1)

    def at(self, p: Point) -> float:
        return float(self.evaluate(np.array([p]))[0])


@dataclass
class LabelGrid:
    resolution: float
    points: np.ndarray      # (k,2) strictly interior grid points
    labels: np.ndarray      # (k,) index of the farthest site
    max_dist: np.ndarray    # (k,) distance to that site


def oracle_fvd_labels(polygon: SimplePolygon, sites: SiteSet, resolution: float,
                      tol: Tolerance = DEFAULT_TOL,
                      oracle: Optional[PolygonOracle] = None) -> LabelGrid:
    """Farthest-site label of every in-polygon grid cell center."""
    orc = oracle or PolygonOracle(polygon, tol)
    pts = orc.grid_points(resolution)
    dists = np.empty((len(pts), sites.m))
    for j, s in enumerate(sites):
        dists[:, j] = orc.field(s).evaluate(pts)
    labels = np.argmax(dists, axis=1)
    return LabelGrid(resolution, pts, labels, dists[np.arange(len(pts)), labels])


def _refine(orc: PolygonOracle, objective, start: Point, span: float,
            stop: float) -> Tuple[Point, float]:
    """Shrinking-window grid descent around an incumbent."""
    best_p, best_v = start, objective(np.array([start]))[0]
    h = span
    while h > stop:
        xs = np.linspace(best_p[0] - h, best_p[0] + h, 17)
        ys = np.linspace(best_p[1] - h, best_p[1] + h, 17)
        gx, gy = np.meshgrid(xs, ys)
        cand = np.column_stack((gx.ravel(), gy.ravel()))
        keep = orc.polygon.locations(cand, orc.tol.eps_geom) >= 0
        cand = cand[keep]
        if len(cand):
            vals = objective(cand)
            i = int(np.argmin(vals))
            if vals[i] <= best_v:
                best_v = vals[i]
                best_p = Point(float(cand[i, 0]), float(cand[i, 1]))
        h *= 0.2
    return best_p, float(best_v)


def _polish(orc: PolygonOracle, objective, start: Point, span: float) -> Tuple[Point, float]:
    """Nelder-Mead polish; grid descent alone stalls in the flat valleys of
    max-distance objectives. Out-of-polygon proposals are penalized."""
    from scipy.optimize import minimize

    big = 1e6

    def f(xy) -> float:
        p = np.array([xy])
        if orc.polygon.locations(p, orc.tol.eps_geom)[0] < 0:
            return big
        return float(objective(p)[0])

    res = minimize(f, np.asarray(start, dtype=float), method="Nelder-Mead",
                   options={"xatol": 1e-10 * span, "fatol": 1e-14,
                            "maxiter": 400, "initial_simplex": None})
    p = Point(float(res.x[0]), float(res.x[1]))
    v = f(res.x)
    if v >= big:
        return start, f(np.asarray(start))
    return p, v


def _pair_midpoints(orc: PolygonOracle, pts: Sequence[Point]) -> List[Point]:
    """Arc-length midpoints of the oracle's own Dijkstra paths (warm starts)."""
    out: List[Point] = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            way, total = orc.path(pts[i], pts[j])
            if total <= 0:
                continue
            acc = 0.0
            for a, b in zip(way, way[1:]):
                step = dist(a, b)
                if acc + step >= total / 2.0:
                    u = (total / 2.0 - acc) / step
                    out.append(Point(a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])))
                    break
                acc += step
    return out


def oracle_triple_center(polygon: SimplePolygon, s: Point, t: Point, r: Point,
                         tol: Tolerance = DEFAULT_TOL,
                         oracle: Optional[PolygonOracle] = None) -> Point:
    """Grid scan of max(d(s,.), d(t,.), d(r,.)) with simplex polish."""
    orc = oracle or PolygonOracle(polygon, tol)
    fields = [orc.field(pt(*x)) for x in (s, t, r)]

    def objective(points: np.ndarray) -> np.ndarray:
        return np.max(np.column_stack([f.evaluate(points) for f in fields]), axis=1)

    x0, y0, x1, y1 = polygon.bbox()
    span = max(x1 - x0, y1 - y0)
    coarse = orc.grid_points(span / 40.0, include_boundary=False)
    extra = np.array([s, t, r] + _pair_midpoints(orc, [pt(*s), pt(*t), pt(*r)]),
                     dtype=float)
    coarse = np.vstack([coarse, extra]) if len(coarse) else extra
    vals = objective(coarse)
    order = np.argsort(vals)[:3]
    best: Tuple[Point, float] = (Point(*map(float, coarse[order[0]])), float(vals[order[0]]))
    for i in order:
        p0 = Point(float(coarse[i, 0]), float(coarse[i, 1]))
        mid = _refine(orc, objective, p0, span / 30.0, 1e-5 * span)
        cand = _polish(orc, objective, mid[0], span)
        if cand[1] < best[1]:
            best = cand
    return best[0]


def oracle_equidistant(polygon: SimplePolygon, s: Point, t: Point, r: Point,
                       tol: Tolerance = DEFAULT_TOL,
                       oracle: Optional[PolygonOracle] = None
                       ) -> Tuple[Optional[Point], float]:
    """Brute-force point equidistant from three sites: minimizes max-min spread.

    Returns (point, residual); point is None when no candidate reaches
    residual <= eps_dist.
    """
    orc = oracle or PolygonOracle(polygon, tol)
    fields = [orc.field(pt(*x)) for x in (s, t, r)]

    def objective(points: np.ndarray) -> np.ndarray:
        d = np.column_stack([f.evaluate(points) for f in fields])
        return d.max(axis=1) - d.min(axis=1)

    x0, y0, x1, y1 = polygon.bbox()
    span = max(x1 - x0, y1 - y0)
    coarse = orc.grid_points(span / 60.0)
    if not len(coarse):
        return None, math.inf
    vals = objective(coarse)
    order = np.argsort(vals)[:8]
    best: Tuple[Optional[Point], float] = (None, math.inf)
    for i in order:
        p0 = Point(float(coarse[i, 0]), float(coarse[i, 1]))
        mid = _refine(orc, objective, p0, span / 30.0, 1e-5 * span)
        cand = _polish(orc, objective, mid[0], span)
        if cand[1] < best[1]:
            best = cand
    if best[1] > tol.eps_dist:
        return None, best[1]
    return best


@dataclass
class VerificationReport:
    checked: int
    excluded: int
    mismatches: List[Tuple[float, float, int, int]]  # x, y, diagram label, oracle label

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __str__(self) -> str:
        return (f"checked={self.checked} excluded={self.excluded} "
                f"mismatches={len(self.mismatches)}")


def verify(diagram, grid: LabelGrid, band: float = 1e-4) -> VerificationReport:
    """Compare diagram cell labels against oracle grid labels.

    Grid samples within `band` of any diagram arc (or claimed by zero or
    multiple cells, which only happens next to an arc) are excluded.
    """
    labels = diagram.label_points(grid.points)
    arcs = diagram.arc_polylines()
    mism: List[Tuple[float, float, int, int]] = []
    excluded = 0
    for k in range(len(grid.points)):
        dlab = labels[k]
        olab = int(grid.labels[k])
        if dlab == olab:
            continue
        x, y = grid.points[k]
        if _near_polylines(x, y, arcs, band):
            excluded += 1
            continue
        mism.append((float(x), float(y), int(dlab), olab))
    return VerificationReport(len(grid.points), excluded, mism)


def _near_polylines(x: float, y: float, polylines: Sequence[np.ndarray], band: float) -> bool:
    for poly in polylines:
        ax, ay = poly[:-1, 0], poly[:-1, 1]
        bx, by = poly[1:, 0], poly[1:, 1]
        dx, dy = bx - ax, by - ay
        L2 = dx * dx + dy * dy
        L2 = np.where(L2 == 0.0, 1.0, L2)
        tt = np.clip(((x - ax) * dx + (y - ay) * dy) / L2, 0.0, 1.0)
        d2 = (x - (ax + tt * dx)) ** 2 + (y - (ay + tt * dy)) ** 2
        if d2.min() <= band * band:
            return True
    return False
