"""Random and fixture instances: polygons, sites, convex-position clouds.

Random simple polygons come from recursive space partitioning: split the
point cloud by a random chord through a random pivot, build chains on both
sides, concatenate. Rejection sampling keeps only instances that pass
validation, so downstream code can rely on general position.
"""

from __future__ import annotations

import math
import random
from typing import List, Optional, Sequence, Tuple

from .geometry import (EXTERIOR, INTERIOR, Point, SimplePolygon, SiteSet,
                       Tolerance, DEFAULT_TOL, cross, dist, pt)


def square(side: float = 10.0) -> SimplePolygon:
    return SimplePolygon([(0, 0), (side, 0), (side, side), (0, side)])


def lshape() -> SimplePolygon:
    return SimplePolygon([(0, 0), (10, 0), (10, 4), (6, 4), (6, 10), (0, 10)])


def regular_polygon(n: int, radius: float = 10.0, center: Tuple[float, float] = (0.0, 0.0)) -> SimplePolygon:
    cx, cy = center
    return SimplePolygon([(cx + radius * math.cos(2 * math.pi * i / n),
                           cy + radius * math.sin(2 * math.pi * i / n))
                          for i in range(n)])


def random_simple_polygon(n: int, rng: random.Random, span: float = 10.0,
                          max_tries: int = 200) -> SimplePolygon:
    """Random simple polygon on n random points via space partitioning."""
    for _ in range(max_tries):
        pts = [pt(rng.uniform(0, span), rng.uniform(0, span)) for _ in range(n)]
        if len({p for p in pts}) < n:
            continue
        try:
            ring = _space_partition(pts, rng)
        except _PartitionFailed:
            continue
        area2 = sum(ring[i - 1][0] * ring[i][1] - ring[i][0] * ring[i - 1][1]
                    for i in range(len(ring)))
        if area2 < 0:
            ring.reverse()
        try:
            poly = SimplePolygon(ring)
        except ValueError:
            continue
        if abs(poly.signed_area()) > 0.05 * span * span:
            return poly
    raise RuntimeError(f"could not generate a simple polygon with n={n}")


class _PartitionFailed(Exception):
    pass


def _space_partition(points: List[Point], rng: random.Random) -> List[Point]:
    s, t = points[0], points[1]
    rest = points[2:]
    left = [p for p in rest if cross(s, t, p) > 0]
    right = [p for p in rest if cross(s, t, p) < 0]
    if len(left) + len(right) != len(rest):
        raise _PartitionFailed  # a point exactly on the chord
    return _chain(left, s, t, rng) + _chain(right, t, s, rng)


def _chain(points: List[Point], a: Point, b: Point, rng: random.Random,
           depth: int = 0) -> List[Point]:
    """Simple chain from a to b through all points (a included, b excluded)."""
    if depth > 200:
        raise _PartitionFailed
    if not points:
        return [a]
    p = points[rng.randrange(len(points))]
    u = rng.uniform(0.1, 0.9)
    z = Point(a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))
    side_a = cross(p, z, a)
    if side_a == 0:
        raise _PartitionFailed
    sa: List[Point] = []
    sb: List[Point] = []
    for x in points:
        if x == p:
            continue
        c = cross(p, z, x)
        if c == 0:
            raise _PartitionFailed
        (sa if (c > 0) == (side_a > 0) else sb).append(x)
    return _chain(sa, a, p, rng, depth + 1) + _chain(sb, p, b, rng, depth + 1)


def random_sites(poly: SimplePolygon, m: int, rng: random.Random,
                 min_sep_frac: float = 0.02, max_tries: int = 20000) -> SiteSet:
    """m random interior sites with pairwise separation and boundary clearance."""
    x0, y0, x1, y1 = poly.bbox()
    span = max(x1 - x0, y1 - y0)
    sep = min_sep_frac * span
    sites: List[Point] = []
    for _ in range(max_tries):
        if len(sites) == m:
            break
        p = pt(rng.uniform(x0, x1), rng.uniform(y0, y1))
        if poly.location(p, sep / 4) != INTERIOR:
            continue
        if any(dist(p, s) < sep for s in sites):
            continue
        sites.append(p)
    if len(sites) < m:
        raise RuntimeError(f"could not place {m} sites")
    return SiteSet(sites)


def random_instance(rng: random.Random, n_max: int = 40, m_max: int = 8,
                    tol: Tolerance = DEFAULT_TOL,
                    max_tries: int = 50) -> Tuple[SimplePolygon, SiteSet]:
    """A validated random instance (polygon + sites) in general position."""
    from .geometry import validate_instance

    for _ in range(max_tries):
        n = rng.randint(5, n_max)
        m = rng.randint(2, m_max)
        poly = random_simple_polygon(n, rng)
        try:
            sites = random_sites(poly, m, rng)
        except RuntimeError:
            continue
        rep = validate_instance(poly, sites, tol, check_four_farthest=False)
        if rep.ok:
            return poly, sites
    raise RuntimeError("failed to build a valid random instance")


def valtr_convex_positions(m: int, rng: random.Random, center: Tuple[float, float],
                           radius: float) -> List[Point]:
    """m random points in convex position (Valtr's algorithm), scaled to fit
    the disc around `center`."""
    xs = sorted(rng.random() for _ in range(m))
    ys = sorted(rng.random() for _ in range(m))

    def deltas(vals: List[float]) -> List[float]:
        lo, hi = vals[0], vals[-1]
        last_top, last_bot = lo, lo
        out: List[float] = []
        for v in vals[1:-1]:
            if rng.random() < 0.5:
                out.append(v - last_top)
                last_top = v
            else:
                out.append(last_bot - v)
                last_bot = v
        out.append(hi - last_top)
        out.append(last_bot - hi)
        return out

    vx = deltas(xs)
    vy = deltas(ys)
    rng.shuffle(vy)
    vecs = sorted(zip(vx, vy), key=lambda v: math.atan2(v[1], v[0]))
    px = py = 0.0
    ring: List[Point] = []
    for dx, dy in vecs:
        ring.append(Point(px, py))
        px += dx
        py += dy
    minx = min(p[0] for p in ring)
    maxx = max(p[0] for p in ring)
    miny = min(p[1] for p in ring)
    maxy = max(p[1] for p in ring)
    w = max(maxx - minx, maxy - miny, 1e-12)
    scale = 2 * radius / w / math.sqrt(2.0)
    cx = (minx + maxx) / 2
    cy = (miny + maxy) / 2
    return [Point(center[0] + (p[0] - cx) * scale,
                  center[1] + (p[1] - cy) * scale) for p in ring]
