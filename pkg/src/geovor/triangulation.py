"""Ear-clipping triangulation of a simple polygon and its dual tree.

O(n^2) clipping is fine at the input sizes this library targets; the dual of
a triangulated simple polygon is always a tree, which the funnel algorithm
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .geometry import CCW, COLLINEAR, Point, SimplePolygon, cross, orientation


@dataclass
class Triangulation:
    polygon: SimplePolygon
    triangles: List[Tuple[int, int, int]]
    neighbors: List[List[int]] = field(default_factory=list)
    diagonals: List[Tuple[int, int]] = field(default_factory=list)

    def triangle_points(self, t: int) -> Tuple[Point, Point, Point]:
        i, j, k = self.triangles[t]
        v = self.polygon.vertices
        return v[i], v[j], v[k]


class TriangulationError(ValueError):
    pass


def triangulate(poly: SimplePolygon) -> Triangulation:
    """Ear clipping; returns n-2 CCW triangles whose dual graph is a tree."""
    n = poly.n
    verts = poly.vertices
    if n == 3:
        tri = Triangulation(poly, [(0, 1, 2)], [[]], [])
        return tri

    idx = list(range(n))
    triangles: List[Tuple[int, int, int]] = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * n * n:
            raise TriangulationError("ear clipping failed to make progress")
        clipped = False
        k = len(idx)
        for pos in range(k):
            ia, ib, ic = idx[pos - 1], idx[pos], idx[(pos + 1) % k]
            a, b, c = verts[ia], verts[ib], verts[ic]
            if orientation(a, b, c) != CCW:
                continue
            if _any_point_inside(a, b, c, (ia, ib, ic), idx, verts):
                continue
            triangles.append((ia, ib, ic))
            idx.pop(pos)
            clipped = True
            break
        if not clipped:
            # relax: allow a collinear ear when nothing strictly convex works
            for pos in range(k):
                ia, ib, ic = idx[pos - 1], idx[pos], idx[(pos + 1) % k]
                a, b, c = verts[ia], verts[ib], verts[ic]
                if orientation(a, b, c) == COLLINEAR and not _any_point_inside(
                        a, b, c, (ia, ib, ic), idx, verts):
                    triangles.append((ia, ib, ic))
                    idx.pop(pos)
                    clipped = True
                    break
        if not clipped:
            raise TriangulationError("no ear found; polygon may self-intersect")
    triangles.append((idx[0], idx[1], idx[2]))

    return _with_dual(poly, triangles)


def _any_point_inside(a: Point, b: Point, c: Point, ear: Tuple[int, int, int],
                      idx: List[int], verts: List[Point]) -> bool:
    # a vertex exactly on the ear's chord must block the ear, otherwise the
    # clipped triangle can stick out of the polygon at that vertex
    scale = max(abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1]), abs(c[0]), abs(c[1]), 1.0)
    eps = 1e-12 * scale
    for iv in idx:
        if iv in ear:
            continue
        p = verts[iv]
        if (cross(a, b, p) >= -eps and cross(b, c, p) >= -eps and cross(c, a, p) >= -eps):
            return True
    return False


def _with_dual(poly: SimplePolygon, triangles: List[Tuple[int, int, int]]) -> Triangulation:
    by_edge: Dict[Tuple[int, int], List[int]] = {}
    for t, (i, j, k) in enumerate(triangles):
        for u, v in ((i, j), (j, k), (k, i)):
            key = (u, v) if u < v else (v, u)
            by_edge.setdefault(key, []).append(t)

    neighbors: List[List[int]] = [[] for _ in triangles]
    diagonals: List[Tuple[int, int]] = []
    for key, ts in by_edge.items():
        if len(ts) == 2:
            neighbors[ts[0]].append(ts[1])
            neighbors[ts[1]].append(ts[0])
            diagonals.append(key)
        elif len(ts) > 2:
            raise TriangulationError(f"edge {key} shared by {len(ts)} triangles")

    tri = Triangulation(poly, triangles, neighbors, diagonals)
    _check_tree(tri)
    return tri


def _check_tree(tri: Triangulation) -> None:
    nt = len(tri.triangles)
    nedges = sum(len(ns) for ns in tri.neighbors) // 2
    if nedges != nt - 1:
        raise TriangulationError("dual graph is not a tree")
    seen = [False] * nt
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        t = stack.pop()
        for u in tri.neighbors[t]:
            if not seen[u]:
                seen[u] = True
                count += 1
                stack.append(u)
    if count != nt:
        raise TriangulationError("dual graph is disconnected")
