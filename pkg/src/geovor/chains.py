"""Pseudo-convex chains, the weighted tangent comparator, and fixpoint solvers.

A pseudo-convex chain is two convex polyline legs joined at an apex; each
vertex carries a weight equal to the geodesic distance from the owning site.
The point equidistant (in weighted tangent distance) from three such chains
is found either by nested monotone bisection over chain parameters (the
reference backend) or by tentative prune-and-search (discards a fraction of
at least one chain per round, with rollback of provisional discards).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .geometry import DEFAULT_TOL, Point, Tolerance, dist
from .paths import GeodesicPath

F_GREATER = "greater"   # f(a) > b
F_LESS = "less"         # f(a) < b
F_EQUAL = "equal"


def _unit(vx: float, vy: float) -> Tuple[float, float]:
    L = math.hypot(vx, vy)
    if L == 0.0:
        return (0.0, 0.0)
    return (vx / L, vy / L)


@dataclass(frozen=True)
class TangentRay:
    """Half-line leaving a chain contact point, with the unrolled weight there."""
    origin: Point
    direction: Tuple[float, float]  # unit
    weight: float
    contact: int  # vertex index on the owning chain


class PseudoConvexChain:
    """Two convex legs sharing an apex; weights grow with arc length from it.

    Vertices run from end0 to end1; `apex` indexes the shared vertex. The
    tangent half-line at a contact continues the geodesic coming from the
    owning site, so on the end0 leg it points toward end0 and on the end1 leg
    toward end1.
    """

    def __init__(self, pts: Sequence[Point], apex: int, base_weight: float):
        if not 0 <= apex < len(pts):
            raise ValueError("apex index out of range")
        self.pts: List[Point] = [Point(float(p[0]), float(p[1])) for p in pts]
        self.apex = apex
        self.base_weight = float(base_weight)
        self.weights: List[float] = [0.0] * len(self.pts)
        acc = base_weight
        for i in range(apex - 1, -1, -1):
            acc += dist(self.pts[i + 1], self.pts[i])
            self.weights[i] = acc
        self.weights[apex] = base_weight
        acc = base_weight
        for i in range(apex + 1, len(self.pts)):
            acc += dist(self.pts[i - 1], self.pts[i])
            self.weights[i] = acc
        self._events: Optional[List[TangentRay]] = None

    @property
    def events(self) -> List[TangentRay]:
        """Contact/tangent pairs in parameter order from end0 to end1.

        Every edge contributes a ray at both endpoints; between the two
        events of one vertex the tangent sweeps that vertex's wedge.
        """
        if self._events is None:
            evs: List[TangentRay] = []
            n = len(self.pts)
            for j in range(n - 1):
                d = self._edge_dir(j)
                evs.append(TangentRay(self.pts[j], d, self.weights[j], j))
                evs.append(TangentRay(self.pts[j + 1], d, self.weights[j + 1], j + 1))
            if n == 1:
                evs.append(TangentRay(self.pts[0], (0.0, 0.0), self.weights[0], 0))
            self._events = evs
        return self._events

    def _edge_dir(self, j: int) -> Tuple[float, float]:
        a, b = self.pts[j], self.pts[j + 1]
        if j >= self.apex:  # away from apex = toward end1
            return _unit(b[0] - a[0], b[1] - a[1])
        return _unit(a[0] - b[0], a[1] - b[1])

    def wedge(self, v: int) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """One-sided tangent directions bounding the wedge at vertex v,
        in parameter order."""
        n = len(self.pts)
        if n == 1:
            return (0.0, 0.0), (0.0, 0.0)
        if v == 0:
            d = self._edge_dir(0)
            return d, d
        if v == n - 1:
            d = self._edge_dir(n - 2)
            return d, d
        return self._edge_dir(v - 1), self._edge_dir(v)

    def ray_toward(self, v: int, target: Point) -> TangentRay:
        d = _unit(target[0] - self.pts[v][0], target[1] - self.pts[v][1])
        return TangentRay(self.pts[v], d, self.weights[v], v)

    def __len__(self) -> int:
        return len(self.pts)


def chain_from_paths(leg0: GeodesicPath, leg1: GeodesicPath,
                     base_weight: float) -> PseudoConvexChain:
    """Chain from two geodesic legs that both start at the shared apex.

    leg0 runs apex -> end0 and leg1 runs apex -> end1; the chain is stored
    end0 .. apex .. end1.
    """
    if leg0.waypoints[0] != leg1.waypoints[0]:
        raise ValueError("legs must share their first waypoint (the apex)")
    pts = list(reversed(leg0.waypoints)) + list(leg1.waypoints[1:])
    apex = len(leg0.waypoints) - 1
    return PseudoConvexChain(pts, apex, base_weight)


# -- comparator ---------------------------------------------------------------


def tangent_compare(ray_a: TangentRay, ray_b: TangentRay,
                    tol: Tolerance = DEFAULT_TOL) -> str:
    """Compare f(a) against b for tangent half-lines a and b.

    At the half-line intersection p the weighted distances decide:
    weight_a + |pa| < weight_b + |pb| means f(a) > b. When the half-lines
    miss each other, hitting the other's backward extension decides the
    order; parallel lines with no usable intersection compare equal.
    """
    ax, ay = ray_a.origin
    bx, by = ray_b.origin
    dax, day = ray_a.direction
    dbx, dby = ray_b.direction
    ex, ey = bx - ax, by - ay
    den = dax * dby - day * dbx
    scale = max(1.0, abs(ax), abs(ay), abs(bx), abs(by))
    eps = tol.eps_geom * scale
    if abs(den) <= 1e-14:
        return F_EQUAL
    u = (ex * dby - ey * dbx) / den
    v = (ex * day - ey * dax) / den
    if u >= -eps and v >= -eps:
        diff = (ray_a.weight + u) - (ray_b.weight + v)
        if diff < -tol.eps_solve:
            return F_GREATER
        if diff > tol.eps_solve:
            return F_LESS
        return F_EQUAL
    if u >= -eps:  # a's half-line meets b's backward extension
        return F_LESS
    if v >= -eps:
        return F_GREATER
    # both intersections behind: order by the weighted comparison anyway
    diff = (ray_a.weight + u) - (ray_b.weight + v)
    if diff < -tol.eps_solve:
        return F_GREATER
    if diff > tol.eps_solve:
        return F_LESS
    return F_EQUAL


def equal_weight_point(ray: TangentRay, anchor: Point, w_anchor: float) -> Optional[Point]:
    """Point p on `ray` with ray.weight + |p - origin| = w_anchor + |p - anchor|."""
    ox, oy = ray.origin
    dx, dy = ray.direction
    ex, ey = ox - anchor[0], oy - anchor[1]
    dw = ray.weight - w_anchor
    e2 = ex * ex + ey * ey
    ed = ex * dx + ey * dy
    den = 2.0 * (ed - dw)
    if abs(den) <= 1e-15:
        return None
    u = (dw * dw - e2) / den
    if u < 0.0:
        return None
    return Point(ox + u * dx, oy + u * dy)


# -- image search ---------------------------------------------------------------


@dataclass
class ChainImage:
    contact: int                 # vertex index on the target chain
    ray: TangentRay              # effective tangent ray at the image
    clamped: int                 # -1 clamped to end0, +1 clamped to end1, 0 interior


class ComparatorCounter:
    __slots__ = ("calls", "rounds")

    def __init__(self) -> None:
        self.calls = 0
        self.rounds = 0


def image_on(chain_b: PseudoConvexChain, ray_a: TangentRay,
             tol: Tolerance = DEFAULT_TOL,
             counter: Optional[ComparatorCounter] = None) -> ChainImage:
    """Locate f(a) on chain B by binary search over its tangent events.

    The comparator answers GREATER while the event parameter is below the
    image and LESS above it; the bracket pins the contact vertex (or edge).
    """
    events = chain_b.events

    def sign(k: int) -> int:
        if counter is not None:
            counter.calls += 1
        r = tangent_compare(ray_a, events[k], tol)
        return 1 if r == F_GREATER else (-1 if r == F_LESS else 0)

    last = len(events) - 1
    if sign(0) <= 0:
        return ChainImage(events[0].contact, events[0], -1)
    if sign(last) >= 0:
        return ChainImage(events[last].contact, events[last], +1)
    lo, hi = 0, last
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sign(mid) > 0:
            lo = mid
        else:
            hi = mid
    ev_lo, ev_hi = events[lo], events[hi]
    if ev_lo.contact == ev_hi.contact:
        v = ev_lo.contact
        p = equal_weight_point(ray_a, chain_b.pts[v], chain_b.weights[v])
        if p is not None and dist(p, chain_b.pts[v]) > tol.eps_solve:
            ray = chain_b.ray_toward(v, p)
        else:
            mx = ev_lo.direction[0] + ev_hi.direction[0]
            my = ev_lo.direction[1] + ev_hi.direction[1]
            ray = TangentRay(chain_b.pts[v], _unit(mx, my), chain_b.weights[v], v)
        return ChainImage(v, ray, 0)
    # bracket along one edge: contact slides on the edge, tangent is the edge
    return ChainImage(ev_lo.contact, ev_lo, 0)


def _event_pos(chain: PseudoConvexChain, image: ChainImage) -> float:
    """Comparable position of an image along the chain's event order."""
    v = image.contact
    d0, d1 = chain.wedge(v)
    base = 2.0 * v
    dx, dy = image.ray.direction
    c01 = d0[0] * d1[1] - d0[1] * d1[0]
    if abs(c01) <= 1e-14:
        frac = 0.5
    else:
        c0r = d0[0] * dy - d0[1] * dx
        c1r = dx * d1[1] - dy * d1[0]
        tot = abs(c0r) + abs(c1r)
        frac = 0.5 if tot == 0.0 else abs(c0r) / tot
    return base + frac


def _event_index_pos(chain: PseudoConvexChain, k: int) -> float:
    ev = chain.events[k]
    v = ev.contact
    d0, _ = chain.wedge(v)
    if (abs(ev.direction[0] - d0[0]) + abs(ev.direction[1] - d0[1])) <= 1e-12:
        return 2.0 * v
    return 2.0 * v + 1.0


# -- anchor polish -----------------------------------------------------------------


def equidistant_from_anchors(anchors: Sequence[Tuple[Point, float]]
                             ) -> List[Tuple[Point, float]]:
    """Points x with w_i + |x - a_i| all equal for three weighted anchors.

    Pairwise differences of the squared circle equations are linear in (x, R),
    so x is affine in R and the remaining circle equation is a quadratic in R;
    returns all admissible (x, R) pairs, smallest R first.
    """
    (a, wa), (b, wb), (c, wc) = anchors
    m11, m12 = 2.0 * (b[0] - a[0]), 2.0 * (b[1] - a[1])
    m21, m22 = 2.0 * (c[0] - b[0]), 2.0 * (c[1] - b[1])
    det = m11 * m22 - m12 * m21
    if abs(det) <= 1e-13 * max(1.0, abs(m11) + abs(m12)) * max(1.0, abs(m21) + abs(m22)):
        return []
    u1 = (b[0] ** 2 + b[1] ** 2 - wb * wb) - (a[0] ** 2 + a[1] ** 2 - wa * wa)
    u2 = (c[0] ** 2 + c[1] ** 2 - wc * wc) - (b[0] ** 2 + b[1] ** 2 - wb * wb)
    v1 = 2.0 * (wb - wa)
    v2 = 2.0 * (wc - wb)
    x0 = ((u1 * m22 - u2 * m12) / det, (m11 * u2 - m21 * u1) / det)
    x1 = ((v1 * m22 - v2 * m12) / det, (m11 * v2 - m21 * v1) / det)
    px, py = x0[0] - a[0], x0[1] - a[1]
    qa = x1[0] * x1[0] + x1[1] * x1[1] - 1.0
    qb = 2.0 * (px * x1[0] + py * x1[1] + wa)
    qc = px * px + py * py - wa * wa
    roots: List[float] = []
    if abs(qa) <= 1e-14:
        if abs(qb) > 1e-14:
            roots.append(-qc / qb)
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc >= -1e-12 * max(1.0, qb * qb):
            sq = math.sqrt(max(disc, 0.0))
            roots.extend([(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)])
    wmax = max(wa, wb, wc)
    out: List[Tuple[Point, float]] = []
    for R in sorted(roots):
        if R < wmax - 1e-9 * max(1.0, wmax):
            continue
        x = Point(x0[0] + R * x1[0], x0[1] + R * x1[1])
        out.append((x, R))
    return out


def _direction_in_wedge(chain: PseudoConvexChain, v: int, target: Point,
                        tol: Tolerance) -> bool:
    """Is the tangency direction from vertex v toward `target` inside v's wedge?"""
    ox, oy = chain.pts[v]
    dx, dy = _unit(target[0] - ox, target[1] - oy)
    if dx == 0.0 and dy == 0.0:
        return False
    d0, d1 = chain.wedge(v)
    eps = 1e-9
    c0 = d0[0] * dy - d0[1] * dx   # d0 x d
    c1 = dx * d1[1] - dy * d1[0]   # d x d1
    span = d0[0] * d1[1] - d0[1] * d1[0]
    if abs(span) <= eps:
        # degenerate wedge: require near-collinear AND same-direction
        return c0 >= -1e-7 and c1 >= -1e-7 and (d0[0] * dx + d0[1] * dy) > 0.0
    if span > 0:  # wedge sweeps CCW from d0 to d1
        return c0 >= -eps and c1 >= -eps
    # wedge sweeps CW from d0 to d1 (heuristic for apex wedges beyond pi)
    return c0 <= eps and c1 <= eps


@dataclass
class SolveResult:
    point: Optional[Point]
    radius: float
    anchors: Tuple[Point, Point, Point]
    anchor_indices: Tuple[int, int, int]
    rounds: int
    comparator_calls: int
    backend: str
    ok: bool = True
    # plausible (point, radius, anchor indices) alternatives, best first; the
    # caller can validate them against true geodesic distances
    candidates: List[Tuple[Point, float, Tuple[int, int, int]]] = None  # type: ignore[assignment]

    @property
    def failed(self) -> bool:
        return not self.ok or self.point is None


def _finish(chains: Tuple[PseudoConvexChain, PseudoConvexChain, PseudoConvexChain],
            idxs: Tuple[int, int, int], rounds: int, calls: int, backend: str,
            tol: Tolerance) -> SolveResult:
    """Polish localized anchors into the equidistant point.

    When the localized triple fails the tangency (wedge) check, neighboring
    vertices are tried; the candidate with the fewest wedge violations and
    smallest radius wins.
    """
    A, B, C = chains
    scored: List[Tuple[int, float, Point, Tuple[int, int, int]]] = []
    seen: set = set()

    def try_triple(ia: int, ib: int, ic: int) -> None:
        if (ia, ib, ic) in seen:
            return
        seen.add((ia, ib, ic))
        anchors = ((A.pts[ia], A.weights[ia]),
                   (B.pts[ib], B.weights[ib]),
                   (C.pts[ic], C.weights[ic]))
        for x, R in equidistant_from_anchors(anchors):
            bad = ((0 if _direction_in_wedge(A, ia, x, tol) else 1)
                   + (0 if _direction_in_wedge(B, ib, x, tol) else 1)
                   + (0 if _direction_in_wedge(C, ic, x, tol) else 1))
            scored.append((bad, R, x, (ia, ib, ic)))

    ia0, ib0, ic0 = idxs
    try_triple(ia0, ib0, ic0)
    if not scored or scored[0][0] > 0:
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    try_triple(min(max(ia0 + da, 0), len(A) - 1),
                               min(max(ib0 + db, 0), len(B) - 1),
                               min(max(ic0 + dc, 0), len(C) - 1))
    if not scored:
        return SolveResult(None, math.nan, (A.pts[ia0], B.pts[ib0], C.pts[ic0]),
                           idxs, rounds, calls, backend, ok=False, candidates=[])
    scored.sort(key=lambda e: (e[0], e[1]))
    bad, R, x, (ia, ib, ic) = scored[0]
    cands = [(e[2], e[1], e[3]) for e in scored[:16]]
    return SolveResult(x, R, (A.pts[ia], B.pts[ib], C.pts[ic]),
                       (ia, ib, ic), rounds, calls, backend, ok=(bad == 0),
                       candidates=cands)


# -- solver backends -----------------------------------------------------------------


def fixpoint_solve_bisection(A: PseudoConvexChain, B: PseudoConvexChain,
                             C: PseudoConvexChain,
                             tol: Tolerance = DEFAULT_TOL) -> SolveResult:
    """Reference backend: nested monotone bisection on chain parameters.

    sigma(k) compares the position of h(g(f(a_k))) against a_k; the composed
    map is decreasing, so bisection over A's events brackets the fixpoint.
    Each sigma evaluation runs the three inner image searches.
    """
    counter = ComparatorCounter()

    def compose(k: int) -> Tuple[ChainImage, ChainImage, ChainImage]:
        ray_a = A.events[k]
        img_b = image_on(B, ray_a, tol, counter)
        img_c = image_on(C, img_b.ray, tol, counter)
        img_a = image_on(A, img_c.ray, tol, counter)
        return img_b, img_c, img_a

    def sigma(k: int) -> float:
        _, _, img_a = compose(k)
        return _event_pos(A, img_a) - _event_index_pos(A, k)

    last = len(A.events) - 1
    rounds = 2
    if sigma(0) <= 0.0:
        bracket = 0
    elif sigma(last) >= 0.0:
        bracket = last
    else:
        lo, hi = 0, last
        while hi - lo > 1:
            rounds += 1
            mid = (lo + hi) // 2
            if sigma(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        bracket = lo
    img_b, img_c, _ = compose(bracket)
    counter.rounds = rounds
    return _finish((A, B, C), (A.events[bracket].contact, img_b.contact, img_c.contact),
                   rounds, counter.calls, "bisection", tol)


def fixpoint_solve_tentative(A: PseudoConvexChain, B: PseudoConvexChain,
                             C: PseudoConvexChain,
                             tol: Tolerance = DEFAULT_TOL,
                             max_rounds: Optional[int] = None) -> SolveResult:
    """Tentative prune-and-search backend.

    One event interval per chain. Each round tests one point per chain (the
    apexes first, interval midpoints afterwards) with one comparator call per
    adjacent pair. Mixed sign patterns give a certified half discard; uniform
    patterns provisionally discard one half of every chain (at most one of
    the three can be wrong). A corridor-consistency probe validates the
    provisional state; on failure the working intervals roll back to the last
    certified state and one composed-map test resolves a certified discard.
    """
    counter = ComparatorCounter()
    chains = (A, B, C)
    ev = [A.events, B.events, C.events]
    lo = [0, 0, 0]
    hi = [len(e) - 1 for e in ev]
    cert_lo, cert_hi = lo[:], hi[:]
    nmax = max(len(e) for e in ev)
    budget = max_rounds if max_rounds is not None else max(16, math.ceil(
        8 * math.log2(max(nmax, 2))))

    def cmp_pair(i: int, ka: int, kb: int) -> int:
        counter.calls += 1
        r = tangent_compare(ev[i][ka], ev[(i + 1) % 3][kb], tol)
        return 1 if r == F_GREATER else (-1 if r == F_LESS else 0)

    def consistent() -> bool:
        # x_{i+1} = f_i(x_i) with f_i decreasing forces
        # f_i(lo_i) >= lo_{i+1} and f_i(hi_i) <= hi_{i+1}
        for i in range(3):
            j = (i + 1) % 3
            if cmp_pair(i, lo[i], lo[j]) < 0:
                return False
            if cmp_pair(i, hi[i], hi[j]) > 0:
                return False
        return True

    def certified_halving(i: int) -> None:
        """Halve chain i's certified interval by one composed-map sign test."""
        m = (cert_lo[i] + cert_hi[i]) // 2
        ray = ev[i][m]
        img = None
        for step in range(3):
            img = image_on(chains[(i + 1 + step) % 3], ray, tol, counter)
            ray = img.ray
        if _event_pos(chains[i], img) - _event_index_pos(chains[i], m) >= 0.0:
            cert_lo[i] = max(cert_lo[i], m)
        else:
            cert_hi[i] = min(cert_hi[i], m)

    rounds = 0
    first = True
    while rounds < budget and any(hi[i] - lo[i] > 1 for i in range(3)):
        rounds += 1
        if first:
            test = [min(max(2 * c.apex, lo[i] + 1), hi[i] - 1) if hi[i] - lo[i] > 1
                    else lo[i] for i, c in enumerate(chains)]
            first = False
        else:
            test = [(lo[i] + hi[i]) // 2 for i in range(3)]
        s = [cmp_pair(i, test[i], test[(i + 1) % 3]) for i in range(3)]

        applied = False
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            # exclusion-cycle certificates; zeros support both directions
            if s[i] >= 0 and s[j] <= 0 and s[k] >= 0 and test[i] > lo[i]:
                lo[i] = test[i]
                cert_lo[i] = max(cert_lo[i], test[i])
                applied = True
            elif s[i] <= 0 and s[j] >= 0 and s[k] <= 0 and test[i] < hi[i]:
                hi[i] = test[i]
                cert_hi[i] = min(cert_hi[i], test[i])
                applied = True
        if applied:
            continue

        if all(x > 0 for x in s):
            for i in range(3):
                lo[i] = max(lo[i], test[i])
        elif all(x < 0 for x in s):
            for i in range(3):
                hi[i] = min(hi[i], test[i])
        else:
            widest = max(range(3), key=lambda i: cert_hi[i] - cert_lo[i])
            certified_halving(widest)
            lo, hi = cert_lo[:], cert_hi[:]
            continue

        if not consistent():
            widest = max(range(3), key=lambda i: cert_hi[i] - cert_lo[i])
            certified_halving(widest)
            lo, hi = cert_lo[:], cert_hi[:]

    if any(hi[i] - lo[i] > 1 for i in range(3)) or not consistent():
        # fall back to certified halvings only
        lo, hi = cert_lo[:], cert_hi[:]
        while rounds < budget and any(hi[i] - lo[i] > 1 for i in range(3)):
            rounds += 1
            widest = max(range(3), key=lambda i: hi[i] - lo[i])
            certified_halving(widest)
            lo, hi = cert_lo[:], cert_hi[:]

    counter.rounds = rounds
    idxs = (ev[0][(lo[0] + hi[0]) // 2].contact,
            ev[1][(lo[1] + hi[1]) // 2].contact,
            ev[2][(lo[2] + hi[2]) // 2].contact)
    return _finish(chains, idxs, rounds, counter.calls, "tentative", tol)
