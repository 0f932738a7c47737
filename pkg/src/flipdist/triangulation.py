"""Triangulation domains (point sets, polygonal regions with holes) and
edge-set triangulations over them with flip legality and validation.

Domains scale their rational coordinates to a shared integer grid once at
construction; every predicate after that is plain integer arithmetic, which
keeps exactness and makes validation and search cheap.
"""

from __future__ import annotations

import functools
from math import lcm
from typing import NamedTuple, Optional, Sequence

from .errors import DomainMismatchError, IllegalFlipError, ValidationError
from .geometry import Point2, polygon_signed_area2

Edge = tuple[int, int]
Triangle = tuple[int, int, int]


def edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def tri(a: int, b: int, c: int) -> Triangle:
    return tuple(sorted((a, b, c)))  # type: ignore[return-value]


class FlipMove(NamedTuple):
    removed: Edge
    inserted: Edge

    def reverse(self) -> "FlipMove":
        return FlipMove(self.inserted, self.removed)


# ---------------------------------------------------------------------------
# integer predicate helpers (exact; operate on grid-scaled coordinates)

def _iorient(a, b, c) -> int:
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _ion_segment(p, a, b, closed=True) -> bool:
    if _iorient(a, b, p) != 0:
        return False
    if not closed and (p == a or p == b):
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and \
        min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _ishare_interior(a, b, c, d) -> bool:
    """True iff segments ab and cd intersect beyond shared endpoints."""
    o1 = _iorient(a, b, c)
    o2 = _iorient(a, b, d)
    o3 = _iorient(c, d, a)
    o4 = _iorient(c, d, b)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    for p in (c, d):
        if p != a and p != b and _ion_segment(p, a, b):
            return True
    for p in (a, b):
        if p != c and p != d and _ion_segment(p, c, d):
            return True
    if o1 == o2 == o3 == o4 == 0:
        # collinear: any overlap of positive length
        key = 0 if a[0] != b[0] else 1
        lo1, hi1 = sorted((a[key], b[key]))
        lo2, hi2 = sorted((c[key], d[key]))
        return max(lo1, lo2) < min(hi1, hi2)
    return False


def _point_in_cycle(q2, cycle_pts2) -> int:
    """Locate a doubled-coordinate point in a doubled-coordinate cycle.

    Returns +1 strictly inside, 0 on the boundary, -1 strictly outside.
    Crossing-number parity with the half-open vertex rule.
    """
    n = len(cycle_pts2)
    for i in range(n):
        if _ion_segment(q2, cycle_pts2[i], cycle_pts2[(i + 1) % n]):
            return 0
    inside = False
    qy = q2[1]
    for i in range(n):
        a = cycle_pts2[i]
        b = cycle_pts2[(i + 1) % n]
        if (a[1] <= qy) != (b[1] <= qy):
            o = _iorient(a, b, q2)
            if b[1] > a[1]:      # upward edge: count if q strictly left
                if o > 0:
                    inside = not inside
            else:                # downward edge: count if q strictly right
                if o < 0:
                    inside = not inside
    return 1 if inside else -1


# ---------------------------------------------------------------------------
# domains

class _DomainBase:
    points: tuple[Point2, ...]

    def _setup_grid(self):
        dens = [p.x.denominator for p in self.points] + \
               [p.y.denominator for p in self.points]
        scale = lcm(*dens) if dens else 1
        self._scale = scale
        self.ipoints = [(int(p.x * scale), int(p.y * scale)) for p in self.points]
        self.ipoints2 = [(2 * x, 2 * y) for x, y in self.ipoints]
        if len(set(self.ipoints)) != len(self.ipoints):
            raise ValidationError("points are not pairwise distinct")

    def orient(self, i: int, j: int, k: int) -> int:
        return _iorient(self.ipoints[i], self.ipoints[j], self.ipoints[k])

    def segments_share_interior(self, e: Edge, f: Edge) -> bool:
        ip = self.ipoints
        return _ishare_interior(ip[e[0]], ip[e[1]], ip[f[0]], ip[f[1]])

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None  # type: ignore[assignment]


class PointSet(_DomainBase):
    """Finite planar point set; triangulations cover its convex hull."""

    is_region = False

    def __init__(self, points: Sequence[Point2]):
        self.points = tuple(points)
        if len(self.points) < 3:
            raise ValidationError("point set needs at least 3 points")
        self._setup_grid()
        cycle = _hull_cycle_with_collinear(self.ipoints)
        if cycle is None:
            raise ValidationError("all points are collinear")
        self.boundary_cycles = [cycle]
        self.mandatory_edges = frozenset(
            edge(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle)))
        b = len(cycle)
        self.expected_edge_count = 3 * len(self.points) - b - 3
        self.expected_triangle_count = 2 * len(self.points) - b - 2

    def _key(self):
        return self.points

    def point_location(self, q2) -> int:
        return _point_in_cycle(q2, [self.ipoints2[i] for i in self.boundary_cycles[0]])


class PolygonalRegion(_DomainBase):
    """Simple polygon with polygonal holes; one-vertex holes are points."""

    is_region = True

    def __init__(self, points: Sequence[Point2], outer: Sequence[int],
                 holes: Sequence[Sequence[int]] = ()):
        self.points = tuple(points)
        self.outer = tuple(outer)
        self.holes = tuple(tuple(h) for h in holes)
        self._setup_grid()
        self.poly_holes = [h for h in self.holes if len(h) >= 3]
        self.point_holes = [h[0] for h in self.holes if len(h) == 1]
        if any(len(h) == 2 for h in self.holes):
            raise ValidationError("two-vertex holes are not polygons")
        self._check_structure()
        self.boundary_cycles = [list(self.outer)] + [list(h) for h in self.poly_holes]
        self.mandatory_edges = frozenset(
            edge(c[i], c[(i + 1) % len(c)])
            for c in self.boundary_cycles for i in range(len(c)))
        b = sum(len(c) for c in self.boundary_cycles)
        h = len(self.poly_holes)
        self.expected_edge_count = 3 * len(self.points) - b + 3 * h - 3
        self.expected_triangle_count = 2 * len(self.points) - b + 2 * h - 2

    def _key(self):
        return (self.points, self.outer, self.holes)

    def _check_structure(self):
        seen: set[int] = set()
        for idx in list(self.outer) + [i for h in self.holes for i in h]:
            if not 0 <= idx < len(self.points):
                raise ValidationError(f"boundary index {idx} out of range")
            if idx in seen:
                raise ValidationError(f"index {idx} used twice on boundaries")
            seen.add(idx)
        if seen != set(range(len(self.points))):
            missing = sorted(set(range(len(self.points))) - seen)
            raise ValidationError(
                f"points {missing} belong to no boundary; list them as point holes")
        if len(self.outer) < 3:
            raise ValidationError("outer boundary needs at least 3 vertices")
        if polygon_signed_area2([self.points[i] for i in self.outer]) <= 0:
            raise ValidationError("outer boundary must be counterclockwise")
        for h in self.poly_holes:
            if polygon_signed_area2([self.points[i] for i in h]) >= 0:
                raise ValidationError("hole boundaries must be clockwise")
        cycles = [list(self.outer)] + [list(h) for h in self.poly_holes]
        segs = []
        for c in cycles:
            for i in range(len(c)):
                segs.append((c[i], c[(i + 1) % len(c)]))
        ip = self.ipoints
        for i in range(len(segs)):
            a, b = segs[i]
            for j in range(i + 1, len(segs)):
                c, d = segs[j]
                shared = len({a, b} & {c, d})
                if shared == 2:
                    raise ValidationError(f"duplicate boundary edge {(a, b)}")
                if _ishare_interior(ip[a], ip[b], ip[c], ip[d]):
                    raise ValidationError(
                        f"boundary edges {(a, b)} and {(c, d)} intersect")
        for a, b in segs:
            for k in range(len(self.points)):
                if k != a and k != b and _ion_segment(ip[k], ip[a], ip[b]):
                    raise ValidationError(f"point {k} lies on boundary edge {(a, b)}")
        outer2 = [self.ipoints2[i] for i in self.outer]
        for h in list(self.poly_holes) + [[p] for p in self.point_holes]:
            for idx in h:
                if _point_in_cycle(self.ipoints2[idx], outer2) <= 0:
                    raise ValidationError(
                        f"hole vertex {idx} is not strictly inside the outer boundary")
        for hi, h1 in enumerate(self.poly_holes):
            cyc2 = [self.ipoints2[i] for i in h1]
            for h2 in self.poly_holes[hi + 1:]:
                if _point_in_cycle(self.ipoints2[h2[0]], cyc2) > 0:
                    raise ValidationError("nested holes")
            for p in self.point_holes:
                if _point_in_cycle(self.ipoints2[p], cyc2) > 0:
                    raise ValidationError(f"point hole {p} inside a polygonal hole")

    def point_location(self, q2) -> int:
        """+1 strictly inside the region, 0 on a boundary, -1 outside."""
        loc = _point_in_cycle(q2, [self.ipoints2[i] for i in self.outer])
        if loc <= 0:
            return loc
        for h in self.poly_holes:
            hl = _point_in_cycle(q2, [self.ipoints2[i] for i in h])
            if hl == 0:
                return 0
            if hl > 0:
                return -1
        return 1


def _hull_cycle_with_collinear(ipoints) -> Optional[list[int]]:
    """Convex hull cycle (CCW) listing every point on the hull boundary."""
    idx = sorted(range(len(ipoints)), key=lambda i: ipoints[i])

    def build(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2 and _iorient(
                    ipoints[out[-2]], ipoints[out[-1]], ipoints[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = build(idx)
    upper = build(reversed(idx))
    corners = lower[:-1] + upper[:-1]
    if len(corners) < 3:
        return None
    cycle: list[int] = []
    corner_set = set(corners)
    for k in range(len(corners)):
        a, b = corners[k], corners[(k + 1) % len(corners)]
        onway = [i for i in range(len(ipoints)) if i not in corner_set
                 and _ion_segment(ipoints[i], ipoints[a], ipoints[b], closed=False)]
        onway.sort(key=lambda i: (abs(ipoints[i][0] - ipoints[a][0]),
                                  abs(ipoints[i][1] - ipoints[a][1])))
        cycle.append(a)
        cycle.extend(onway)
    return cycle


def ear_clip_with_triangles(domain, cycle: Sequence[int]):
    """Triangulate one simple polygon given as a vertex cycle.

    Deterministic: always clips the lowest-index available ear.  Returns
    (edges, triangles) where edges include the cycle edges.
    """
    ip = domain.ipoints
    cyc = list(cycle)
    area2 = 0
    for i in range(len(cyc)):
        a, b = ip[cyc[i]], ip[cyc[(i + 1) % len(cyc)]]
        area2 += a[0] * b[1] - a[1] * b[0]
    if area2 < 0:
        cyc.reverse()
    edges: set[Edge] = set()
    triangles: list[Triangle] = []
    for i in range(len(cyc)):
        edges.add(edge(cyc[i], cyc[(i + 1) % len(cyc)]))

    def blocked(a, b, c, others):
        # any remaining vertex inside or on the candidate ear blocks it
        for w in others:
            pa, pb, pc, pw = ip[a], ip[b], ip[c], ip[w]
            if _iorient(pa, pb, pw) >= 0 and _iorient(pb, pc, pw) >= 0 \
                    and _iorient(pc, pa, pw) >= 0:
                return True
        return False

    while len(cyc) > 3:
        clipped = False
        order = sorted(range(len(cyc)), key=lambda i: cyc[i])
        for i in order:
            a = cyc[(i - 1) % len(cyc)]
            b = cyc[i]
            c = cyc[(i + 1) % len(cyc)]
            if _iorient(ip[a], ip[b], ip[c]) != 1:
                continue
            others = [w for w in cyc if w not in (a, b, c)]
            if blocked(a, b, c, others):
                continue
            edges.add(edge(a, c))
            triangles.append(tri(a, b, c))
            cyc.pop(i)
            clipped = True
            break
        if not clipped:
            raise ValidationError(f"ear clipping stuck on cycle {cyc}")
    triangles.append(tri(*cyc))
    return edges, triangles


def ear_clip_triangulation(domain, cycle: Sequence[int]) -> set[Edge]:
    return ear_clip_with_triangles(domain, cycle)[0]


# ---------------------------------------------------------------------------
# face extraction from a plane edge set

def _sorted_rotations(domain, edges) -> dict[int, list[int]]:
    """Neighbors of every vertex in counterclockwise angular order."""
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    ip = domain.ipoints

    def around(v):
        vx, vy = ip[v]

        def cmp(w1, w2):
            d1 = (ip[w1][0] - vx, ip[w1][1] - vy)
            d2 = (ip[w2][0] - vx, ip[w2][1] - vy)
            h1 = 0 if (d1[1] > 0 or (d1[1] == 0 and d1[0] > 0)) else 1
            h2 = 0 if (d2[1] > 0 or (d2[1] == 0 and d2[0] > 0)) else 1
            if h1 != h2:
                return h1 - h2
            cr = d1[0] * d2[1] - d1[1] * d2[0]
            if cr != 0:
                return -1 if cr > 0 else 1
            return w1 - w2  # overlapping directions: deterministic fallback
        return cmp

    return {v: sorted(ws, key=functools.cmp_to_key(around(v)))
            for v, ws in adj.items()}


def extract_faces(domain, edges) -> list[list[int]]:
    """All face cycles of the plane graph (edges must be non-crossing)."""
    rot = _sorted_rotations(domain, edges)
    index_of = {v: {w: i for i, w in enumerate(ws)} for v, ws in rot.items()}
    faces = []
    seen: set[tuple[int, int]] = set()
    for u0, v0 in sorted(edges):
        for dart in ((u0, v0), (v0, u0)):
            if dart in seen:
                continue
            face = []
            u, v = dart
            while (u, v) not in seen:
                seen.add((u, v))
                face.append(u)
                ws = rot[v]
                nxt = ws[(index_of[v][u] - 1) % len(ws)]
                u, v = v, nxt
            faces.append(face)
    return faces


def _canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Rotation- and reflection-independent canonical form of a cycle."""
    best = None
    n = len(cycle)
    for seq in (list(cycle), list(reversed(cycle))):
        for s in range(n):
            cand = tuple(seq[(s + i) % n] for i in range(n))
            if best is None or cand < best:
                best = cand
    return best  # type: ignore[return-value]


def derive_triangles(domain, edges) -> frozenset[Triangle]:
    """Triangles of a triangulation given as a plane edge set.

    Matches non-triangular faces against the domain boundary cycles; anything
    else must be a triangle, otherwise the edge set is not a triangulation.
    """
    expected = {_canonical_cycle(c) for c in domain.boundary_cycles}
    triangles: set[Triangle] = set()
    for face in extract_faces(domain, edges):
        if len(face) == 3:
            a, b, c = face
            if domain.orient(a, b, c) == 0:
                raise ValidationError(f"degenerate triangle face {face}")
            key = _canonical_cycle(face)
            if key in expected:
                expected.discard(key)
                continue
            triangles.add(tri(a, b, c))
        else:
            key = _canonical_cycle(face)
            if key in expected:
                expected.discard(key)
            else:
                raise ValidationError(f"non-triangular interior face {face}")
    if expected:
        raise ValidationError("boundary cycles missing from the face structure")
    return frozenset(triangles)


# ---------------------------------------------------------------------------
# triangulations

class ValidationReport:
    def __init__(self):
        self.violations: list[str] = []

    def add(self, msg: str):
        self.violations.append(msg)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __repr__(self):
        return f"ValidationReport(ok={self.ok}, violations={self.violations!r})"


class Triangulation:
    """Immutable edge-set triangulation over a shared domain."""

    __slots__ = ("domain", "edges", "_triangles", "_apexes")

    def __init__(self, domain, edges, triangles: Optional[frozenset] = None):
        self.domain = domain
        self.edges = frozenset(edge(u, v) for u, v in edges)
        self._triangles = triangles
        self._apexes: Optional[dict[Edge, list[int]]] = None

    @property
    def triangles(self) -> frozenset[Triangle]:
        if self._triangles is None:
            self._triangles = derive_triangles(self.domain, self.edges)
        return self._triangles

    def edge_apexes(self) -> dict[Edge, list[int]]:
        if self._apexes is None:
            apexes: dict[Edge, list[int]] = {}
            for a, b, c in self.triangles:
                apexes.setdefault(edge(a, b), []).append(c)
                apexes.setdefault(edge(a, c), []).append(b)
                apexes.setdefault(edge(b, c), []).append(a)
            self._apexes = apexes
        return self._apexes

    def canonical_key(self) -> bytes:
        return ";".join(f"{u},{v}" for u, v in sorted(self.edges)).encode("ascii")

    def legal_flips(self) -> list[FlipMove]:
        out = []
        apexes = self.edge_apexes()
        orient = self.domain.orient
        for e in self.edges:
            aps = apexes.get(e)
            if aps is None or len(aps) != 2:
                continue
            u, v = e
            x, y = aps
            # quadrilateral u, x, v, y must be strictly convex
            s = orient(u, x, v)
            if s == 0 or orient(x, v, y) != s or orient(v, y, u) != s \
                    or orient(y, u, x) != s:
                continue
            out.append(FlipMove(e, edge(x, y)))
        out.sort()
        return out

    def flip_is_legal(self, move: FlipMove) -> bool:
        aps = self.edge_apexes().get(move.removed)
        if aps is None or len(aps) != 2:
            return False
        if edge(*aps) != move.inserted:
            return False
        u, v = move.removed
        x, y = aps
        s = self.domain.orient(u, x, v)
        return s != 0 and self.domain.orient(x, v, y) == s \
            and self.domain.orient(v, y, u) == s and self.domain.orient(y, u, x) == s

    def apply_flip(self, move: FlipMove) -> "Triangulation":
        if not self.flip_is_legal(move):
            raise IllegalFlipError(f"illegal flip {move}")
        u, v = move.removed
        x, y = move.inserted
        new_edges = (self.edges - {move.removed}) | {move.inserted}
        new_tris = (self.triangles - {tri(u, v, x), tri(u, v, y)}) \
            | {tri(x, y, u), tri(x, y, v)}
        return Triangulation(self.domain, new_edges, frozenset(new_tris))

    def apply_script(self, moves) -> "Triangulation":
        t = self
        for m in moves:
            t = t.apply_flip(m)
        return t


def edge_difference(t1: Triangulation, t2: Triangulation):
    if t1.domain != t2.domain:
        raise DomainMismatchError("triangulations live on different domains")
    return (t1.edges - t2.edges, t2.edges - t1.edges)


def validate(t: Triangulation) -> ValidationReport:
    """Check every Triangulation invariant; an empty report means valid."""
    report = ValidationReport()
    domain = t.domain
    n = len(domain.points)
    for u, v in t.edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            report.add(f"bad edge {(u, v)}")
            return report

    missing = domain.mandatory_edges - t.edges
    if missing:
        report.add(f"missing mandatory boundary edges: {sorted(missing)[:4]}")

    used = {u for e in t.edges for u in e}
    if used != set(range(n)):
        report.add(f"vertices without incident edges: {sorted(set(range(n)) - used)[:4]}")

    ip = domain.ipoints
    for u, v in t.edges:
        for k in range(n):
            if k != u and k != v and _ion_segment(ip[k], ip[u], ip[v]):
                report.add(f"point {k} lies inside edge {(u, v)}")

    # containment: non-boundary edges must not touch the boundary except at
    # endpoints, and their midpoints must be strictly inside the region
    if domain.is_region:
        boundary = domain.mandatory_edges
        for e in t.edges:
            if e in boundary:
                continue
            u, v = e
            for f in boundary:
                if len({u, v} & set(f)) == 0:
                    if domain.segments_share_interior(e, f):
                        report.add(f"edge {e} crosses boundary edge {f}")
                        break
                else:
                    a, b = f
                    if _ishare_interior(ip[u], ip[v], ip[a], ip[b]):
                        report.add(f"edge {e} overlaps boundary edge {f}")
                        break
            mid2 = (ip[u][0] + ip[v][0], ip[u][1] + ip[v][1])
            if domain.point_location(mid2) <= 0:
                report.add(f"edge {e} leaves the region")

    # pairwise proper crossings, bounding-box prefiltered
    non_boundary = sorted(t.edges - domain.mandatory_edges)
    all_edges = sorted(t.edges)
    boxes = {}
    for e in all_edges:
        (x1, y1), (x2, y2) = ip[e[0]], ip[e[1]]
        boxes[e] = (min(x1, x2), max(x1, x2), min(y1, y2), max(y1, y2))
    by_minx = sorted(all_edges, key=lambda e: boxes[e][0])
    for e in non_boundary:
        ex0, ex1, ey0, ey1 = boxes[e]
        for f in by_minx:
            fb = boxes[f]
            if fb[0] > ex1:
                break
            if f == e or fb[1] < ex0 or fb[2] > ey1 or fb[3] < ey0:
                continue
            if len({*e} & {*f}) == 0 and domain.segments_share_interior(e, f):
                report.add(f"edges {e} and {f} cross")
            elif len({*e} & {*f}) == 1 and domain.segments_share_interior(e, f):
                report.add(f"edges {e} and {f} overlap")

    if len(t.edges) != domain.expected_edge_count:
        report.add(f"edge count {len(t.edges)} != maximal count "
                   f"{domain.expected_edge_count} (not a triangulation)")

    if report.ok:
        try:
            tris = derive_triangles(domain, t.edges)
        except ValidationError as exc:
            report.add(str(exc))
        else:
            if len(tris) != domain.expected_triangle_count:
                report.add(f"triangle count {len(tris)} != expected "
                           f"{domain.expected_triangle_count}")
            apexes: dict[Edge, int] = {}
            for a, b, c in tris:
                for e in (edge(a, b), edge(a, c), edge(b, c)):
                    apexes[e] = apexes.get(e, 0) + 1
            for e in t.edges:
                want = 1 if e in domain.mandatory_edges else 2
                if apexes.get(e, 0) != want:
                    report.add(f"edge {e} bounds {apexes.get(e, 0)} triangles, "
                               f"expected {want}")
    return report
