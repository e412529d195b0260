"""Convex bodies, placements, boundary arcs, and the metric primitives the
chain construction needs.

All geometry is double precision with scene-relative tolerances; bodies are
polygons (optionally tagged as exact circles), and smooth prototypes are
modeled by strictification plus polygon resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    pass


class NonContactError(GeometryError):
    """Raised when a tangent family reaches its scale cap without touching
    any obstacle (the configuration fails to bound the family)."""


def _as_pts(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise GeometryError("expected an (n, 2) coordinate array")
    return a


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def rot_left(v):
    return np.array([-v[1], v[0]])


def rot_right(v):
    return np.array([v[1], -v[0]])


def _unit(v):
    n = math.hypot(v[0], v[1])
    if n == 0:
        raise GeometryError("zero direction")
    return np.asarray(v, dtype=float) / n


# ---------------------------------------------------------------------------
# convex bodies and placements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexBody:
    """Polygonal convex prototype (counterclockwise vertices, model units).

    ``circle`` tags prototypes that stand for exact disks so downstream code
    may use closed forms; the polygon is still the canonical surface for
    serialization and generic predicates.  Two-vertex bodies are degenerate
    segments (permitted prototypes; they pack as slots).
    """

    vertices: np.ndarray
    name: str = "body"
    circle: tuple | None = None  # (center, radius) in model units

    def __post_init__(self):
        v = _as_pts(self.vertices)
        object.__setattr__(self, "vertices", v)
        n = len(v)
        if n < 2:
            raise GeometryError("a body needs at least 2 vertices")
        if n == 2:
            if np.allclose(v[0], v[1]):
                raise GeometryError("degenerate segment of zero length")
            return
        area2 = 0.0
        for k in range(n):
            area2 += v[k, 0] * v[(k + 1) % n, 1] - v[(k + 1) % n, 0] * v[k, 1]
        if area2 <= 0:
            raise GeometryError("vertices must be in counterclockwise order")
        for k in range(n):
            if _cross(v[k - 1], v[k], v[(k + 1) % n]) <= 0:
                raise GeometryError("vertices must be in strictly convex position")

    # -- measures ----------------------------------------------------------

    @property
    def is_segment(self):
        return len(self.vertices) == 2

    def ring(self):
        """Boundary vertex cycle (segment doubled so traversal closes)."""
        v = self.vertices
        return np.vstack([v, v[::-1][1:-1]]) if self.is_segment else v

    def perimeter(self):
        r = self.ring()
        return float(np.sum(np.linalg.norm(np.roll(r, -1, axis=0) - r, axis=1)))

    def area(self):
        if self.is_segment:
            return 0.0
        v = self.vertices
        return 0.5 * float(
            np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        )

    def centroid(self):
        return np.mean(self.vertices, axis=0)

    def diameter(self):
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def circumradius(self):
        c = self.centroid()
        return float(np.linalg.norm(self.vertices - c, axis=1).max())

    # -- support -----------------------------------------------------------

    def support_point(self, direction):
        """Extremal point in ``direction``; a flat extremal edge is resolved
        to its midpoint so the contact is deterministic."""
        d = _unit(direction)
        v = self.vertices
        h = v @ d
        hmax = h.max()
        flat = np.where(h >= hmax - 1e-12 * max(1.0, abs(hmax)))[0]
        if len(flat) == 1:
            return v[flat[0]].copy()
        return v[flat].mean(axis=0)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def disk(radius=1.0, n=64, name="disk"):
        th = np.linspace(0, TWO_PI, n, endpoint=False)
        pts = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        return ConvexBody(pts, name=name, circle=((0.0, 0.0), float(radius)))

    @staticmethod
    def square(side=1.0, name="square"):
        s = side / 2.0
        return ConvexBody(np.array([[-s, -s], [s, -s], [s, s], [-s, s]]), name=name)

    @staticmethod
    def regular(n, radius=1.0, name=None):
        th = np.linspace(0, TWO_PI, n, endpoint=False)
        pts = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        return ConvexBody(pts, name=name or f"regular{n}")

    @staticmethod
    def segment(length=1.0, angle=0.0, name="segment"):
        h = length / 2.0
        d = np.array([math.cos(angle), math.sin(angle)])
        return ConvexBody(np.array([-h * d, h * d]), name=name)

    def to_json(self):
        return {"name": self.name, "vertices": self.vertices.tolist()}

    @staticmethod
    def from_json(obj):
        return ConvexBody(np.asarray(obj["vertices"], float), name=obj.get("name", "body"))


@dataclass(frozen=True)
class Placement:
    """Positive homothety ``x -> scale * x + translation`` of a prototype."""

    prototype: ConvexBody
    scale: float
    translation: np.ndarray

    def __post_init__(self):
        if not self.scale > 0:
            raise GeometryError("homothety scale must be positive")
        object.__setattr__(self, "translation", np.asarray(self.translation, float))

    def map_point(self, p):
        return self.scale * np.asarray(p, float) + self.translation

    def polygon(self):
        return self.scale * self.prototype.vertices + self.translation

    def circle(self):
        if self.prototype.circle is None:
            return None
        c, r = self.prototype.circle
        return self.map_point(c), self.scale * r

    def perimeter(self):
        return self.scale * self.prototype.perimeter()

    def compose(self, outer_scale, outer_translation):
        """Placement obtained by applying a further homothety to this one."""
        return Placement(
            self.prototype,
            outer_scale * self.scale,
            outer_scale * self.translation + np.asarray(outer_translation, float),
        )


# ---------------------------------------------------------------------------
# polyline / arc primitives
# ---------------------------------------------------------------------------


def polyline_lengths(pts, closed=False):
    p = _as_pts(pts)
    q = np.roll(p, -1, axis=0) if closed else p[1:]
    base = p if closed else p[:-1]
    return np.linalg.norm(q - base, axis=1)


def point_on_polyline(pts, s, closed=False):
    """Point at arclength s along the polyline (clamped; wraps when closed)."""
    p = _as_pts(pts)
    seg = polyline_lengths(p, closed)
    total = float(seg.sum())
    if closed:
        s = s % total if total > 0 else 0.0
    else:
        s = min(max(s, 0.0), total)
    acc = 0.0
    for k, L in enumerate(seg):
        if s <= acc + L or k == len(seg) - 1:
            t = 0.0 if L == 0 else (s - acc) / L
            a = p[k]
            b = p[(k + 1) % len(p)] if closed else p[k + 1]
            return a + t * (b - a)
        acc += L
    return p[-1].copy()


def project_to_polyline(q, pts, closed=False):
    """(distance, arclength parameter, closest point) of q on the polyline."""
    p = _as_pts(pts)
    q = np.asarray(q, float)
    seg = polyline_lengths(p, closed)
    best = (math.inf, 0.0, p[0])
    acc = 0.0
    n = len(p) if closed else len(p) - 1
    for k in range(n):
        a = p[k]
        b = p[(k + 1) % len(p)]
        ab = b - a
        L2 = float(ab @ ab)
        t = 0.0 if L2 == 0 else float(np.clip((q - a) @ ab / L2, 0.0, 1.0))
        c = a + t * ab
        d = float(np.linalg.norm(q - c))
        if d < best[0]:
            best = (d, acc + t * seg[k], c)
        acc += seg[k]
    return best


def point_segment_distance(q, a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    q = np.asarray(q, float)
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0 else float(np.clip((q - a) @ ab / L2, 0.0, 1.0))
    return float(np.linalg.norm(q - (a + t * ab)))


def points_to_segments_distance(Q, P1, P2):
    """Min distance from each point in Q (k,2) to segments (m,2)-(m,2)."""
    Q = np.asarray(Q, float)[:, None, :]
    A = np.asarray(P1, float)[None, :, :]
    B = np.asarray(P2, float)[None, :, :]
    AB = B - A
    L2 = np.maximum((AB ** 2).sum(-1), 1e-300)
    t = np.clip(((Q - A) * AB).sum(-1) / L2, 0.0, 1.0)
    C = A + t[..., None] * AB
    return np.sqrt(((Q - C) ** 2).sum(-1))


def segments_cross(a, b, c, d):
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass(frozen=True)
class CircArc:
    """Arc of a circle: center + radius, start angle, signed sweep (ccw > 0).

    ``region`` records which side the packing lives on: "in" when the bodies
    lie inside the circle (a container arc), "out" when they lie outside
    (the arc bounds an obstacle disk).  Needed because contact formulas
    degenerate when an anchor point sits exactly on the circle.
    """

    center: np.ndarray
    radius: float
    theta0: float
    sweep: float
    region: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, float))

    def point_at(self, u):
        th = self.theta0 + u * self.sweep
        return self.center + self.radius * np.array([math.cos(th), math.sin(th)])

    def endpoints(self):
        return self.point_at(0.0), self.point_at(1.0)

    def length(self):
        return abs(self.sweep) * self.radius

    def sample(self, max_step):
        n = max(2, int(math.ceil(self.length() / max(max_step, 1e-12))) + 1)
        cache = self.__dict__.setdefault("_samples", {})
        got = cache.get(n)
        if got is None:
            th = self.theta0 + np.linspace(0.0, 1.0, n) * self.sweep
            got = self.center + self.radius * np.stack([np.cos(th), np.sin(th)], 1)
            cache[n] = got
        return got

    def contains_angle(self, theta):
        if self.sweep >= 0:
            rel = (theta - self.theta0) % TWO_PI
            return rel <= self.sweep + 1e-12
        rel = (self.theta0 - theta) % TWO_PI
        return rel <= -self.sweep + 1e-12

    def point_distance(self, q):
        q = np.asarray(q, float)
        d = q - self.center
        r = math.hypot(d[0], d[1])
        th = math.atan2(d[1], d[0])
        if self.contains_angle(th):
            return abs(r - self.radius)
        e0, e1 = self.endpoints()
        return min(float(np.linalg.norm(q - e0)), float(np.linalg.norm(q - e1)))


# ---------------------------------------------------------------------------
# convex polygon predicates
# ---------------------------------------------------------------------------


def convex_signed_depth(q, verts):
    """Signed distance of a point to a convex CCW polygon: negative inside
    (exact), positive outside (exact)."""
    return float(convex_signed_depths(np.asarray(q, float)[None, :], verts)[0])


def convex_signed_depths(Q, verts):
    """Vectorized signed distances of points Q (k,2) to a convex CCW polygon."""
    v = _as_pts(verts)
    Q = np.asarray(Q, float)
    e = np.roll(v, -1, axis=0) - v
    lengths = np.maximum(np.linalg.norm(e, axis=1), 1e-300)
    nrm = np.stack([e[:, 1], -e[:, 0]], axis=1) / lengths[:, None]
    s = ((Q[:, None, :] - v[None, :, :]) * nrm[None, :, :]).sum(-1)
    out = s.max(axis=1)
    pos = out > 0
    if np.any(pos):
        d = points_to_segments_distance(Q[pos], v, np.roll(v, -1, axis=0)).min(axis=1)
        out[pos] = d
    return out


def poly_poly_clearance(A, B):
    """Signed clearance of two convex CCW polygons: positive separation,
    negative overlap depth (minimum translation along face normals)."""
    A = _as_pts(A)
    B = _as_pts(B)

    def axes(P):
        e = np.roll(P, -1, axis=0) - P
        L = np.maximum(np.linalg.norm(e, axis=1), 1e-300)
        return np.stack([e[:, 1], -e[:, 0]], axis=1) / L[:, None]

    sep = -math.inf
    for n in np.vstack([axes(A), axes(B)]):
        gap = (B @ n).min() - (A @ n).max()
        gap2 = (A @ n).min() - (B @ n).max()
        sep = max(sep, gap, gap2)
    if sep >= 0:
        # disjoint: exact distance is vertex-to-edge for convex shapes
        dab = points_to_segments_distance(A, B, np.roll(B, -1, axis=0)).min()
        dba = points_to_segments_distance(B, A, np.roll(A, -1, axis=0)).min()
        return float(min(dab, dba))
    return float(sep)


def disk_poly_clearance(center, r, verts):
    return convex_signed_depth(center, verts) - r


# ---------------------------------------------------------------------------
# placed bodies
# ---------------------------------------------------------------------------


class PlacedBody:
    """Geometric realization of one packed set: disk, convex polygon, single
    point, or a boundary-curve arc (the three fixed sets of a configuration)."""

    kind = "abstract"

    def boundary_length(self):
        raise NotImplementedError

    def ccw_point_from(self, base, arclen):
        """Point at counterclockwise boundary distance ``arclen`` from base."""
        raise NotImplementedError

    def outward_normal(self, p):
        raise NotImplementedError

    def obstacle_geoms(self):
        """List of primitive geometries for clearance/scale computations."""
        raise NotImplementedError

    def is_point(self):
        return self.kind == "point"


class DiskBody(PlacedBody):
    kind = "disk"

    def __init__(self, center, r):
        self.center = np.asarray(center, float)
        self.r = float(r)

    def boundary_length(self):
        return TWO_PI * self.r

    def angle_of(self, p):
        d = np.asarray(p, float) - self.center
        return math.atan2(d[1], d[0])

    def point_at_angle(self, th):
        return self.center + self.r * np.array([math.cos(th), math.sin(th)])

    def ccw_point_from(self, base, arclen):
        return self.point_at_angle(self.angle_of(base) + arclen / self.r)

    def outward_normal(self, p):
        return _unit(np.asarray(p, float) - self.center)

    def obstacle_geoms(self):
        return [("disk", self.center, self.r)]

    def side_piece(self, p_from, p_to, side):
        """Boundary arc from p_from to p_to: clockwise for the left side,
        counterclockwise for the right side."""
        t0 = self.angle_of(p_from)
        t1 = self.angle_of(p_to)
        if side == "left":
            sweep = -((t0 - t1) % TWO_PI)
        else:
            sweep = (t1 - t0) % TWO_PI
        return ("circarc", CircArc(self.center, self.r, t0, sweep, "out"))


class PolyBody(PlacedBody):
    kind = "poly"

    def __init__(self, verts, placement=None):
        self.verts = _as_pts(verts)
        self.placement = placement
        self._seg = polyline_lengths(self.verts, closed=True)
        self._total = float(self._seg.sum())

    def boundary_length(self):
        return self._total

    def param_of(self, p):
        d, s, c = project_to_polyline(p, self.verts, closed=True)
        return s

    def point_at(self, s):
        return point_on_polyline(self.verts, s, closed=True)

    def ccw_point_from(self, base, arclen):
        return self.point_at(self.param_of(base) + arclen)

    def outward_normal(self, p):
        # nearest edge normal; at a vertex, the adjoining normals' bisector
        v = self.verts
        n = len(v)
        best, arg = math.inf, 0
        for k in range(n):
            d = point_segment_distance(p, v[k], v[(k + 1) % n])
            if d < best:
                best, arg = d, k
        a, b = v[arg], v[(arg + 1) % n]
        nrm = _unit(rot_right(b - a))
        for corner, other in ((a, v[arg - 1]), (b, v[(arg + 2) % n])):
            if np.linalg.norm(np.asarray(p, float) - corner) < 1e-9 * (1 + self._total):
                n2 = _unit(rot_right(corner - other)) if corner is a else _unit(
                    rot_right(other - corner)
                )
                return _unit(nrm + n2)
        return nrm

    def obstacle_geoms(self):
        return [("poly", self.verts)]

    def side_piece(self, p_from, p_to, side):
        s0 = self.param_of(p_from)
        s1 = self.param_of(p_to)
        # boundary stored counterclockwise: left side walks it backwards
        pts = [self.point_at(s0)]
        if side == "left":
            span = (s0 - s1) % self._total
            step = -1.0
        else:
            span = (s1 - s0) % self._total
            step = 1.0
        # include intermediate polygon vertices for an exact polyline
        n_samples = max(2, int(math.ceil(span / max(self._seg.min(), 1e-9))) + 2)
        for u in np.linspace(0.0, 1.0, n_samples)[1:]:
            pts.append(self.point_at(s0 + step * u * span))
        return ("polyline", np.array(pts))


class PointBody(PlacedBody):
    kind = "point"

    def __init__(self, p):
        self.p = np.asarray(p, float)

    def boundary_length(self):
        return 0.0

    def ccw_point_from(self, base, arclen):
        return self.p.copy()

    def outward_normal(self, p):
        raise GeometryError("a point body has no outward normal")

    def obstacle_geoms(self):
        return [("point", self.p)]

    def side_piece(self, p_from, p_to, side):
        return ("polyline", np.array([self.p, self.p]))


class ArcBody(PlacedBody):
    """One of the three boundary arcs, viewed as a degenerate packed set.

    The exposed side faces the packing region; traversal conventions follow
    the degenerate-sliver reading: walking the boundary clockwise around the
    (collapsed) body runs along the curve's own counterclockwise direction.
    """

    kind = "arc"

    def __init__(self, arc):
        self.arc = arc  # JordanArc

    def boundary_length(self):
        return self.arc.length

    def ccw_point_from(self, base, arclen):
        raise GeometryError("boundary arcs do not host generic children")

    def outward_normal(self, p):
        return self.arc.inward_normal_at(p)

    def obstacle_geoms(self):
        return self.arc.obstacle_geoms()

    def side_piece(self, p_from, p_to, side):
        if side == "left":
            # clockwise around the collapsed body = forward along the curve
            return self.arc.sub_curve(p_from, p_to)
        return self.arc.sub_curve(p_to, p_from)


# ---------------------------------------------------------------------------
# clearances between a placed body and primitive obstacle geometries
# ---------------------------------------------------------------------------


def geom_point_distance(geom, q):
    kind = geom[0]
    q = np.asarray(q, float)
    if kind == "disk":
        _, c, r = geom
        return float(np.linalg.norm(q - c)) - r
    if kind == "point":
        return float(np.linalg.norm(q - geom[1]))
    if kind == "poly":
        return convex_signed_depth(q, geom[1])
    if kind == "polyline":
        d, _, _ = project_to_polyline(q, geom[1], closed=False)
        return d
    if kind == "circarc":
        return geom[1].point_distance(q)
    raise GeometryError(f"unknown geometry {kind}")


def body_geom_clearance(body, geom):
    """Signed clearance between a placed body and an obstacle geometry:
    positive separation, negative overlap (depth for area obstacles, cut
    depth for curve obstacles)."""
    kind = geom[0]
    if body.kind == "point":
        return geom_point_distance(geom, body.p)
    if body.kind == "disk":
        c, r = body.center, body.r
        if kind == "disk":
            _, co, ro = geom
            return float(np.linalg.norm(c - co)) - r - ro
        if kind == "point":
            return float(np.linalg.norm(c - geom[1])) - r
        if kind == "poly":
            return disk_poly_clearance(c, r, geom[1])
        if kind == "polyline":
            d, _, _ = project_to_polyline(c, geom[1], closed=False)
            return d - r
        if kind == "circarc":
            return geom[1].point_distance(c) - r
    if body.kind == "poly":
        P = body.verts
        if kind == "poly":
            return poly_poly_clearance(P, geom[1])
        if kind == "disk":
            _, co, ro = geom
            return convex_signed_depth(co, P) - ro
        if kind == "point":
            return convex_signed_depth(geom[1], P)
        if kind in ("polyline", "circarc"):
            return _poly_curve_clearance(P, geom)
    if body.kind in ("arc", "outer"):
        return _curve_geom_clearance(body.obstacle_geoms()[0], geom)
    raise GeometryError(f"no clearance rule for {body.kind} vs {kind}")


def _poly_curve_clearance(P, geom):
    """Signed clearance of a convex CCW polygon against a curve geometry.

    Exact for polylines (vertex-segment candidates plus an edge-crossing
    test); circular arcs are minimized over the arc parameter with local
    refinement, which converges because the per-point signed depth is
    continuous in the parameter.
    """
    P = _as_pts(P)
    if geom[0] == "polyline":
        pts = geom[1]
        depths = convex_signed_depths(pts, P)
        dmin = float(depths.min())
        if dmin < 0:
            return dmin
        Pn = np.roll(P, -1, axis=0)
        crossing = False
        for k in range(len(pts) - 1):
            a, b = pts[k], pts[k + 1]
            for j in range(len(P)):
                if segments_cross(a, b, P[j], Pn[j]):
                    crossing = True
                    break
            if crossing:
                break
        if crossing:
            # depth of the deepest crossing chord midpoint, resolved finely
            worst = 0.0
            for k in range(len(pts) - 1):
                seg = np.linspace(0, 1, 17)[:, None]
                q = pts[k] + seg * (pts[k + 1] - pts[k])
                worst = min(worst, float(convex_signed_depths(q, P).min()))
            return worst if worst < 0 else -1e-12
        d = points_to_segments_distance(P, pts[:-1], pts[1:]).min()
        return float(min(d, dmin))
    # circular arc: the signed depth along the arc is critical only where the
    # radial direction hits a polygon vertex or aligns with an edge normal,
    # so that finite candidate set is exact
    arc = geom[1]
    O, R = arc.center, arc.radius
    W = P - O
    th_v = np.arctan2(W[:, 1], W[:, 0])
    E = np.roll(P, -1, axis=0) - P
    L = np.maximum(np.linalg.norm(E, axis=1), 1e-300)
    nrm = np.stack([E[:, 1], -E[:, 0]], axis=1) / L[:, None]
    th_n = np.arctan2(nrm[:, 1], nrm[:, 0])
    cand = np.concatenate([th_v, th_n, th_n + math.pi, [arc.theta0, arc.theta0 + arc.sweep]])
    kept = [th for th in cand if arc.contains_angle(th)]
    kept.extend([arc.theta0, arc.theta0 + arc.sweep])
    th = np.asarray(kept)
    pts = O + R * np.stack([np.cos(th), np.sin(th)], axis=1)
    return float(convex_signed_depths(pts, P).min())


def _curve_sample(geom, max_step):
    if geom[0] == "polyline":
        return geom[1]
    return geom[1].sample(max_step)


def _curve_geom_clearance(curve, geom):
    """Clearance between a boundary curve and an obstacle geometry; curves
    carry no interior, so the result is a plain set distance."""
    kind = geom[0]
    if kind == "disk":
        _, c, r = geom
        return geom_point_distance(curve, c) - r
    if kind == "point":
        return geom_point_distance(curve, geom[1])
    if kind == "poly":
        P = geom[1]
        pts = _curve_sample(curve, 0.01 * math.sqrt(_poly_span(P)))
        return float(convex_signed_depths(pts, P).min())
    # curve vs curve: densely sampled vertex-to-segment distances both ways
    scale = 1.0
    if curve[0] == "circarc":
        scale = max(scale, curve[1].radius)
    if kind == "circarc":
        scale = max(scale, geom[1].radius)
    step = 1e-3 * scale
    a = _curve_sample(curve, step)
    b = _curve_sample(geom, step)
    d1 = points_to_segments_distance(a, b[:-1], b[1:]).min()
    d2 = points_to_segments_distance(b, a[:-1], a[1:]).min()
    return float(min(d1, d2))


def _poly_span(P):
    lo = P.min(axis=0)
    hi = P.max(axis=0)
    return float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))


def min_clearance(body, geoms):
    return min((body_geom_clearance(body, g) for g in geoms), default=math.inf)


# ---------------------------------------------------------------------------
# tangent families and maximal scales
# ---------------------------------------------------------------------------


@dataclass
class TangentFamily:
    """Homothets of a prototype touching a support line at p from one side.

    ``normal`` points away from the supported body; the prototype's support
    point opposite to it is carried to p, so family(alpha) touches the line
    at p for every alpha > 0 and the placements are nested.
    """

    prototype: ConvexBody
    p: np.ndarray
    normal: np.ndarray
    contact_local: np.ndarray = field(init=False)

    def __post_init__(self):
        self.p = np.asarray(self.p, float)
        self.normal = _unit(self.normal)
        if self.prototype.is_segment:
            a, b = self.prototype.vertices
            d = _unit(b - a)
            if abs(float(d @ self.normal)) < 1e-12:
                raise GeometryError(
                    "segment prototype parallel to the support line; "
                    "collapse to a point instead"
                )
        self.contact_local = self.prototype.support_point(-self.normal)

    def placement(self, alpha):
        if not alpha > 0:
            raise GeometryError("scale must be positive")
        return Placement(self.prototype, alpha, self.p - alpha * self.contact_local)

    def body(self, alpha):
        pl = self.placement(alpha)
        circ = pl.circle()
        if circ is not None:
            return DiskBody(*circ)
        return PolyBody(pl.polygon(), placement=pl)


DEGENERATE = "degenerate"


def max_scale(family, obstacle_geoms, alpha_max, eps_geom=1e-12):
    """Largest alpha in (0, alpha_max] with the family placement's interior
    disjoint from every obstacle, certified by bisection to eps_geom.

    Returns DEGENERATE when the anchor point already lies on an obstacle;
    raises NonContactError when alpha_max is reached with clearance to spare.
    """
    geoms = list(obstacle_geoms)
    if not geoms:
        raise NonContactError("no obstacles bound the family")
    danchor = min(geom_point_distance(g, family.p) for g in geoms)
    if danchor <= eps_geom:
        return DEGENERATE

    # fast closed form for exact-disk prototypes
    if family.prototype.circle is not None:
        c0, r0 = family.prototype.circle
        # family(alpha) is the disk of radius alpha*r0 tangent at p
        alpha = disk_max_alpha(family.p, family.normal, geoms, alpha_max * r0)
        if alpha is None:
            raise NonContactError("scale cap reached without contact")
        return alpha / r0

    lo, hi = 0.0, alpha_max
    if min_clearance(family.body(alpha_max), geoms) > eps_geom:
        raise NonContactError("scale cap reached without contact")
    # shrink below first contact, then bisect (clearance decreases in alpha)
    for _ in range(200):
        if hi - lo <= max(1e-15, 1e-12 * alpha_max):
            break
        mid = 0.5 * (lo + hi)
        if min_clearance(family.body(mid), geoms) >= 0.0:
            lo = mid
        else:
            hi = mid
    return max(lo, 1e-300)


def disk_max_alpha(p, n, geoms, alpha_cap):
    """Largest radius of a disk tangent at p with outward direction n whose
    interior avoids the given geometries; closed forms per primitive.
    Returns None when nothing binds below the cap."""
    p = np.asarray(p, float)
    n = _unit(n)
    best = math.inf

    def point_candidate(q):
        q = np.asarray(q, float)
        w = q - p
        denom = 2.0 * float(n @ w)
        if denom <= 1e-300:
            return math.inf
        return float(w @ w) / denom

    for g in geoms:
        kind = g[0]
        if kind == "point":
            best = min(best, point_candidate(g[1]))
        elif kind == "disk":
            _, co, ro = g
            w = np.asarray(co, float) - p
            d2 = float(w @ w)
            denom = 2.0 * (ro + float(n @ w))
            if denom > 1e-300 and d2 > ro * ro:
                best = min(best, (d2 - ro * ro) / denom)
            elif d2 <= ro * ro:
                return 0.0  # anchor inside the obstacle: forced degenerate
        elif kind == "poly":
            v = g[1]
            m = len(v)
            for k in range(m):
                best = min(best, _disk_alpha_segment(p, n, v[k], v[(k + 1) % m]))
        elif kind == "polyline":
            v = g[1]
            for k in range(len(v) - 1):
                best = min(best, _disk_alpha_segment(p, n, v[k], v[k + 1]))
        elif kind == "circarc":
            arc = g[1]
            best = min(best, _disk_alpha_circarc(p, n, arc))
        else:
            raise GeometryError(f"unknown geometry {kind}")
    if best > alpha_cap:
        return None
    return max(best, 0.0)


def _disk_alpha_segment(p, n, a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    best = min(_disk_alpha_point(p, n, a), _disk_alpha_point(p, n, b))
    ab = b - a
    L = math.hypot(ab[0], ab[1])
    if L > 1e-300:
        m = rot_left(ab / L)
        side = float(m @ (p - a))
        if side < 0:
            m, side = -m, -side
        denom = 1.0 - float(n @ m)
        # the anchor sitting on the segment's line carries no line constraint
        if side > 1e-12 * (L + 1.0) and denom > 1e-12:
            alpha = side / denom
            foot = p + alpha * n - alpha * m
            t = float((foot - a) @ ab) / (L * L)
            if 0.0 <= t <= 1.0:
                best = min(best, alpha)
    return best


def _disk_alpha_point(p, n, q):
    w = np.asarray(q, float) - p
    denom = 2.0 * float(n @ w)
    if denom <= 1e-300:
        return math.inf
    return float(w @ w) / denom


def _disk_alpha_circarc(p, n, arc):
    O, R = arc.center, arc.radius
    w = p - O
    d = math.hypot(w[0], w[1])
    cands = []
    if arc.region == "in":  # container: internal tangency |c - O| = R - alpha
        denom = 2.0 * (R + float(n @ w))
        if denom > 1e-9 * R:
            alpha = (R * R - d * d) / denom
            if alpha >= 0:
                ctr = p + alpha * n
                th = math.atan2(ctr[1] - O[1], ctr[0] - O[0])
                if arc.contains_angle(th):
                    cands.append(alpha)
    else:  # obstacle disk: external tangency |c - O| = R + alpha
        denom = 2.0 * (R + float(n @ (O - p)))
        if denom > 1e-9 * R:
            alpha = (d * d - R * R) / denom
            if alpha >= 0:
                ctr = p + alpha * n
                th = math.atan2(ctr[1] - O[1], ctr[0] - O[0])
                if arc.contains_angle(th):
                    cands.append(alpha)
    e0, e1 = arc.endpoints()
    cands.append(_disk_alpha_point(p, n, e0))
    cands.append(_disk_alpha_point(p, n, e1))
    return min(cands) if cands else math.inf


# ---------------------------------------------------------------------------
# boundary point parameterization (spec op)
# ---------------------------------------------------------------------------


def boundary_point(placement, base, t, tol=1e-6):
    """Point at counterclockwise arclength fraction t from ``base`` along the
    placed body's boundary; t=0 and t=1 return base."""
    circ = placement.circle()
    if circ is not None:
        body = DiskBody(*circ)
        if abs(np.linalg.norm(np.asarray(base, float) - body.center) - body.r) > tol * (
            1 + body.r
        ):
            raise GeometryError("base point is off the boundary")
        return body.ccw_point_from(base, (t % 1.0) * body.boundary_length())
    poly = placement.polygon()
    body = PolyBody(poly, placement=placement)
    d, s, c = project_to_polyline(base, poly, closed=True)
    if d > tol * (1 + body.boundary_length()):
        raise GeometryError("base point is off the boundary")
    return body.point_at(s + (t % 1.0) * body.boundary_length())


def tangent_family(prototype, p, support_direction):
    return TangentFamily(prototype, p, support_direction)


# ---------------------------------------------------------------------------
# strictification
# ---------------------------------------------------------------------------


def strictify(body, r, n=64):
    """Strictly convex polygonal approximation of the intersection of all
    radius-r disks containing the body.

    Each hull edge is replaced by the outward arc of the radius-r circle
    through its endpoints, sampled and re-hulled; the result contains the
    body and lies within diam^2/(8r) plus sampling error of it.
    """
    if n < 16:
        raise GeometryError("need at least 16 samples")
    if r < body.circumradius():
        raise GeometryError("radius must be at least the circumradius")
    v = body.vertices if not body.is_segment else body.vertices
    m = len(v)
    edges = [(v[k], v[(k + 1) % m]) for k in range(m)] if m > 2 else [
        (v[0], v[1]),
        (v[1], v[0]),
    ]
    total = sum(np.linalg.norm(b - a) for a, b in edges)
    pts = []
    for a, b in edges:
        L = float(np.linalg.norm(b - a))
        if L < 1e-15:
            continue
        mid = 0.5 * (a + b)
        h = math.sqrt(max(r * r - 0.25 * L * L, 0.0))
        inward = _unit(rot_left(b - a))  # ccw polygon: left of the edge is inside
        center = mid + h * inward
        th0 = math.atan2(a[1] - center[1], a[0] - center[0])
        th1 = math.atan2(b[1] - center[1], b[0] - center[0])
        sweep = (th1 - th0) % TWO_PI
        if sweep > math.pi:
            sweep -= TWO_PI
        k = max(2, int(math.ceil(n * L / total)) + 1)
        for u in np.linspace(0.0, 1.0, k, endpoint=False):
            th = th0 + u * sweep
            pts.append(center + r * np.array([math.cos(th), math.sin(th)]))
    pts = np.array(pts)
    hull = _convex_hull(pts)
    return ConvexBody(hull, name=f"{body.name}_r{r:g}")


def _convex_hull(pts):
    pts = _as_pts(pts)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    # strict turns only: collinear midpoints dropped
    def half(points):
        out = []
        for p in points:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 1e-15:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


# ---------------------------------------------------------------------------
# Jordan boundaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryArc:
    """A traversed portion of some host boundary (spec surface for side arcs)."""

    host: object
    start: np.ndarray
    end: np.ndarray
    orientation: str  # "cw" | "ccw" along the host boundary
    samples: np.ndarray


class JordanArc:
    """One of the three arcs of a Jordan boundary, endpoints at split marks.

    ``pts`` follow the curve's counterclockwise direction (region on the
    left).  ``circle`` tags arcs of exact circles.
    """

    def __init__(self, pts, role, circle=None):
        self.pts = _as_pts(pts)
        self.role = role
        self.circle = circle  # (center, R, theta_start, sweep_ccw)
        self._seg = polyline_lengths(self.pts, closed=False)
        self.length = float(self._seg.sum())

    @property
    def start(self):
        return self.pts[0]

    @property
    def end(self):
        return self.pts[-1]

    def point_at(self, s):
        if self.circle is not None:
            O, R, th0, sweep = self.circle
            u = min(max(s / self.length, 0.0), 1.0)
            th = th0 + u * sweep
            return np.asarray(O) + R * np.array([math.cos(th), math.sin(th)])
        return point_on_polyline(self.pts, s, closed=False)

    def param_of(self, p):
        if self.circle is not None:
            O, R, th0, sweep = self.circle
            th = math.atan2(p[1] - O[1], p[0] - O[0])
            rel = (th - th0) % TWO_PI if sweep >= 0 else (th0 - th) % TWO_PI
            rel = min(rel, abs(sweep))
            return self.length * rel / abs(sweep)
        _, s, _ = project_to_polyline(p, self.pts, closed=False)
        return s

    def inward_normal_at(self, p):
        if self.circle is not None:
            # ccw sweep: region inside the circle; cw sweep: region outside
            O, R, _, sweep = self.circle
            v = np.asarray(O, float) - np.asarray(p, float)
            return _unit(v if sweep >= 0 else -v)
        _, s, c = project_to_polyline(p, self.pts, closed=False)
        # tangent along ccw travel; interior on the left
        eps = max(1e-9, 1e-6 * self.length)
        a = self.point_at(max(s - eps, 0.0))
        b = self.point_at(min(s + eps, self.length))
        return _unit(rot_left(b - a))

    def obstacle_geoms(self):
        if self.circle is not None:
            O, R, th0, sweep = self.circle
            region = "in" if sweep >= 0 else "out"
            return [("circarc", CircArc(O, R, th0, sweep, region))]
        return [("polyline", self.pts)]

    def sub_curve(self, p_from, p_to):
        """Sub-arc from p_from to p_to following the curve's ccw direction."""
        s0 = self.param_of(p_from)
        s1 = self.param_of(p_to)
        lo, hi = (s0, s1) if s0 <= s1 else (s1, s0)
        if self.circle is not None:
            O, R, th0, sweep = self.circle
            region = "in" if sweep >= 0 else "out"
            u0, u1 = lo / self.length, hi / self.length
            return (
                "circarc",
                CircArc(O, R, th0 + u0 * sweep, (u1 - u0) * sweep, region),
            )
        # collect polyline vertices within [lo, hi]
        acc = np.concatenate([[0.0], np.cumsum(self._seg)])
        keep = [self.point_at(lo)]
        for k in range(len(self.pts)):
            if lo < acc[k] < hi:
                keep.append(self.pts[k])
        keep.append(self.point_at(hi))
        return ("polyline", np.array(keep))


class JordanBoundary:
    """Closed simple polyline with three counterclockwise split marks.

    The three arcs (in counterclockwise order) are the fixed sets of every
    packing configuration; the bounded region they enclose carries the
    packing.
    """

    def __init__(self, polyline, splits, circle=None):
        pts = _as_pts(polyline)
        if len(pts) < 3:
            raise GeometryError("boundary needs at least 3 points")
        area2 = float(
            np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
        )
        if area2 < 0:
            raise GeometryError("boundary polyline must be counterclockwise")
        i1, i2, i3 = (int(i) for i in splits)
        if len({i1, i2, i3}) != 3:
            raise GeometryError("split points must be distinct")
        self.pts = pts
        self.splits = (i1, i2, i3)
        self.circle = circle  # (center, R) exactness tag

        def seg(i, j):
            if i < j:
                return pts[i : j + 1]
            return np.vstack([pts[i:], pts[: j + 1]])

        order = [i1, i2, i3]
        if not (
            (i1 < i2 < i3) or (i2 < i3 < i1) or (i3 < i1 < i2)
        ):
            raise GeometryError("splits must be counterclockwise along the boundary")
        raw = {
            "a": seg(i1, i2),
            "b": seg(i2, i3),
            "c": seg(i3, i1),
        }
        self.arcs = {}
        for role, p in raw.items():
            circ = None
            if circle is not None:
                O, R = circle
                th0 = math.atan2(p[0][1] - O[1], p[0][0] - O[0])
                th1 = math.atan2(p[-1][1] - O[1], p[-1][0] - O[0])
                sweep = (th1 - th0) % TWO_PI
                circ = (np.asarray(O, float), R, th0, sweep)
            self.arcs[role] = JordanArc(p, role, circle=circ)

    @property
    def p_b(self):
        """Base of the second fixed set: shared endpoint of arcs a and b."""
        return self.pts[self.splits[1]].copy()

    @property
    def p_c(self):
        """Base of the third fixed set: shared endpoint of arcs b and c."""
        return self.pts[self.splits[2]].copy()

    def diameter(self):
        lo = self.pts.min(axis=0)
        hi = self.pts.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def contains(self, q):
        # ray casting on the closed polyline
        x, y = float(q[0]), float(q[1])
        pts = self.pts
        inside = False
        n = len(pts)
        for k in range(n):
            x1, y1 = pts[k]
            x2, y2 = pts[(k + 1) % n]
            if (y1 > y) != (y2 > y):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if xint > x:
                    inside = not inside
        return inside

    def to_json(self):
        return {"polyline": self.pts.tolist(), "splits": list(self.splits)}

    @staticmethod
    def from_json(obj):
        return JordanBoundary(np.asarray(obj["polyline"], float), obj["splits"])

    @staticmethod
    def circle_boundary(center, R, mark_angles, n=256):
        """Circular boundary with three marks at the given angles (ccw)."""
        O = np.asarray(center, float)
        marks = [float(a) % TWO_PI for a in mark_angles]
        th = sorted(set(np.linspace(0, TWO_PI, n, endpoint=False)) | set(marks))
        pts = np.array([O + R * np.array([math.cos(t), math.sin(t)]) for t in th])
        idx = [th.index(m) for m in marks]
        return JordanBoundary(pts, idx, circle=(O, R))


def curvilinear_triangle_boundary(centers, radii, n_per_arc=128):
    """Inner curvilinear triangle of three mutually tangent circles, as a
    Jordan boundary whose three arcs are the circles' inner arcs (exact
    circular-arc tags attached per arc)."""
    centers = [np.asarray(c, float) for c in centers]
    r = [float(x) for x in radii]
    tang = {}
    for (i, j) in ((0, 1), (1, 2), (2, 0)):
        d = centers[j] - centers[i]
        L = float(np.linalg.norm(d))
        if abs(L - (r[i] + r[j])) > 1e-9 * (r[i] + r[j]):
            raise GeometryError("circles are not mutually tangent")
        tang[(i, j)] = centers[i] + d * (r[i] / L)
        tang[(j, i)] = tang[(i, j)]

    # the inner region is traversed counterclockwise by walking each circle
    # clockwise between tangency points; orientation fixed by construction
    pts = []
    arc_marks = []
    arc_tags = []
    for k in range(3):
        i = k
        prv = (k - 1) % 3
        nxt = (k + 1) % 3
        p0 = tang[(i, prv)]
        p1 = tang[(i, nxt)]
        O = centers[i]
        th0 = math.atan2(p0[1] - O[1], p0[0] - O[0])
        th1 = math.atan2(p1[1] - O[1], p1[0] - O[0])
        sweep = -((th0 - th1) % TWO_PI)  # clockwise along the circle
        arc_marks.append(len(pts))
        for u in np.linspace(0.0, 1.0, n_per_arc, endpoint=False):
            th = th0 + u * sweep
            pts.append(O + r[i] * np.array([math.cos(th), math.sin(th)]))
        arc_tags.append((O, r[i], th0, sweep))
    pts = np.array(pts)
    jb = JordanBoundary(pts, arc_marks)
    for role, tag in zip(("a", "b", "c"), arc_tags):
        O, R, th0, sweep = tag
        jb.arcs[role] = JordanArc(jb.arcs[role].pts, role, circle=(O, R, th0, sweep))
    return jb
