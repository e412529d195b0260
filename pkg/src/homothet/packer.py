"""Chain evaluation and the packing solver.

A configuration assigns to every cube point x in [0,1]^J a family of placed
bodies: the three boundary sets are fixed, and each remaining body is placed
inductively, tangent to its parent at the point a fraction x_v of the way
counterclockwise around the parent's boundary, grown maximally against its
ancestors.  The solver locates a cube point whose configuration is a packing
with the prescribed tangency nerve by cyclic coordinatewise bisection of
signed contact residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ArcBody,
    CircArc,
    ConvexBody,
    DiskBody,
    GeometryError,
    JordanBoundary,
    NonContactError,
    PlacedBody,
    PointBody,
    TangentFamily,
    body_geom_clearance,
    disk_max_alpha,
    geom_point_distance,
    max_scale,
    DEGENERATE,
)
from .order import build_right_dfs_order, RootedOrder
from .triangulation import Triangulation


class PackerError(RuntimeError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Scene-relative tolerances; eps_* fields are absolute lengths except
    eps_x, which lives on the cube."""

    scene: float
    eps_geom: float
    eps_contact: float
    eps_res: float
    eps_x: float = 1e-10

    @staticmethod
    def for_scene(scene_diameter, eps_geom_rel=1e-9, eps_contact_rel=1e-6):
        d = float(scene_diameter)
        return Tolerances(
            scene=d,
            eps_geom=eps_geom_rel * d,
            eps_contact=eps_contact_rel * d,
            eps_res=eps_contact_rel * d,
        )


class OuterBody(PlacedBody):
    """Unbounded outer set for full-body boundaries: the closure of the
    complement of a Jordan curve; only the curve matters."""

    kind = "outer"

    def __init__(self, pts=None, circle=None):
        self.circle = circle  # (center, R)
        if circle is not None:
            O, R = circle
            self._geoms = [
                ("circarc", CircArc(np.asarray(O, float), R, 0.0, 2 * math.pi, "in"))
            ]
            self.pts = None
        else:
            p = np.asarray(pts, float)
            self._geoms = [("polyline", np.vstack([p, p[:1]]))]
            self.pts = p

    def boundary_length(self):
        if self.circle is not None:
            return 2 * math.pi * self.circle[1]
        return float(np.linalg.norm(np.roll(self.pts, -1, 0) - self.pts, axis=1).sum())

    def outward_normal(self, p):
        if self.circle is not None:
            O, _ = self.circle
            v = np.asarray(O, float) - np.asarray(p, float)
            return v / np.linalg.norm(v)
        raise GeometryError("polyline outer normals are resolved per contact")

    def obstacle_geoms(self):
        return self._geoms

    def side_piece(self, p_from, p_to, side):
        # every part of the curve is exposed; the whole boundary serves
        return self._geoms[0]


@dataclass
class BodiesBoundary:
    """Full-body boundary: an outer region and two tangent bodies inside it,
    with their mutual base points."""

    outer: OuterBody
    body_b: PlacedBody
    body_c: PlacedBody
    p_b: np.ndarray
    p_c: np.ndarray

    def diameter(self):
        g = self.outer
        if g.circle is not None:
            return 2 * g.circle[1]
        lo, hi = g.pts.min(0), g.pts.max(0)
        return float(np.linalg.norm(hi - lo))


class MonsterConfig:
    """Everything a chain evaluation needs.

    Prescriptions map each free vertex to a ConvexBody (homothety class) or
    to a shape field (any object with ``evaluate(point) -> ConvexBody``; the
    body placed at base point p is a homothet of the field's value at p).
    """

    def __init__(self, T, boundary, prescriptions, tol=None, order=None):
        self.T = T
        self.boundary = boundary
        self.prescriptions = dict(prescriptions)
        self.order = order or build_right_dfs_order(T)
        a, b, c = T.root
        J = set(range(T.vertex_count)) - {a, b, c}
        if set(self.prescriptions.keys()) != J:
            missing = J - set(self.prescriptions.keys())
            extra = set(self.prescriptions.keys()) - J
            raise PackerError(
                f"prescriptions must cover exactly the free vertices; "
                f"missing {sorted(missing)} extra {sorted(extra)}"
            )
        self.J = J
        self.tol = tol or Tolerances.for_scene(boundary.diameter())
        self._engine = None

    @property
    def arcs_mode(self):
        return isinstance(self.boundary, JordanBoundary)

    def shape_at(self, v, p):
        pres = self.prescriptions[v]
        if isinstance(pres, ConvexBody):
            return pres
        return pres.evaluate(p)

    def fixed_bodies(self):
        a, b, c = self.T.root
        if self.arcs_mode:
            return {
                a: ArcBody(self.boundary.arcs["a"]),
                b: ArcBody(self.boundary.arcs["b"]),
                c: ArcBody(self.boundary.arcs["c"]),
            }
        return {
            a: self.boundary.outer,
            b: self.boundary.body_b,
            c: self.boundary.body_c,
        }

    def base_b(self):
        return np.asarray(self.boundary.p_b, float)

    def base_c(self):
        return np.asarray(self.boundary.p_c, float)


@dataclass
class CubePoint:
    """Coordinates in [0,1] indexed by the free vertices."""

    coords: dict

    def __post_init__(self):
        for v, t in self.coords.items():
            if not (0.0 <= t <= 1.0):
                raise PackerError(f"coordinate x[{v}] = {t} is outside [0,1]")

    def __getitem__(self, v):
        return self.coords[v]

    @staticmethod
    def constant(config, value=0.5):
        return CubePoint({v: value for v in config.J})


@dataclass
class ChainState:
    """Placed bodies, base points, and per-vertex anchors (tangency point,
    outward normal, shape, committed scale) of one chain evaluation."""

    bodies: dict
    base: dict
    anchor: dict
    degenerate: set
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# permissible disks for the boundary child (arcs mode)
# ---------------------------------------------------------------------------


class PermissibleMap:
    """Disk-valued map over the exposed side of the third boundary arc.

    The parameter runs from the arc's far corner (shared with the first arc,
    t = 0) to the base point shared with the second arc (t = 1): the
    counterclockwise direction around the collapsed arc body restricted to
    its exposed side.  Inaccessible sub-arcs, where the maximal tangent disk
    is stopped by the third arc itself, share the disk of their endpoints;
    within one the base point rests at an endpoint, transits the disk's far
    side, then rests at the other endpoint.
    """

    def __init__(self, config):
        if not config.arcs_mode:
            raise PackerError("permissible disks exist only for arc boundaries")
        self.config = config
        self.arc = config.boundary.arcs["c"]
        self.geom_a = list(config.boundary.arcs["a"].obstacle_geoms())
        self.geom_b = list(config.boundary.arcs["b"].obstacle_geoms())
        self.geom_c = list(self.arc.obstacle_geoms())
        self.tol = config.tol
        self._intervals = None

    def point(self, t):
        return self.arc.point_at((1.0 - t) * self.arc.length)

    def normal(self, t):
        return self.arc.inward_normal_at(self.point(t))

    def _raw(self, t, geoms=None):
        q = self.point(t)
        n = self.normal(t)
        if geoms is None:
            geoms = self.geom_a + self.geom_b
        d0 = min(geom_point_distance(g, q) for g in geoms)
        if d0 <= self.tol.eps_geom:
            return q, n, 0.0, "corner"
        cap = 4.0 * self.tol.scene
        alpha = disk_max_alpha(q, n, geoms, cap)
        alpha_self = disk_max_alpha(q, n, self.geom_c, cap)
        if alpha is None:
            raise PackerError("boundary fails to bound a permissible disk")
        if alpha_self is not None and alpha_self < alpha - self.tol.eps_geom:
            return q, n, alpha_self, "self"
        return q, n, alpha, "other"

    def _inaccessible_intervals(self):
        if self._intervals is None:
            N = 256
            ts = np.linspace(0.0, 1.0, N + 1)
            flags = [self._raw(t)[3] == "self" for t in ts]
            out = []
            k = 0
            while k <= N:
                if flags[k]:
                    j = k
                    while j <= N and flags[j]:
                        j += 1
                    t1 = self._refine(ts[max(k - 1, 0)], ts[k])
                    t2 = self._refine(ts[min(j, N)], ts[j - 1])
                    q1, n1, a1, _ = self._raw(t1)
                    out.append((t1, t2, q1 + a1 * n1, a1))
                    k = j
                else:
                    k += 1
            self._intervals = out
        return self._intervals

    def _refine(self, t_ok, t_bad):
        for _ in range(48):
            mid = 0.5 * (t_ok + t_bad)
            if self._raw(mid)[3] == "self":
                t_bad = mid
            else:
                t_ok = mid
        return t_ok

    def disk(self, t, geoms=None):
        """(center, radius, base_point, outward_normal) at parameter t."""
        t = min(max(float(t), 0.0), 1.0)
        q, n, alpha, binding = self._raw(t, geoms)
        if binding != "self" or geoms is not None:
            return q + alpha * n, alpha, q, n
        for (t1, t2, center, radius) in self._inaccessible_intervals():
            if t1 - 1e-9 <= t <= t2 + 1e-9:
                base = self._transit_base(t, t1, t2, center, radius)
                d = base - center
                nrm = d / max(np.linalg.norm(d), 1e-300)
                return center, radius, base, -nrm
        return q + alpha * n, alpha, q, n

    def _transit_base(self, t, t1, t2, center, radius):
        q1, q2 = self.point(t1), self.point(t2)
        u = (t - t1) / max(t2 - t1, 1e-300)
        if u <= 1.0 / 3.0:
            return q1
        if u >= 2.0 / 3.0:
            return q2
        th1 = math.atan2(q1[1] - center[1], q1[0] - center[0])
        th2 = math.atan2(q2[1] - center[1], q2[0] - center[0])
        qm = self.point(0.5 * (t1 + t2))
        s = 3.0 * u - 1.0
        cand = []
        for sweep in ((th2 - th1) % (2 * math.pi), -((th1 - th2) % (2 * math.pi))):
            mid = th1 + 0.5 * sweep
            pm = center + radius * np.array([math.cos(mid), math.sin(mid)])
            cand.append((float(np.linalg.norm(pm - qm)), th1 + s * sweep))
        th = min(cand)[1]
        return center + radius * np.array([math.cos(th), math.sin(th)])


def permissible_disk(config, t):
    """The permissible disk at boundary parameter t, with its base point."""
    pm = _engine(config).permissible
    if pm is None:
        raise PackerError("permissible disks exist only for arc boundaries")
    center, radius, base, _ = pm.disk(t)
    if radius <= config.tol.eps_geom:
        return PointBody(base), base
    return DiskBody(center, radius), base


# ---------------------------------------------------------------------------
# the chain engine
# ---------------------------------------------------------------------------


class _Engine:
    """Precomputed combinatorics plus placement and residual kernels.
    Internal coordinates are plain dicts; public wrappers validate."""

    def __init__(self, config):
        self.config = config
        self.T = config.T
        self.order = config.order
        self.tol = config.tol
        a, b, c = self.T.root
        self.a, self.b, self.c = a, b, c
        self.sequence = [v for v in self.order.sequence if v not in (a, b, c)]
        self.parent = self.order.parent
        self.obstacle_ids = {
            v: self.order.ancestors(self.parent[v]) for v in self.sequence
        }
        self.chain_path = {}
        self.ls_pairs = {}
        self.ls_hosts = {}
        for i in self.sequence:
            g, h = self.order.godparent_heir(i)
            self.chain_path[i] = self.order.path(i, h)
            gp_path = self.order.path(g, self.parent[i])
            self.ls_pairs[i] = list(zip(gp_path[:-1], gp_path[1:]))
            self.ls_hosts[i] = frozenset(gp_path[:-1])
        self.permissible = PermissibleMap(config) if config.arcs_mode else None

    # -- placement ----------------------------------------------------------

    def fresh_state(self):
        bodies = dict(self.config.fixed_bodies())
        base = {self.b: self.config.base_b(), self.c: self.config.base_c()}
        return ChainState(bodies=bodies, base=base, anchor={}, degenerate=set())

    def obstacle_geoms(self, v, bodies, exclude=frozenset()):
        out = []
        for j in self.obstacle_ids[v]:
            if j in exclude:
                continue
            out.extend(bodies[j].obstacle_geoms())
        return out

    def place(self, v, x_v, bodies, base, exclude=frozenset()):
        """(body, base_point, anchor) for v against the current ancestors."""
        parent = self.parent[v]
        parent_body = bodies[parent]
        tol = self.tol

        if parent_body.is_point():
            p = base[parent]
            return PointBody(p), p, None

        if self.config.arcs_mode and parent == self.c:
            geoms = self.obstacle_geoms(v, bodies, exclude) if exclude else None
            center, radius, q, n = self.permissible.disk(x_v, geoms)
            shape = self.config.shape_at(v, q)
            if shape.circle is None:
                # non-disk prototype at the boundary child: same anchor and
                # obstacle set, generic maximal homothet
                return self._place_generic(
                    v, q, n, shape, self.obstacle_geoms(v, bodies, exclude)
                )
            if radius <= tol.eps_geom:
                return PointBody(q), q, None
            r0 = shape.circle[1]
            return DiskBody(center, radius), q, (q, n, shape, radius / r0)

        per = parent_body.boundary_length()
        p = parent_body.ccw_point_from(base[parent], (x_v % 1.0) * per)
        geoms = self.obstacle_geoms(v, bodies, exclude)
        if min(geom_point_distance(g, p) for g in geoms) <= tol.eps_geom:
            return PointBody(p), p, None
        n = parent_body.outward_normal(p)
        shape = self.config.shape_at(v, p)
        return self._place_generic(v, p, n, shape, geoms)

    def _place_generic(self, v, p, n, shape, geoms):
        tol = self.tol
        cap = 8.0 * tol.scene / max(shape.diameter(), 1e-12)
        if shape.circle is not None:
            r0 = shape.circle[1]
            alpha_r = disk_max_alpha(p, n, geoms, cap * r0)
            if alpha_r is None:
                raise NonContactError(f"vertex {v}: nothing bounds the tangent disk")
            if alpha_r <= tol.eps_geom:
                return PointBody(p), p, None
            return DiskBody(p + alpha_r * n, alpha_r), p, (p, n, shape, alpha_r / r0)
        try:
            fam = TangentFamily(shape, p, n)
        except GeometryError:
            return PointBody(p), p, None  # segment parallel to the support line
        alpha = max_scale(fam, geoms, cap, tol.eps_geom)
        if alpha == DEGENERATE:
            return PointBody(p), p, None
        return fam.body(alpha), p, (p, n, shape, alpha)

    def evaluate(self, x):
        state = self.fresh_state()
        for v in self.sequence:
            body, p, anchor = self.place(v, x[v], state.bodies, state.base)
            state.bodies[v] = body
            state.base[v] = p
            state.anchor[v] = anchor
            if body.is_point():
                state.degenerate.add(v)
        return state

    # -- residual -----------------------------------------------------------

    def ls_geoms(self, i, bodies, base):
        """Left side of the ancestor chain from the godparent to parent(i):
        per tree link, the host boundary from the host's base to the child's
        base walked clockwise; the root contributes its whole boundary."""
        out = []
        for (host, child) in self.ls_pairs[i]:
            hb = bodies[host]
            if host == self.a:
                out.extend(hb.obstacle_geoms())
            elif hb.is_point():
                out.append(("point", base[host]))
            else:
                out.append(hb.side_piece(base[host], base[child], "left"))
        return out

    def residual(self, i, x, state):
        """Signed contact residual of coordinate i.

        Negative: separation between the chain hanging from i (down to its
        heir) and the left-side target.  Nonnegative: the growth slack the
        target's hosts deny the touching chain bodies (zero exactly at first
        tangency), so bisection on the sign locates the membership boundary.
        """
        bodies = state.bodies
        base = state.base
        chain = self.chain_path[i]
        saved = {}
        anchors = {}
        try:
            for v in chain:
                saved[v] = (bodies.get(v), base.get(v))
                body, p, anchor = self.place(v, x[v], bodies, base)
                bodies[v] = body
                base[v] = p
                anchors[v] = anchor
            target = self.ls_geoms(i, bodies, base)
            clear = {
                v: min(body_geom_clearance(bodies[v], g) for g in target)
                for v in chain
            }
            best = min(clear.values())
            if best > self.tol.eps_contact:
                return -best
            hosts = self.ls_hosts[i]
            slack = 0.0
            for v in chain:
                if clear[v] > self.tol.eps_contact or anchors[v] is None:
                    continue
                pv, nv, shape, alpha = anchors[v]
                free = self._scale_without_hosts(v, pv, nv, shape, bodies, hosts)
                slack = max(slack, (free - alpha) * max(shape.diameter(), 1e-12))
            return max(slack, 0.0)
        finally:
            for v, (b0, p0) in saved.items():
                if b0 is None:
                    bodies.pop(v, None)
                    base.pop(v, None)
                else:
                    bodies[v] = b0
                    base[v] = p0

    def _scale_without_hosts(self, v, p, n, shape, bodies, hosts):
        cap = 8.0 * self.tol.scene / max(shape.diameter(), 1e-12)
        geoms = self.obstacle_geoms(v, bodies, exclude=hosts)
        if not geoms:
            return cap
        if shape.circle is not None:
            r0 = shape.circle[1]
            a_r = disk_max_alpha(p, n, geoms, cap * r0)
            return cap if a_r is None else a_r / r0
        try:
            fam = TangentFamily(shape, p, n)
            return max_scale(fam, geoms, cap, self.tol.eps_geom)
        except NonContactError:
            return cap
        except GeometryError:
            return 0.0


def _engine(config) -> _Engine:
    if config._engine is None:
        config._engine = _Engine(config)
    return config._engine


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def evaluate_chain(config, x):
    """Place every body for the cube point x, in tree order."""
    coords = x.coords if isinstance(x, CubePoint) else dict(x)
    CubePoint(dict(coords))  # range validation
    return _engine(config).evaluate(coords)


def k_residual(config, x, i):
    """Signed membership residual of coordinate i at cube point x."""
    if i not in config.J:
        raise PackerError(f"vertex {i} has no cube coordinate")
    coords = x.coords if isinstance(x, CubePoint) else dict(x)
    eng = _engine(config)
    state = eng.evaluate(coords)
    return eng.residual(i, coords, state)


def audit_chain(config, x, state=None):
    """Check the structural conditions of a chain evaluation; returns a list
    of violation strings.

    For arc boundaries the base-collapse equivalence at the boundary child
    is one-sided (its parameter sweeps only the exposed side of the arc), so
    only the x=1 face forces a collapse there.
    """
    coords = x.coords if isinstance(x, CubePoint) else dict(x)
    eng = _engine(config)
    if state is None:
        state = eng.evaluate(coords)
    tol = config.tol
    order = config.order
    a, b, c = config.T.root
    bad = []

    def clearance(u, v):
        return min(
            body_geom_clearance(state.bodies[v], g)
            for g in state.bodies[u].obstacle_geoms()
        )

    n = config.T.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            if not order.comparable(u, v):
                continue
            if clearance(u, v) < -10 * tol.eps_geom:
                bad.append(f"M3: bodies {u} and {v} overlap")
    for v in eng.sequence:
        p = state.base[v]
        for w in (v, eng.parent[v]):
            d = min(
                abs(geom_point_distance(g, p))
                for g in state.bodies[w].obstacle_geoms()
            )
            if d > 100 * tol.eps_geom + tol.eps_contact:
                bad.append(f"M4: base of {v} misses body {w} by {d:.2e}")
    for v in eng.sequence:
        if state.bodies[v].is_point():
            continue
        d = min(clearance(j, v) for j in eng.obstacle_ids[v])
        if d > 3 * tol.eps_contact:
            bad.append(f"M5: body {v} floats free of its far ancestors ({d:.2e})")
    for v in eng.sequence:
        parent = eng.parent[v]
        p_par = state.base.get(parent)
        if p_par is None:
            continue
        collapsed = bool(np.linalg.norm(state.base[v] - p_par) <= 10 * tol.eps_geom)
        if state.bodies[parent].is_point():
            if not collapsed:
                bad.append(f"M6: {v} must collapse onto its point parent")
        elif config.arcs_mode and parent == c:
            if collapsed != (coords[v] == 1.0):
                bad.append(f"M6: boundary child collapse mismatch at x={coords[v]}")
        elif collapsed != (coords[v] in (0.0, 1.0)):
            bad.append(f"M6: base of {v} collapsed={collapsed} but x={coords[v]}")
    for f in config.T.faces:
        trip = sorted(f)
        if not (
            order.comparable(trip[0], trip[1])
            and order.comparable(trip[1], trip[2])
            and order.comparable(trip[0], trip[2])
        ):
            continue
        if any(state.bodies[z].is_point() for z in trip):
            continue
        pts = []
        touching = True
        for (p1, p2) in ((trip[0], trip[1]), (trip[1], trip[2]), (trip[0], trip[2])):
            if clearance(p1, p2) > tol.eps_contact:
                touching = False
                break
            pts.append(_contact_point(state.bodies[p1], state.bodies[p2]))
        if touching:
            spread = max(
                float(np.linalg.norm(pts[i] - pts[j]))
                for i in range(3)
                for j in range(i + 1, 3)
            )
            if spread < 10 * tol.eps_geom:
                bad.append(f"M7: three-touch among {trip}")
    return bad


def _contact_point(bu, bv):
    if bu.kind == "disk" and bv.kind == "disk":
        d = bv.center - bu.center
        return bu.center + d * (bu.r / max(float(np.linalg.norm(d)), 1e-300))
    p1 = _rep_points(bu)
    p2 = _rep_points(bv)
    d = ((p1[:, None, :] - p2[None, :, :]) ** 2).sum(-1)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return 0.5 * (p1[i] + p2[j])


def _rep_points(b):
    if b.kind == "disk":
        th = np.linspace(0, 2 * math.pi, 96, endpoint=False)
        return b.center + b.r * np.stack([np.cos(th), np.sin(th)], 1)
    if b.kind == "poly":
        return b.verts
    if b.kind == "point":
        return b.p[None, :]
    if b.kind == "arc":
        return b.arc.pts
    if b.kind == "outer":
        g = b.obstacle_geoms()[0]
        if g[0] == "polyline":
            return g[1]
        arc = g[1]
        return arc.sample(max(arc.radius * 0.02, 1e-6))
    raise PackerError(f"no representative points for {b.kind}")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    classification: str  # VALID | DEGENERATE-CONFORMING | INVALID
    edge_gaps: dict
    extra_contacts: list
    missing_edges: list
    overlaps: list
    point_bodies: list
    segment_bodies: list
    min_separation: float

    def ok(self):
        return self.classification == "VALID"

    def to_json(self):
        return {
            "classification": self.classification,
            "max_edge_gap": max(self.edge_gaps.values(), default=0.0),
            "extra_contacts": [list(map(float, e[:3])) for e in self.extra_contacts[:50]],
            "missing_edges": [list(map(float, e)) for e in self.missing_edges[:50]],
            "overlaps": [list(map(float, e)) for e in self.overlaps[:50]],
            "point_bodies": list(self.point_bodies),
            "segment_bodies": list(self.segment_bodies),
            "min_separation": float(self.min_separation)
            if math.isfinite(self.min_separation)
            else None,
        }


def validate_packing(bodies, T, tol):
    """Classify a configuration against the target nerve: VALID (nerve is
    exactly the triangulation, nothing degenerate), DEGENERATE-CONFORMING
    (interiors disjoint and every prescribed contact present, but extra
    contacts or point/segment bodies occur), INVALID otherwise."""
    edges = {tuple(sorted(e)) for e in T.edges()}
    n = T.vertex_count
    gaps, extra, missing, overlaps = {}, [], [], []
    min_sep = math.inf
    point_bodies = [v for v in range(n) if bodies[v].is_point()]
    segment_bodies = [
        v for v in range(n) if bodies[v].kind == "poly" and len(bodies[v].verts) == 2
    ]
    boxes = {}
    for v in range(n):
        p = _rep_points(bodies[v])
        boxes[v] = (p.min(0), p.max(0))
    for u in range(n):
        lo1, hi1 = boxes[u]
        for v in range(u + 1, n):
            lo2, hi2 = boxes[v]
            gap_box = max(
                float(np.max(lo2 - hi1)), float(np.max(lo1 - hi2))
            )
            is_edge = (u, v) in edges
            if gap_box > 4 * tol.eps_contact and not is_edge:
                min_sep = min(min_sep, gap_box)
                continue
            c = min(
                body_geom_clearance(bodies[v], g) for g in bodies[u].obstacle_geoms()
            )
            if is_edge:
                gaps[(u, v)] = max(c, 0.0)
                if c > tol.eps_contact:
                    missing.append((u, v, c))
            else:
                min_sep = min(min_sep, c)
                if c <= tol.eps_contact:
                    extra.append((u, v, c))
            if c < -10 * tol.eps_geom:
                overlaps.append((u, v, c))
    if overlaps or missing:
        cls = "INVALID"
    elif extra or point_bodies or segment_bodies:
        cls = "DEGENERATE-CONFORMING"
    else:
        cls = "VALID"
    return ValidationReport(
        classification=cls,
        edge_gaps=gaps,
        extra_contacts=extra,
        missing_edges=missing,
        overlaps=overlaps,
        point_bodies=point_bodies,
        segment_bodies=segment_bodies,
        min_separation=min_sep,
    )


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


@dataclass
class PackingResult:
    bodies: dict
    base: dict
    x: dict
    report: ValidationReport
    stats: dict

    def body_json(self, v):
        b = self.bodies[v]
        if b.kind == "disk":
            return {"kind": "disk", "center": b.center.tolist(), "radius": float(b.r)}
        if b.kind == "point":
            return {"kind": "point", "point": b.p.tolist()}
        if b.kind == "poly":
            out = {"kind": "poly", "vertices": b.verts.tolist()}
            if b.placement is not None:
                out["prototype"] = b.placement.prototype.name
                out["scale"] = float(b.placement.scale)
                out["translation"] = b.placement.translation.tolist()
            return out
        return {"kind": b.kind}

    def to_json(self, T):
        contacts = {f"{u}-{v}": float(g) for (u, v), g in self.report.edge_gaps.items()}
        return {
            "bodies": {str(v): self.body_json(v) for v in sorted(self.bodies)},
            "x": {str(v): float(t) for v, t in sorted(self.x.items())},
            "contacts": contacts,
            "validation": self.report.to_json(),
            "stats": {
                k: v for k, v in self.stats.items() if k not in ("failures",)
            },
        }


def solve(config, x0=None, sweeps=500, restarts=8, rng=None, on_sweep=None):
    """Locate a cube point whose configuration packs with the target nerve.

    Cyclic coordinatewise bisection in tree order: for each free vertex,
    bisect its coordinate to the sign change of its contact residual holding
    the others fixed; repeat sweeps until the largest coordinate update falls
    below the cube tolerance, then validate the realized nerve.  A coordinate
    with no sign change, or a failed validation, triggers a restart from a
    perturbed cube point; the best configuration is returned either way,
    flagged by its classification.
    """
    eng = _engine(config)
    tol = config.tol
    rng = rng or np.random.default_rng(0)
    x = (
        {v: 0.5 for v in config.J}
        if x0 is None
        else dict(x0.coords if isinstance(x0, CubePoint) else x0)
    )

    best = None
    stats = {"restarts": 0, "sweeps": 0, "failures": []}
    for attempt in range(restarts + 1):
        converged = _sweep_until_fixed(eng, x, sweeps, tol, stats, on_sweep)
        state = eng.evaluate(x)
        report = validate_packing(state.bodies, config.T, tol)
        res_max = max(
            (abs(eng.residual(i, x, state)) for i in eng.sequence), default=0.0
        )
        cand = PackingResult(
            bodies=dict(state.bodies),
            base=dict(state.base),
            x=dict(x),
            report=report,
            stats=dict(stats, converged=converged, residual_max=res_max),
        )
        rank = {"VALID": 0, "DEGENERATE-CONFORMING": 1, "INVALID": 2}[
            report.classification
        ]
        if best is None or rank < best[0]:
            best = (rank, cand)
        if report.classification == "VALID" and res_max <= 50 * tol.eps_res:
            return cand
        if attempt < restarts:
            stats["restarts"] += 1
            x = {
                v: float(np.clip(x[v] + rng.uniform(-0.2, 0.2), 1e-4, 1 - 1e-4))
                for v in config.J
            }
    return best[1]


def spiral_boundary(outer, circle2, circle3):
    """Full-body boundary for spiral instances: the outer region of a Jordan
    curve plus two mutually tangent disks touching it from inside.

    ``outer`` is ("circle", center, R) or ("polyline", points); circle2/3 are
    (center, radius).
    """
    if outer[0] == "circle":
        ob = OuterBody(circle=(np.asarray(outer[1], float), float(outer[2])))
        O, R = ob.circle
    else:
        ob = OuterBody(pts=outer[1])
        O, R = None, None
    c2, r2 = np.asarray(circle2[0], float), float(circle2[1])
    c3, r3 = np.asarray(circle3[0], float), float(circle3[1])
    b2, b3 = DiskBody(c2, r2), DiskBody(c3, r3)
    if O is not None:
        d = np.linalg.norm(c2 - O)
        if abs(d - (R - r2)) > 1e-7 * R:
            raise PackerError("second body is not internally tangent to the curve")
        p_b = O + (c2 - O) * (R / max(d, 1e-300))
    else:
        from .geometry import project_to_polyline

        dist, _, p_b = project_to_polyline(c2, ob.pts, closed=True)
        if abs(dist - r2) > 1e-6 * r2:
            raise PackerError("second body is not tangent to the curve")
    d23 = np.linalg.norm(c3 - c2)
    if abs(d23 - (r2 + r3)) > 1e-7 * (r2 + r3):
        raise PackerError("the two inner bodies are not tangent")
    p_c = c2 + (c3 - c2) * (r2 / d23)
    return BodiesBoundary(outer=ob, body_b=b2, body_c=b3, p_b=p_b, p_c=p_c)


def spiral_solve(T, seq, boundary, prototypes=None, **solve_kw):
    """Pack circles along a counterclockwise spiral: the first three sets are
    the given boundary bodies, every later vertex gets a disk tangent to its
    predecessor at the angular fraction its cube coordinate selects, and the
    usual sweeps locate the packing."""
    from .order import is_counterclockwise_spiral

    seq = [int(v) for v in seq]
    if not is_counterclockwise_spiral(T, seq):
        raise PackerError("the vertex sequence is not a counterclockwise spiral")
    if not T.has_face(seq[0], seq[1], seq[2]):
        raise PackerError("the spiral must start along the root cell")
    if tuple(T.root) != tuple(seq[:3]):
        raise PackerError(
            f"re-root the triangulation at {tuple(seq[:3])} to pack this spiral"
        )
    J = set(range(T.vertex_count)) - set(seq[:3])
    pres = prototypes or {v: ConvexBody.disk(1.0) for v in J}
    config = MonsterConfig(T, boundary, pres)
    # on a spiral the construction order should walk the spiral itself
    eng = _engine(config)
    if eng.sequence != seq[3:]:
        config._engine = None
    result = solve(config, **solve_kw)
    return result, config


def _sweep_until_fixed(eng, x, sweeps, tol, stats, on_sweep=None):
    width = 1e-3
    last_delta = 1.0
    relax = 1.0
    state = eng.evaluate(x)
    history = []
    for sweep in range(sweeps):
        max_delta = 0.0
        for i in eng.sequence:
            xi_old = x[i]
            xi_new = _bisect_coord(eng, i, x, state, width, last_delta)
            if xi_new is None:
                stats["failures"].append((sweep, i, "no-sign-change"))
                continue
            if relax < 1.0:
                xi_new = xi_old + relax * (xi_new - xi_old)
            x[i] = xi_new
            body, p, anchor = eng.place(i, xi_new, state.bodies, state.base)
            state.bodies[i] = body
            state.base[i] = p
            state.anchor[i] = anchor
            max_delta = max(max_delta, abs(xi_new - xi_old))
        stats["sweeps"] += 1
        if on_sweep is not None:
            on_sweep(sweep, max_delta)
        if max_delta < max(tol.eps_x, 1e-12):
            return True
        # damp the sweep when updates stop contracting (chain coupling)
        history.append(max_delta)
        if len(history) >= 3 and history[-1] > 0.7 * history[-3]:
            relax = max(0.25, 0.6 * relax)
            history.clear()
        width = max(tol.eps_x, min(width, 0.3 * max_delta))
        last_delta = max_delta
    return False


def _bisect_coord(eng, i, x, state, width, last_delta):
    """Move coordinate i to the membership-boundary sign change of its
    residual nearest to its current value.

    Residuals are not globally monotone, so the bracket grows outward from
    the current value in the direction the sign dictates (negative: the
    chain has not reached its target, increase; positive: overshoot,
    decrease).  A coordinate already within the residual tolerance stays
    put, which makes solved configurations stationary."""

    def f(t):
        old = x[i]
        x[i] = t
        try:
            return eng.residual(i, x, state)
        finally:
            x[i] = old

    lo_floor = 1e-7
    r0 = f(x[i])
    if abs(r0) <= eng.tol.eps_res:
        return x[i]
    direction = 1.0 if r0 < 0 else -1.0
    step = max(4 * last_delta, 20 * width, 1e-4)
    a, fa = x[i], r0
    bracket = None
    for _ in range(64):
        b = min(max(a + direction * step, lo_floor), 1.0)
        if b == a:
            break
        fb = f(b)
        if (fb >= 0) != (fa >= 0):
            bracket = (a, fa, b, fb)
            break
        a, fa = b, fb
        step *= 2.0
        if (direction > 0 and a >= 1.0) or (direction < 0 and a <= lo_floor):
            break
    if bracket is None:
        # no crossing on this side: probe the whole interval from the face
        fhi = f(1.0)
        if fhi < 0:
            return None  # no sign change in this coordinate
        flo = None
        for probe in (lo_floor, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.4, 0.7):
            fp = f(probe)
            if fp < 0:
                bracket = (probe, fp, 1.0, fhi)
                break
        if bracket is None:
            return lo_floor  # membership reaches the face: smallest wins
    a, fa, b, fb = bracket
    lo, hi = (a, b) if fa < 0 else (b, a)
    for _ in range(64):
        if abs(hi - lo) <= width:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
