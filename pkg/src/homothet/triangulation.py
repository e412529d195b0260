"""Oriented triangulations of the 2-sphere.

Orientation convention, fixed once for the whole package
--------------------------------------------------------
Faces are stored as oriented triples forming a consistent orientation of the
sphere; the designated root face is stored as ``(a, b, c)``.  When the packing
is drawn in the plane (the root cell left empty, everything else filled), a
stored face ``(u, v, w)`` winds *clockwise* around the interstice it labels.

The corner rule therefore gives the clockwise neighbor rotation::

        w                 stored face (v, u, w):
         \                at the corner v, sweeping clockwise
          v ---- u        (as drawn in the packing plane)
         /                from the edge v-u, the next edge is v-w,
        ...               i.e.  next_cw(v)[u] = w.

Counterclockwise rotation is the inverse permutation.  Every combinatorial
"clockwise"/"counterclockwise" in this package refers to these two maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class TriangulationError(ValueError):
    """Raised when a face list does not describe a valid sphere triangulation."""


def _cyclic(face):
    """Canonical rotation of an oriented triple (smallest vertex first)."""
    a, b, c = face
    if a <= b and a <= c:
        return (a, b, c)
    if b <= a and b <= c:
        return (b, c, a)
    return (c, a, b)


@dataclass(frozen=True)
class Triangulation:
    """Validated oriented sphere triangulation with rotation system.

    Immutable after construction; safe to share across threads.
    """

    vertex_count: int
    faces: tuple  # oriented triples, consistent orientation, root stored as given
    root: tuple  # (a, b, c); the empty cell of the packing
    _next_cw: tuple = field(repr=False, default=())  # per-vertex dict u -> w
    _face_keys: frozenset = field(repr=False, default=frozenset())
    _adj: tuple = field(repr=False, default=())

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_faces(faces, root) -> "Triangulation":
        """Build and validate a triangulation from oriented faces.

        ``root`` must occur as a face up to rotation; if only its reversal
        occurs, the global orientation is flipped so that the root triple is
        stored as given.  Raises TriangulationError naming the violated
        invariant otherwise.
        """
        faces = [tuple(int(v) for v in f) for f in faces]
        root = tuple(int(v) for v in root)
        if not faces:
            raise TriangulationError("empty face list")
        if len(root) != 3:
            raise TriangulationError("root must be a vertex triple")
        for f in faces:
            if len(f) != 3:
                raise TriangulationError(f"face {f} is not a triple")
            if len(set(f)) != 3:
                raise TriangulationError(f"loop: face {f} repeats a vertex")

        keys = [_cyclic(f) for f in faces]
        if _cyclic(root) not in keys:
            rev = _cyclic((root[0], root[2], root[1]))
            if rev in keys:
                faces = [(f[0], f[2], f[1]) for f in faces]
                keys = [_cyclic(f) for f in faces]
            else:
                raise TriangulationError(f"root {root} is not a face")
        if len(set(keys)) != len(keys):
            raise TriangulationError("duplicate oriented face")
        if len({frozenset(f) for f in faces}) != len(faces):
            raise TriangulationError("two faces share the same vertex set")

        verts = sorted({v for f in faces for v in f})
        n = len(verts)
        if verts != list(range(n)):
            raise TriangulationError("vertices must be 0..n-1 with no gaps")

        # Consistent orientation: every directed edge appears exactly once.
        directed = {}
        for f in faces:
            for k in range(3):
                e = (f[k], f[(k + 1) % 3])
                if e in directed:
                    raise TriangulationError(
                        f"inconsistent orientation or non-manifold edge at {e}"
                    )
                directed[e] = f
        for (u, v) in directed:
            if (v, u) not in directed:
                raise TriangulationError(f"edge {{{u},{v}}} has only one incident face")

        E = len(directed) // 2
        F = len(faces)
        if n - E + F != 2:
            raise TriangulationError(f"Euler relation fails: V-E+F = {n - E + F}")

        # Rotation system: next_cw[v][u] = w for stored corner (v, u, w);
        # each vertex's neighbors must close into a single cycle.
        next_cw = [dict() for _ in range(n)]
        for f in faces:
            for k in range(3):
                v, u, w = f[k], f[(k + 1) % 3], f[(k + 2) % 3]
                if u in next_cw[v]:
                    raise TriangulationError(f"non-manifold corner at vertex {v}")
                next_cw[v][u] = w
        adj = [tuple() for _ in range(n)]
        for v in range(n):
            ring = next_cw[v]
            if not ring:
                raise TriangulationError(f"isolated vertex {v}")
            start = next(iter(ring))
            cyc = [start]
            u = ring[start]
            while u != start:
                if u in cyc and u != start:
                    raise TriangulationError(f"pinched rotation at vertex {v}")
                cyc.append(u)
                u = ring[u]
                if len(cyc) > len(ring):
                    break
            if len(cyc) != len(ring):
                raise TriangulationError(f"rotation at vertex {v} is not a single cycle")
            adj[v] = tuple(cyc)

        # Connectivity of the edge graph.
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != n:
            raise TriangulationError("edge graph is disconnected")

        return Triangulation(
            vertex_count=n,
            faces=tuple(faces),
            root=root,
            _next_cw=tuple(next_cw),
            _face_keys=frozenset(keys),
            _adj=tuple(adj),
        )

    # -- queries -----------------------------------------------------------

    def neighbors(self, v):
        """Neighbors of v in clockwise cyclic order."""
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def next_cw(self, v, u):
        """Neighbor one step clockwise from u around v."""
        return self._next_cw[v][u]

    def next_ccw(self, v, u):
        """Neighbor one step counterclockwise from u around v."""
        ring = self._adj[v]
        return ring[ring.index(u) - 1]

    def has_edge(self, u, v):
        return v in self._next_cw[u]

    def edges(self):
        out = set()
        for f in self.faces:
            for k in range(3):
                e = frozenset((f[k], f[(k + 1) % 3]))
                out.add(e)
        return out

    def has_face(self, u, v, w):
        """True iff the oriented triple (u,v,w) is a stored face up to rotation."""
        return _cyclic((u, v, w)) in self._face_keys

    def face_count(self):
        return len(self.faces)

    def edge_count(self):
        return 3 * len(self.faces) // 2

    def cw_arc(self, v, start, stop):
        """Open clockwise arc of neighbors of v strictly between start and stop."""
        out = []
        u = self.next_cw(v, start)
        while u != stop:
            out.append(u)
            u = self.next_cw(v, u)
            if len(out) > self.degree(v):
                raise RuntimeError("arc scan did not terminate")
        return out

    def ccw_arc(self, v, start, stop):
        """Open counterclockwise arc of neighbors of v strictly between start and stop."""
        out = []
        u = self.next_ccw(v, start)
        while u != stop:
            out.append(u)
            u = self.next_ccw(v, u)
            if len(out) > self.degree(v):
                raise RuntimeError("arc scan did not terminate")
        return out

    def is_face_triangle(self, u, v, w):
        """Whether the 3-clique {u,v,w} bounds a cell.

        Decided both by face lookup and by the separation test (a clique is a
        face iff deleting it leaves the rest connected); the two must agree.
        """
        for x, y in ((u, v), (v, w), (u, w)):
            if not self.has_edge(x, y):
                raise TriangulationError(f"{x} and {y} are not adjacent")
        by_lookup = self.has_face(u, v, w)

        removed = {u, v, w}
        rest = [x for x in range(self.vertex_count) if x not in removed]
        if not rest:
            by_separation = True
        else:
            seen = {rest[0]}
            stack = [rest[0]]
            while stack:
                x = stack.pop()
                for y in self._adj[x]:
                    if y not in removed and y not in seen:
                        seen.add(y)
                        stack.append(y)
            by_separation = len(seen) == len(rest)
        if by_lookup != by_separation:
            raise AssertionError(
                f"face lookup ({by_lookup}) disagrees with separation test "
                f"({by_separation}) on clique {(u, v, w)}"
            )
        return by_lookup

    # -- modification (returns new triangulations) --------------------------

    def split_cell(self, boundary_cycle, new_vertex=None) -> "Triangulation":
        """Join a new vertex to every vertex of a cell's boundary cycle.

        For a triangulation the only cells are the faces, so the cycle must
        match a face up to rotation (a barycentric split).  Polygonal cells of
        complexes under construction are handled by OrientedComplex.
        """
        cycle = tuple(int(v) for v in boundary_cycle)
        if new_vertex is None:
            new_vertex = self.vertex_count
        if len(cycle) != 3 or not self.has_face(*cycle):
            raise TriangulationError(f"cycle {cycle} does not bound a cell")
        target = _cyclic(cycle)
        out = []
        for f in self.faces:
            if _cyclic(f) == target:
                a, b, c = f
                out.extend([(a, b, new_vertex), (b, c, new_vertex), (c, a, new_vertex)])
            else:
                out.append(f)
        root = self.root
        if _cyclic(root) == target:
            # splitting the root face: keep (a, b, new) as the new root cell
            root = (root[0], root[1], new_vertex)
        return Triangulation.from_faces(out, root)

    # -- serialization -------------------------------------------------------

    def to_json(self):
        return {
            "vertices": self.vertex_count,
            "faces": [list(f) for f in self.faces],
            "root": list(self.root),
        }

    @staticmethod
    def from_json(obj) -> "Triangulation":
        try:
            faces = obj["faces"]
            root = obj["root"]
        except KeyError as e:
            raise TriangulationError(f"triangulation JSON missing field {e}")
        t = Triangulation.from_faces(faces, root)
        if "vertices" in obj and int(obj["vertices"]) != t.vertex_count:
            raise TriangulationError("declared vertex count does not match faces")
        return t

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)


class OrientedComplex:
    """Oriented 2-complex with polygonal cells, used while building
    triangulations out of non-triangular nerves.

    Cells are oriented vertex tuples (length >= 3) with the same storage
    convention as Triangulation faces.  Only the operations needed for cell
    splitting are provided; full validation happens on conversion.
    """

    def __init__(self, cells):
        self.cells = [tuple(int(v) for v in c) for c in cells]

    def split_cell(self, boundary_cycle, new_vertex):
        """Replace the cell matching boundary_cycle (up to rotation) by the fan
        of triangles joining new_vertex to each of its edges."""
        cycle = tuple(int(v) for v in boundary_cycle)
        if len(cycle) < 3 or len(set(cycle)) != len(cycle):
            raise TriangulationError(f"{cycle} is not a simple cycle")
        m = len(cycle)
        rotations = {tuple(cycle[i:] + cycle[:i]) for i in range(m)}
        hit = None
        for c in self.cells:
            if len(c) == m and tuple(c) in rotations:
                hit = c
                break
        if hit is None:
            raise TriangulationError(f"cycle {cycle} does not bound a cell")
        out = [c for c in self.cells if c is not hit]
        for k in range(m):
            out.append((hit[k], hit[(k + 1) % m], new_vertex))
        return OrientedComplex(out)

    def to_triangulation(self, root) -> Triangulation:
        return Triangulation.from_faces(self.cells, root)


# -- canonical small triangulations and a randomized generator ----------------

TETRAHEDRON_FACES = [(0, 1, 2), (0, 2, 3), (1, 3, 2), (0, 3, 1)]


def tetrahedron() -> Triangulation:
    """Smallest sphere triangulation; root cell (0,1,2)."""
    return Triangulation.from_faces(TETRAHEDRON_FACES, (0, 1, 2))


def octahedron() -> Triangulation:
    faces = [
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
        (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4),
    ]
    return Triangulation.from_faces(faces, (0, 1, 2))


def random_triangulation(n_vertices, rng) -> Triangulation:
    """Random sphere triangulation grown by repeated face splits of the
    tetrahedron; valid by construction."""
    if n_vertices < 4:
        raise ValueError("need at least 4 vertices")
    t = tetrahedron()
    while t.vertex_count < n_vertices:
        f = t.faces[rng.integers(len(t.faces))]
        t = t.split_cell(f)
    return t
