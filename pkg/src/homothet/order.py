"""Rooted partial order driving the packing construction.

The spanning tree is grown by the dynasty procedure: the root a has the single
child b; afterwards, when a vertex dies, its not-yet-born neighbors form arcs
of its rotation circle bounded by dead ancestors, and the clockwise end of
each arc becomes a child.  With the rotation convention of
:mod:`homothet.triangulation` ("clockwise" = next_cw), the clockwise end of an
arc is the unique member whose clockwise successor is already dead::

          g   <- first ancestor counterclockwise of the arc (godparent side)
         /
        m  ...  i   <- arc of future descendants, listed counterclockwise
                 \
                  q  <- next_cw(v)[i] is dead: i is the arc's clockwise end,
                        hence the child of v

Every edge of the triangulation then joins two comparable vertices, and the
set of vertices below any vertex is a chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .triangulation import Triangulation, TriangulationError


class OrderError(ValueError):
    pass


@dataclass(frozen=True)
class RootedOrder:
    """Tree order on a triangulation rooted at the edge (a, b) of the root face."""

    T: Triangulation
    a: int
    b: int
    c: int
    parent: tuple  # parent[v], -1 at the root
    depth: tuple
    children: tuple  # per-vertex tuple, in construction order
    sequence: tuple  # birth order: a linear extension of the partial order
    _tin: tuple = field(repr=False, default=())
    _tout: tuple = field(repr=False, default=())

    # -- order queries -------------------------------------------------------

    def leq(self, u, v):
        """u <= v iff u lies on the tree path from v to the root."""
        return self._tin[u] <= self._tin[v] < self._tout[u]

    def comparable(self, u, v):
        return self.leq(u, v) or self.leq(v, u)

    def ancestors(self, v):
        """Strict ancestors of v, root first."""
        out = []
        while self.parent[v] >= 0:
            v = self.parent[v]
            out.append(v)
        out.reverse()
        return out

    def path(self, u, v):
        """Tree path [u, ..., v] for u <= v."""
        if not self.leq(u, v):
            raise OrderError(f"{u} is not an ancestor of {v}")
        out = []
        while v != u:
            out.append(v)
            v = self.parent[v]
        out.append(u)
        out.reverse()
        return out

    def meet(self, u, v):
        while not self.leq(u, v):
            u = self.parent[u]
        return u

    def descendants(self, v):
        lo, hi = self._tin[v], self._tout[v]
        order = sorted(range(self.T.vertex_count), key=lambda x: self._tin[x])
        return [x for x in order if lo <= self._tin[x] < hi]

    # -- accessors used by the packer -----------------------------------------

    def godparent_heir(self, i):
        """The bounding ancestor of i's sibling arc and its minimal heir.

        Walking counterclockwise around parent(i) starting from i, the arc of
        descendants of parent(i) containing i ends at the first non-descendant
        g (an ancestor of parent(i)); g is the godparent.  The heir is the
        minimal vertex >= i adjacent to g; minimality holds in the partial
        order and the minimum is unique.
        """
        if i in (self.a, self.b):
            raise OrderError(f"vertex {i} has no godparent")
        p = self.parent[i]
        T = self.T
        u = i
        guard = 0
        while self.leq(p, u) and u != p:
            u = T.next_ccw(p, u)
            guard += 1
            if guard > T.degree(p) + 1:
                raise OrderError("rotation scan failed at godparent")
        g = u
        if not self.leq(g, p) or g == p:
            raise OrderError(f"godparent scan at {i} ended on non-ancestor {g}")
        candidates = [v for v in T.neighbors(g) if self.leq(i, v)]
        if not candidates:
            raise OrderError(f"no heir for {i}: godparent {g} has no neighbor >= {i}")
        h = candidates[0]
        for v in candidates[1:]:
            if self.leq(v, h):
                h = v
        for v in candidates:
            if not self.leq(h, v):
                raise OrderError(f"heir of {i} is not unique: {h} vs {v}")
        return g, h

    def boundary_cycle(self, i):
        """Vertices outside {j >= i} that bound it, by the forward walk.

        Returns [v_0, ..., v_e] linearly ordered with v_e = parent(i);
        consecutive vertices are adjacent in T and (parent(i), i, v_0) is a
        stored face.
        """
        if not (self.leq(self.c, i) and i != self.c):
            raise OrderError(f"boundary cycle needs a vertex above {self.c}")
        cyc = []
        for (u, j) in self._walk(i, forward=True):
            cyc.append(u)
            if u == self.parent[i]:
                return cyc
        raise OrderError(f"forward walk from {i} never returned to its parent")

    def backward_boundary_cycle(self, i):
        """Same set as boundary_cycle but produced by the counterclockwise walk;
        exists as an independent cross-check."""
        if not (self.leq(self.c, i) and i != self.c):
            raise OrderError(f"boundary cycle needs a vertex above {self.c}")
        cyc = []
        for (u, j) in self._walk(i, forward=False):
            cyc.append(u)
            if len(cyc) > 1 and u == cyc[0]:
                cyc.pop()
                return cyc
        return cyc

    def _walk(self, i, forward):
        """One boundary step: around u, from the inside neighbor j, rotate
        (clockwise if forward) to the first vertex outside I = {>= i}; yield
        the outside vertex and the last inside vertex seen."""
        T = self.T
        inside = lambda v: self.leq(i, v)
        u, j = self.parent[i], i
        for _ in range(4 * T.edge_count()):
            w, jlast = j, j
            step = T.next_cw if forward else T.next_ccw
            while True:
                w = step(u, w)
                if not inside(w):
                    break
                jlast = w
            u, j = w, jlast
            yield u, j
        raise OrderError("boundary walk did not terminate")

    def to_debug_json(self):
        gp, hr = [], []
        for v in range(self.T.vertex_count):
            if v in (self.a, self.b):
                gp.append(None)
                hr.append(None)
            else:
                g, h = self.godparent_heir(v)
                gp.append(g)
                hr.append(h)
        return {"parent": list(self.parent), "godparent": gp, "heir": hr}


def build_right_dfs_order(T: Triangulation) -> RootedOrder:
    """Grow the dynasty tree for T rooted at the edge (a, b) of the root face."""
    a, b, c_expect = T.root
    n = T.vertex_count
    parent = [-1] * n
    depth = [0] * n
    children = [[] for _ in range(n)]
    born = [False] * n
    dead = [False] * n

    parent[b] = a
    depth[b] = 1
    children[a] = [b]
    born[a] = born[b] = True
    dead[a] = True
    sequence = [a, b]

    stack = [b]
    while stack:
        v = stack.pop()
        dead[v] = True
        ring = T.neighbors(v)  # clockwise cyclic order
        if all(not born[u] for u in ring):
            raise OrderError(f"vertex {v} has no dead neighbor to anchor its arcs")
        # scan clockwise from the parent (dead by construction); collect runs
        # of unborn neighbors; each run's last element is its clockwise end
        anchor = parent[v] if parent[v] >= 0 else next(u for u in ring if born[u])
        k0 = ring.index(anchor)
        run = []
        new_children = []
        for t in range(1, len(ring) + 1):
            u = ring[(k0 + t) % len(ring)]
            if not born[u]:
                run.append(u)
            else:
                if run:
                    new_children.append((run[-1], list(run)))
                    run = []
        if run:
            raise OrderError("unborn arc not closed by a dead neighbor")
        for (child, _run_members) in new_children:
            born[child] = True
            parent[child] = v
            depth[child] = depth[v] + 1
            children[v].append(child)
            sequence.append(child)
        # later arcs are pushed first so the first-born child is processed first
        for (child, _) in reversed(new_children):
            stack.append(child)

    if any(not born[v] for v in range(n)):
        raise OrderError("dynasty did not reach every vertex")

    # Euler intervals for O(1) comparability.
    tin = [0] * n
    tout = [0] * n
    clock = 0
    stack2 = [(a, False)]
    while stack2:
        v, done = stack2.pop()
        if done:
            tout[v] = clock
            continue
        tin[v] = clock
        clock += 1
        stack2.append((v, True))
        for ch in reversed(children[v]):
            stack2.append((ch, False))
    order = RootedOrder(
        T=T,
        a=a,
        b=b,
        c=c_expect,
        parent=tuple(parent),
        depth=tuple(depth),
        children=tuple(tuple(ch) for ch in children),
        sequence=tuple(sequence),
        _tin=tuple(tin),
        _tout=tuple(tout),
    )

    if children[a] != [b]:
        raise OrderError("the root must have exactly one child")
    if parent[c_expect] != b:
        raise OrderError(
            f"root face {T.root}: expected {c_expect} to be the child of {b}, "
            f"got parent {parent[c_expect]}"
        )
    return order


def audit_order(order: RootedOrder):
    """Check the structural facts the rest of the system relies on; returns a
    list of violation strings (empty when clean)."""
    T, bad = order.T, []
    a, b, c = order.a, order.b, order.c
    for e in T.edges():
        u, v = tuple(e)
        if not order.comparable(u, v):
            bad.append(f"edge {{{u},{v}}} joins incomparable vertices")
    for v in range(T.vertex_count):
        if v in (a, b, c):
            continue
        if not (order.leq(c, v) and v != c):
            bad.append(f"vertex {v} is not above {c}")
    # non-tree edges grow from the left of the tree path below the upper end
    for e in T.edges():
        u, v = tuple(e)
        if order.leq(v, u):
            lo, hi = v, u
        else:
            lo, hi = u, v
        if order.parent[hi] == lo or lo == a:
            continue
        q = order.path(lo, hi)[1]  # child of lo towards hi
        p = order.parent[lo]
        if hi not in T.ccw_arc(lo, q, p):
            bad.append(f"edge {{{lo},{hi}}} does not leave the left of the path")
    # arcs of descendants around each vertex descend from the arc's clockwise end
    for v in range(T.vertex_count):
        ring = T.neighbors(v)
        desc = [u for u in ring if order.leq(v, u) and u != v]
        if len(desc) == len(ring):
            continue  # the root: one arc covering the whole ring, nothing to check
        for u in desc:
            w = u
            for _ in range(len(ring)):
                nxt = T.next_cw(v, w)
                if not (order.leq(v, nxt) and nxt != v):
                    break
                w = nxt
            if not order.leq(w, u):
                bad.append(f"arc end {w} at {v} is not an ancestor of arc member {u}")
    return bad


# -- counterclockwise spirals --------------------------------------------------


def _on_left(T: Triangulation, prev, v, nxt, u):
    """Whether the edge (v, u) leaves the left side of the path prev -> v -> nxt."""
    return u in T.ccw_arc(v, nxt, prev)


def is_counterclockwise_spiral(T: Triangulation, seq) -> bool:
    """Recognize a Hamiltonian path whose forward chords all leave to the left
    and backward chords to the right (relative to the traversal)."""
    seq = [int(v) for v in seq]
    if sorted(seq) != list(range(T.vertex_count)):
        raise TriangulationError("sequence is not a permutation of the vertices")
    s = len(seq)
    pos = {v: k for k, v in enumerate(seq)}
    for k in range(1, s):
        if not T.has_edge(seq[k - 1], seq[k]):
            return False
    for j in range(s):
        v = seq[j]
        for u in T.neighbors(v):
            k = pos[u]
            if k > j + 1 and j > 0:
                if not _on_left(T, seq[j - 1], v, seq[j + 1], u):
                    return False
            elif k < j - 1 and j < s - 1:
                if _on_left(T, seq[j - 1], v, seq[j + 1], u):
                    return False
    return True


def spiral_lowest_neighbor_facts(T: Triangulation, seq):
    """For each position j > 3 report (k_j, whether v_{j-1} ~ v_{k_j}); the
    second entries must all be True on a counterclockwise spiral."""
    pos = {v: k for k, v in enumerate(seq)}
    out = {}
    for j in range(3, len(seq)):
        v = seq[j]
        kj = min(pos[u] for u in T.neighbors(v))
        out[j] = (kj, T.has_edge(seq[j - 1], seq[kj]))
    return out
