"""Hand-built instances used by tests, demos, and the bundled CLI fixtures."""

from __future__ import annotations

import math

import numpy as np

from .geometry import ConvexBody, JordanBoundary, curvilinear_triangle_boundary
from .triangulation import Triangulation, tetrahedron


def soddy_instance():
    """Tetrahedron packed into the inner curvilinear triangle of three
    mutually tangent unit circles; the packed disk radius is 1/(3+2*sqrt(3)).
    """
    centers = [np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([1.0, math.sqrt(3.0)])]
    boundary = curvilinear_triangle_boundary(centers, [1.0, 1.0, 1.0])
    return tetrahedron(), boundary, {3: ConvexBody.disk(1.0)}


def wheel_triangulation(n_ring=6, marks=(0, 2, 4)):
    """Sphere triangulation of a hub-and-ring wheel inside a three-arc
    container: ring vertices 0..n-1 (counterclockwise), hub n, then the three
    container vertices; ``marks`` are the ring indices shared by consecutive
    container fans.

    Faces are stored winding clockwise around their interstices; the root is
    the container triple.
    """
    m1, m2, m3 = marks
    n = n_ring
    hub = n
    a1, a2, a3 = n + 1, n + 2, n + 3
    faces = []
    for i in range(n):
        faces.append((hub, (i + 1) % n, i))
    spans = [(m1, m2, a1), (m2, m3, a2), (m3, m1, a3)]
    for (start, stop, av) in spans:
        i = start
        while i != stop:
            j = (i + 1) % n
            faces.append((i, j, av))
            i = j
    faces.append((a1, m2, a2))
    faces.append((a2, m3, a3))
    faces.append((a3, m1, a1))
    faces.append((a1, a2, a3))
    return Triangulation.from_faces(faces, (a1, a2, a3))


def wheel_instance(n_ring=6, marks=(0, 2, 4), radii=(4.0, 4.0, 4.0)):
    """Wheel triangulation inside the inner curvilinear triangle of three
    mutually tangent circles (corner angles zero, so the packing theory's
    angle condition holds), with all-disk prescriptions."""
    T = wheel_triangulation(n_ring, marks)
    boundary, circles = tangent_circle_triangle(radii)
    prescriptions = {v: ConvexBody.disk(1.0) for v in range(n_ring + 1)}
    return T, boundary, prescriptions, circles


def tangent_circle_triangle(radii):
    """Three mutually tangent circles with the given radii, plus the Jordan
    boundary of their inner curvilinear triangle; returns (boundary,
    [(center, radius)] * 3 in root order)."""
    r1, r2, r3 = [float(r) for r in radii]
    c1 = np.array([0.0, 0.0])
    c2 = np.array([r1 + r2, 0.0])
    # third center from the two tangency distances
    d13, d23 = r1 + r3, r2 + r3
    x = (d13 * d13 - d23 * d23 + (r1 + r2) ** 2) / (2 * (r1 + r2))
    y = math.sqrt(max(d13 * d13 - x * x, 0.0))
    c3 = np.array([x, y])
    boundary = curvilinear_triangle_boundary([c1, c2, c3], [r1, r2, r3])
    return boundary, [(c1, r1), (c2, r2), (c3, r3)]


def square_with_square_hole(hole_side=0.3, n_side=8):
    """Unit square domain with a centered square hole, as polylines."""
    outer = _square_polyline(0.0, 0.0, 1.0, n_side)
    h0 = 0.5 - hole_side / 2.0
    hole = _square_polyline(h0, h0, hole_side, max(n_side // 2, 2))
    return outer, [hole]


def _square_polyline(x0, y0, side, n_per_side):
    pts = []
    corners = [
        (x0, y0),
        (x0 + side, y0),
        (x0 + side, y0 + side),
        (x0, y0 + side),
    ]
    for k in range(4):
        a = np.array(corners[k], float)
        b = np.array(corners[(k + 1) % 4], float)
        for t in np.linspace(0.0, 1.0, n_per_side, endpoint=False):
            pts.append(a + t * (b - a))
    return np.array(pts)


def square_boundary(side=1.0, origin=(0.0, 0.0), n_per_side=8, mark_corners=(0, 1, 2)):
    """Unit-square Jordan boundary with marks at three of its corners
    (counterclockwise corner indices)."""
    pts = _square_polyline(origin[0], origin[1], side, n_per_side)
    idx = [int(c) * n_per_side for c in mark_corners]
    return JordanBoundary(pts, idx)
