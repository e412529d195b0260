"""Independent circle-packing cross-check: angle-sum radius relaxation plus
a tangency layout, used to audit the cube solver on all-disk instances.

Two boundary modes are supported: a circular container split into three arcs
(the three root vertices merge into the container circle) and three fixed
mutually tangent circles.
"""

from __future__ import annotations

import math

import numpy as np

from .triangulation import Triangulation


class OracleError(RuntimeError):
    pass


def _tri_angle(a, b, c):
    """Angle opposite side c in a triangle with side lengths a, b, c."""
    cosang = (a * a + b * b - c * c) / (2 * a * b)
    return math.acos(max(-1.0, min(1.0, cosang)))


def _pair_angle(rv, ru, rw, R):
    """Angle contribution at a circle of radius rv between consecutive ring
    neighbors u, w; the container (radius entry None) enters through its
    outward contact direction, so its triangles contribute the supplement."""
    if ru is None and rw is None:
        return 0.0  # collapsed corner cell: both sides meet at the contact
    if ru is None:
        inner = _tri_angle(R - rv, rv + rw, R - rw)
        return math.pi - inner
    if rw is None:
        inner = _tri_angle(R - rv, rv + ru, R - ru)
        return math.pi - inner
    return _tri_angle(rv + ru, rv + rw, ru + rw)


def _merged_rings(T, roots):
    """Neighbor rings with the three root vertices collapsed into the
    container pseudo-vertex -1 (consecutive occurrences merged)."""
    rings = {}
    rootset = set(roots)
    for v in range(T.vertex_count):
        if v in rootset:
            continue
        ring = [(-1 if u in rootset else u) for u in T.neighbors(v)]
        out = []
        for u in ring:
            if out and out[-1] == u == -1:
                continue
            out.append(u)
        if len(out) > 1 and out[0] == out[-1] == -1:
            out.pop()
        rings[v] = out
    return rings


def circle_pack_oracle(T, boundary, max_iter=100000, tol=1e-12):
    """Radii and centers of the disk packing with nerve T.

    ``boundary`` is ("container", center, R) or
    ("three_circles", [(center, r)] * 3) listed in root order.  Interior
    radii are relaxed until every interior angle sum is 2*pi, then the
    configuration is laid out by walking tangent triples.

    The container case is conformally transported to a half-plane (the
    container circle becomes a line, where every angle sum is strictly
    decreasing in the radius), solved there, and mapped back.
    """
    if boundary[0] == "container":
        return _container_oracle(T, boundary, max_iter, tol)
    roots = list(T.root)
    if boundary[0] == "three_circles":
        R = None
        circles = boundary[1]
        rings = {
            v: list(T.neighbors(v)) for v in range(T.vertex_count) if v not in roots
        }
        fixed = {roots[k]: float(circles[k][1]) for k in range(3)}
        radius = {v: float(circles[0][1]) * 0.3 for v in rings}
    else:
        raise OracleError(f"unknown boundary mode {boundary[0]}")

    def rad(v):
        if v == -1:
            return None
        return fixed[v] if v in fixed else radius[v]

    free = list(rings.keys())
    if not free:
        raise OracleError("no interior circles to relax")

    def angle_sum(v, rv):
        ring = rings[v]
        k = len(ring)
        theta = 0.0
        for j in range(k):
            ru = rad(ring[j])
            rw = rad(ring[(j + 1) % k])
            theta += _pair_angle(rv, ru, rw, R)
        return theta

    scale = R if R is not None else max(fixed.values(), default=1.0)
    rmax = (0.999 * R) if R is not None else 1e3 * scale
    err = math.inf
    for it in range(max_iter):
        err = 0.0
        for v in free:
            theta = angle_sum(v, radius[v])
            err = max(err, abs(theta - 2 * math.pi))
            # the angle sum starts above 2*pi at radius 0 and first crosses
            # it on the decreasing branch; take that first crossing
            lo = 1e-12 * scale
            hi = radius[v]
            if angle_sum(v, hi) > 2 * math.pi:
                while hi < rmax and angle_sum(v, hi) > 2 * math.pi:
                    lo = hi
                    hi = min(2 * hi, rmax)
                if angle_sum(v, hi) > 2 * math.pi:
                    radius[v] = hi
                    continue
            else:
                while lo > 1e-13 * scale and angle_sum(v, lo) < 2 * math.pi:
                    hi = lo
                    lo *= 0.5
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if angle_sum(v, mid) > 2 * math.pi:
                    lo = mid
                else:
                    hi = mid
            radius[v] = 0.5 * (lo + hi)
        if err < tol:
            break
    else:
        raise OracleError(f"radius relaxation did not converge (err={err:.2e})")

    centers = _layout(T, roots, boundary, rings, radius, fixed)
    return radius, centers, {"iterations": it + 1, "angle_error": err}


def _hyp_angle(xv, xu, xw):
    """Angle at a circle with label x = exp(-2 r) in a tangent triple, in the
    hyperbolic metric; labels 0 are horocycles (circles tangent to the ideal
    boundary).  Overflow-free for all label values in [0, 1)."""
    A = xv * xu
    B = xv * xw
    C = xu * xw
    cosang = ((1 + A) * (1 + B) - 2 * xv * (1 + C)) / ((1 - A) * (1 - B))
    return math.acos(max(-1.0, min(1.0, cosang)))


def _container_oracle(T, boundary, max_iter, tol):
    """Maximal packing in a circular container: container-tangent circles are
    horocycles of the hyperbolic disk; interior labels relax until every
    angle sum is 2*pi; the layout runs in the upper half-plane where a
    circle's Euclidean radius is its center height times (1-x)/(1+x)."""
    _, O, R = boundary
    O = np.asarray(O, float)
    R = float(R)
    roots = list(T.root)
    rootset = set(roots)
    rings = _merged_rings(T, roots)
    if not rings:
        raise OracleError("no circles to pack")
    boundary_verts = {v for v, ring in rings.items() if -1 in ring}
    interior = [v for v in rings if v not in boundary_verts]
    x = {v: (0.0 if v in boundary_verts else 0.25) for v in rings}

    def angle_sum(v, xv):
        ring = rings[v]
        k = len(ring)
        total = 0.0
        for j in range(k):
            u = ring[j]
            w = ring[(j + 1) % k]
            xu = 0.0 if u == -1 else x[u]
            xw = 0.0 if w == -1 else x[w]
            total += _hyp_angle(xv, xu, xw)
        return total

    err = 0.0
    it = 0
    for it in range(max_iter):
        err = 0.0
        for v in interior:
            theta = angle_sum(v, x[v])
            err = max(err, abs(theta - 2 * math.pi))
            # theta is increasing in the label; bisect to the 2*pi level
            lo, hi = 0.0, 1.0 - 1e-16
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if angle_sum(v, mid) > 2 * math.pi:
                    hi = mid
                else:
                    lo = mid
            x[v] = 0.5 * (lo + hi)
        if err < tol:
            break
    if interior and err >= tol:
        raise OracleError(f"hyperbolic relaxation did not converge (err={err:.2e})")

    centers, eradius = _disk_layout(T, rootset, rings, x)

    out_rad = {v: R * eradius[v] for v in rings}
    out_cen = {v: O + R * centers[v] for v in rings}
    return out_rad, out_cen, {"iterations": it + 1, "angle_error": err}


def _label_of(c, rho):
    """Hyperbolic label exp(-2 r) of a Euclidean circle in the unit disk at
    center distance c with radius rho (c + rho < 1)."""
    num = (1.0 - c - rho) * (1.0 + c - rho)
    den = (1.0 + c + rho) * (1.0 - c + rho)
    return max(num, 0.0) / den


def _radius_at_origin(xv):
    s = math.sqrt(xv)
    return (1.0 - s) / (1.0 + s)


def _disk_layout(T, rootset, rings, x):
    """Euclidean centers and radii in the unit-disk model.

    Circles are hyperbolic circles (horocycles when the label is 0); given
    two placed circles and the third's label, its radius is found by
    bisection: for trial rho the two tangency constraints give the center by
    circle intersection (the clockwise face winding picks the side), and the
    label mismatch is monotone in rho.
    """
    faces = []
    for f in T.faces:
        g = tuple((-1 if v in rootset else v) for v in f)
        if len(set(g)) == 3 and -1 not in g:
            faces.append(g)
    centers = {}
    rho = {}

    def label_err(v, c, r):
        if x[v] == 0.0:
            return (c + r) - 1.0  # horocycle: tangent to the unit circle
        return x[v] - _label_of(c, r)

    # seed: prefer an interior vertex at the origin
    interior = [v for v in rings if x[v] > 0.0]
    if interior:
        v0 = interior[0]
        rho[v0] = _radius_at_origin(x[v0])
        centers[v0] = np.array([0.0, 0.0])
    else:
        v0 = next(iter(rings))
        rho[v0] = 0.5
        centers[v0] = np.array([0.5, 0.0])
    # a neighbor on the positive axis through v0's center
    v1 = next(u for u in rings[v0] if u != -1)
    direction = np.array([1.0, 0.0])
    if not np.allclose(centers[v0], 0.0):
        direction = -centers[v0] / np.linalg.norm(centers[v0])

    def solve_on_ray(rv0, c0, vnew):
        # the label error increases with the trial radius along the ray
        lo, hi = 1e-14, 1.0
        f = lambda r: label_err(
            vnew, float(np.linalg.norm(c0 + (rv0 + r) * direction)), r
        )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    r1 = solve_on_ray(rho[v0], centers[v0], v1)
    rho[v1] = r1
    centers[v1] = centers[v0] + (rho[v0] + r1) * direction

    progress = True
    guard = 0
    while progress and guard < 8 * max(len(faces), 1) + 8:
        progress = False
        guard += 1
        for f in faces:
            for k in range(3):
                u, v, w = f[k], f[(k + 1) % 3], f[(k + 2) % 3]
                if u in centers and v in centers and w not in centers:
                    got = _place_third(
                        centers[u], rho[u], centers[v], rho[v], lambda c, r: label_err(w, c, r)
                    )
                    if got is None:
                        continue
                    centers[w], rho[w] = got
                    progress = True
                    break
    missing = [v for v in rings if v not in centers]
    if missing:
        raise OracleError(f"layout failed to reach vertices {missing[:8]}")
    return centers, rho


def _place_third(C1, r1, C2, r2, err_fn):
    """Circle tangent to two placed circles on their clockwise side whose
    label error vanishes; bisection over the trial radius."""

    def center(r):
        d = C2 - C1
        L = float(np.linalg.norm(d))
        if L < 1e-300:
            return None
        a = r1 + r
        b = r2 + r
        u = (L * L + a * a - b * b) / (2 * L)
        h2 = a * a - u * u
        if h2 < 0:
            return None
        h = math.sqrt(max(h2, 0.0))
        e = d / L
        n = np.array([e[1], -e[0]])  # clockwise side of C1 -> C2
        return C1 + u * e + h * n

    def g(r):
        c = center(r)
        if c is None:
            return None
        return err_fn(float(np.linalg.norm(c)), r)

    # multiple label roots can exist along the tangency locus (a wrapping
    # near-unit circle is spurious); bracket the first crossing from below
    lo = 1e-14
    glo = g(lo)
    if glo is None:
        return None
    hi = None
    r_prev, g_prev = lo, glo
    r_try = 2e-14
    while r_try < 1.0:
        gt = g(r_try)
        if gt is None:
            break
        if (gt > 0) != (g_prev > 0):
            lo, glo = r_prev, g_prev
            hi = r_try
            break
        r_prev, g_prev = r_try, gt
        r_try *= 1.9
    if hi is None:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm is None:
            hi = mid
            continue
        if (gm > 0) == (glo > 0):
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    c = center(r)
    if c is None:
        return None
    return c, r


def _layout(T, roots, boundary, rings, radius, fixed):
    """Place circles by walking oriented tangent triples; faces wind
    clockwise around their interstices, so at any corner the third vertex
    lies clockwise of the second."""
    rootset = set(roots)

    def rad(v):
        return fixed[v] if v in fixed else radius[v]

    def rot_cw(d, ang):
        ca, sa = math.cos(-ang), math.sin(-ang)
        return np.array([ca * d[0] - sa * d[1], sa * d[0] + ca * d[1]])

    centers = {}
    if boundary[0] == "three_circles":
        for k in range(3):
            centers[roots[k]] = np.asarray(boundary[1][k][0], float)
        faces = list(T.faces)
        R = None
        O = None
    else:
        _, O, R = boundary
        O = np.asarray(O, float)
        faces = []
        for f in T.faces:
            g = tuple((-1 if v in rootset else v) for v in f)
            if len(set(g)) == 3:
                faces.append(g)
        # seed a container-adjacent circle on the +x axis
        seed = next(f for f in faces if -1 in f)
        v0 = [v for v in seed if v != -1][0]
        centers[v0] = O + np.array([R - radius[v0], 0.0])

    progress = True
    guard = 0
    while progress and guard < 6 * len(faces) + 8:
        progress = False
        guard += 1
        for f in faces:
            if all((v in centers) or v == -1 for v in f):
                continue
            for k in range(3):
                u, v, w = f[k], f[(k + 1) % 3], f[(k + 2) % 3]
                if w == -1 or w in centers:
                    continue
                if u == -1:
                    if v not in centers:
                        continue
                    ang = _tri_angle(R - rad(v), R - rad(w), rad(v) + rad(w))
                    d = (centers[v] - O) / max(np.linalg.norm(centers[v] - O), 1e-300)
                    centers[w] = O + rot_cw(d, ang) * (R - rad(w))
                    progress = True
                    break
                if u not in centers:
                    continue
                if v == -1:
                    # direction to the container is the outward contact ray
                    d = (centers[u] - O) / max(np.linalg.norm(centers[u] - O), 1e-300)
                    inner = _tri_angle(R - rad(u), rad(u) + rad(w), R - rad(w))
                    ang = math.pi - inner
                    centers[w] = centers[u] + rot_cw(d, ang) * (rad(u) + rad(w))
                    progress = True
                    break
                if v in centers:
                    ang = _tri_angle(
                        rad(u) + rad(v), rad(u) + rad(w), rad(v) + rad(w)
                    )
                    d = centers[v] - centers[u]
                    L = np.linalg.norm(d)
                    if L < 1e-300:
                        continue
                    centers[w] = centers[u] + rot_cw(d / L, ang) * (rad(u) + rad(w))
                    progress = True
                    break
    missing = [v for v in rings if v not in centers]
    if missing:
        raise OracleError(f"layout failed to reach vertices {missing[:8]}")
    return centers


# ---------------------------------------------------------------------------
# disk automorphisms for pinning packings before comparison
# ---------------------------------------------------------------------------


def mobius_circle_image(a, b, c, d, center, radius):
    """Image of a circle under z -> (a z + b) / (c z + d)."""
    z0 = complex(center[0], center[1]) if not isinstance(center, complex) else center
    r = float(radius)
    den = abs(c * z0 + d) ** 2 - abs(c) ** 2 * r * r
    if abs(den) < 1e-300:
        raise OracleError("circle maps through infinity")
    z1 = ((a * z0 + b) * (c * z0 + d).conjugate() - a * c.conjugate() * r * r) / den
    r1 = abs(a * d - b * c) * r / abs(den)
    return z1, r1


def mobius_from_boundary_points(src, dst):
    """Möbius map sending three points to three points (complex or xy);
    returned as coefficients (a, b, c, d)."""

    def cz(z):
        return z if isinstance(z, complex) else complex(z[0], z[1])

    def to_std(z1, z2, z3):
        # z1, z2, z3 -> 0, 1, infinity
        return np.array(
            [[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], complex
        )

    M1 = to_std(*[cz(z) for z in src])
    M2 = to_std(*[cz(z) for z in dst])
    M = np.linalg.inv(M2) @ M1
    return M[0, 0], M[0, 1], M[1, 0], M[1, 1]
