"""Realizing a metric as circles, and circles as an ideal polyhedron.

Every pattern face ``f`` gets a star point ``P_f`` where all circles of the
face meet.  Seen from ``P_f`` the centers of consecutive circles are ``pi -
Theta`` apart in angle and the center of circle ``v`` sits at distance
``r_v``, so a face is placed once ``P_f`` and one direction are known.
Neighbouring faces share two circles and their star points are mirror
images across the line of centers; a breadth-first sweep over faces lays out
the whole pattern.  Vertices at infinity are lines through ``P_f`` whose
normal plays the role of the radius direction.

Hyperbolic patterns are laid out in the Poincare disk with the Mobius maps
``z -> (z + a) / (1 + conj(a) z)``, which carry the origin to ``a`` without
rotating tangent directions there.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np


from .complex import CellComplex, ComplexError, dual_complex
from .curvature import PackingMetric
from .geometry import Background

TAU_LAYOUT = 1e-6


class NonFlatMetricError(ValueError):
    def __init__(self, msg, worst_vertex=None, misclosure=None):
        super().__init__(msg)
        self.worst_vertex = worst_vertex
        self.misclosure = misclosure


# ----------------------------------------------------------------------
# disk model helpers


def mobius(a, z):
    """Disk isometry taking 0 to ``a``."""
    return (z + a) / (1.0 + np.conj(a) * z)


def mobius_inv(a, z):
    return (z - a) / (1.0 - np.conj(a) * z)


def disk_point(d, phi):
    """Point at hyperbolic distance ``d`` from 0 in direction ``phi``."""
    return np.tanh(0.5 * d) * np.exp(1j * phi)


def hyperbolic_circle_to_euclidean(c, r):
    """Euclidean center and radius of the disk-model circle of hyperbolic
    center ``c`` and radius ``r``."""
    c = np.asarray(c, dtype=complex)
    s = np.tanh(0.5 * np.asarray(r, dtype=float))
    a = np.abs(c) ** 2
    den = 1.0 - s * s * a
    return c * (1.0 - s * s) / den, s * (1.0 - a) / den


def circle_angle(c1, r1, c2, r2):
    """Exterior intersection angle of two Euclidean circles."""
    d2 = np.abs(np.asarray(c1) - np.asarray(c2)) ** 2
    cos_t = (d2 - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
    return np.arccos(np.clip(cos_t, -1.0, 1.0))


# ----------------------------------------------------------------------
# layout


@dataclass
class PatternLayout:
    """Circles of a pattern in the plane or the Poincare disk.

    ``centers`` and ``radii`` are intrinsic (hyperbolic in the disk);
    ``euclid_centers``/``euclid_radii`` describe the same circles as plane
    figures.  Vertices at infinity are lines ``{p : <p, normal> = offset}``
    and have ``nan`` radii.
    """

    ambient: str
    vertex_ids: tuple
    centers: np.ndarray
    radii: np.ndarray
    star_points: dict
    lines: dict = field(default_factory=dict)
    placed: np.ndarray | None = None
    misclosure: np.ndarray | None = None
    line_misclosure: float = 0.0
    flat: np.ndarray | None = None
    face_order: list = field(default_factory=list)
    overlaps: list = field(default_factory=list)
    cx: CellComplex | None = None

    @property
    def euclid_centers(self) -> np.ndarray:
        if self.ambient == "plane":
            return self.centers
        return hyperbolic_circle_to_euclidean(self.centers, self.radii)[0]

    @property
    def euclid_radii(self) -> np.ndarray:
        if self.ambient == "plane":
            return self.radii
        return hyperbolic_circle_to_euclidean(self.centers, self.radii)[1]

    @property
    def diameter(self) -> float:
        c = self.euclid_centers[self.placed & np.isfinite(self.radii)]
        if len(c) == 0:
            return 0.0
        r = self.euclid_radii[self.placed & np.isfinite(self.radii)]
        lo = np.min(np.c_[c.real - r, c.imag - r], axis=0)
        hi = np.max(np.c_[c.real + r, c.imag + r], axis=0)
        return float(np.hypot(*(hi - lo)))

    def to_json(self) -> dict:
        ec, er = self.euclid_centers, self.euclid_radii
        circles = []
        for k in np.flatnonzero(self.placed):
            if k in self.lines:
                continue
            circles.append({"v": _jid(self.vertex_ids[k]), "cx": float(ec[k].real), "cy": float(ec[k].imag),
                            "r": float(er[k])})
        lines = [{"v": _jid(self.vertex_ids[k]), "nx": float(n.real), "ny": float(n.imag), "offset": float(o)}
                 for k, (n, o) in sorted(self.lines.items())]
        doc = {"ambient": self.ambient, "circles": circles}
        if lines:
            doc["lines"] = lines
        return doc


def _jid(v):
    return v.item() if hasattr(v, "item") else v


def _reflect_line(p, a, direction):
    """Reflect ``p`` across the line through ``a`` with unit ``direction``."""
    w = (p - a) * np.conj(direction)
    return a + np.conj(w) * direction


def embed(cx: CellComplex, metric: PackingMetric, seed_face: int | None = None, free=None,
          tol: float | None = None, check: bool = True, overlap_check: bool = True) -> PatternLayout:
    """Lay out the pattern face by face.

    Only faces with a vertex in ``free`` (default: closed-star vertices) are
    used, and the sweep only crosses edges at free vertices, so loops close
    exactly when the free vertices are flat.  The largest disagreement
    between the placements of a free vertex is its misclosure; above
    ``tol`` (default ``1e-6`` times the layout diameter) the metric is
    reported as not flat.  Other vertices keep their first placement.
    """
    bg = metric.background
    hyper = bg is Background.HYPERBOLIC
    inf = cx.infinity_set
    if hyper and inf:
        raise ComplexError("vertices at infinity are only supported in the Euclidean plane")
    n = cx.n_vertices
    r = metric.r
    free = np.array(sorted(cx.interior_vertices), dtype=np.int64) if free is None else np.asarray(free, np.int64)
    is_free = np.zeros(n, dtype=bool)
    is_free[free] = True
    fv = cx.face_vertices
    faces = [f for f in range(len(fv)) if f != cx.infinity_face and any(is_free[v] for v in fv[f])]
    if not faces:
        raise ComplexError("no face touches a free vertex")
    face_set = set(faces)
    if seed_face is None:
        seed_face = faces[0]
    elif seed_face not in face_set:
        raise ComplexError("seed face does not touch a free vertex")
    for f in faces:
        bad = [v for v in fv[f] if v not in inf and not np.isfinite(r[v])]
        if bad:
            raise ComplexError(f"face {f} has vertices without radii: {bad[:5]}")

    theta_of = {}
    for f in faces:
        cyc = fv[f]
        m = len(cyc)
        theta_of[f] = [cx.theta[cx.edge_between(cyc[k], cyc[(k + 1) % m])] for k in range(m)]

    def place(f, star, v0, phi0):
        """Centers (or line normals) of face ``f`` given its star point and the
        direction of vertex ``v0``."""
        cyc = fv[f]
        m = len(cyc)
        k0 = cyc.index(v0)
        out = {}
        phi = phi0
        for s in range(m):
            k = (k0 + s) % m
            v = cyc[k]
            if v in inf:
                out[v] = ("line", np.exp(1j * phi))
            elif hyper:
                out[v] = ("circle", mobius(star, disk_point(r[v], phi)))
            else:
                out[v] = ("circle", star + r[v] * np.exp(1j * phi))
            phi += math.pi - theta_of[f][k]
        return out

    def direction_from(star, c):
        return float(np.angle(mobius_inv(star, c) if hyper else c - star))

    local = {}
    stars = {}
    # seed: star point at the origin, first non-infinite vertex along the x-axis
    cyc0 = fv[seed_face]
    v0 = next((v for v in cyc0 if v not in inf), cyc0[0])
    stars[seed_face] = 0j
    local[seed_face] = place(seed_face, 0j, v0, 0.0)
    order = [seed_face]
    queue = deque([seed_face])
    while queue:
        f = queue.popleft()
        cyc = fv[f]
        m = len(cyc)
        for k in range(m):
            a, b = cyc[k], cyc[(k + 1) % m]
            if not (is_free[a] or is_free[b]):
                continue
            if a in inf and b in inf:
                continue
            e = cx.edge_between(a, b)
            for g in cx.edge_faces[e]:
                if g == f or g not in face_set or g in local:
                    continue
                if a in inf:
                    a, b = b, a
                # a is a circle; b is a circle or a line
                ca = local[f][a][1]
                sf = stars[f]
                if b in inf:
                    nb = local[f][b][1]
                    axis_dir = nb
                    sg = _reflect_line(sf, ca, axis_dir)
                elif hyper:
                    # move a to the origin, reflect across the diameter through b
                    cb = mobius_inv(ca, local[f][b][1])
                    d = cb / abs(cb)
                    sg = mobius(ca, _reflect_line(mobius_inv(ca, sf), 0j, d))
                else:
                    cb = local[f][b][1]
                    d = (cb - ca) / abs(cb - ca)
                    sg = _reflect_line(sf, ca, d)
                stars[g] = sg
                local[g] = place(g, sg, a, direction_from(sg, ca))
                order.append(g)
                queue.append(g)

    centers = np.full(n, np.nan + 0j)
    placed = np.zeros(n, dtype=bool)
    lines: dict = {}
    mis = np.zeros(n)
    line_mis = 0.0
    for f in order:
        for v, (kind, val) in local[f].items():
            if kind == "line":
                off = float((np.conj(val) * stars[f]).real)
                if v not in lines:
                    lines[v] = (val, off)
                    placed[v] = True
                else:
                    n0, o0 = lines[v]
                    line_mis = max(line_mis, abs(val - n0), abs(off - o0))
                continue
            if not placed[v]:
                centers[v] = val
                placed[v] = True
            else:
                mis[v] = max(mis[v], abs(val - centers[v]))

    radii = np.where(placed, r, np.nan)
    for v in lines:
        radii[v] = np.nan
    lay = PatternLayout(
        ambient="disk" if hyper else "plane", vertex_ids=cx.vertex_ids, centers=centers, radii=radii,
        star_points=stars, lines=lines, placed=placed, misclosure=mis, line_misclosure=line_mis,
        flat=is_free, face_order=order, cx=cx,
    )
    if check:
        tau = TAU_LAYOUT * max(1.0, lay.diameter) if tol is None else tol
        worst = int(np.argmax(np.where(is_free, mis, -1.0)))
        if is_free[worst] and mis[worst] > tau:
            raise NonFlatMetricError(
                f"misclosure {mis[worst]:.3e} at vertex {cx.vertex_ids[worst]!r} exceeds {tau:.1e}",
                cx.vertex_ids[worst], float(mis[worst]))
        if line_mis > tau:
            raise NonFlatMetricError(f"lines at infinity misclose by {line_mis:.3e}")
    if overlap_check:
        lay.overlaps = find_overlaps(lay)
        if lay.overlaps:
            warnings.warn(f"{len(lay.overlaps)} pairs of non-adjacent circles overlap", RuntimeWarning)
    return lay


def find_overlaps(lay: PatternLayout, tol: float = 1e-9) -> list:
    """Non-adjacent circle pairs whose disks overlap."""
    from scipy.spatial import cKDTree
    idx = np.flatnonzero(lay.placed & np.isfinite(lay.radii))
    if len(idx) < 2:
        return []
    c = lay.euclid_centers[idx]
    rr = lay.euclid_radii[idx]
    tree = cKDTree(np.c_[c.real, c.imag])
    pairs = tree.query_pairs(2.0 * float(rr.max()), output_type="ndarray")
    if len(pairs) == 0:
        return []
    a, b = pairs[:, 0], pairs[:, 1]
    d = np.abs(c[a] - c[b])
    hit = d < rr[a] + rr[b] - tol * np.maximum(1.0, rr[a] + rr[b])
    # circles of one face all pass through its star point, so they may meet
    faces_of = {}
    if lay.cx is not None:
        for f, cyc in enumerate(lay.cx.face_vertices):
            for v in cyc:
                faces_of.setdefault(v, set()).add(f)
    out = []
    for i, j in zip(idx[a[hit]], idx[b[hit]]):
        if faces_of.get(i, set()) & faces_of.get(j, set()):
            continue
        out.append((int(i), int(j)))
    return out


# ----------------------------------------------------------------------
# diagnostics


def realized_angles(lay: PatternLayout, edges=None) -> tuple:
    """``(edge indices, realized Theta)`` for edges between placed circles."""
    cx = lay.cx
    ec, er = lay.euclid_centers, lay.euclid_radii
    E = np.arange(cx.n_edges) if edges is None else np.asarray(edges, dtype=np.int64)
    a, b = cx.edges[E, 0], cx.edges[E, 1]
    ok = lay.placed[a] & lay.placed[b] & np.isfinite(lay.radii[a]) & np.isfinite(lay.radii[b])
    E, a, b = E[ok], a[ok], b[ok]
    return E, circle_angle(ec[a], er[a], ec[b], er[b])


def interior_edges(lay: PatternLayout) -> np.ndarray:
    """Edges joining two flat (free) vertices."""
    cx = lay.cx
    return np.flatnonzero(lay.flat[cx.edges[:, 0]] & lay.flat[cx.edges[:, 1]])


def _angle_at(center, p, q, hyper):
    if hyper:
        p, q = mobius_inv(center, p), mobius_inv(center, q)
    else:
        p, q = p - center, q - center
    return abs(float(np.angle(q * np.conj(p))))


def vertex_angle_sums(lay: PatternLayout, vertices=None) -> dict:
    """Total angle at each center over the triangles ``(v, neighbour, P_f)``."""
    cx = lay.cx
    hyper = lay.ambient == "disk"
    verts = np.flatnonzero(lay.flat) if vertices is None else vertices
    want = set(int(v) for v in verts)
    sums = {v: 0.0 for v in want}
    for f in lay.face_order:
        cyc = cx.face_vertices[f]
        m = len(cyc)
        P = lay.star_points[f]
        for k, v in enumerate(cyc):
            if v not in want:
                continue
            c = lay.centers[v]
            for w in (cyc[(k + 1) % m], cyc[(k - 1) % m]):
                if w in lay.lines:
                    # the triangle towards a line has angle Theta at the center
                    sums[v] += cx.theta[cx.edge_between(v, w)]
                else:
                    sums[v] += _angle_at(c, lay.centers[w], P, hyper)
    return sums


def star_angle_sums(lay: PatternLayout) -> dict:
    """Total angle at each star point: ``sum (pi - Theta)`` over the face."""
    cx = lay.cx
    out = {}
    for f in lay.face_order:
        cyc = cx.face_vertices[f]
        P = lay.star_points[f]
        dirs = []
        for v in cyc:
            if v in lay.lines:
                dirs.append(float(np.angle(lay.lines[v][0])))
            elif lay.ambient == "disk":
                dirs.append(float(np.angle(mobius_inv(P, lay.centers[v]))))
            else:
                dirs.append(float(np.angle(lay.centers[v] - P)))
        tot = 0.0
        for k in range(len(dirs)):
            tot += (dirs[(k + 1) % len(dirs)] - dirs[k]) % (2 * math.pi)
        out[f] = tot
    return out


def align_rigid(A, B) -> tuple:
    """Best proper rigid motion ``z -> rot * z + shift`` taking points ``A``
    onto ``B``; returns ``(rot, shift, rms)``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    ma, mb = A.mean(), B.mean()
    a, b = A - ma, B - mb
    s = np.sum(np.conj(a) * b)
    rot = s / abs(s) if abs(s) > 0 else 1.0
    shift = mb - rot * ma
    rms = float(np.sqrt(np.mean(np.abs(rot * A + shift - B) ** 2)))
    return rot, shift, rms


# ----------------------------------------------------------------------
# sphere and polyhedron


def stereo_to_sphere(p):
    """Inverse stereographic projection from the north pole onto the unit sphere."""
    p = np.asarray(p, dtype=complex)
    s = np.abs(p) ** 2
    return np.stack([2 * p.real, 2 * p.imag, s - 1.0], axis=-1) / (s + 1.0)[..., None]


def sphere_to_stereo(X):
    X = np.asarray(X, dtype=float)
    return (X[..., 0] + 1j * X[..., 1]) / (1.0 - X[..., 2])


def circle_to_cap(c, rho):
    """Cap ``{X : n.X > h}`` (unit ``n``) whose boundary is the image of the
    plane circle; the disk maps to the cap."""
    c = complex(c)
    k = abs(c) ** 2 - rho * rho
    nvec = np.array([2 * c.real, 2 * c.imag, k - 1.0])
    h = 1.0 + k
    nn = np.linalg.norm(nvec)
    return nvec / nn, h / nn


def line_to_cap(normal, offset):
    """Cap for the half-plane ``{p : <p, normal> > offset}``."""
    nvec = np.array([normal.real, normal.imag, offset])
    nn = np.linalg.norm(nvec)
    return nvec / nn, offset / nn


def cap_to_circle(nvec, h):
    """Inverse of :func:`circle_to_cap`; returns ``("circle", c, rho)`` or
    ``("line", normal, offset)`` when the boundary passes through the pole."""
    nvec = np.asarray(nvec, dtype=float)
    if abs(nvec[2] - h) < 1e-14:
        nrm = complex(nvec[0], nvec[1])
        s = abs(nrm)
        return ("line", nrm / s, h / s)
    lam = 2.0 / (h - nvec[2])     # rescale so the constant matches 1 + k
    c = complex(nvec[0], nvec[1]) * lam / 2.0
    k = h * lam - 1.0
    rho2 = abs(c) ** 2 - k
    return ("circle", c, math.sqrt(max(rho2, 0.0)))


def cap_angle(n1, h1, n2, h2):
    """Exterior intersection angle of two caps (same convention as the plane)."""
    num = h1 * h2 - float(np.dot(n1, n2))
    den = math.sqrt(max(1e-300, (1 - h1 * h1) * (1 - h2 * h2)))
    return math.acos(max(-1.0, min(1.0, num / den)))


@dataclass
class SphereLayout:
    vertex_ids: tuple
    normals: np.ndarray       # (n, 3) unit normals; nan rows for unplaced vertices
    offsets: np.ndarray       # cap is {X : normal . X > offset}
    ideal_points: dict        # face -> point on the sphere
    cx: CellComplex | None = None

    @property
    def cap_radius(self) -> np.ndarray:
        """Spherical angular radius of each cap."""
        return np.arccos(np.clip(self.offsets, -1.0, 1.0))


def stereographic_project(lay: PatternLayout, scale: float = 1.0, shift: complex = 0j) -> SphereLayout:
    """Lift a planar layout to the unit sphere after ``p -> scale * p + shift``.

    Lines become circles through the north pole; the infinity face, if any,
    has its ideal point at the pole.
    """
    if lay.ambient != "plane":
        raise ValueError("stereographic projection needs a planar layout")
    n = len(lay.vertex_ids)
    N = np.full((n, 3), np.nan)
    H = np.full(n, np.nan)
    for v in np.flatnonzero(lay.placed):
        if v in lay.lines:
            nrm, off = lay.lines[v]
            # <p, nrm> > off  becomes  <p', nrm> > scale*off + <shift, nrm>
            off2 = scale * off + (np.conj(nrm) * shift).real
            N[v], H[v] = line_to_cap(nrm, off2)
        else:
            N[v], H[v] = circle_to_cap(scale * lay.centers[v] + shift, scale * lay.radii[v])
    ideal = {f: stereo_to_sphere(scale * P + shift) for f, P in lay.star_points.items()}
    cx = lay.cx
    if cx is not None and cx.infinity_face is not None:
        ideal[cx.infinity_face] = np.array([0.0, 0.0, 1.0])
    return SphereLayout(lay.vertex_ids, N, H, ideal, cx)


def stereographic_unproject(sph: SphereLayout) -> list:
    return [cap_to_circle(sph.normals[v], sph.offsets[v]) if np.isfinite(sph.offsets[v]) else None
            for v in range(len(sph.vertex_ids))]


@dataclass
class PolyhedronData:
    """Half-spaces of an ideal polyhedron in the ball model.

    Face ``v`` lies on the hyperbolic plane over the circle ``{n_v . X = h_v}``;
    the polyhedron is on the side away from the cap.
    """

    vertex_ids: tuple
    normals: np.ndarray
    offsets: np.ndarray
    edges: np.ndarray
    dihedral: np.ndarray
    target: np.ndarray
    ideal_vertices: dict
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "planes": [{"v": _jid(self.vertex_ids[k]), "normal": self.normals[k].tolist(), "offset": float(self.offsets[k])}
                       for k in range(len(self.vertex_ids)) if np.isfinite(self.offsets[k])],
            "edges": [{"u": _jid(self.vertex_ids[a]), "v": _jid(self.vertex_ids[b]), "dihedral": float(d), "theta": float(t)}
                      for (a, b), d, t in zip(self.edges.tolist(), self.dihedral, self.target)],
            "ideal_vertices": {str(f): p.tolist() for f, p in sorted(self.ideal_vertices.items())},
        }


def polyhedron_from_pattern(sph: SphereLayout, near: float = 1e-6) -> PolyhedronData:
    cx = sph.cx
    E, D, T, notes = [], [], [], []
    for e, (a, b) in enumerate(cx.edges.tolist()):
        if not (np.isfinite(sph.offsets[a]) and np.isfinite(sph.offsets[b])):
            continue
        ang = cap_angle(sph.normals[a], sph.offsets[a], sph.normals[b], sph.offsets[b])
        E.append((a, b))
        D.append(ang)
        T.append(cx.theta[e])
        if ang < near or ang > math.pi - near:
            notes.append(f"edge {e} is nearly tangent (angle {ang:.2e}); dihedral poorly conditioned")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning)
    return PolyhedronData(sph.vertex_ids, sph.normals, sph.offsets, np.asarray(E, dtype=np.int64).reshape(-1, 2),
                          np.asarray(D), np.asarray(T), dict(sph.ideal_points), notes)


def rivin_to_pattern(polyhedron: CellComplex, infinity_face: int = 0) -> CellComplex:
    """Circle-pattern complex for an ideal polyhedron given by its
    combinatorics and exterior dihedral angles: the dual complex with angles
    ``pi - angle`` and one face sent to infinity."""
    d = dual_complex(polyhedron)
    d = d.with_theta(math.pi - d.theta)
    return d.with_infinity(face=infinity_face)


# ----------------------------------------------------------------------
# rendering


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _heat(x: float, lo: float, hi: float) -> str:
    t = 0.5 if hi <= lo else (x - lo) / (hi - lo)
    t = min(1.0, max(0.0, t))
    r, b = int(round(255 * t)), int(round(255 * (1 - t)))
    return f"#{r:02x}40{b:02x}"


def render_svg(lay: PatternLayout | None, triangulation: bool = False, heat=None,
               stroke: str = "#1f3a93", width: int = 800) -> str:
    """Deterministic SVG of a layout (coordinates at four decimals).

    ``heat`` is an optional per-vertex value used to fill the circles.
    """
    head = '<?xml version="1.0" encoding="UTF-8"?>\n'
    if lay is None or lay.placed is None or not lay.placed.any():
        return head + ('<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                       'viewBox="0.0000 0.0000 1.0000 1.0000"></svg>\n')
    ec, er = lay.euclid_centers, lay.euclid_radii
    circ = [v for v in np.flatnonzero(lay.placed) if v not in lay.lines]
    if lay.ambient == "disk":
        lo, hi = np.array([-1.05, -1.05]), np.array([1.05, 1.05])
    else:
        xs = np.array([[ec[v].real - er[v], -ec[v].imag - er[v], ec[v].real + er[v], -ec[v].imag + er[v]] for v in circ])
        lo = xs[:, :2].min(axis=0)
        hi = xs[:, 2:].max(axis=0)
        pad = 0.02 * float(max(hi - lo))
        lo, hi = lo - pad, hi + pad
    w, h = hi - lo
    sw = 0.002 * float(max(w, h))
    out = [head, f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{int(round(width * h / w))}" viewBox="{_fmt(lo[0])} {_fmt(lo[1])} {_fmt(w)} {_fmt(h)}">\n']
    if lay.ambient == "disk":
        out.append(f'<circle cx="0.0000" cy="0.0000" r="1.0000" fill="none" stroke="#000000" stroke-width="{_fmt(sw)}"/>\n')
    if heat is not None:
        hv = np.asarray(heat, dtype=float)
        vals = hv[circ][np.isfinite(hv[circ])]
        hlo, hhi = (float(vals.min()), float(vals.max())) if len(vals) else (0.0, 1.0)
    for v in circ:
        fill = "none" if heat is None or not np.isfinite(heat[v]) else _heat(float(heat[v]), hlo, hhi)
        out.append(f'<circle cx="{_fmt(ec[v].real)}" cy="{_fmt(-ec[v].imag)}" r="{_fmt(er[v])}" '
                   f'fill="{fill}" fill-opacity="0.5" stroke="{stroke}" stroke-width="{_fmt(sw)}"/>\n')
    span = 2.0 * float(max(w, h))
    for v, (nrm, off) in sorted(lay.lines.items()):
        p0 = nrm * off
        d = 1j * nrm
        a, b = p0 - span * d, p0 + span * d
        out.append(f'<line x1="{_fmt(a.real)}" y1="{_fmt(-a.imag)}" x2="{_fmt(b.real)}" y2="{_fmt(-b.imag)}" '
                   f'stroke="{stroke}" stroke-width="{_fmt(sw)}"/>\n')
    if triangulation and lay.cx is not None:
        for f in lay.face_order:
            P = lay.star_points[f]
            if lay.ambient == "disk":
                P = complex(P)
            for v in lay.cx.face_vertices[f]:
                if v in lay.lines or not lay.placed[v]:
                    continue
                c = lay.centers[v]
                out.append(f'<line x1="{_fmt(c.real)}" y1="{_fmt(-c.imag)}" x2="{_fmt(P.real)}" y2="{_fmt(-P.imag)}" '
                           f'stroke="#999999" stroke-width="{_fmt(0.5 * sw)}"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def render_decay_plot(trace, path) -> None:
    """Log-log plot of the Dirichlet energy against ``1 + t``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 4))
    ok = trace.energy > 0
    ax.loglog(1.0 + trace.times[ok], trace.energy[ok], lw=1.2, label="E(u(t))")
    t = 1.0 + trace.times[ok]
    if len(t) > 1:
        ax.loglog(t, trace.energy[ok][0] * t[0] / t, "--", lw=0.8, label="slope -1")
    ax.set_xlabel("1 + t")
    ax.set_ylabel("energy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


__all__ = [
    "PatternLayout", "SphereLayout", "PolyhedronData", "NonFlatMetricError", "embed", "realized_angles",
    "interior_edges", "vertex_angle_sums", "star_angle_sums", "align_rigid", "stereographic_project",
    "stereographic_unproject", "polyhedron_from_pattern", "rivin_to_pattern", "render_svg",
    "render_decay_plot", "circle_to_cap", "line_to_cap", "cap_to_circle", "cap_angle", "circle_angle",
    "hyperbolic_circle_to_euclidean", "mobius", "mobius_inv", "stereo_to_sphere", "sphere_to_stereo",
    "find_overlaps",
]

