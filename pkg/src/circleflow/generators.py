"""Finite pieces of periodic and polyhedral decompositions.

Infinite lattices are never stored; a generator materialises the finite
ball that a computation asks for.  ``regular_tiling`` builds any ``{p, q}``
tiling (``p``-gon faces, ``q`` at each vertex) by reflecting a regular
polygon across its edges in the sphere, plane or hyperbolic plane; the
reference coordinates are kept only to identify coincident vertices.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .complex import CellComplex, ComplexError, orient_faces


def _theta_array(theta, n):
    return np.full(n, float(theta)) if np.isscalar(theta) else np.asarray(theta, float)


def _assemble(vertex_cycles, n_vertices, theta, positions=None, name="", ids=None):
    """Build a complex from oriented vertex cycles."""
    edge_index: dict = {}
    edges = []
    faces = []
    for cyc in vertex_cycles:
        fe = []
        m = len(cyc)
        for k in range(m):
            a, b = cyc[k], cyc[(k + 1) % m]
            key = (min(a, b), max(a, b))
            if key not in edge_index:
                edge_index[key] = len(edges)
                edges.append(key)
            fe.append(edge_index[key])
        faces.append(fe)
    th = _theta_array(theta, len(edges))
    return CellComplex(
        vertex_ids=tuple(range(n_vertices)) if ids is None else ids,
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        theta=th,
        faces=faces,
        positions=positions,
        name=name,
    )


# ----------------------------------------------------------------------
# square lattice


def z2_lattice(radius: int, theta: float = math.pi / 2) -> CellComplex:
    """The square lattice on the box ``|m|, |n| <= radius``.

    Vertex ``k`` sits at ``positions[k] = (m, n)``.
    """
    R = int(radius)
    if R < 1:
        raise ValueError("radius must be at least 1")
    side = 2 * R + 1
    coords = np.array([(m, n) for m in range(-R, R + 1) for n in range(-R, R + 1)], dtype=float)

    def vid(m, n):
        return (m + R) * side + (n + R)

    cycles = []
    for m in range(-R, R):
        for n in range(-R, R):
            cycles.append([vid(m, n), vid(m + 1, n), vid(m + 1, n + 1), vid(m, n + 1)])
    return _assemble(cycles, side * side, theta, positions=coords, name=f"z2_lattice(R={R})")


def z2_torus(n: int, theta: float = math.pi / 2) -> CellComplex:
    """``n x n`` periodic square lattice: a closed, self-dual fixture."""
    if n < 3:
        raise ValueError("need n >= 3 so that faces share at most one edge")
    coords = np.array([(a, b) for a in range(n) for b in range(n)], dtype=float)

    def vid(a, b):
        return (a % n) * n + (b % n)

    cycles = [[vid(a, b), vid(a + 1, b), vid(a + 1, b + 1), vid(a, b + 1)]
              for a in range(n) for b in range(n)]
    return _assemble(cycles, n * n, theta, positions=coords, name=f"z2_torus(n={n})")


def z2_vertex(cx: CellComplex, m: int, n: int) -> int:
    """Index of lattice point ``(m, n)`` in a :func:`z2_lattice` complex."""
    hit = np.flatnonzero((cx.positions[:, 0] == m) & (cx.positions[:, 1] == n))
    if len(hit) != 1:
        raise KeyError((m, n))
    return int(hit[0])


# ----------------------------------------------------------------------
# regular {p, q} tilings by reflection


class _PointIndex:
    """Spatial hash for deduplicating points up to a relative tolerance.

    Hyperboloid coordinates grow exponentially with distance, so points are
    bucketed by magnitude class ``k = floor(log2 |x|)`` with cell size
    ``cell * 2^k``.
    """

    def __init__(self, cell: float):
        self.cell = cell
        self.grid: dict = {}
        self.points: list = []

    @staticmethod
    def _cls(x):
        return max(0, int(math.floor(math.log2(max(1.0, float(np.max(np.abs(x))))))))

    def _key(self, x, k):
        size = self.cell * 2.0 ** k
        return (k,) + tuple(int(math.floor(c / size)) for c in x)

    def find(self, x, tol):
        x = np.asarray(x, dtype=float)
        bound = tol * max(1.0, float(np.max(np.abs(x))))
        k0 = self._cls(x)
        for k in (k0 - 1, k0, k0 + 1):
            if k < 0:
                continue
            key = self._key(x, k)
            for off in np.ndindex(*(3,) * len(x)):
                cell = (k,) + tuple(c + o - 1 for c, o in zip(key[1:], off))
                for idx in self.grid.get(cell, ()):
                    if np.max(np.abs(self.points[idx] - x)) <= bound:
                        return idx
        return None

    def add(self, x):
        x = np.array(x, dtype=float)
        idx = len(self.points)
        self.points.append(x)
        self.grid.setdefault(self._key(x, self._cls(x)), []).append(idx)
        return idx


def _tiling_kind(p, q):
    s = (p - 2) * (q - 2)
    return "sphere" if s < 4 else ("plane" if s == 4 else "hyperbolic")


def _mink(x, y, sign):
    return x[0] * y[0] + x[1] * y[1] + sign * x[2] * y[2]


def _reflector(kind):
    if kind == "plane":
        def reflect(x, a, b):
            d = b - a
            d = d / np.linalg.norm(d)
            w = x - a
            return a + 2 * np.dot(w, d) * d - w
        return reflect
    sign = 1.0 if kind == "sphere" else -1.0

    def reflect(x, a, b):
        # normal of the plane through the origin, a and b w.r.t. the form diag(1, 1, sign)
        n = np.cross(a, b)
        n = np.array([n[0], n[1], sign * n[2]])
        return x - 2 * _mink(x, n, sign) / _mink(n, n, sign) * n
    return reflect


def _central_polygon(p, q, kind):
    """Vertices of the regular p-gon with interior angle 2 pi / q, centred at the origin/pole."""
    ang = [2 * math.pi * k / p for k in range(p)]
    if kind == "plane":
        return [np.array([math.cos(a), math.sin(a)]) for a in ang]
    # circumradius R: cos(pi/p) ... spherical: cos R = cot(pi/p) cot(pi/q); hyperbolic: cosh R = same
    c = 1.0 / (math.tan(math.pi / p) * math.tan(math.pi / q))
    if kind == "sphere":
        R = math.acos(c)
        return [np.array([math.sin(R) * math.cos(a), math.sin(R) * math.sin(a), math.cos(R)]) for a in ang]
    R = math.acosh(c)
    return [np.array([math.sinh(R) * math.cos(a), math.sinh(R) * math.sin(a), math.cosh(R)]) for a in ang]


def _ring_tiling(p: int, q: int, depth: int, center: str = "vertex"):
    """Vertex cycles of a hyperbolic ``{p, q}`` tiling, ``p, q >= 4``, grown
    ring by ring without coordinates around a central face or vertex.

    The boundary of the current disk is a cycle of vertices, each with the
    number of faces already at it.  A new ring attaches ``q - f`` faces at
    every boundary vertex: one on each boundary edge and the rest fanning out
    between the new edges.  With ``p, q >= 4`` every boundary vertex has at
    most ``q - 2`` faces, so the new faces never need to be glued to each
    other except along the new edges.
    """
    n = 0

    def fresh(k):
        nonlocal n
        out = list(range(n, n + k))
        n += k
        return out

    if center == "face":
        cycles = [fresh(p)]
        boundary = [(v, 1) for v in cycles[0]]
    elif center == "vertex":
        # the star of vertex 0: q faces fanning around it
        c = fresh(1)[0]
        spokes = fresh(q)
        cycles, boundary = [], []
        for k in range(q):
            g = fresh(p - 3)
            cycles.append([c, spokes[k], *g, spokes[(k + 1) % q]])
            boundary += [(spokes[k], 2)] + [(x, 1) for x in g]
    else:
        raise ValueError("center must be 'vertex' or 'face'")

    for _ in range(depth):
        spokes = []
        for v, f in boundary:
            m = q - f - 1
            if m < 1:
                raise ComplexError("boundary vertex already saturated")
            spokes.append(fresh(m))
        new_boundary = []
        for i, (v, f) in enumerate(boundary):
            w = spokes[i]
            for k in range(len(w) - 1):
                g = fresh(p - 3)
                cycles.append([v, w[k], *g, w[k + 1]])
                new_boundary += [(w[k], 2)] + [(x, 1) for x in g]
            v_next = boundary[(i + 1) % len(boundary)][0]
            w_next = spokes[(i + 1) % len(boundary)]
            g = fresh(p - 4)
            cycles.append([v, w[-1], *g, w_next[0], v_next])
            new_boundary += [(w[-1], 2)] + [(x, 1) for x in g]
        boundary = new_boundary
    return cycles, n


def regular_tiling(p: int, q: int, depth: int | None = None, theta: float | None = None,
                   max_faces: int = 200000, center: str = "face") -> CellComplex:
    """Faces of the ``{p, q}`` tiling grown from a central face.

    Each round adds every face touching a vertex of the previous round, so
    after ``depth`` rounds all vertices of the first ``depth - 1`` rounds
    have complete stars.

    Spherical tilings close up and ``depth`` may be ``None``.  The default
    angle is the one satisfying the face condition, ``(p - 2) pi / p``.
    Hyperbolic tilings with ``p, q >= 4`` are built combinatorially and carry
    no reference positions; they may be grown around a face or around vertex
    0 (``center="vertex"``).  The others are built by reflection, which loses
    accuracy far from the centre.
    """
    if p < 3 or q < 3:
        raise ValueError("need p, q >= 3")
    kind = _tiling_kind(p, q)
    if depth is None and kind != "sphere":
        raise ValueError("an infinite tiling needs a finite depth")
    if theta is None:
        theta = (p - 2) * math.pi / p
    if kind == "hyperbolic" and p >= 4 and q >= 4:
        cycles, nv = _ring_tiling(p, q, int(depth), center)
        if len(cycles) > max_faces:
            raise ComplexError("tiling exceeds max_faces; lower the depth")
        cx = _assemble(cycles, nv, theta, name=f"{{{p},{q}}}(depth={depth})")
        return orient_faces(cx)
    reflect = _reflector(kind)
    index = _PointIndex(cell=0.25 if kind != "hyperbolic" else 0.05)
    face_centers = _PointIndex(cell=0.25 if kind != "hyperbolic" else 0.05)
    # accumulated reflection error grows with distance; distinct vertices are
    # separated by O(1) relative to their magnitude
    tol = 1e-7 if kind != "hyperbolic" else 1e-4

    def vid(x):
        i = index.find(x, tol)
        return index.add(x) if i is None else i

    poly = _central_polygon(p, q, kind)
    center = np.zeros(2) if kind == "plane" else np.array([0.0, 0.0, 1.0])
    cycles = [[vid(x) for x in poly]]
    face_centers.add(center)
    layer = [(poly, center)]
    level = 0
    while layer and (depth is None or level < depth):
        nxt = []
        for pts, c in layer:
            for k in range(p):
                # walk once around the vertex pts[k]
                cur, cc, kk = pts, c, k
                for _ in range(q - 1):
                    a, b = cur[kk], cur[(kk + 1) % p]
                    c2 = reflect(cc, a, b)
                    new = [reflect(x, a, b) for x in cur][::-1]  # reflection reverses orientation
                    if face_centers.find(c2, tol) is None:
                        face_centers.add(c2)
                        ids = [vid(x) for x in new]
                        # snap to registered coordinates so error does not compound
                        new = [index.points[i] for i in ids]
                        cycles.append(ids)
                        nxt.append((new, c2))
                        if len(cycles) > max_faces:
                            raise ComplexError("tiling exceeds max_faces; lower the depth")
                    # the pivot now sits at p-1-kk and the edge just crossed ends there;
                    # leave by the edge that starts there
                    kk = p - 1 - kk
                    cur, cc = new, c2
        layer = nxt
        level += 1
    pos = np.array(index.points)
    names = {(4, 3): "cube", (3, 4): "octahedron", (5, 3): "dodecahedron", (3, 3): "tetrahedron",
             (3, 5): "icosahedron"}
    name = names.get((p, q), f"{{{p},{q}}}") + ("" if depth is None else f"(depth={depth})")
    cx = _assemble(cycles, len(pos), theta, positions=pos, name=name)
    return orient_faces(cx)


def cube(theta: float | None = None) -> CellComplex:
    return regular_tiling(4, 3, None, math.pi / 2 if theta is None else theta)


def octahedron(theta: float | None = None) -> CellComplex:
    return regular_tiling(3, 4, None, math.pi / 3 if theta is None else theta)


def dodecahedron(theta: float | None = None) -> CellComplex:
    return regular_tiling(5, 3, None, 3 * math.pi / 5 if theta is None else theta)


def hex_lattice(depth: int = 2, theta: float = 2 * math.pi / 3, center: str = "vertex") -> CellComplex:
    """Hexagonal faces, six at every vertex: the ``{6, 6}`` tiling of the
    hyperbolic plane, grown in rings around vertex 0 by default.  With
    ``theta = 2 pi / 3`` each hexagon satisfies the face condition and every
    vertex has normalized character ``pi / 3``."""
    return regular_tiling(6, 6, depth, theta, center=center)


GENERATORS: dict[str, Callable[..., CellComplex]] = {
    "z2_lattice": z2_lattice,
    "hex_lattice": hex_lattice,
    "regular_tiling": regular_tiling,
    "z2_torus": z2_torus,
    "cube": cube,
    "octahedron": octahedron,
    "dodecahedron": dodecahedron,
}


def generate(name: str, **params) -> CellComplex:
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None
    return fn(**params)
