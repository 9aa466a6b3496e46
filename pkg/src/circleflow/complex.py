"""Weighted cellular decompositions.

A :class:`CellComplex` stores vertices, edges carrying intersection angles,
and faces as oriented cyclic edge lists (half-edge style: the face walks its
boundary in a fixed rotational direction).  An optional infinity mark is
either one distinguished face ``f_inf`` or a set of distinguished vertices
``V_inf`` whose circles become lines after projection.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

TAU_C1 = 1e-9


class ComplexError(ValueError):
    """Structurally invalid complex."""


class UnsupportedComplex(ComplexError):
    pass


class VertexLookupError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class CellComplex:
    vertex_ids: tuple
    edges: np.ndarray
    theta: np.ndarray
    faces: tuple
    infinity_face: int | None = None
    infinity_vertices: frozenset = frozenset()
    positions: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "faces", tuple(tuple(int(e) for e in f) for f in self.faces))
        object.__setattr__(self, "vertex_ids", tuple(self.vertex_ids))
        object.__setattr__(self, "infinity_vertices", frozenset(int(v) for v in self.infinity_vertices))
        edges.setflags(write=False)
        theta.setflags(write=False)
        self._check_structure()

    # -- structure -----------------------------------------------------

    def _check_structure(self):
        n = len(self.vertex_ids)
        if len(set(self.vertex_ids)) != n:
            raise ComplexError("duplicate vertex ids")
        if len(self.theta) != len(self.edges):
            raise ComplexError("one angle per edge required")
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= n):
            raise ComplexError("edge endpoint out of range")
        if np.any(self.edges[:, 0] == self.edges[:, 1]):
            raise ComplexError("edge joins a vertex to itself")
        if np.any(~(self.theta > 0)) or np.any(~(self.theta < math.pi)):
            bad = np.flatnonzero(~((self.theta > 0) & (self.theta < math.pi)))
            raise ComplexError(f"intersection angles outside (0, pi) on edges {bad[:10].tolist()}")
        if self.infinity_face is not None and not (0 <= self.infinity_face < len(self.faces)):
            raise ComplexError("infinity face index out of range")
        if any(not (0 <= v < n) for v in self.infinity_vertices):
            raise ComplexError("infinity vertex out of range")
        # materialise face cycles (raises on malformed faces)
        _ = self.face_vertices
        uses = np.zeros(len(self.edges), dtype=int)
        for f in self.faces:
            for e in f:
                uses[e] += 1
        if np.any(uses > 2):
            raise ComplexError("an edge lies on more than two faces")

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index_of(self, vid) -> int:
        try:
            return self._id_index[vid]
        except KeyError:
            raise VertexLookupError(vid) from None

    @cached_property
    def _id_index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertex_ids)}

    @cached_property
    def face_vertices(self) -> tuple:
        """Vertex cycles of the faces, in the orientation of the edge lists."""
        out = []
        for fi, f in enumerate(self.faces):
            if len(f) < 3:
                raise ComplexError(f"face {fi} has fewer than three edges")
            if len(set(f)) != len(f):
                raise ComplexError(f"face {fi} repeats an edge")
            a, b = self.edges[f[0]]
            n0, n1 = self.edges[f[1]]
            if b in (n0, n1):
                cur = a
            elif a in (n0, n1):
                cur = b
            else:
                raise ComplexError(f"face {fi}: edges {f[0]} and {f[1]} are not consecutive")
            cyc = []
            for e in f:
                x, y = self.edges[e]
                if x == cur:
                    cyc.append(int(x))
                    cur = y
                elif y == cur:
                    cyc.append(int(y))
                    cur = x
                else:
                    raise ComplexError(f"face {fi}: edge {e} is not on the boundary walk")
            if cur != cyc[0]:
                raise ComplexError(f"face {fi}: boundary walk does not close")
            out.append(tuple(cyc))
        return tuple(out)

    @cached_property
    def edge_faces(self) -> tuple:
        ef = [[] for _ in range(self.n_edges)]
        for fi, f in enumerate(self.faces):
            for e in f:
                ef[e].append(fi)
        return tuple(tuple(x) for x in ef)

    @cached_property
    def edge_multiplicity(self) -> np.ndarray:
        """Number of pattern faces on each edge (the infinity face excluded)."""
        m = np.zeros(self.n_edges, dtype=int)
        for fi, f in enumerate(self.faces):
            if fi == self.infinity_face:
                continue
            for e in f:
                m[e] += 1
        m.setflags(write=False)
        return m

    @cached_property
    def edge_lookup(self) -> dict:
        return {(min(a, b), max(a, b)): e for e, (a, b) in enumerate(self.edges.tolist())}

    def edge_between(self, i: int, j: int) -> int:
        return self.edge_lookup[(min(i, j), max(i, j))]

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        n = self.n_vertices
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i))
        return sparse.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))

    def neighbors(self, v: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[v]: a.indptr[v + 1]]

    @cached_property
    def incident_edges(self) -> tuple:
        inc = [[] for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(self.edges.tolist()):
            inc[a].append(e)
            inc[b].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel().astype(int)

    @cached_property
    def interior_vertices(self) -> frozenset:
        """Vertices whose star is closed: every incident edge lies on two faces
        and none of those faces is the infinity face."""
        closed = np.ones(self.n_vertices, dtype=bool)
        m = self.edge_multiplicity
        for e, (a, b) in enumerate(self.edges.tolist()):
            if m[e] != 2:
                closed[a] = closed[b] = False
        for v in self.infinity_set:
            closed[v] = False
        return frozenset(np.flatnonzero(closed).tolist())

    @cached_property
    def infinity_set(self) -> frozenset:
        """Marked vertices at infinity: explicit marks plus the vertices of the
        marked face."""
        out = set(self.infinity_vertices)
        if self.infinity_face is not None:
            out.update(self.face_vertices[self.infinity_face])
        return frozenset(out)

    def is_connected(self, vertices: Iterable[int] | None = None) -> bool:
        if vertices is None:
            if self.n_vertices == 0:
                return True
            ncomp, _ = csgraph.connected_components(self.adjacency, directed=False)
            return ncomp == 1
        vs = np.fromiter(sorted(set(vertices)), dtype=int)
        if len(vs) == 0:
            return True
        sub = self.adjacency[vs][:, vs]
        ncomp, _ = csgraph.connected_components(sub, directed=False)
        return ncomp == 1

    def hop_distance(self, root: int) -> np.ndarray:
        d = csgraph.shortest_path(self.adjacency, unweighted=True, indices=int(root))
        return d

    def with_theta(self, theta) -> "CellComplex":
        theta = np.broadcast_to(np.asarray(theta, dtype=float), (self.n_edges,)).copy()
        return CellComplex(
            self.vertex_ids, self.edges.copy(), theta, self.faces,
            self.infinity_face, self.infinity_vertices, self.positions, self.name,
        )

    def with_infinity(self, face: int | None = None, vertices: Iterable[int] = ()) -> "CellComplex":
        return CellComplex(
            self.vertex_ids, self.edges.copy(), self.theta.copy(), self.faces,
            face, frozenset(vertices), self.positions, self.name,
        )

    def vertices_of_face(self, f: int) -> tuple:
        return self.face_vertices[f]

    def digest(self) -> str:
        """Stable content hash (used in run manifests)."""
        h = hashlib.sha256()
        h.update(json.dumps(to_json(self), sort_keys=True).encode())
        return h.hexdigest()[:16]


# ----------------------------------------------------------------------
# checks and characters


@dataclass(frozen=True)
class C1Violation:
    face: int
    n_edges: int
    angle_sum: float
    expected: float

    @property
    def deviation(self) -> float:
        return self.angle_sum - self.expected


def validate_c1(cx: CellComplex, tol: float = TAU_C1) -> list:
    """Faces whose angle sum differs from ``(m - 2) pi`` by more than ``tol``.

    The infinity face is not a pattern face and is skipped.
    """
    out = []
    for fi, f in enumerate(cx.faces):
        if fi == cx.infinity_face:
            continue
        s = float(np.sum(cx.theta[list(f)]))
        expected = (len(f) - 2) * math.pi
        if abs(s - expected) > tol:
            out.append(C1Violation(fi, len(f), s, expected))
    return out


def validate_rivin_vertex_sums(cx: CellComplex, tol: float = TAU_C1) -> list:
    """Vertices whose incident angles do not sum to ``2 pi`` (coboundary condition)."""
    bad = []
    for v in range(cx.n_vertices):
        s = float(np.sum(cx.theta[list(cx.incident_edges[v])]))
        if abs(s - 2 * math.pi) > tol:
            bad.append((v, s))
    return bad


def character(cx: CellComplex, v, exclude_infinity: bool = False) -> float:
    """Sum of the intersection angles on the edges at ``v``."""
    i = cx.index_of(v)
    total = 0.0
    for e in cx.incident_edges[i]:
        a, b = cx.edges[e]
        other = b if a == i else a
        if exclude_infinity and other in cx.infinity_set:
            continue
        total += cx.theta[e]
    return float(total)


def normalized_character(cx: CellComplex, v, exclude_infinity: bool = False) -> float:
    i = cx.index_of(v)
    d = int(cx.degree[i])
    if exclude_infinity:
        d -= sum(1 for j in cx.neighbors(i) if j in cx.infinity_set)
    if d < 1:
        raise ComplexError(f"vertex {v!r} has no edges")
    return (character(cx, v, exclude_infinity) - 2 * math.pi) / d


def characters(cx: CellComplex) -> np.ndarray:
    return np.bincount(cx.edges.ravel(), weights=np.repeat(cx.theta, 2), minlength=cx.n_vertices)


# ----------------------------------------------------------------------
# exhaustions


@dataclass(frozen=True)
class Exhaustion:
    root: int
    radii: tuple
    levels: tuple = field(repr=False)

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, k) -> frozenset:
        return self.levels[k]


def build_exhaustion(cx: CellComplex, root, radii: Sequence[int]) -> Exhaustion:
    """Nested combinatorial balls ``{v : d(root, v) <= R}`` for each ``R``."""
    r0 = cx.index_of(root)
    radii = tuple(int(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("hop radii must be strictly increasing")
    if radii and radii[0] < 0:
        raise ValueError("hop radii must be non-negative")
    dist = cx.hop_distance(r0)
    levels = tuple(frozenset(np.flatnonzero(dist <= R).tolist()) for R in radii)
    for lo, hi in zip(levels, levels[1:]):
        assert lo <= hi
    return Exhaustion(root=r0, radii=radii, levels=levels)


def induced_subcomplex(cx: CellComplex, vertices: Iterable[int]) -> CellComplex:
    """Sub-complex spanned by ``vertices``: their edges and the faces whose
    boundary lies entirely inside."""
    keep = sorted(set(int(v) for v in vertices))
    remap = {v: k for k, v in enumerate(keep)}
    emask = np.array([a in remap and b in remap for a, b in cx.edges.tolist()], dtype=bool)
    eidx = np.flatnonzero(emask)
    emap = {int(e): k for k, e in enumerate(eidx)}
    new_edges = [(remap[a], remap[b]) for a, b in cx.edges[eidx].tolist()]
    faces, inf_face = [], None
    for fi, f in enumerate(cx.faces):
        if all(e in emap for e in f):
            if fi == cx.infinity_face:
                inf_face = len(faces)
            faces.append([emap[e] for e in f])
    pos = None if cx.positions is None else cx.positions[keep]
    return CellComplex(
        vertex_ids=[cx.vertex_ids[v] for v in keep],
        edges=np.asarray(new_edges, dtype=np.int64).reshape(-1, 2),
        theta=cx.theta[eidx],
        faces=faces,
        infinity_face=inf_face,
        infinity_vertices=frozenset(remap[v] for v in cx.infinity_vertices if v in remap),
        positions=pos,
        name=cx.name,
    )


# ----------------------------------------------------------------------
# orientation and duality


def _half_edges(cx: CellComplex) -> dict:
    """Map directed edge (a, b) -> (face, position in face)."""
    he = {}
    for fi, cyc in enumerate(cx.face_vertices):
        m = len(cyc)
        for k in range(m):
            key = (cyc[k], cyc[(k + 1) % m])
            if key in he:
                raise UnsupportedComplex(
                    f"faces {he[key][0]} and {fi} traverse edge {key} in the same direction"
                )
            he[key] = (fi, k)
    return he


def orient_faces(cx: CellComplex) -> CellComplex:
    """Reverse faces as needed so that every interior edge is walked in
    opposite directions by its two faces."""
    nf = len(cx.faces)
    flip = [None] * nf
    face_adj = [[] for _ in range(nf)]
    for e, fs in enumerate(cx.edge_faces):
        if len(fs) == 2:
            face_adj[fs[0]].append((fs[1], e))
            face_adj[fs[1]].append((fs[0], e))

    def direction(fi, e, flipped):
        cyc = cx.face_vertices[fi]
        k = cx.faces[fi].index(e)
        a, b = cyc[k], cyc[(k + 1) % len(cyc)]
        return (b, a) if flipped else (a, b)

    for start in range(nf):
        if flip[start] is not None:
            continue
        flip[start] = False
        q = deque([start])
        while q:
            f = q.popleft()
            for g, e in face_adj[f]:
                want = direction(f, e, flip[f])
                g_dir = direction(g, e, False)
                need = g_dir == want  # same direction -> g must flip
                if flip[g] is None:
                    flip[g] = need
                    q.append(g)
                elif flip[g] != need:
                    raise UnsupportedComplex("surface is not orientable")
    faces = []
    for fi, f in enumerate(cx.faces):
        if flip[fi]:
            faces.append([f[0]] + list(reversed(f[1:])))
        else:
            faces.append(list(f))
    # reversing [e0, e1, ..., em-1] as [e0, em-1, ..., e1] walks the same cycle backwards
    return CellComplex(
        cx.vertex_ids, cx.edges.copy(), cx.theta.copy(), faces,
        cx.infinity_face, cx.infinity_vertices, cx.positions, cx.name,
    )


def vertex_rotation(cx: CellComplex, v: int, half_edges: dict | None = None) -> list:
    """Edges around a closed vertex in rotational order (following face orientation)."""
    he = half_edges if half_edges is not None else _half_edges(cx)
    nbrs = cx.neighbors(v)
    if len(nbrs) == 0:
        raise UnsupportedComplex(f"isolated vertex {v}")
    w = int(nbrs[0])
    order = []
    seen = set()
    while True:
        e = cx.edge_between(v, w)
        if e in seen:
            break
        seen.add(e)
        order.append(e)
        # the face that walks w -> v is followed around v; its next half-edge leaves v
        if (w, v) not in he:
            raise UnsupportedComplex(f"vertex {v} has an open star")
        fi, k = he[(w, v)]
        cyc = cx.face_vertices[fi]
        w = cyc[(k + 2) % len(cyc)]
    if len(order) != len(nbrs):
        raise UnsupportedComplex(f"star of vertex {v} is not a single disk")
    return order


def dual_complex(cx: CellComplex) -> CellComplex:
    """Poincare dual of a closed surface decomposition.

    Faces become vertices (id = face index), edges map to edges with the
    same angle, vertices become faces.  A marked infinity face must be
    present as an explicit face if the primal is a disk.
    """
    for e, fs in enumerate(cx.edge_faces):
        if len(fs) != 2:
            raise UnsupportedComplex(
                f"edge {e} lies on {len(fs)} face(s); mark the outer boundary as an infinity face"
            )
    he = _half_edges(cx)
    dual_edges = np.array([cx.edge_faces[e] for e in range(cx.n_edges)], dtype=np.int64)
    dual_faces = [vertex_rotation(cx, v, he) for v in range(cx.n_vertices)]
    inf_vertices = frozenset([cx.infinity_face]) if cx.infinity_face is not None else frozenset()
    inf_face = next(iter(cx.infinity_vertices)) if len(cx.infinity_vertices) == 1 else None
    return CellComplex(
        vertex_ids=tuple(range(len(cx.faces))),
        edges=dual_edges,
        theta=cx.theta.copy(),
        faces=dual_faces,
        infinity_face=inf_face,
        infinity_vertices=inf_vertices,
        name=f"dual({cx.name})" if cx.name else "dual",
    )


# ----------------------------------------------------------------------
# JSON


def to_json(cx: CellComplex) -> dict:
    ids = list(cx.vertex_ids)
    doc = {
        "vertices": ids,
        "edges": [
            {"u": ids[a], "v": ids[b], "theta": float(t)}
            for (a, b), t in zip(cx.edges.tolist(), cx.theta.tolist())
        ],
        "faces": [list(f) for f in cx.faces],
    }
    if cx.infinity_face is not None:
        doc["infinity"] = {"face": int(cx.infinity_face)}
    elif cx.infinity_vertices:
        doc["infinity"] = {"vertices": [ids[v] for v in sorted(cx.infinity_vertices)]}
    if cx.positions is not None:
        doc["positions"] = np.asarray(cx.positions, dtype=float).tolist()
    if cx.name:
        doc["name"] = cx.name
    return doc


def _json_id(v):
    return tuple(v) if isinstance(v, list) else v


def from_json(doc: dict) -> CellComplex:
    try:
        ids = [_json_id(v) for v in doc["vertices"]]
        index = {v: i for i, v in enumerate(ids)}
        edges = [(index[_json_id(e["u"])], index[_json_id(e["v"])]) for e in doc["edges"]]
        theta = [float(e["theta"]) for e in doc["edges"]]
        faces = [list(map(int, f)) for f in doc.get("faces", [])]
    except KeyError as exc:
        raise ComplexError(f"malformed complex document: missing {exc}") from None
    inf = doc.get("infinity") or {}
    face = inf.get("face")
    verts = frozenset(index[_json_id(v)] for v in inf.get("vertices", []))
    pos = doc.get("positions")
    return CellComplex(
        vertex_ids=ids,
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        theta=np.asarray(theta, dtype=float),
        faces=faces,
        infinity_face=None if face is None else int(face),
        infinity_vertices=verts,
        positions=None if pos is None else np.asarray(pos, dtype=float),
        name=doc.get("name", ""),
    )


def load(path) -> CellComplex:
    with open(path) as fh:
        return from_json(json.load(fh))


def dump(cx: CellComplex, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json(cx), fh, indent=1)
