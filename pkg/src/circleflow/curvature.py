"""Vertex curvature of a circle pattern and its linearization.

Each edge ``[i, j]`` together with the star point of an adjacent face forms
one triangle; the angle of that triangle at center ``i`` is ``theta_ij``.  An
edge lying on two pattern faces contributes two such triangles to each end,
so at a vertex with a closed star

    K_i = 2 pi - sum_j 2 theta_ij.

Edges to vertices at infinity carry no triangle and are left out of the sum;
their effect enters through the prescribed target ``K_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import geometry as geo
from .complex import CellComplex, ComplexError
from .geometry import Background, DomainError

TWO_PI = 2.0 * math.pi


class IncompleteMetricError(ValueError):
    """A vertex needed for a curvature evaluation has no metric value."""


@dataclass(frozen=True)
class PackingMetric:
    """Per-vertex log-coordinates tagged with a background geometry.

    Vertices at infinity may carry ``nan``; every other entry must be finite
    (and negative in the hyperbolic background).
    """

    background: Background
    u: np.ndarray

    def __post_init__(self):
        bg = Background.parse(self.background)
        u = np.array(self.u, dtype=float).reshape(-1)
        u.setflags(write=False)
        object.__setattr__(self, "background", bg)
        object.__setattr__(self, "u", u)
        fin = u[np.isfinite(u)]
        if bg is Background.HYPERBOLIC and np.any(fin >= 0):
            raise DomainError("hyperbolic log-coordinates must be negative")
        if np.any(np.isinf(u)):
            raise DomainError("log-coordinates must be finite or nan")

    @classmethod
    def from_radii(cls, bg, r) -> "PackingMetric":
        r = np.asarray(r, dtype=float)
        u = np.full(r.shape, np.nan)
        ok = np.isfinite(r)
        u[ok] = geo.r_to_u(bg, r[ok])
        return cls(bg, u)

    @classmethod
    def constant(cls, bg, n: int, r: float) -> "PackingMetric":
        return cls.from_radii(bg, np.full(n, float(r)))

    @property
    def r(self) -> np.ndarray:
        out = np.full(self.u.shape, np.nan)
        ok = np.isfinite(self.u)
        out[ok] = geo.u_to_r(self.background, self.u[ok])
        return out

    def with_u(self, u) -> "PackingMetric":
        return PackingMetric(self.background, u)


@dataclass(frozen=True)
class CurvatureField:
    K: np.ndarray
    K_hat: np.ndarray | None = None

    @property
    def residual(self) -> np.ndarray:
        return self.K if self.K_hat is None else self.K - self.K_hat

    def sup_residual(self, vertices=None) -> float:
        res = self.residual if vertices is None else self.residual[np.asarray(vertices, dtype=int)]
        return float(np.max(np.abs(res))) if len(res) else 0.0


# ----------------------------------------------------------------------
# assembly


def active_edges(cx: CellComplex) -> np.ndarray:
    """Edges that carry triangles: on some pattern face and not touching infinity."""
    mult = cx.edge_multiplicity
    ok = mult > 0
    if cx.infinity_set:
        inf = np.zeros(cx.n_vertices, dtype=bool)
        inf[list(cx.infinity_set)] = True
        ok &= ~inf[cx.edges[:, 0]] & ~inf[cx.edges[:, 1]]
    return np.flatnonzero(ok)


@dataclass
class _EdgeCache:
    """Per-complex arrays reused across curvature evaluations."""

    idx: np.ndarray
    i: np.ndarray
    j: np.ndarray
    theta: np.ndarray
    mult: np.ndarray
    n: int


_CACHE_ATTR = "_circleflow_edge_cache"


def _edges(cx: CellComplex) -> _EdgeCache:
    c = cx.__dict__.get(_CACHE_ATTR)
    if c is None:
        idx = active_edges(cx)
        c = _EdgeCache(idx, cx.edges[idx, 0], cx.edges[idx, 1], cx.theta[idx],
                       cx.edge_multiplicity[idx].astype(float), cx.n_vertices)
        object.__setattr__(cx, _CACHE_ATTR, c)
    return c


def _radii(metric: PackingMetric, c: _EdgeCache):
    r = metric.r
    if len(r) != c.n:
        raise IncompleteMetricError(f"metric has {len(r)} entries for {c.n} vertices")
    ri, rj = r[c.i], r[c.j]
    bad = ~np.isfinite(ri) | ~np.isfinite(rj)
    if np.any(bad):
        e = int(c.idx[np.argmax(bad)])
        raise IncompleteMetricError(f"edge {e} has an endpoint without a metric value")
    return ri, rj


def half_angles(cx: CellComplex, metric: PackingMetric):
    """``(theta_ij, theta_ji)`` on the active edges, in :func:`active_edges` order."""
    c = _edges(cx)
    ri, rj = _radii(metric, c)
    bg = metric.background
    return geo.half_angle(bg, ri, rj, c.theta), geo.half_angle(bg, rj, ri, c.theta)


def cone_angles(cx: CellComplex, metric: PackingMetric) -> np.ndarray:
    c = _edges(cx)
    if len(c.idx) == 0:
        return np.zeros(c.n)
    tij, tji = half_angles(cx, metric)
    return (np.bincount(c.i, weights=c.mult * tij, minlength=c.n)
            + np.bincount(c.j, weights=c.mult * tji, minlength=c.n))


def curvature(cx: CellComplex, metric: PackingMetric) -> np.ndarray:
    """``K`` at every vertex (entries at infinity vertices are meaningless)."""
    return TWO_PI - cone_angles(cx, metric)


def vertex_curvature(cx: CellComplex, metric: PackingMetric, v) -> float:
    i = cx.index_of(v)
    c = _edges(cx)
    sel = (c.i == i) | (c.j == i)
    r = metric.r
    other = np.where(c.i[sel] == i, c.j[sel], c.i[sel])
    if not np.isfinite(r[i]) or np.any(~np.isfinite(r[other])):
        raise IncompleteMetricError(f"vertex {v!r} or a neighbour has no metric value")
    th = geo.half_angle(metric.background, r[i], r[other], c.theta[sel]) if len(other) else np.zeros(0)
    return float(TWO_PI - np.sum(c.mult[sel] * th))


def curvature_field(cx: CellComplex, metric: PackingMetric, K_hat=None) -> CurvatureField:
    return CurvatureField(curvature(cx, metric), None if K_hat is None else np.asarray(K_hat, float))


def prescribed_curvature_hat(cx: CellComplex) -> np.ndarray:
    """Target curvature: twice the angle of each edge to a vertex at infinity,
    summed per vertex; zero away from infinity."""
    inf = cx.infinity_set
    if not inf:
        raise ComplexError("prescribed curvature needs vertices or a face at infinity")
    mask = np.zeros(cx.n_vertices, dtype=bool)
    mask[list(inf)] = True
    a, b = cx.edges[:, 0], cx.edges[:, 1]
    to_inf_b = mask[b] & ~mask[a]
    to_inf_a = mask[a] & ~mask[b]
    return (np.bincount(a[to_inf_b], weights=2 * cx.theta[to_inf_b], minlength=cx.n_vertices)
            + np.bincount(b[to_inf_a], weights=2 * cx.theta[to_inf_a], minlength=cx.n_vertices))


# ----------------------------------------------------------------------
# dual formulation


def boundary_faces(cx: CellComplex) -> frozenset:
    """Pattern faces sharing an edge with the infinity face."""
    if cx.infinity_face is None:
        return frozenset()
    out = set()
    for e in cx.faces[cx.infinity_face]:
        out.update(f for f in cx.edge_faces[e] if f != cx.infinity_face)
    return frozenset(out)


def dual_face_curvature(cx: CellComplex, r_faces, f: int) -> float:
    """Face-based curvature with per-face radii ``r_faces``.

    Sums ``alpha * arcsin(r' sin T / sqrt(r^2 + r'^2 - 2 cos T r r'))`` over
    faces across each edge, with ``alpha = 1`` when both faces touch the
    infinity face and 2 otherwise.  The chord uses ``-2 cos T``, as the
    dual configuration is measured through the supplementary angle.
    """
    r = np.asarray(r_faces, dtype=float)
    if f == cx.infinity_face:
        raise ComplexError("the infinity face carries no curvature")
    bnd = boundary_faces(cx)
    total = 0.0
    for e in cx.faces[f]:
        for g in cx.edge_faces[e]:
            if g == f or g == cx.infinity_face:
                continue
            if not (r[f] > 0 and r[g] > 0):
                raise IncompleteMetricError(f"face {g} has no positive radius")
            t = cx.theta[e]
            chord = math.sqrt(r[f] ** 2 + r[g] ** 2 - 2.0 * math.cos(t) * r[f] * r[g])
            alpha = 1.0 if (f in bnd and g in bnd) else 2.0
            total += alpha * math.asin(min(1.0, r[g] * math.sin(t) / chord))
    return total


# ----------------------------------------------------------------------
# linearization


@dataclass(frozen=True)
class JacobianWeights:
    """``omega`` on the active edges and ``g`` per vertex, with
    ``dK/dt = Delta_omega K + g K`` along the flow ``du/dt = -K``."""

    i: np.ndarray
    j: np.ndarray
    omega: np.ndarray
    g: np.ndarray

    def matrix(self, n: int | None = None) -> sparse.csr_matrix:
        """The weighted graph Laplacian ``Delta_omega`` (rows sum to zero)."""
        n = len(self.g) if n is None else n
        w = sparse.coo_matrix((np.r_[self.omega, self.omega], (np.r_[self.i, self.j], np.r_[self.j, self.i])),
                              shape=(n, n)).tocsr()
        return (w - sparse.diags(np.asarray(w.sum(axis=1)).ravel())).tocsr()


def _partials(cx: CellComplex, metric: PackingMetric):
    c = _edges(cx)
    ri, rj = _radii(metric, c)
    bg = metric.background
    a_ij, b_ij = geo.d_theta_d_u(bg, ri, rj, c.theta)   # d theta_ij / d(u_i, u_j)
    a_ji, b_ji = geo.d_theta_d_u(bg, rj, ri, c.theta)   # d theta_ji / d(u_j, u_i)
    return c, a_ij, b_ij, a_ji, b_ji


def curvature_jacobian(cx: CellComplex, metric: PackingMetric) -> sparse.csr_matrix:
    """``dK_i/du_j`` as a sparse matrix over all vertices."""
    c, a_ij, b_ij, a_ji, b_ji = _partials(cx, metric)
    m = c.mult
    diag = (np.bincount(c.i, weights=-m * a_ij, minlength=c.n)
            + np.bincount(c.j, weights=-m * a_ji, minlength=c.n))
    rows = np.r_[c.i, c.j, np.arange(c.n)]
    cols = np.r_[c.j, c.i, np.arange(c.n)]
    vals = np.r_[-m * b_ij, -m * b_ji, diag]
    return sparse.coo_matrix((vals, (rows, cols)), shape=(c.n, c.n)).tocsr()


def flow_jacobian_weights(cx: CellComplex, metric: PackingMetric) -> JacobianWeights:
    c, a_ij, b_ij, a_ji, b_ji = _partials(cx, metric)
    m = c.mult
    # the two cross partials agree; average them to keep omega exactly symmetric
    omega = m * 0.5 * (b_ij + b_ji)
    g = (np.bincount(c.i, weights=m * (a_ij + b_ij), minlength=c.n)
         + np.bincount(c.j, weights=m * (a_ji + b_ji), minlength=c.n))
    return JacobianWeights(c.i.copy(), c.j.copy(), omega, g)
