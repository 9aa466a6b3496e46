"""Finitely supported fields on the square lattice and their calculus.

A :class:`LatticeField` is a dense array over an explicit box; everything
outside the box is zero.  Operators return fields on the box they need
(a difference grows the box by one in every direction), so identities that
hold on all of Z^2 hold here exactly, up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse.linalg import expm_multiply
from scipy import sparse

DIFFERENCES = ("D1", "D2", "D3", "D4")
# (axis, step): D1 forward in m, D2 forward in n, D3 backward in m, D4 backward in n
_SHIFT = {"D1": (0, 1), "D2": (1, 1), "D3": (0, -1), "D4": (1, -1)}


@dataclass(frozen=True)
class LatticeField:
    """``values[a, b]`` is the value at ``(origin[0] + a, origin[1] + b)``."""

    values: np.ndarray
    origin: tuple = (0, 0)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("lattice values must be a 2-D array")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @classmethod
    def zeros(cls, m_range, n_range) -> "LatticeField":
        (m0, m1), (n0, n1) = m_range, n_range
        return cls(np.zeros((m1 - m0 + 1, n1 - n0 + 1)), (m0, n0))

    @classmethod
    def delta(cls, m: int = 0, n: int = 0) -> "LatticeField":
        return cls(np.ones((1, 1)), (m, n))

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeField":
        if not d:
            return cls(np.zeros((1, 1)))
        ms = [k[0] for k in d]
        ns = [k[1] for k in d]
        f = cls.zeros((min(ms), max(ms)), (min(ns), max(ns)))
        for (m, n), x in d.items():
            f.values[m - f.origin[0], n - f.origin[1]] = x
        return f

    @property
    def box(self) -> tuple:
        """``((m_min, m_max), (n_min, n_max))``."""
        a, b = self.values.shape
        return ((self.origin[0], self.origin[0] + a - 1), (self.origin[1], self.origin[1] + b - 1))

    def __getitem__(self, mn) -> float:
        a, b = mn[0] - self.origin[0], mn[1] - self.origin[1]
        if 0 <= a < self.values.shape[0] and 0 <= b < self.values.shape[1]:
            return float(self.values[a, b])
        return 0.0

    def to_dict(self) -> dict:
        nz = np.argwhere(self.values != 0)
        return {(int(a) + self.origin[0], int(b) + self.origin[1]): float(self.values[a, b]) for a, b in nz}

    def pad(self, k: int = 1) -> "LatticeField":
        return LatticeField(np.pad(self.values, k), (self.origin[0] - k, self.origin[1] - k))

    def on_box(self, box) -> "LatticeField":
        """The same field written over ``box`` (which must contain the support)."""
        (m0, m1), (n0, n1) = box
        out = np.zeros((m1 - m0 + 1, n1 - n0 + 1))
        (a0, a1), (b0, b1) = self.box
        sa, sb = max(a0, m0), max(b0, n0)
        ea, eb = min(a1, m1), min(b1, n1)
        kept = np.zeros(self.values.shape, dtype=bool)
        if sa <= ea and sb <= eb:
            out[sa - m0:ea - m0 + 1, sb - n0:eb - n0 + 1] = \
                self.values[sa - a0:ea - a0 + 1, sb - b0:eb - b0 + 1]
            kept[sa - a0:ea - a0 + 1, sb - b0:eb - b0 + 1] = True
        if np.any(self.values[~kept] != 0):
            raise ValueError("box does not contain the support")
        return LatticeField(out, (m0, n0))

    def __add__(self, other):
        f, g = align(self, other)
        return LatticeField(f.values + g.values, f.origin)

    def __sub__(self, other):
        f, g = align(self, other)
        return LatticeField(f.values - g.values, f.origin)

    def __mul__(self, c: float):
        return LatticeField(self.values * c, self.origin)

    __rmul__ = __mul__

    def norm(self, p=2) -> float:
        return _lp(self.values, p)


def align(f: LatticeField, g: LatticeField):
    (a0, a1), (b0, b1) = f.box
    (c0, c1), (d0, d1) = g.box
    box = ((min(a0, c0), max(a1, c1)), (min(b0, d0), max(b1, d1)))
    return f.on_box(box), g.on_box(box)


def _lp(v, p) -> float:
    v = np.abs(np.asarray(v, dtype=float))
    if v.size == 0:
        return 0.0
    if p == np.inf or p == "inf":
        return float(v.max())
    return float(np.sum(v ** p) ** (1.0 / p))


def inner(f: LatticeField, g: LatticeField) -> float:
    f, g = align(f, g)
    return float(np.sum(f.values * g.values))


# ----------------------------------------------------------------------
# operators


def difference(field: LatticeField, which: str) -> LatticeField:
    """``D1 u(m, n) = u(m+1, n) - u(m, n)``, ``D3 u(m, n) = u(m-1, n) - u(m, n)``,
    and likewise ``D2``, ``D4`` in ``n``."""
    try:
        axis, step = _SHIFT[which]
    except KeyError:
        raise ValueError(f"unknown difference {which!r}; use one of {DIFFERENCES}") from None
    P = field.pad(1)
    # the zero border makes the wrap-around of roll harmless
    return LatticeField(np.roll(P.values, -step, axis=axis) - P.values, P.origin)


def laplacian(field: LatticeField) -> LatticeField:
    P = field.pad(1)
    v = P.values
    out = (np.roll(v, 1, 0) + np.roll(v, -1, 0) + np.roll(v, 1, 1) + np.roll(v, -1, 1)) - 4.0 * v
    return LatticeField(out, P.origin)


class Norms(NamedTuple):
    n0: float
    n1: float
    n2: float


def norms(field: LatticeField, p=2) -> Norms:
    """``(N_{0,p}, N_{1,p}, N_{2,p})``: l^p norms of the field, of its four
    first differences and of its sixteen second differences."""
    firsts = [difference(field, d) for d in DIFFERENCES]
    seconds = [difference(f, d) for f in firsts for d in DIFFERENCES]
    if p == np.inf or p == "inf":
        return Norms(_lp(field.values, np.inf), max(_lp(f.values, np.inf) for f in firsts),
                     max(_lp(f.values, np.inf) for f in seconds))
    n1 = sum(_lp(f.values, p) ** p for f in firsts) ** (1.0 / p)
    n2 = sum(_lp(f.values, p) ** p for f in seconds) ** (1.0 / p)
    return Norms(_lp(field.values, p), float(n1), float(n2))


def edge_sum(f: LatticeField, g: LatticeField) -> float:
    """``sum over lattice edges [i, j] of (f_i - f_j)(g_i - g_j)``."""
    f, g = align(f.pad(1), g.pad(1))
    F, G = f.values, g.values
    return float(np.sum(np.diff(F, axis=0) * np.diff(G, axis=0)) + np.sum(np.diff(F, axis=1) * np.diff(G, axis=1)))


def dirichlet_energy(field: LatticeField) -> float:
    return edge_sum(field, field)


def sobolev_constant(p) -> float:
    """``C_1 = 2^p * 4`` from the triangle inequality ``|D_i u|_p <= 2 |u|_p``."""
    return 4.0 * 2.0 ** p


def green_identities_check(f: LatticeField, g: LatticeField | None = None) -> dict:
    """Residuals of the Green formula and the norm identities.

    ``green``:       (f, Lap g) + sum_E (f_i - f_j)(g_i - g_j)
    ``green_diff``:  (f, Lap g) + 1/2 sum_i (D_i f, D_i g)
    ``energy``:      N_{1,2}(f)^2 - 2 sum_E (f_i - f_j)^2
    ``stokes``:      (f, Lap f) + 1/2 N_{1,2}(f)^2
    ``laplace_norm``: N_{0,2}(Lap f) - 1/2 N_{2,2}(f)
    """
    g = f if g is None else g
    nf = norms(f, 2)
    lap_g = laplacian(g)
    fg = inner(f, lap_g)
    diff_pairs = sum(inner(difference(f, d), difference(g, d)) for d in DIFFERENCES)
    return {
        "green": fg + edge_sum(f, g),
        "green_diff": fg + 0.5 * diff_pairs,
        "energy": nf.n1 ** 2 - 2.0 * edge_sum(f, f),
        "stokes": inner(f, laplacian(f)) + 0.5 * nf.n1 ** 2,
        "laplace_norm": norms(laplacian(f), 2).n0 - 0.5 * nf.n2,
    }


# ----------------------------------------------------------------------
# the nonlinearity of the Euclidean flow at Theta = pi/2


def nonlinearity_F(x):
    """``F(x) = 2 arctan(e^x) - x - pi/2``, written as ``2 arctan(tanh(x/2)) - x``
    (the same function, exactly odd in floating point)."""
    x = np.asarray(x, dtype=float)
    return 2.0 * np.arctan(np.tanh(0.5 * x)) - x


def nonlinearity_F_prime(x):
    x = np.asarray(x, dtype=float)
    return 1.0 / np.cosh(x) - 1.0


def fit_C0(delta0: float = 0.5, n: int = 200001) -> float:
    """Smallest ``C0`` with ``|F(x)| <= C0 x^2`` and ``|F'(x)| <= C0 |x|`` on a
    dense grid of ``0 < |x| <= delta0`` (both ratios are even in ``x``)."""
    x = np.linspace(delta0 / n, delta0, n)
    return float(max(np.max(np.abs(nonlinearity_F(x)) / x ** 2),
                     np.max(np.abs(nonlinearity_F_prime(x)) / x)))


def F_tilde(field: LatticeField) -> LatticeField:
    """``sum_{j ~ i} F(u_j - u_i)`` on the box grown by one."""
    P = field.pad(1).pad(1)
    v = P.values
    out = sum(nonlinearity_F(np.roll(v, s, a) - v) for a in (0, 1) for s in (1, -1))
    return LatticeField(out[1:-1, 1:-1], (P.origin[0] + 1, P.origin[1] + 1))


def semilinear_rhs(field: LatticeField) -> LatticeField:
    """``Lap u + F_tilde(u)`` on the box grown by one; values outside the
    support box are frozen zeros."""
    return laplacian(field) + F_tilde(field)


# ----------------------------------------------------------------------
# homogeneous heat flow and its energy ledger


def _dirichlet_laplacian(shape) -> sparse.csr_matrix:
    a, b = shape

    def lap1(k):
        return sparse.diags([np.ones(k - 1), -2.0 * np.ones(k), np.ones(k - 1)], [-1, 0, 1])

    return (sparse.kron(lap1(a), sparse.identity(b)) + sparse.kron(sparse.identity(a), lap1(b))).tocsr()


@dataclass
class HeatLedger:
    times: np.ndarray
    n02_sq: np.ndarray      # N_{0,2}^2(u(t))
    n12_sq: np.ndarray      # N_{1,2}^2(u(t))
    n22_sq: np.ndarray      # N_{2,2}^2(u(t))
    fields: list

    def integrated_bound(self) -> tuple:
        """Left and right side of
        ``N02^2 + (1+t) N12^2 + int N12^2 + int (1+s) N22^2 <= (2 + C1) N02^2(phi)``
        at every sample (trapezoid quadrature)."""
        from scipy.integrate import cumulative_trapezoid
        t = self.times
        i1 = cumulative_trapezoid(self.n12_sq, t, initial=0.0)
        i2 = cumulative_trapezoid((1.0 + t) * self.n22_sq, t, initial=0.0)
        lhs = self.n02_sq + (1.0 + t) * self.n12_sq + i1 + i2
        rhs = (2.0 + sobolev_constant(2)) * self.n02_sq[0]
        return lhs, rhs


def heat_flow(phi: LatticeField, t_max: float, n_out: int = 201, margin: int = 20) -> HeatLedger:
    """Solve ``du/dt = Lap u`` from ``phi`` on the support box grown by
    ``margin`` with zero values outside; for short times and a wide margin
    this is the Z^2 solution to within the heat kernel tail."""
    box = phi.pad(margin)
    shape = box.values.shape
    A = _dirichlet_laplacian(shape)
    U = expm_multiply(A, box.values.ravel(), start=0.0, stop=t_max, num=n_out, endpoint=True)
    ts = np.linspace(0.0, t_max, n_out)
    fields, n0, n1, n2 = [], [], [], []
    for row in np.atleast_2d(U):
        f = LatticeField(row.reshape(shape), box.origin)
        nn = norms(f, 2)
        fields.append(f)
        n0.append(nn.n0 ** 2)
        n1.append(nn.n1 ** 2)
        n2.append(nn.n2 ** 2)
    return HeatLedger(ts, np.array(n0), np.array(n1), np.array(n2), fields)


def spreading_bump(n: int) -> LatticeField:
    """Constant ``1/n`` on an ``n x n`` box: l2 norm 1, energy ``~ 4/n``, sup ``1/n``."""
    return LatticeField(np.full((n, n), 1.0 / n), (0, 0))


# ----------------------------------------------------------------------
# bridge to lattice complexes


def field_to_vertices(field: LatticeField, positions: np.ndarray) -> np.ndarray:
    """Values at the lattice points ``positions`` (rows ``(m, n)``)."""
    return np.array([field[int(round(m)), int(round(n))] for m, n in positions])


def field_from_vertices(values, positions: np.ndarray) -> LatticeField:
    return LatticeField.from_dict({(int(round(m)), int(round(n))): float(x)
                                   for (m, n), x in zip(positions, values)})


__all__ = [
    "LatticeField", "difference", "laplacian", "norms", "Norms", "edge_sum", "inner",
    "green_identities_check", "nonlinearity_F", "nonlinearity_F_prime", "fit_C0",
    "F_tilde", "semilinear_rhs", "heat_flow", "HeatLedger", "spreading_bump",
    "sobolev_constant", "dirichlet_energy", "field_to_vertices", "field_from_vertices",
    "DIFFERENCES", "align",
]
