"""Two-circle configuration geometry for one weighted edge.

Two circles of radii ``r_i`` and ``r_j`` meet at exterior intersection angle
``theta_big`` (0 for tangency).  Their centers and one intersection point
span a triangle whose angle at the intersection point is ``pi - theta_big``.
Everything here is a closed-form function of ``(r_i, r_j, theta_big)`` and
accepts numpy arrays, broadcasting like any ufunc.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)


class DomainError(ValueError):
    """Input outside the domain of a geometric formula."""


class Background(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"

    @classmethod
    def parse(cls, value: "Background | str") -> "Background":
        if isinstance(value, Background):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown background geometry {value!r}") from None


EUCLIDEAN = Background.EUCLIDEAN
HYPERBOLIC = Background.HYPERBOLIC


# ----------------------------------------------------------------------
# coordinates


def r_to_u(bg, r):
    """Log-coordinate: ``ln r`` (Euclidean) or ``ln tanh(r/2)`` (hyperbolic)."""
    bg = Background.parse(bg)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radii must be positive")
    if bg is EUCLIDEAN:
        return np.log(r)
    # ln tanh(r/2) = ln(1 - e^-r) - ln(1 + e^-r)
    e = np.exp(-r)
    return np.log1p(-e) - np.log1p(e)


def u_to_r(bg, u):
    bg = Background.parse(bg)
    u = np.asarray(u, dtype=float)
    if bg is EUCLIDEAN:
        return np.exp(u)
    if np.any(u >= 0):
        raise DomainError("hyperbolic log-coordinates must be negative")
    # r = 2 artanh(e^u) = ln((1 + e^u) / (1 - e^u))
    # -expm1 keeps 1 - e^u accurate for u near 0 (large radii)
    return np.log1p(np.exp(u)) - np.log(-np.expm1(u))


def dr_du(bg, r):
    """``s(r)``: the factor with ``dr/dt = s(r) du/dt``."""
    bg = Background.parse(bg)
    r = np.asarray(r, dtype=float)
    return r if bg is EUCLIDEAN else np.sinh(r)


# ----------------------------------------------------------------------
# overflow-safe hyperbolic helpers


def _log_sinh(x):
    # valid for x > 0
    x = np.asarray(x, dtype=float)
    return x + np.log(-np.expm1(-2.0 * x)) - LN2


def _log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - LN2


def _sinh_ratio(a, b):
    """sinh(a) / sinh(b) for b > 0, |a| <= b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast(a, b).shape)
    nz = a != 0
    a_, b_ = np.broadcast_to(a, out.shape), np.broadcast_to(b, out.shape)
    out[nz] = np.sign(a_[nz]) * np.exp(_log_sinh(np.abs(a_[nz])) - _log_sinh(b_[nz]))
    return out


def _check(r_i, r_j, theta_big):
    r_i = np.asarray(r_i, dtype=float)
    r_j = np.asarray(r_j, dtype=float)
    theta_big = np.asarray(theta_big, dtype=float)
    if np.any(~(r_i > 0)) or np.any(~(r_j > 0)):
        raise DomainError("radii must be positive")
    if np.any(~(theta_big > 0)) or np.any(~(theta_big < np.pi)):
        raise DomainError("intersection angle must lie in (0, pi)")
    return r_i, r_j, theta_big


def _hyp_log_cosh_l(r_i, r_j, theta_big):
    # cosh l = cosh ri cosh rj + sinh ri sinh rj cos T
    #        = e^(ri+rj)/4 [(1+e^-2ri)(1+e^-2rj) + (1-e^-2ri)(1-e^-2rj) cos T]
    a = np.exp(-2.0 * r_i)
    b = np.exp(-2.0 * r_j)
    c = np.cos(theta_big)
    bracket = (1.0 + a) * (1.0 + b) + (1.0 - a) * (1.0 - b) * c
    return r_i + r_j - 2.0 * LN2 + np.log(bracket)


# ----------------------------------------------------------------------
# edge quantities


def edge_length(bg, r_i, r_j, theta_big):
    """Distance between the two centers."""
    bg = Background.parse(bg)
    r_i, r_j, theta_big = _check(r_i, r_j, theta_big)
    if bg is EUCLIDEAN:
        return np.sqrt(r_i * r_i + r_j * r_j + 2.0 * r_i * r_j * np.cos(theta_big))
    lc = _hyp_log_cosh_l(r_i, r_j, theta_big)
    # arccosh(x) = ln x + ln(1 + sqrt(1 - x^-2)); direct form when x is small
    x = np.exp(np.minimum(lc, 700.0))
    small = lc < 20.0
    return np.where(
        small,
        np.arccosh(np.maximum(x, 1.0)),
        lc + np.log1p(np.sqrt(np.clip(1.0 - np.exp(-2.0 * lc), 0.0, None))),
    )


def half_angle(bg, r_i, r_j, theta_big):
    """Inner angle ``theta_ij`` of the center triangle at center ``i``.

    Computed from the law of tangents (Euclidean) and Napier's analogies
    (hyperbolic): the half sum and half difference of the two center angles
    are recovered with ``arctan`` on ranges where it is single-valued, so
    there is no branch choice even when the angle exceeds pi/2.
    """
    bg = Background.parse(bg)
    r_i, r_j, theta_big = _check(r_i, r_j, theta_big)
    t = np.tan(0.5 * theta_big)
    if bg is EUCLIDEAN:
        return 0.5 * theta_big + np.arctan((r_j - r_i) / (r_j + r_i) * t)
    half_sum = np.arctan(
        np.exp(_log_cosh(0.5 * (r_j - r_i)) - _log_cosh(0.5 * (r_j + r_i))) * t
    )
    half_diff = np.arctan(_sinh_ratio(0.5 * (r_j - r_i), 0.5 * (r_j + r_i)) * t)
    return half_sum + half_diff


def altitude(bg, r_i, r_j, theta_big):
    """Length ``d_ij`` of the altitude from the intersection point."""
    bg = Background.parse(bg)
    th = half_angle(bg, r_i, r_j, theta_big)
    r_i = np.asarray(r_i, dtype=float)
    if bg is EUCLIDEAN:
        return r_i * np.sin(th)
    return np.arcsinh(np.sinh(r_i) * np.sin(th))


def d_theta_d_u(bg, r_i, r_j, theta_big):
    """Partial derivatives of ``theta_ij`` with respect to ``u_i`` and ``u_j``.

    Returns ``(dtheta_ij/du_i, dtheta_ij/du_j)``; the first is negative and
    the second positive.  The second also equals ``dtheta_ji/du_i``.
    """
    bg = Background.parse(bg)
    r_i, r_j, theta_big = _check(r_i, r_j, theta_big)
    th = half_angle(bg, r_i, r_j, theta_big)
    if bg is EUCLIDEAN:
        l = edge_length(bg, r_i, r_j, theta_big)
        cross = r_i * np.sin(th) / l
        return -cross, cross
    # sinh d / sinh l = sinh ri sin th / sinh l
    l = edge_length(bg, r_i, r_j, theta_big)
    cross = np.exp(_log_sinh(r_i) - _log_sinh(l)) * np.sin(th)
    # cosh l * sinh d / sinh l = coth l * sinh ri * sin th
    diag = np.exp(_log_sinh(r_i)) * np.sin(th) / np.tanh(l)
    return -diag, cross


def theta_upper_bound_radius(epsilon, theta_big):
    """Radius ``L`` with ``theta_ij < epsilon`` whenever ``r_i > L`` (hyperbolic).

    ``theta_ij`` increases with ``r_j``, and as ``r_j -> inf`` it tends to
    ``2 arctan(e^-r_i tan(theta_big/2))``; that supremum is inverted exactly.
    """
    if not (0.0 < epsilon < 0.5 * math.pi):
        raise DomainError("epsilon must lie in (0, pi/2)")
    if not (0.0 < theta_big < math.pi):
        raise DomainError("intersection angle must lie in (0, pi)")
    return max(0.0, math.log(math.tan(0.5 * theta_big) / math.tan(0.5 * epsilon)))


def sup_half_angle(r_i, theta_big):
    """``sup_{r_j > 0}`` of the hyperbolic ``theta_ij`` at fixed ``r_i``."""
    return 2.0 * np.arctan(np.exp(-np.asarray(r_i, float)) * np.tan(0.5 * np.asarray(theta_big, float)))


def diagonal_half_angle(bg, t, theta_big):
    """``theta_ij(t, t)``; equals ``theta_big / 2`` in the Euclidean plane."""
    return half_angle(bg, t, t, theta_big)


@dataclass(frozen=True)
class TwoCircleConfig:
    background: Background
    r_i: float
    r_j: float
    theta_big: float
    l_ij: float
    theta_i: float
    theta_j: float
    d_ij: float

    @classmethod
    def build(cls, bg, r_i: float, r_j: float, theta_big: float) -> "TwoCircleConfig":
        bg = Background.parse(bg)
        return cls(
            background=bg,
            r_i=float(r_i),
            r_j=float(r_j),
            theta_big=float(theta_big),
            l_ij=float(edge_length(bg, r_i, r_j, theta_big)),
            theta_i=float(half_angle(bg, r_i, r_j, theta_big)),
            theta_j=float(half_angle(bg, r_j, r_i, theta_big)),
            d_ij=float(altitude(bg, r_i, r_j, theta_big)),
        )
