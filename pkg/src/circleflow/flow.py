"""Combinatorial Ricci flow on finite truncations.

In log-coordinates the flow is ``du_i/dt = -(K_i - K_hat_i)`` at free
vertices; every other vertex keeps its initial value.  Two explicit
integrators are provided: an adaptive Dormand-Prince 5(4) pair and
fixed-step classical RK4.  Both are written out here rather than taken from
scipy because the hyperbolic run has to reject any step that leaves
``u < 0`` and stop as soon as the curvature residual is small.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from . import geometry as geo
from .complex import CellComplex, ComplexError, Exhaustion, normalized_character
from .curvature import PackingMetric, curvature
from .geometry import Background, DomainError

log = logging.getLogger(__name__)

THREADS_ENV = "CIRCLEFLOW_THREADS"


class IntegratorFailure(RuntimeError):
    """Step-size underflow, non-finite state or a safety cap was hit."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class PreconditionError(ValueError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    background: Background = Background.EUCLIDEAN
    K_hat: np.ndarray | None = None
    integrator: str = "rk45"
    dt_init: float = 1e-2
    t_max: float = 1e4
    tol_K: float = 1e-10
    step_tol: float = 1e-8
    dt_max: float = 10.0
    u_cap: float = 50.0
    max_steps: int = 2_000_000
    snapshot_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "background", Background.parse(self.background))
        if not self.tol_K > 0:
            raise ValueError("tol_K must be positive")
        if not self.dt_init > 0:
            raise ValueError("dt_init must be positive")
        if self.integrator not in ("rk45", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.K_hat is not None:
            object.__setattr__(self, "K_hat", np.asarray(self.K_hat, dtype=float))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["background"] = self.background.value
        d["K_hat"] = None if self.K_hat is None else self.K_hat.tolist()
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class FlowTrace:
    """Diagnostics at every accepted step; ``u`` and ``K`` on the free vertices
    at snapshot steps (``u`` is ``u0`` everywhere else, by construction)."""

    times: np.ndarray
    residual: np.ndarray
    energy: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    snap_times: np.ndarray
    u_free: np.ndarray
    K_free: np.ndarray
    free: np.ndarray
    u0: np.ndarray
    converged: bool
    status: str
    config: FlowConfig
    n_rejected: int = 0
    message: str = ""

    def __len__(self):
        return len(self.times)

    def u_at(self, k: int) -> np.ndarray:
        u = self.u0.copy()
        u[self.free] = self.u_free[k]
        return u

    @property
    def u_final(self) -> np.ndarray:
        return self.u_at(-1)

    @property
    def K_final(self) -> np.ndarray:
        """Final curvature on the free vertices."""
        return self.K_free[-1]

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def metric(self, k: int = -1) -> PackingMetric:
        return PackingMetric(self.config.background, self.u_at(k))


# ----------------------------------------------------------------------
# right-hand side


def dirichlet_energy(cx: CellComplex, u) -> float:
    """Sum over edges of ``(u_i - u_j)^2``, skipping edges without values."""
    u = np.asarray(u, dtype=float)
    d = u[cx.edges[:, 0]] - u[cx.edges[:, 1]]
    d = d[np.isfinite(d)]
    return float(d @ d)


def default_free(cx: CellComplex) -> np.ndarray:
    return np.array(sorted(cx.interior_vertices), dtype=np.int64)


def ricci_flow_rhs(cx: CellComplex, metric: PackingMetric, K_hat=None, free=None) -> np.ndarray:
    """``du/dt`` over all vertices: ``-(K - K_hat)`` at free vertices, 0 elsewhere."""
    free = default_free(cx) if free is None else np.asarray(free, dtype=np.int64)
    K = curvature(cx, metric)
    out = np.zeros(cx.n_vertices)
    res = K[free] if K_hat is None else K[free] - np.asarray(K_hat, float)[free]
    out[free] = -res
    return out


class _System:
    """The flow restricted to the closed stars of the free vertices."""

    def __init__(self, cx: CellComplex, u0: np.ndarray, free: np.ndarray, bg: Background, K_hat):
        self.cx = cx
        self.bg = bg
        self.free = free
        self.u0 = u0.copy()
        self.K_hat = None if K_hat is None else np.asarray(K_hat, float)[free]
        self.n_eval = 0

    def full(self, y):
        u = self.u0.copy()
        u[self.free] = y
        return u

    def curv(self, y):
        self.n_eval += 1
        return curvature(self.cx, PackingMetric(self.bg, self.full(y)))

    def rhs(self, y):
        if self.bg is Background.HYPERBOLIC and np.any(y >= 0):
            return None
        K = self.curv(y)[self.free]
        if self.K_hat is not None:
            K = K - self.K_hat
        return -K


def _localize(cx: CellComplex, free: np.ndarray):
    """Sub-complex holding every face that touches a free vertex."""
    from .complex import induced_subcomplex
    fset = set(free.tolist())
    keep = set(fset)
    for fi, cyc in enumerate(cx.face_vertices):
        if fi != cx.infinity_face and any(v in fset for v in cyc):
            keep.update(cyc)
    for v in fset:
        keep.update(cx.neighbors(v).tolist())
    keep = np.array(sorted(keep), dtype=np.int64)
    if len(keep) == cx.n_vertices:
        return cx, keep
    return induced_subcomplex(cx, keep), keep


# Dormand-Prince 5(4)
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = _B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dp_step(sys: _System, y, k1, dt):
    ks = [k1]
    for s in range(1, 7):
        yi = y + dt * sum(a * k for a, k in zip(_A[s], ks) if a != 0)
        k = sys.rhs(yi)
        if k is None:
            return None
        ks.append(k)
    y_new = y + dt * sum(b * k for b, k in zip(_B, ks) if b != 0)
    err = dt * sum(e * k for e, k in zip(_E, ks) if e != 0)
    return y_new, ks[6], err


def _rk4_step(sys: _System, y, k1, dt):
    k2 = sys.rhs(y + 0.5 * dt * k1)
    if k2 is None:
        return None
    k3 = sys.rhs(y + 0.5 * dt * k2)
    if k3 is None:
        return None
    k4 = sys.rhs(y + dt * k3)
    if k4 is None:
        return None
    y_new = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    k_new = sys.rhs(y_new)
    if k_new is None:
        return None
    return y_new, k_new, None


class _Recorder:
    def __init__(self, cx, sys: _System, every: int):
        self.cx, self.sys, self.every = cx, sys, max(1, int(every))
        self.t, self.res, self.E, self.lo, self.hi = [], [], [], [], []
        self.st, self.su, self.sK = [], [], []
        self.count = 0

    def add(self, t, y, k, force=False):
        u = self.sys.full(y)
        self.t.append(t)
        self.res.append(float(np.max(np.abs(k))) if len(k) else 0.0)
        self.E.append(dirichlet_energy(self.cx, u))
        fin = u[np.isfinite(u)]
        self.lo.append(float(fin.min()) if len(fin) else np.nan)
        self.hi.append(float(fin.max()) if len(fin) else np.nan)
        if force or self.count % self.every == 0:
            self._snap(t, u)
        self.count += 1

    def _snap(self, t, u):
        if self.st and self.st[-1] == t:
            return
        self.st.append(t)
        y = u[self.sys.free]
        self.su.append(y)
        self.sK.append(self.sys.curv(y)[self.sys.free])

    def finish(self, t, y):
        if not self.st or self.st[-1] != t:
            self._snap(t, self.sys.full(y))


def integrate(cx: CellComplex, metric0: PackingMetric, config: FlowConfig | None = None,
              free=None) -> FlowTrace:
    """Run the flow from ``metric0`` until the residual drops below
    ``config.tol_K`` or ``t_max`` is reached.

    ``free`` defaults to the vertices with closed stars.  Raises
    :class:`IntegratorFailure` (carrying the partial trace) on step-size
    underflow, non-finite values or ``|u| > u_cap``.
    """
    config = FlowConfig(background=metric0.background) if config is None else config
    if config.background is not metric0.background:
        raise ValueError("metric and config disagree on the background geometry")
    free_full = default_free(cx) if free is None else np.unique(np.asarray(free, dtype=np.int64))
    u_full0 = np.array(metric0.u, dtype=float)
    if np.any(~np.isfinite(u_full0[free_full])):
        raise DomainError("free vertices need finite initial values")

    sub, keep = _localize(cx, free_full)
    local = {int(v): k for k, v in enumerate(keep)}
    free_loc = np.array([local[int(v)] for v in free_full], dtype=np.int64)
    K_hat = config.K_hat
    if K_hat is not None:
        K_hat = np.asarray(K_hat, float)[keep]
    sys = _System(sub, u_full0[keep], free_loc, config.background, K_hat)
    rec = _Recorder(sub, sys, config.snapshot_every)

    def result(converged, status, msg=""):
        rec.finish(t, y)
        return FlowTrace(
            times=np.asarray(rec.t), residual=np.asarray(rec.res),
            energy=_full_energy(cx, u_full0, keep, rec), u_min=np.asarray(rec.lo),
            u_max=np.asarray(rec.hi), snap_times=np.asarray(rec.st),
            u_free=np.asarray(rec.su), K_free=np.asarray(rec.sK), free=free_full, u0=u_full0, converged=converged, status=status, config=config,
            n_rejected=n_rej, message=msg,
        )

    t = 0.0
    y = sys.u0[free_loc].copy()
    n_rej = 0
    k = sys.rhs(y)
    if k is None:
        raise DomainError("initial hyperbolic metric must have u < 0")
    rec.add(t, y, k, force=True)
    if rec.res[-1] <= config.tol_K:
        return result(True, "converged")

    dt = config.dt_init
    etol = min(config.step_tol, 0.1 * config.tol_K)
    step = _dp_step if config.integrator == "rk45" else _rk4_step
    steps = 0
    while t < config.t_max:
        if steps >= config.max_steps:
            return result(False, "max_steps")
        rem = config.t_max - t
        # absorb a rounding-sized remainder into this step
        h = rem if dt >= rem - 1e-10 * max(1.0, config.t_max) else dt
        if h < 1e-14 * max(1.0, t):
            raise IntegratorFailure(f"step size underflow at t={t:g}", result(False, "failed"))
        out = step(sys, y, k, h)
        if out is None:
            # a stage left the hyperbolic domain: the step was too long
            n_rej += 1
            dt = 0.5 * h
            if config.integrator == "rk4":
                log.debug("rk4 step halved at t=%g", t)
            continue
        y_new, k_new, err = out
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(k_new))):
            raise IntegratorFailure(f"non-finite state at t={t:g}", result(False, "failed"))
        if err is not None:
            # at the stability limit the controller lets each step err by ~tol,
            # which floors the residual; keep tol well below tol_K
            sc = etol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
            en = float(np.max(np.abs(err) / sc)) if len(err) else 0.0
            if en > 1.0:
                n_rej += 1
                dt = h * max(0.2, 0.9 * en ** -0.2)
                continue
            dt = min(config.dt_max, h * (5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))))
        t = config.t_max if h == rem else t + h
        y, k = y_new, k_new
        steps += 1
        rec.add(t, y, k)
        if np.max(np.abs(y)) > config.u_cap:
            raise IntegratorFailure(f"|u| exceeded {config.u_cap} at t={t:g}", result(False, "diverged"))
        if rec.res[-1] <= config.tol_K:
            return result(True, "converged")
    return result(False, "t_max")


def _full_energy(cx, u_full0, keep, rec):
    # the recorder measured the local complex; add the constant contribution
    # of edges lying entirely outside it
    inside = np.zeros(cx.n_vertices, dtype=bool)
    inside[keep] = True
    a, b = cx.edges[:, 0], cx.edges[:, 1]
    outer = ~(inside[a] & inside[b])
    d = u_full0[a[outer]] - u_full0[b[outer]]
    d = d[np.isfinite(d)]
    return np.asarray(rec.E) + float(d @ d)


# ----------------------------------------------------------------------
# initial metrics


def _diag_bisect(target: float, theta_big: float, t_hi: float = 60.0, iters: int = 80) -> float:
    """Largest ``t`` with ``theta(t, t) >= target`` (hyperbolic diagonal angle)."""
    f = lambda t: float(geo.diagonal_half_angle(Background.HYPERBOLIC, t, theta_big))
    if f(t_hi) >= target:
        return t_hi
    lo, hi = 0.0, t_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid > 0 and f(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def initial_metric_hyperbolic_character(cx: CellComplex, c_hat: float, free=None) -> PackingMetric:
    """Constant hyperbolic metric ``r = t*`` with ``K <= 0`` at free vertices.

    ``t*`` is the largest radius with ``theta(t, t) >= Theta/2 - c_hat/2`` on
    every edge at a free vertex, so that
    ``K_i <= -d_i (normalized character - c_hat) <= 0``.
    """
    if not c_hat > 0:
        raise PreconditionError("c_hat must be positive")
    free = default_free(cx) if free is None else np.asarray(free, dtype=np.int64)
    bad = [cx.vertex_ids[v] for v in free
           if normalized_character(cx, cx.vertex_ids[v], exclude_infinity=True) < c_hat - 1e-12]
    if bad:
        raise PreconditionError(f"normalized character below c_hat at vertices {bad[:20]}")
    edges = sorted({e for v in free for e in cx.incident_edges[v]})
    thetas = np.unique(np.round(cx.theta[edges], 15))
    if len(thetas) == 0:
        raise PreconditionError("no edges at free vertices")
    t_star = min(_diag_bisect(0.5 * (T - c_hat), T) for T in thetas)
    if t_star <= 0:
        raise PreconditionError("no positive radius satisfies the angle bound")
    u = np.full(cx.n_vertices, float(geo.r_to_u(Background.HYPERBOLIC, t_star)))
    for v in cx.infinity_set:
        u[v] = np.nan
    metric = PackingMetric(Background.HYPERBOLIC, u)
    K = curvature(cx, metric)[free]
    if np.any(K > 1e-12):
        raise AssertionError(f"constructed metric has K > 0 (max {K.max():.3e})")
    return metric


def initial_metric_perturbed(cx: CellComplex, bg, scale: float, rng=None, support=None,
                             norm: str = "l2", base: float = 0.0) -> PackingMetric:
    """``u = base + noise`` where the noise lives on ``support`` (default: the
    free vertices) and has the requested l2 (or l-infinity) size."""
    rng = np.random.default_rng(rng)
    support = default_free(cx) if support is None else np.asarray(support, dtype=np.int64)
    x = rng.standard_normal(len(support))
    nx = np.linalg.norm(x) if norm == "l2" else np.max(np.abs(x))
    u = np.full(cx.n_vertices, float(base))
    if len(support) and nx > 0:
        u[support] += scale * x / nx
    return PackingMetric(bg, u)


# ----------------------------------------------------------------------
# heat-equation harness


@dataclass
class HeatTrace:
    times: np.ndarray
    f: np.ndarray


def _laplacian(n, i, j, w):
    W = sparse.coo_matrix((np.r_[w, w], (np.r_[i, j], np.r_[j, i])), shape=(n, n)).tocsr()
    return W - sparse.diags(np.asarray(W.sum(axis=1)).ravel())


def heat_equation_simulate(n: int, edges, omega, g, f0, horizon: float, n_out: int = 51,
                           g_bound: float | None = None, rtol: float = 1e-10,
                           atol: float = 1e-14) -> HeatTrace:
    """Integrate ``df/dt = Delta_omega f + g f`` on a finite weighted graph.

    ``omega`` (per edge) and ``g`` (per vertex) are arrays or callables of
    ``t``.  With constant coefficients the solution is ``expm(t A) f0``,
    evaluated with scipy's ``expm_multiply``; otherwise an
    adaptive scipy integrator is used.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    i, j = edges[:, 0], edges[:, 1]
    f0 = np.asarray(f0, dtype=float)
    ts = np.linspace(0.0, horizon, n_out)

    def coeffs(t):
        w = np.asarray(omega(t) if callable(omega) else omega, dtype=float)
        gg = np.asarray(g(t) if callable(g) else g, dtype=float)
        if np.any(w < 0):
            raise PreconditionError("edge weights must be non-negative")
        if g_bound is not None and np.any(gg > g_bound):
            raise PreconditionError("g exceeds its stated bound")
        return _laplacian(n, i, j, w) + sparse.diags(np.broadcast_to(gg, (n,)))

    if not callable(omega) and not callable(g):
        from scipy.sparse.linalg import expm_multiply
        A = coeffs(0.0).tocsc()
        F = expm_multiply(A, f0, start=0.0, stop=horizon, num=n_out, endpoint=True)
        return HeatTrace(ts, np.asarray(F))
    sol = solve_ivp(lambda t, f: coeffs(t) @ f, (0.0, horizon), f0, t_eval=ts,
                    rtol=rtol, atol=atol, method="DOP853")
    if not sol.success:
        raise IntegratorFailure(sol.message)
    return HeatTrace(sol.t, sol.y.T)


# ----------------------------------------------------------------------
# analysis


@dataclass(frozen=True)
class ConvergenceReport:
    status: str
    final_residual: float
    t_final: float
    rate: float | None
    rate_window: tuple | None
    power_exponent: float | None
    power_window: tuple | None
    n_samples: int

    def to_dict(self):
        return dataclasses.asdict(self)


def fit_exponential_rate(times, residual, lo_frac=0.5, floor=1e-13):
    """Slope of ``-ln(residual)`` against ``t`` over the tail of the trace."""
    t = np.asarray(times, float)
    r = np.asarray(residual, float)
    ok = (r > floor) & np.isfinite(r)
    t, r = t[ok], r[ok]
    if len(t) < 3:
        return None, None
    t0 = t[0] + lo_frac * (t[-1] - t[0])
    sel = t >= t0
    if sel.sum() < 3:
        sel = slice(-3, None)
    slope = np.polyfit(t[sel], np.log(r[sel]), 1)[0]
    return -float(slope), (float(t[sel][0]), float(t[sel][-1]))


def fit_power_law(times, energy, window=(0.25, 0.75)):
    """Slope of ``ln E`` against ``ln(1 + t)`` over the middle of the trace,
    measured in ``ln(1 + t)``."""
    t = np.asarray(times, float)
    E = np.asarray(energy, float)
    ok = (E > 0) & np.isfinite(E)
    x, y = np.log1p(t[ok]), np.log(E[ok])
    if len(x) < 3 or x[-1] <= x[0]:
        return None, None
    a = x[0] + window[0] * (x[-1] - x[0])
    b = x[0] + window[1] * (x[-1] - x[0])
    sel = (x >= a) & (x <= b)
    if sel.sum() < 3:
        return None, None
    slope = np.polyfit(x[sel], y[sel], 1)[0]
    return float(slope), (float(np.expm1(a)), float(np.expm1(b)))


def convergence_report(trace: FlowTrace, tol_K: float | None = None) -> ConvergenceReport:
    tol = trace.config.tol_K if tol_K is None else tol_K
    res = np.asarray(trace.residual)
    final = float(res[-1])
    if not np.isfinite(final) or trace.status in ("diverged", "failed"):
        status = "diverged"
    elif final <= tol:
        status = "converged"
    elif len(res) > 1 and final > 10 * res[0]:
        status = "diverged"
    else:
        status = "stalled"
    if len(res) < 10:
        if status == "converged":
            return ConvergenceReport(status, final, trace.t_final, None, None, None, None, len(res))
        raise InsufficientData("need at least 10 samples to fit rates")
    rate, rw = fit_exponential_rate(trace.times, res)
    expo, pw = fit_power_law(trace.times, trace.energy)
    return ConvergenceReport(status, final, trace.t_final, rate, rw, expo, pw, len(res))


# ----------------------------------------------------------------------
# exhaustion sweeps


@dataclass
class SweepResult:
    traces: list
    deltas: list            # max |u^(k+1) - u^(k)| on the inner half of level k
    inner: list             # the inner vertex sets used for those comparisons


def thread_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, default)))
    except ValueError:
        return default


def truncation_sweep(cx: CellComplex, exhaustion: Exhaustion, metric0: PackingMetric,
                     config: FlowConfig, threads: int | None = None) -> SweepResult:
    """Integrate on every exhaustion level (each level free, the rest frozen at
    ``metric0``) and compare successive converged metrics."""
    interior = cx.interior_vertices
    for k, lvl in enumerate(exhaustion.levels):
        if not set(lvl) <= interior:
            raise ComplexError(f"level {k} reaches vertices without closed stars; materialise a larger complex")
    threads = thread_count() if threads is None else threads
    levels = [np.array(sorted(l), dtype=np.int64) for l in exhaustion.levels]
    if threads > 1:
        with cf.ThreadPoolExecutor(max_workers=threads) as ex:
            traces = list(ex.map(lambda f: integrate(cx, metric0, config, free=f), levels))
    else:
        traces = [integrate(cx, metric0, config, free=f) for f in levels]
    dist = cx.hop_distance(exhaustion.root)
    deltas, inner = [], []
    for k in range(len(levels) - 1):
        rad = exhaustion.radii[k]
        core = np.flatnonzero(dist <= rad / 2.0)
        inner.append(core)
        deltas.append(float(np.max(np.abs(traces[k + 1].u_final[core] - traces[k].u_final[core]))))
    return SweepResult(traces, deltas, inner)


# ----------------------------------------------------------------------
# export


def write_trace_csv(trace: FlowTrace, path, vertex_ids=None) -> None:
    ids = [int(v) if vertex_ids is None else vertex_ids[v] for v in trace.free]
    times = np.asarray(trace.times)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"u[{v}]" for v in ids] + [f"K[{v}]" for v in ids] + ["E", "residual"])
        for s, t in enumerate(trace.snap_times.tolist()):
            k = min(int(np.searchsorted(times, t)), len(times) - 1)
            w.writerow([repr(t)] + [repr(float(x)) for x in trace.u_free[s]]
                       + [repr(float(x)) for x in trace.K_free[s]]
                       + [repr(float(trace.energy[k])), repr(float(trace.residual[k]))])


def run_manifest(command: str, config: FlowConfig, cx: CellComplex, trace: FlowTrace,
                 outputs: dict, extra: dict | None = None) -> dict:
    from . import __version__
    rep = {"status": trace.status, "converged": trace.converged, "t_final": trace.t_final,
           "final_residual": float(trace.residual[-1]), "steps": len(trace) - 1,
           "rejected": trace.n_rejected}
    doc = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.digest(),
        "complex_hash": cx.digest(),
        "complex_name": cx.name,
        "provenance": f"circleflow {__version__}",
        "outputs": outputs,
        "summary": rep,
    }
    if extra:
        doc.update(extra)
    return doc
