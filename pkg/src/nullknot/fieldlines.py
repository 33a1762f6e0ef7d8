"""Field-line tracing, first-integral drift and straight-ray line transport.

Lines are integrated in arc length, ``dx/ds = X / |X|``, with scipy's DOP853
embedded Runge-Kutta pair driven step by step. Its dense output is used for
closure detection between accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import minimize_scalar

from . import flow
from .bateman import BatemanPair, first_integral_gradients, first_integrals
from .core import AnalyticField
from .errors import ConfigError, DegenerateSeedError, StepFailureError

SELECTORS = ("E", "B", "V", "B/W", "E/W")
EPS_CLOSE = 1e-4
ALIGN_CLOSE = 0.999
RESAMPLE = 512


@dataclass(frozen=True)
class TracerConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_length: float = 50.0
    max_steps: int = 100000
    first_step: Optional[float] = None
    max_step: float = 0.02
    selector: str = "B"
    min_magnitude: float = 1e-14
    close: bool = True

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError("tracer tolerances must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if not self.max_length > 0:
            raise ConfigError("max_length must be positive")
        if self.selector not in SELECTORS:
            raise ConfigError(f"selector must be one of {SELECTORS}")


@dataclass
class FieldLine:
    points: np.ndarray  # (n, 3)
    s: np.ndarray  # (n,)
    magnitude: np.ndarray
    W: np.ndarray
    re_ab: Optional[np.ndarray] = None
    im_ab: Optional[np.ndarray] = None
    closed: bool = False
    return_distance: float = float("nan")
    stop_reason: str = ""
    t: float = 0.0
    selector: str = "B"

    @property
    def length(self) -> float:
        return float(self.s[-1])


def selected_vector(field: AnalyticField, selector: str, t: float, pts) -> tuple:
    """``(X, W)`` for points of shape (..., 3)."""
    pts = np.asarray(pts, dtype=float)
    F = field.value(t, pts[..., 0], pts[..., 1], pts[..., 2])
    E, B = F.real, F.imag
    W = 0.5 * (np.sum(E * E, -1) + np.sum(B * B, -1))
    if selector == "E":
        X = E
    elif selector == "B":
        X = B
    elif selector in ("E/W", "B/W", "V"):
        if np.any(W == 0):
            return np.zeros_like(E), W
        if selector == "V":
            X = np.cross(E, B) / W[..., None]
        else:
            X = (E if selector == "E/W" else B) / W[..., None]
    else:
        raise ConfigError(f"unknown selector {selector!r}")
    return X, W


def trace(field: AnalyticField, selector: str, seed, t: float = 0.0, cfg: Optional[TracerConfig] = None, pair: Optional[BatemanPair] = None, direction: float = 1.0) -> FieldLine:
    """Trace the integral curve of the selected vector field through ``seed``."""
    cfg = cfg or TracerConfig(selector=selector)
    if selector not in SELECTORS:
        raise ConfigError(f"selector must be one of {SELECTORS}")
    seed = np.asarray(seed, dtype=float)
    X0, _ = selected_vector(field, selector, t, seed)
    n0 = np.linalg.norm(X0)
    if not np.isfinite(n0) or n0 <= cfg.min_magnitude:
        raise DegenerateSeedError(f"|{selector}| = {n0:.3e} at seed; no line direction")
    T0 = direction * X0 / n0

    degenerate = {"hit": False}

    def rhs(s, x):
        X, _ = selected_vector(field, selector, t, x)
        n = np.linalg.norm(X)
        if not np.isfinite(n) or n <= cfg.min_magnitude:
            degenerate["hit"] = True
            return np.zeros(3)
        return direction * X / n

    kw = dict(rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step)
    if cfg.first_step is not None:
        kw["first_step"] = cfg.first_step
    solver = DOP853(rhs, 0.0, seed.copy(), cfg.max_length, **kw)
    pts, ss = [seed.copy()], [0.0]
    closed, ret, reason = False, float("nan"), "max_length"
    steps = 0
    while solver.status == "running":
        if steps >= cfg.max_steps:
            reason = "max_steps"
            break
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepFailureError(f"integrator failed at s = {solver.t:.6g}: {msg}")
        if degenerate["hit"]:
            reason = "degenerate"
            break
        if cfg.close and solver.t >= 10 * EPS_CLOSE:
            hit = _closure(solver, seed, T0, rhs, max(solver.t_old, 10 * EPS_CLOSE))
            if hit is not None:
                s_c, x_c, d = hit
                pts.append(x_c)
                ss.append(s_c)
                closed, ret, reason = True, d, "closed"
                break
        if solver.t > ss[-1]:
            pts.append(solver.y.copy())
            ss.append(solver.t)
    P = np.array(pts)
    S = np.array(ss)
    keep = np.concatenate([[True], np.diff(S) > 0])
    P, S = P[keep], S[keep]
    if not closed:
        ret = float(np.linalg.norm(P[-1] - seed))
    X, W = selected_vector(field, selector, t, P)
    line = FieldLine(P, S, np.linalg.norm(X, axis=-1), W, closed=closed, return_distance=ret, stop_reason=reason, t=t, selector=selector)
    if pair is not None:
        re, im = first_integrals(pair, (t, P[:, 0], P[:, 1], P[:, 2]))
        line.re_ab, line.im_ab = np.asarray(re), np.asarray(im)
    return line


def _closure(solver, seed, T0, rhs, s_lo):
    """Smallest seed distance within the last step, if it counts as a return."""
    s_hi = solver.t
    if s_hi <= s_lo:
        return None
    sol = solver.dense_output()
    dist = lambda s: float(np.linalg.norm(sol(s) - seed))
    # cheap rejection: the chord cannot come within eps of the seed
    h = s_hi - s_lo
    if min(dist(s_lo), dist(s_hi)) > EPS_CLOSE + h:
        return None
    res = minimize_scalar(dist, bounds=(s_lo, s_hi), method="bounded", options={"xatol": 1e-14})
    cand = [(dist(s_lo), s_lo), (dist(s_hi), s_hi), (res.fun, res.x)]
    d, s_c = min(cand)
    if d > EPS_CLOSE:
        return None
    x_c = sol(s_c)
    T = rhs(s_c, x_c)
    if float(np.dot(T, T0)) < ALIGN_CLOSE:
        return None
    return s_c, x_c, d


def resample(line_pts: np.ndarray, n: int = RESAMPLE) -> np.ndarray:
    """Uniform arc-length resampling of a polyline (chord-length parameter)."""
    P = np.asarray(line_pts, dtype=float)
    seg = np.linalg.norm(np.diff(P, axis=0), axis=-1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return np.repeat(P[:1], n, axis=0)
    q = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(q, s, P[:, k]) for k in range(3)], axis=-1)


def _point_segment_dist(Q, P):
    """Distance from each point of Q to the polyline P."""
    A, Bp = P[:-1], P[1:]
    d = Bp - A
    dd = np.maximum(np.sum(d * d, -1), 1e-300)
    out = np.empty(len(Q))
    for i in range(0, len(Q), 256):
        q = Q[i : i + 256, None, :]
        u = np.clip(np.sum((q - A) * d, -1) / dd, 0.0, 1.0)
        c = A + u[..., None] * d
        out[i : i + 256] = np.min(np.linalg.norm(q - c, axis=-1), axis=-1)
    return out


def hausdorff(P1, P2, n: int = RESAMPLE) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    a, b = resample(P1, n), resample(P2, n)
    P1, P2 = np.asarray(P1, float), np.asarray(P2, float)
    return float(max(_point_segment_dist(a, P2).max(), _point_segment_dist(b, P1).max()))


def first_integral_drift(line: FieldLine, pair: BatemanPair, which: str = "Re") -> float:
    """``max |s(vertex) - s(start)|`` for ``s = Re(alpha beta)`` or ``Im(alpha beta)``."""
    if which not in ("Re", "Im"):
        raise ConfigError("which must be 'Re' or 'Im'")
    P = line.points
    re, im = first_integrals(pair, (line.t, P[:, 0], P[:, 1], P[:, 2]))
    v = np.asarray(re if which == "Re" else im)
    return float(np.max(np.abs(v - v[0])))


def first_integral_scale(line: FieldLine, pair: BatemanPair, which: str = "Re") -> float:
    """``max |grad s|`` along the line times its length: the natural drift scale."""
    P = line.points
    gr, gi = first_integral_gradients(pair, (line.t, P[:, 0], P[:, 1], P[:, 2]))
    g = gr if which == "Re" else gi
    return float(np.max(np.linalg.norm(g, axis=-1)) * line.length)


def transported_line_mismatch(field: AnalyticField, seed, tau: float, cfg: Optional[TracerConfig] = None, w_ref=None, return_lines=False):
    """Hausdorff distance between the straight-ray image of the t = 0 line of B/W
    and the line of B/W traced at ``t = tau`` from the image of the seed."""
    cfg = cfg or TracerConfig(selector="B/W")
    cfg = _with(cfg, selector="B/W")
    seed = np.asarray(seed, dtype=float)
    line0 = trace(field, "B/W", seed, 0.0, cfg)
    moved = flow.straight_line_map_many(field, line0.points, tau, w_ref)
    seg = np.linalg.norm(np.diff(moved, axis=0), axis=-1).sum()
    cfg1 = _with(cfg, max_length=float(seg) if not line0.closed else cfg.max_length)
    line1 = trace(field, "B/W", moved[0], float(tau), cfg1)
    d = hausdorff(moved, line1.points)
    if return_lines:
        return d, line0, moved, line1
    return d


def _with(cfg: TracerConfig, **kw) -> TracerConfig:
    d = dict(cfg.__dict__)
    d.update(kw)
    return TracerConfig(**d)
