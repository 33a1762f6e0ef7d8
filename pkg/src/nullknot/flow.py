"""Poynting-flow quantities and the transport laws of null fields.

``W = (E^2 + B^2)/2``, ``V = E x B / W`` and ``Omega = curl V``. Spatial
derivatives (including the second derivatives inside ``grad Omega`` and
``grad(V . Omega)``) come from nested dual numbers; time derivatives come
from a Richardson-extrapolated central difference of the same quantities.

Transport of a vector field ``Y`` along ``V`` is tested in the form
``d_t Y + [V, Y] = 0`` with ``[X, Y] = (X . grad) Y - (Y . grad) X``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .core import AnalyticField, Point4, SpatialJet, as_point, time_derivative_many
from .errors import DegenerateFlowError

EPS = 1e-30
W_REL_FLOOR = 1e-12
FD_STEP = 1e-4


@dataclass
class FlowState:
    V: np.ndarray
    W: np.ndarray
    Omega: np.ndarray
    JV: np.ndarray


@dataclass
class TransportResidualReport:
    """Raw residuals and their scale-free counterparts (``rel`` dict)."""

    euler: np.ndarray
    continuity: np.ndarray
    transport_B: np.ndarray
    transport_E: np.ndarray
    transport_Omega: np.ndarray
    helicity_density: np.ndarray
    rel: dict

    NAMES = ("euler", "continuity", "transport_B", "transport_E", "transport_Omega", "helicity_density")

    def max_relative(self) -> np.ndarray:
        return np.max(np.stack([self.rel[k] for k in self.NAMES], axis=-1), axis=-1)


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _degenerate(W, w_ref):
    ref = np.max(W) if w_ref is None else float(w_ref)
    return np.any(W == 0) or np.any(W <= W_REL_FLOOR * ref)


def _first_order(field: AnalyticField, t, x, y, z, w_ref=None):
    """V, W, JV, Omega, E, B from a single first-order jet (numpy arrays)."""
    field.check_poles(t, np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    jet = SpatialJet(x, y, z, order=1)
    F = field.fn(t, *jet.vars)
    E = [ad.real(c) for c in F]
    B = [ad.imag(c) for c in F]
    W = 0.5 * (_dot(E, E) + _dot(B, B))
    Wv = jet.val(W)
    if _degenerate(Wv, w_ref):
        raise DegenerateFlowError("energy density below threshold; V undefined")
    V = [c / W for c in _cross(E, B)]
    JV = jet.jac(V)
    Om = np.stack([JV[..., 2, 1] - JV[..., 1, 2], JV[..., 0, 2] - JV[..., 2, 0], JV[..., 1, 0] - JV[..., 0, 1]], -1)
    vals = lambda q: np.stack([jet.val(c) for c in q], -1)
    return dict(V=vals(V), W=Wv, JV=JV, Omega=Om, E=vals(E), B=vals(B))


def flow_state(field: AnalyticField, p, w_ref=None) -> FlowState:
    """V, W, Omega and JV at a single spacetime point."""
    p = as_point(p)
    s = _first_order(field, p.t, np.array([p.x]), np.array([p.y]), np.array([p.z]), w_ref)
    return FlowState(V=s["V"][0], W=float(s["W"][0]), Omega=s["Omega"][0], JV=s["JV"][0])


def flow_state_many(field: AnalyticField, t, x, y, z, w_ref=None) -> FlowState:
    s = _first_order(field, t, x, y, z, w_ref)
    return FlowState(V=s["V"], W=s["W"], Omega=s["Omega"], JV=s["JV"])


def _transported(field, t, x, y, z, w_ref):
    """Quantities whose time derivatives enter the residuals, packed on the last axis."""
    s = _first_order(field, t, x, y, z, w_ref)
    W = s["W"][..., None]
    h = np.sum(s["V"] * s["Omega"], axis=-1)[..., None]
    return np.concatenate([s["V"], W, s["B"] / W, s["E"] / W, s["Omega"] / W, h], axis=-1)


def _second_order(field, t, x, y, z):
    """Spatial derivatives of every transported quantity, from a nested jet."""
    jet = SpatialJet(x, y, z, order=2)
    F = field.fn(t, *jet.vars)
    E = [ad.real(c) for c in F]
    B = [ad.imag(c) for c in F]
    W = 0.5 * (_dot(E, E) + _dot(B, B))
    V = [c / W for c in _cross(E, B)]
    # strip the outer layer for quantities needing one derivative
    lo = lambda q: ad.value(q, jet.outer)
    dV = [[ad.deriv(V[i], j, jet.outer) for j in range(3)] for i in range(3)]
    Om = [dV[2][1] - dV[1][2], dV[0][2] - dV[2][0], dV[1][0] - dV[0][1]]
    Vl, Wl = [lo(c) for c in V], lo(W)
    El, Bl = [lo(c) for c in E], [lo(c) for c in B]
    h = _dot(Vl, Om)

    inner = jet.inner
    full = jet._full

    def val(q):
        return np.stack([full(ad.value(c, inner)) for c in q], -1)

    def jac(q):
        return np.stack([np.stack([full(ad.deriv(c, j, inner)) for j in range(3)], -1) for c in q], -2)

    def grad(q):
        return np.stack([full(ad.deriv(q, j, inner)) for j in range(3)], -1)

    YB = [c / Wl for c in Bl]
    YE = [c / Wl for c in El]
    YO = [c / Wl for c in Om]
    return dict(
        V=val(Vl),
        W=full(ad.value(Wl, inner)),
        gradW=grad(Wl),
        JV=jac(Vl),
        YB=val(YB),
        JYB=jac(YB),
        YE=val(YE),
        JYE=jac(YE),
        YO=val(YO),
        JYO=jac(YO),
        h=full(ad.value(h, inner)),
        gradh=grad(h),
    )


def _mv(J, v):
    return np.einsum("...ij,...j->...i", J, v)


def _norm(a):
    return np.linalg.norm(a, axis=-1) if np.ndim(a) and a.shape[-1:] == (3,) else np.abs(a)


def _rel(total, *terms):
    scale = np.max(np.stack([np.linalg.norm(t, axis=-1) for t in terms], -1), -1)
    return np.linalg.norm(total, axis=-1) / np.maximum(scale, EPS)


def _rel_scalar(total, *terms):
    scale = np.max(np.stack([np.abs(t) for t in terms], -1), -1)
    return np.abs(total) / np.maximum(scale, EPS)


def transport_residuals(field: AnalyticField, t, x, y, z, h_t: float = FD_STEP, w_ref=None) -> TransportResidualReport:
    """Every transport and conservation residual at the given points.

    Each relative residual is the norm of the sum divided by the largest norm
    among its constituent terms.
    """
    x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
    field.check_poles(t, x, y, z)
    s = _second_order(field, t, x, y, z)
    if _degenerate(s["W"], w_ref):
        raise DegenerateFlowError("energy density below threshold; V undefined")
    dt = time_derivative_many(lambda tt, a, b, c: _transported(field, tt, a, b, c, w_ref), t, x, y, z, h_t)
    dV, dW = dt[..., 0:3], dt[..., 3]
    dYB, dYE, dYO, dh = dt[..., 4:7], dt[..., 7:10], dt[..., 10:13], dt[..., 13]

    V, JV = s["V"], s["JV"]
    adv = _mv(JV, V)
    euler = dV + adv
    divV = np.trace(JV, axis1=-2, axis2=-1)
    vgW = np.sum(V * s["gradW"], -1)
    wdiv = s["W"] * divV
    cont = dW + vgW + wdiv

    def lie(dY, Y, JY):
        a, b = _mv(JY, V), _mv(JV, Y)
        return dY + a - b, _rel(dY + a - b, dY, a, b)

    tB, rB = lie(dYB, s["YB"], s["JYB"])
    tE, rE = lie(dYE, s["YE"], s["JYE"])
    tO, rO = lie(dYO, s["YO"], s["JYO"])
    hdiv = s["h"] * divV
    vgh = np.sum(V * s["gradh"], -1)
    hel = dh + hdiv + vgh
    rel = {
        "euler": _rel(euler, dV, adv),
        "continuity": _rel_scalar(cont, dW, vgW, wdiv),
        "transport_B": rB,
        "transport_E": rE,
        "transport_Omega": rO,
        "helicity_density": _rel_scalar(hel, dh, hdiv, vgh),
    }
    return TransportResidualReport(euler, cont, tB, tE, tO, hel, rel)


def straight_line_flow_map(field: AnalyticField, x0, tau: float, w_ref=None) -> Point4:
    """``(tau, x0 + tau V(0, x0))``: the straight-ray transport of a point."""
    x0 = np.asarray(x0, dtype=float)
    V0 = flow_state(field, (0.0, *x0), w_ref).V
    xe = x0 + tau * V0
    return Point4(float(tau), float(xe[0]), float(xe[1]), float(xe[2]))


def straight_line_map_many(field: AnalyticField, pts, tau: float, w_ref=None) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    V0 = flow_state_many(field, 0.0, pts[..., 0], pts[..., 1], pts[..., 2], w_ref).V
    return pts + tau * V0


def geodesic_invariance_check(field: AnalyticField, x0, tau: float, w_ref=None) -> float:
    """``|V(tau, x0 + tau V0) - V(0, x0)|``; zero for straight-ray flow."""
    x0 = np.asarray(x0, dtype=float)
    V0 = flow_state(field, (0.0, *x0), w_ref).V
    pe = straight_line_flow_map(field, x0, tau, w_ref)
    V1 = flow_state(field, pe, w_ref).V
    return float(np.linalg.norm(V1 - V0))


def geodesic_invariance_many(field: AnalyticField, pts, tau: float, w_ref=None) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    V0 = flow_state_many(field, 0.0, pts[..., 0], pts[..., 1], pts[..., 2], w_ref).V
    q = pts + tau * V0
    V1 = flow_state_many(field, tau, q[..., 0], q[..., 1], q[..., 2], w_ref).V
    return np.linalg.norm(V1 - V0, axis=-1)
