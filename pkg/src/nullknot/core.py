"""Spacetime points, analytic field evaluators, and uniform periodic grids.

An :class:`AnalyticField` wraps a closed form ``fn(t, x, y, z) -> (F1, F2, F3)``
for the Riemann-Silberstein vector ``F = E + iB``. The closed form is written
with the operations in :mod:`nullknot.ad`, so the same code returns plain
samples when called with arrays and exact spatial derivatives when called
with dual numbers.

Grid convention: on ``[-L, L)^3`` with ``N`` points per axis the nodes are
``x_j = -L + 2L j / N`` and grid data is stored as a C-ordered array of shape
``(N, N, N, 3)`` indexed ``[ix, iy, iz, component]`` (z fastest among the
spatial indices).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import ad
from .errors import PoleError

POLE_TOL = 1e-12


class Point4(NamedTuple):
    t: float
    x: float
    y: float
    z: float


def as_point(p) -> Point4:
    p = Point4(*(float(c) for c in p))
    if not all(np.isfinite(p)):
        raise ValueError(f"non-finite spacetime point {p}")
    return p


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form field ``F(t, x, y, z)``.

    ``denominators`` returns the list of expressions whose vanishing makes the
    closed form singular; evaluation refuses points where any of them is
    within ``POLE_TOL`` of zero.
    """

    name: str
    fn: Callable
    denominators: Optional[Callable] = None
    notes: str = ""
    params: dict = dc_field(default_factory=dict)

    def check_poles(self, t, x, y, z):
        if self.denominators is None:
            return
        for den in self.denominators(t, x, y, z):
            if np.any(np.abs(den) <= POLE_TOL):
                raise PoleError(f"{self.name}: denominator vanishes at a requested point")

    def value(self, t, x, y, z) -> np.ndarray:
        """Field samples, shape ``broadcast(x, y, z).shape + (3,)``."""
        x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
        self.check_poles(t, x, y, z)
        shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
        # numpy scalar arithmetic rounds differently from its array loops, so
        # scalars go through 1-element arrays: sample and pointwise evaluation
        # then agree bitwise
        flat = [np.broadcast_to(c, shape).reshape(-1) if shape else c.reshape(1) for c in (x, y, z)]
        comps = self.fn(t, *flat)
        n = flat[0].shape[0]
        out = np.stack([np.broadcast_to(np.asarray(c, dtype=complex), (n,)) for c in comps], axis=-1)
        return out.reshape(shape + (3,))


class SpatialJet:
    """Seeds x, y, z as duals (first or second order) and extracts results."""

    def __init__(self, x, y, z, order=1):
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        self.order = order
        x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
        self.shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
        xs = [np.broadcast_to(c, self.shape) for c in (x, y, z)]
        inner = ad.seed(xs)
        self.inner = inner[0].tag
        if order == 2:
            outer = ad.seed(inner)
            self.outer = outer[0].tag
            self.vars = outer
        else:
            self.outer = None
            self.vars = inner

    def _full(self, a):
        return np.broadcast_to(np.asarray(a), self.shape)

    def val(self, q):
        if self.order == 2:
            q = ad.value(q, self.outer)
        return self._full(ad.value(q, self.inner))

    def grad(self, q):
        """Array ``(..., 3)`` of first derivatives."""
        if self.order == 2:
            q = ad.value(q, self.outer)
        return np.stack([self._full(ad.deriv(q, j, self.inner)) for j in range(3)], axis=-1)

    def hess(self, q):
        """Array ``(..., 3, 3)`` with ``[..., j, k] = d_j d_k q``."""
        if self.order != 2:
            raise ValueError("hessian requires order=2")
        rows = []
        for j in range(3):
            dj = ad.deriv(q, j, self.outer)
            rows.append(np.stack([self._full(ad.deriv(dj, k, self.inner)) for k in range(3)], axis=-1))
        return np.stack(rows, axis=-2)

    def jac(self, comps):
        """Array ``(..., 3, 3)`` with ``[..., i, j] = d_j comps[i]``."""
        return np.stack([self.grad(c) for c in comps], axis=-2)


def field_jet(field: AnalyticField, t, x, y, z, order=1):
    """Evaluate ``field`` on duals; returns ``(components, jet)``."""
    field.check_poles(t, np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    jet = SpatialJet(x, y, z, order=order)
    comps = field.fn(t, *jet.vars)
    return list(comps), jet


def eval_many(field: AnalyticField, t, x, y, z):
    """Values ``(..., 3)`` and spatial Jacobians ``(..., 3, 3)``; ``J[..., i, j] = d_j F_i``."""
    comps, jet = field_jet(field, t, x, y, z)
    F = np.stack([jet.val(c).astype(complex) for c in comps], axis=-1)
    J = jet.jac(comps).astype(complex)
    return F, J


def eval(field: AnalyticField, p):
    """Value and exact spatial Jacobian at a single spacetime point."""
    p = as_point(p)
    F, J = eval_many(field, p.t, np.array([p.x]), np.array([p.y]), np.array([p.z]))
    return F[0], J[0]


def eval_fd_jacobian(field: AnalyticField, p, h=1e-5) -> np.ndarray:
    """Central-difference spatial Jacobian; a test oracle for :func:`eval`."""
    if h <= 0:
        raise ValueError("step must be positive")
    p = as_point(p)
    J = np.empty((3, 3), dtype=complex)
    base = np.array([p.x, p.y, p.z])
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fp = field.value(p.t, *(base + e))
        fm = field.value(p.t, *(base - e))
        J[:, j] = (fp - fm) / (2 * h)
    return J


def time_derivative_fd(field: AnalyticField, p, h=1e-4) -> np.ndarray:
    """Fourth-order time derivative: central difference plus one Richardson step."""
    if h <= 0:
        raise ValueError("step must be positive")
    p = as_point(p)
    return time_derivative_many(field.value, p.t, p.x, p.y, p.z, h)


def time_derivative_many(fn, t, x, y, z, h=1e-4):
    """Richardson-extrapolated ``d/dt`` of any ``fn(t, x, y, z)`` returning arrays."""

    def central(step):
        return (np.asarray(fn(t + step, x, y, z)) - np.asarray(fn(t - step, x, y, z))) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


@dataclass(frozen=True)
class GridSpec:
    L: float
    N: int
    t: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError("box half-width must be positive")
        n = int(self.N)
        if n < 8 or n & (n - 1):
            raise ValueError("points per axis must be a power of two >= 8")
        if not np.isfinite(self.t):
            raise ValueError("time stamp must be finite")

    @property
    def dx(self) -> float:
        return 2 * self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**3

    def axis(self) -> np.ndarray:
        return -self.L + 2 * self.L * np.arange(self.N) / self.N

    def mesh(self):
        a = self.axis()
        return np.meshgrid(a, a, a, indexing="ij")

    def with_time(self, t) -> "GridSpec":
        return GridSpec(self.L, self.N, float(t))


@dataclass
class GridField:
    spec: GridSpec
    data: np.ndarray  # (N, N, N, 3) complex128

    def __post_init__(self):
        n = self.spec.N
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if self.data.shape != (n, n, n, 3):
            raise ValueError(f"grid data must have shape {(n, n, n, 3)}, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("grid data contains non-finite values")

    @property
    def E(self) -> np.ndarray:
        return self.data.real

    @property
    def B(self) -> np.ndarray:
        return self.data.imag

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridField":
        n = spec.N
        return cls(spec, np.zeros((n, n, n, 3), dtype=np.complex128))

    @classmethod
    def from_EB(cls, spec: GridSpec, E, B) -> "GridField":
        return cls(spec, np.asarray(E) + 1j * np.asarray(B))


def sample(field: AnalyticField, spec: GridSpec) -> GridField:
    X, Y, Z = spec.mesh()
    return GridField(spec, field.value(spec.t, X, Y, Z))


# a few elementary fields used across tests and demos ---------------------


def _zero_fn(t, x, y, z):
    return 0.0 * x, 0.0 * x, 0.0 * x


zero_field = AnalyticField("zero", _zero_fn)


def plane_wave(amplitude=1.0) -> AnalyticField:
    """Circularly polarized ``F = a (1, i, 0) exp(i(z - t))`` (null, shear-free)."""
    a = complex(amplitude)

    def fn(t, x, y, z):
        ph = ad.exp(1j * (z - t))
        return a * ph + 0.0 * x, (1j * a) * ph + 0.0 * x, 0.0 * ph + 0.0 * x

    return AnalyticField("plane_wave", fn, params={"amplitude": a})
