"""Closed-form knotted null fields and Bateman potentials.

All point arguments are ``(t, x, y, z)`` tuples; ``x, y, z`` may be arrays of
a common broadcast shape, in which case results gain that shape as leading
dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ad
from .core import POLE_TOL, AnalyticField
from .errors import PoleError, ZeroModulusError

EPS = 1e-30


@dataclass(frozen=True)
class KnottedFamilyParams:
    m: int
    n: int

    def __post_init__(self):
        for v in (self.m, self.n):
            if int(v) != v or v < 1:
                raise ValueError("m and n must be positive integers")


def _split_point(p):
    t, x, y, z = p
    x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
    scalar = x.ndim == 0 and y.ndim == 0 and z.ndim == 0
    return float(t), x, y, z, scalar


def _squeeze(a, scalar):
    return a[()] if scalar and np.ndim(a) == 0 else a


def _family_denominator(t, x, y, z):
    # r^2 - (t - i)^2
    return x * x + y * y + z * z - (t - 1j) ** 2


def knotted_family(params) -> AnalyticField:
    """Time-dependent knotted null field ``F = grad(alpha^m) x grad(beta^n)``.

    With ``A = r^2 - t^2 - 1 + 2iz``, ``b = 2(x - iy)`` and
    ``D = r^2 - (t - i)^2`` the potentials are ``alpha = A/D``, ``beta = b/D``.
    Expanding the gradients by hand,

        F = mn A^(m-1) b^(n-1) (P x Q) / D^(m+n+2),
        P = D grad(A) - A grad(D) = (D - A) (2x, 2y, 2z) + 2iD z_hat,
        Q = D grad(b) - b grad(D).

    At ``t = 0`` this coincides with ``p grad(f + ig)``, ``f + ig = 2b/A``,
    ``p = mn A^(m+1) b^(n-1) / D^(m+n+1)`` (see
    :func:`nullknot.construct.known_family_initial_field`); that static form
    is not carried to ``t != 0`` because it stops solving Maxwell's equations
    there. ``|D| >= 1`` for real arguments, so the field has no poles.
    """
    if not isinstance(params, KnottedFamilyParams):
        params = KnottedFamilyParams(*params)
    m, n = params.m, params.n

    def fn(t, x, y, z):
        r2 = x * x + y * y + z * z
        A = r2 - (t * t + 1.0) + 2j * z
        D = r2 - (t - 1j) * (t - 1j)
        b = 2.0 * (x - 1j * y)
        DmA = D - A
        P = (DmA * (2.0 * x), DmA * (2.0 * y), DmA * (2.0 * z) + 2j * D)
        Q = (2.0 * D - b * (2.0 * x), -2j * D - b * (2.0 * y), -(b * (2.0 * z)))
        pref = (m * n) * (A ** (m - 1)) * (b ** (n - 1)) / (D ** (m + n + 2))
        c = _cross(P, Q)
        return pref * c[0], pref * c[1], pref * c[2]

    def dens(t, x, y, z):
        d = _family_denominator(t, x, y, z)
        # |D| >= 1 on real points; anything else signals a corrupted input
        if np.any(np.abs(d) < 1.0 - 1e-9):
            raise PoleError("knotted family denominator below its real-axis bound")
        return [d]

    return AnalyticField(
        f"knotted_family({m},{n})",
        fn,
        denominators=dens,
        notes="denominator r^2-(t-i)^2 has modulus >= 1 for real (t,x,y,z)",
        params={"m": m, "n": n},
    )


@dataclass(frozen=True)
class BatemanPair:
    """Complex potentials ``alpha(t, x, y, z)`` and ``beta(t, x, y, z)``.

    Both callables must be written with :mod:`nullknot.ad` operations so
    that they accept dual arguments.
    """

    alpha: Callable
    beta: Callable
    denominators: Optional[Callable] = None
    name: str = "bateman_pair"

    def check_poles(self, t, x, y, z):
        if self.denominators is None:
            return
        for den in self.denominators(t, x, y, z):
            if np.any(np.abs(den) <= POLE_TOL):
                raise PoleError(f"{self.name}: denominator vanishes at a requested point")

    def values(self, p):
        t, x, y, z, scalar = _split_point(p)
        self.check_poles(t, x, y, z)
        shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
        a = np.broadcast_to(np.asarray(self.alpha(t, x, y, z), dtype=complex), shape)
        b = np.broadcast_to(np.asarray(self.beta(t, x, y, z), dtype=complex), shape)
        return _squeeze(a, scalar), _squeeze(b, scalar)

    def gradients4(self, p):
        """``(alpha, beta, grad4_alpha, grad4_beta)``; 4-gradients ordered (t, x, y, z)."""
        t, x, y, z, scalar = _split_point(p)
        self.check_poles(t, x, y, z)
        shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
        tv = np.full(shape, t)
        vs = ad.seed([tv] + [np.broadcast_to(c, shape) for c in (x, y, z)])
        tag = vs[0].tag
        out = []
        for f in (self.alpha, self.beta):
            q = f(*vs)
            val = np.broadcast_to(np.asarray(ad.value(q, tag), dtype=complex), shape)
            g = np.stack(
                [np.broadcast_to(np.asarray(ad.deriv(q, k, tag), dtype=complex), shape) for k in range(4)],
                axis=-1,
            )
            out.append((val, g))
        (a, ga), (b, gb) = out
        if scalar:
            return a[()], b[()], ga.reshape(4), gb.reshape(4)
        return a, b, ga, gb

    def magnitude_phase(self, p):
        """``(r_alpha, theta_alpha, r_beta, theta_beta)``."""
        a, b = self.values(p)
        return np.abs(a), np.angle(a), np.abs(b), np.angle(b)


def knotted_family_pair(params) -> BatemanPair:
    """Potentials ``(alpha^m, beta^n)`` generating :func:`knotted_family`.

    ``alpha = (r^2 - t^2 - 1 + 2iz) / D`` and ``beta = 2(x - iy) / D`` with
    ``D = r^2 - (t - i)^2``. The identity ``grad(alpha^m) x grad(beta^n) =``
    ``knotted_family(m, n)`` is checked numerically in the test suite rather
    than assumed.
    """
    if not isinstance(params, KnottedFamilyParams):
        params = KnottedFamilyParams(*params)
    m, n = params.m, params.n

    def alpha(t, x, y, z):
        r2 = x * x + y * y + z * z
        D = r2 - (t - 1j) * (t - 1j)
        return ((r2 - t * t - 1.0 + 2j * z) / D) ** m

    def beta(t, x, y, z):
        r2 = x * x + y * y + z * z
        D = r2 - (t - 1j) * (t - 1j)
        return (2.0 * (x - 1j * y) / D) ** n

    def dens(t, x, y, z):
        return [_family_denominator(t, x, y, z)]

    return BatemanPair(alpha, beta, dens, name=f"knotted_family_pair({m},{n})")


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def field_from_bateman(pair: BatemanPair) -> AnalyticField:
    """``F = grad(alpha) x grad(beta)``.

    The inner gradients are taken by seeding a fresh dual layer inside the
    evaluator, so the outer Jacobian of ``F`` carries exact second
    derivatives of the potentials.
    """

    def fn(t, x, y, z):
        xs = ad.seed([x, y, z])
        tag = xs[0].tag
        a = pair.alpha(t, *xs)
        b = pair.beta(t, *xs)
        ga = [ad.deriv(a, j, tag) for j in range(3)]
        gb = [ad.deriv(b, j, tag) for j in range(3)]
        return _cross(ga, gb)

    return AnalyticField(f"bateman[{pair.name}]", fn, denominators=pair.denominators)


def bateman_constraint_residual(pair: BatemanPair, p) -> np.ndarray:
    """``grad(a) x grad(b) - i (d_t a grad(b) - d_t b grad(a))``; zero iff Bateman."""
    _, _, ga, gb = pair.gradients4(p)
    ca = np.moveaxis(ga[..., 1:], -1, 0)
    cb = np.moveaxis(gb[..., 1:], -1, 0)
    lhs = np.stack(_cross(ca, cb), axis=-1)
    rhs = 1j * (ga[..., :1] * gb[..., 1:] - gb[..., :1] * ga[..., 1:])
    return lhs - rhs


def bateman_constraint_relative(pair: BatemanPair, p) -> np.ndarray:
    _, _, ga, gb = pair.gradients4(p)
    res = bateman_constraint_residual(pair, p)
    sa = np.linalg.norm(ga[..., 1:], axis=-1)
    sb = np.linalg.norm(gb[..., 1:], axis=-1)
    scale = sa * sb + np.abs(ga[..., 0]) * sb + np.abs(gb[..., 0]) * sa
    return np.linalg.norm(res, axis=-1) / np.maximum(scale, EPS)


def first_integrals(pair: BatemanPair, p):
    """``(Re{alpha beta}, Im{alpha beta})`` at ``p``."""
    a, b = pair.values(p)
    ab = a * b
    return np.real(ab), np.imag(ab)


def first_integral_gradients(pair: BatemanPair, p):
    """Spatial gradients of ``Re{alpha beta}`` and ``Im{alpha beta}``."""
    a, b, ga, gb = pair.gradients4(p)
    g = np.asarray(a)[..., None] * gb[..., 1:] + np.asarray(b)[..., None] * ga[..., 1:]
    return np.real(g), np.imag(g)


def _spatial(g):
    return g[..., 1:]


def magnitude_parallel_residual(pair: BatemanPair, p) -> np.ndarray:
    """``grad|alpha|^2 x grad|beta|^2`` (real 3-vector)."""
    a, b, ga, gb = pair.gradients4(p)
    a_ = np.asarray(a)[..., None]
    b_ = np.asarray(b)[..., None]
    gma = 2 * np.real(np.conj(a_) * _spatial(ga))
    gmb = 2 * np.real(np.conj(b_) * _spatial(gb))
    return np.cross(gma, gmb)


def magnitude_parallel_relative(pair: BatemanPair, p) -> np.ndarray:
    a, b, ga, gb = pair.gradients4(p)
    gma = 2 * np.real(np.conj(np.asarray(a)[..., None]) * _spatial(ga))
    gmb = 2 * np.real(np.conj(np.asarray(b)[..., None]) * _spatial(gb))
    res = np.linalg.norm(np.cross(gma, gmb), axis=-1)
    return res / np.maximum(np.linalg.norm(gma, axis=-1) * np.linalg.norm(gmb, axis=-1), EPS)


def phase_parallel_residual(pair: BatemanPair, p, min_modulus=1e-12) -> np.ndarray:
    """``grad(theta_alpha) x grad(theta_beta)``.

    Parallel to ``grad(alpha/alpha*) x grad(beta/beta*)`` up to the nonzero
    factor ``-4 (alpha/alpha*) (beta/beta*)``, but free of the spurious
    singularities of the quotient form.
    """
    a, b, ga, gb = pair.gradients4(p)
    if np.any(np.abs(a) <= min_modulus) or np.any(np.abs(b) <= min_modulus):
        raise ZeroModulusError("phase undefined where a potential vanishes")
    gta = np.imag(_spatial(ga) / np.asarray(a)[..., None])
    gtb = np.imag(_spatial(gb) / np.asarray(b)[..., None])
    return np.cross(gta, gtb)
