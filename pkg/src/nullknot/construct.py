"""Construction routes for null initial data.

Two routes are provided:

* rational maps ``psi = P / Q`` with profile functions ``f, g, h`` of
  ``(chi, eta)``: ``B = f grad(chi) x grad(eta)``, ``V`` the unit vector
  along ``g grad(chi) + h grad(eta)`` and ``E = B x V``;
* conjugate functions ``(f, g)`` with ``F = p (grad f + i grad g)``, either
  in closed form or generated numerically from a holomorphic seed by
  Newton continuation and quadrature.

The map is handled in homogeneous form. With ``G = Q grad(P) - P grad(Q)``,

    grad(psi*) x grad(psi) / (i (1 + |psi|^2)^2) = conj(G) x G / (i (|P|^2 + |Q|^2)^2),

which stays finite on the zero set of ``Q`` and never needs the branch cut of
``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from . import ad
from .core import POLE_TOL, AnalyticField, eval_many
from .errors import (
    BranchJumpError,
    ConfigError,
    DegenerateDirectionError,
    NoConvergenceError,
    PoleError,
    SingularJacobianError,
    ZeroPsiError,
)

EPS = 1e-30


# polynomials ---------------------------------------------------------------


@dataclass(frozen=True)
class Poly3:
    """Complex polynomial in (x, y, z): ``sum c * x^a y^b z^c``."""

    terms: tuple  # ((coef, (a, b, c)), ...)

    def __call__(self, x, y, z):
        out = 0.0
        for coef, (a, b, c) in self.terms:
            out = out + coef * _mono(x, a) * _mono(y, b) * _mono(z, c)
        return out

    @classmethod
    def from_json(cls, items):
        terms = []
        for it in items:
            try:
                if isinstance(it, dict):
                    coef = complex(float(it.get("re", 0.0)), float(it.get("im", 0.0)))
                    exps = tuple(int(e) for e in it["exp"])
                else:
                    re, im, a, b, c = it
                    coef = complex(float(re), float(im))
                    exps = (int(a), int(b), int(c))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad polynomial term {it!r}") from exc
            if len(exps) != 3 or min(exps) < 0:
                raise ConfigError(f"exponents must be three non-negative integers: {it!r}")
            terms.append((coef, exps))
        return cls(tuple(terms))


def _mono(v, k):
    if k == 0:
        return 1.0
    if k == 1:
        return v
    return v**k


@dataclass(frozen=True)
class RationalMap:
    """``psi(x) = P(x - c) / Q(x - c)`` for polynomials ``P``, ``Q`` and centre ``c``."""

    num: Callable
    den: Callable
    center: tuple = (0.0, 0.0, 0.0)
    name: str = "rational_map"

    def parts(self, x, y, z):
        cx, cy, cz = self.center
        u, v, w = x - cx, y - cy, z - cz
        return self.num(u, v, w), self.den(u, v, w)

    def psi(self, x, y, z):
        P, Q = self.parts(x, y, z)
        Q = np.asarray(Q, dtype=complex)
        if np.any(np.abs(Q) <= POLE_TOL):
            raise PoleError(f"{self.name}: denominator vanishes")
        return np.asarray(P, dtype=complex) / Q

    def gradient(self, x, y, z):
        """``(psi, grad psi)`` with shape ``(...,)`` and ``(..., 3)``."""
        xs = ad.seed([np.asarray(c, float) for c in np.broadcast_arrays(x, y, z)])
        tag = xs[0].tag
        P, Q = self.parts(*xs)
        q = P / Q
        val = np.asarray(ad.value(q, tag), dtype=complex)
        g = np.stack([np.broadcast_to(np.asarray(ad.deriv(q, j, tag), complex), val.shape) for j in range(3)], -1)
        return val, g

    @classmethod
    def from_json(cls, spec: dict, name="rational_map"):
        try:
            num = Poly3.from_json(spec["numerator"])
            den = Poly3.from_json(spec["denominator"])
        except KeyError as exc:
            raise ConfigError(f"rational map spec needs {exc}") from exc
        center = tuple(float(c) for c in spec.get("center", (0.0, 0.0, 0.0)))
        if len(center) != 3:
            raise ConfigError("center must have three entries")
        return cls(num, den, center, spec.get("name", name))


def hopf_map(center=(0.0, 0.0, 0.0)) -> RationalMap:
    """``psi = 2(x + iy) / (2z + i(r^2 - 1))``, preimages linked once."""
    num = Poly3(((2.0, (1, 0, 0)), (2j, (0, 1, 0))))
    den = Poly3(((2.0, (0, 0, 1)), (1j, (2, 0, 0)), (1j, (0, 2, 0)), (1j, (0, 0, 2)), (-1j, (0, 0, 0))))
    return RationalMap(num, den, tuple(float(c) for c in center), "hopf")


# profiles ------------------------------------------------------------------


def _const(c):
    def f(chi, eta):
        return c + 0.0 * chi

    return f


@dataclass(frozen=True)
class ProfileFunctions:
    """Profiles ``f, g, h`` of ``(chi, eta)``; callables must accept duals.

    ``uses_eta`` tells the evaluator whether ``eta`` has to be formed at all
    (it is undefined on the zero and pole sets of ``psi``).
    """

    f: Callable = dc_field(default_factory=lambda: _const(1.0))
    g: Callable = dc_field(default_factory=lambda: _const(1.0))
    h: Callable = dc_field(default_factory=lambda: _const(0.0))
    uses_eta: bool = False


def helical_map() -> RationalMap:
    """``psi = exp(z + i (x cos z - y sin z))``: not a polynomial map, but
    accepted by the evaluator since ``P`` and ``Q`` may be any dual-aware
    callables. Paired with :func:`helical_profiles` it reproduces the
    circularly polarized wave ``E = (cos z, -sin z, 0)``, ``B = (sin z, cos z, 0)``
    at ``t = 0``, which is null and shear-free with nonzero derivatives."""

    def num(x, y, z):
        return ad.exp(z + 1j * (x * ad.cos(z) - y * ad.sin(z)))

    def den(x, y, z):
        return 1.0 + 0.0 * x

    return RationalMap(num, den, name="helical")


def helical_profiles() -> ProfileFunctions:
    """``f = 1 / (2 chi (1 - chi))``, ``g = 1``, ``h = 0`` (see :func:`helical_map`)."""

    def f(chi, eta):
        return 0.5 / (chi * (1.0 - chi))

    return ProfileFunctions(f=f)


def planar_map() -> RationalMap:
    """``psi = x + iy``."""
    return RationalMap(Poly3(((1.0, (1, 0, 0)), (1j, (0, 1, 0)))), Poly3(((1.0, (0, 0, 0)),)), name="planar")


# rational-map construction ---------------------------------------------------


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _map_jet(rmap: RationalMap, x, y, z):
    """Inner-differentiated pieces of the construction (dual-aware in x, y, z)."""
    xs = ad.seed([x, y, z])
    tag = xs[0].tag
    P, Q = rmap.parts(*xs)
    P = P + 0.0 * xs[0]
    Q = Q + 0.0 * xs[0]
    Pv, Qv = ad.value(P, tag), ad.value(Q, tag)
    gP = [ad.deriv(P, j, tag) for j in range(3)]
    gQ = [ad.deriv(Q, j, tag) for j in range(3)]
    nP, nQ = ad.abs2(Pv), ad.abs2(Qv)
    S = nP + nQ
    chi_d = ad.abs2(P) / (ad.abs2(P) + ad.abs2(Q))
    chi = ad.value(chi_d, tag)
    gchi = [ad.deriv(chi_d, j, tag) for j in range(3)]
    G = [Qv * gP[j] - Pv * gQ[j] for j in range(3)]
    Gc = [ad.conj(c) for c in G]
    cr = _cross(Gc, G)
    # conj(G) x G is purely imaginary
    S2 = S * S
    chi_cross_eta = [ad.imag(c) / S2 for c in cr]
    return dict(P=Pv, Q=Qv, gP=gP, gQ=gQ, S=S, chi=chi, gchi=gchi, cross=chi_cross_eta)


def _eta_parts(j):
    """eta = arg P - arg Q and its gradient Im(grad P / P) - Im(grad Q / Q)."""
    P, Q = j["P"], j["Q"]
    eta = ad.arg(P) - ad.arg(Q)
    geta = [ad.imag(j["gP"][k] / P) - ad.imag(j["gQ"][k] / Q) for k in range(3)]
    return eta, geta


def _triple_fn(rmap: RationalMap, profiles: ProfileFunctions, vmin: float = POLE_TOL):
    """Return ``fn(x, y, z) -> (E, B, V, |g grad chi + h grad eta|)`` (dual-aware)."""

    def fn(x, y, z):
        j = _map_jet(rmap, x, y, z)
        chi = j["chi"]
        if profiles.uses_eta:
            eta, geta = _eta_parts(j)
        else:
            eta, geta = 0.0 * chi, [0.0 * chi] * 3
        fv = profiles.f(chi, eta)
        gv = profiles.g(chi, eta)
        hv = profiles.h(chi, eta)
        B = [fv * c for c in j["cross"]]
        d = [gv * j["gchi"][k] + hv * geta[k] for k in range(3)]
        d2 = _dot(d, d)
        if np.any(np.asarray(_leaf(d2)) <= vmin * vmin):
            raise DegenerateDirectionError("g grad(chi) + h grad(eta) vanishes; V undefined")
        dn = ad.sqrt(d2)
        V = [c / dn for c in d]
        E = list(_cross(B, V))
        return E, B, V, dn

    return fn


def _leaf(a):
    while ad.is_dual(a):
        a = a.val
    return a


def _vec(comps, shape):
    return np.stack([np.broadcast_to(np.asarray(_leaf(c), dtype=float), shape) for c in comps], axis=-1)


def _xyz(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1], x[..., 2]


def chi_eta(rmap: RationalMap, x):
    """``chi = |psi|^2 / (1 + |psi|^2)`` in [0, 1] and ``eta = arg psi`` in [0, 2 pi)."""
    P, Q = rmap.parts(*_xyz(x))
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    S = np.abs(P) ** 2 + np.abs(Q) ** 2
    if np.any(S <= POLE_TOL**2):
        raise PoleError("numerator and denominator of psi vanish together")
    chi = np.abs(P) ** 2 / S
    if np.any(np.abs(P) <= POLE_TOL) or np.any(np.abs(Q) <= POLE_TOL):
        raise ZeroPsiError("eta undefined where psi is 0 or infinite")
    eta = np.mod(np.angle(P) - np.angle(Q), 2 * np.pi)
    return chi, eta


def knotted_B(rmap: RationalMap, profiles: ProfileFunctions, x) -> np.ndarray:
    """``B = f(chi, eta) grad(chi) x grad(eta)`` at points ``x`` (shape (..., 3))."""
    xx, yy, zz = _xyz(x)
    shape = xx.shape
    j = _map_jet(rmap, xx, yy, zz)
    if np.any(j["S"] <= POLE_TOL**2):
        raise PoleError("numerator and denominator of psi vanish together")
    chi = j["chi"]
    eta = _eta_parts(j)[0] if profiles.uses_eta else 0.0 * chi
    fv = profiles.f(chi, eta)
    return _vec([fv * c for c in j["cross"]], shape)


def perpendicular_V(rmap: RationalMap, profiles: ProfileFunctions, x, vmin: float = POLE_TOL) -> np.ndarray:
    """Unit vector along ``g grad(chi) + h grad(eta)``; orthogonal to :func:`knotted_B`."""
    xx, yy, zz = _xyz(x)
    return _vec(_triple_fn(rmap, profiles, vmin)(xx, yy, zz)[2], xx.shape)


def assemble_initial_data(rmap: RationalMap, profiles: ProfileFunctions, x, vmin: float = POLE_TOL):
    """``(E, B, V)`` with ``E = B x V``; raises DegenerateDirectionError when V is undefined.

    A zero ``B`` (constant ``psi``) yields a zero triple for E and B; callers
    detect it through :func:`initial_condition_residuals`.
    """
    xx, yy, zz = _xyz(x)
    E, B, V, _ = _triple_fn(rmap, profiles, vmin)(xx, yy, zz)
    s = xx.shape
    return _vec(E, s), _vec(B, s), _vec(V, s)


def rational_map_field(rmap: RationalMap, profiles: Optional[ProfileFunctions] = None, vmin: float = POLE_TOL) -> AnalyticField:
    """Static analytic field ``F = E + iB`` from the rational-map triple.

    The time argument is ignored: this is initial data, meaningful at
    ``t = 0`` only.
    """
    profiles = profiles or ProfileFunctions()
    tf = _triple_fn(rmap, profiles, vmin)

    def fn(t, x, y, z):
        E, B, _, _ = tf(x, y, z)
        return tuple(E[k] + 1j * B[k] for k in range(3))

    def dens(t, x, y, z):
        P, Q = rmap.parts(x, y, z)
        S = np.abs(np.asarray(P, complex)) ** 2 + np.abs(np.asarray(Q, complex)) ** 2
        return [S]

    return AnalyticField(f"rational_map[{rmap.name}]", fn, denominators=dens, notes="initial data, t ignored")


def initial_condition_residuals(rmap: RationalMap, profiles: ProfileFunctions, x, degenerate_tol: float = 1e-14):
    """Scale-normalized ``(div E, E.curlE - B.curlB, B.curlE + E.curlB)``.

    Points where B vanishes identically (e.g. constant ``psi``) are returned
    as NaN: the normalized residual is 0/0 there and is flagged, not zeroed.
    """
    xx, yy, zz = _xyz(x)
    fld = rational_map_field(rmap, profiles)
    F, J = eval_many(fld, 0.0, xx, yy, zz)
    E, B = F.real, F.imag
    JE, JB = J.real, J.imag
    divE = np.trace(JE, axis1=-2, axis2=-1)
    cE = _curl(JE)
    cB = _curl(JB)
    r1 = np.abs(divE) / np.maximum(np.linalg.norm(JE, axis=(-2, -1)), EPS)
    a = np.sum(E * cE, -1) - np.sum(B * cB, -1)
    b = np.sum(B * cE, -1) + np.sum(E * cB, -1)
    nE, nB = np.linalg.norm(E, axis=-1), np.linalg.norm(B, axis=-1)
    ncE, ncB = np.linalg.norm(cE, axis=-1), np.linalg.norm(cB, axis=-1)
    r2 = np.abs(a) / np.maximum(nE * ncE + nB * ncB, EPS)
    r3 = np.abs(b) / np.maximum(nB * ncE + nE * ncB, EPS)
    degenerate = (nB <= degenerate_tol) & (nE <= degenerate_tol)
    out = np.stack([r1, r2, r3], axis=-1)
    out[degenerate] = np.nan
    return out


def _curl(J):
    return np.stack([J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1)


# optional profile search ------------------------------------------------------


@dataclass
class ProfileSearchResult:
    profiles: ProfileFunctions
    coeffs: np.ndarray
    cost: float
    max_residual: float
    success: bool
    message: str


_BASIS = ("1", "chi", "cos", "sin")


def _basis(chi, eta):
    return [1.0 + 0.0 * chi, chi, ad.cos(eta), ad.sin(eta)]


def _profiles_from_coeffs(c):
    c = np.asarray(c, dtype=float).reshape(3, len(_BASIS))

    def mk(row, base):
        def fn(chi, eta):
            out = base + 0.0 * chi
            for k, b in enumerate(_basis(chi, eta)):
                out = out + row[k] * b
            return out

        return fn

    return ProfileFunctions(mk(c[0], 1.0), mk(c[1], 1.0), mk(c[2], 0.0), uses_eta=bool(np.any(c[:, 2:] != 0)))


def profile_search(rmap: RationalMap, points, x0=None, max_nfev: int = 200) -> ProfileSearchResult:
    """Best-effort least-squares search for profiles reducing the shear residuals.

    ``f``, ``g`` and ``h`` are offsets from the defaults spanned by
    ``{1, chi, cos eta, sin eta}``. No solution is promised; the result
    reports whatever the optimizer reached.
    """
    from scipy.optimize import least_squares

    pts = np.asarray(points, dtype=float)

    def resid(c):
        try:
            r = initial_condition_residuals(rmap, _profiles_from_coeffs(c), pts)
        except (DegenerateDirectionError, PoleError, ZeroPsiError):
            return np.full(3 * len(pts), 1e3)
        return np.nan_to_num(r, nan=1e3).ravel()

    c0 = np.zeros(3 * len(_BASIS)) if x0 is None else np.asarray(x0, dtype=float)
    sol = least_squares(resid, c0, max_nfev=max_nfev)
    r = resid(sol.x)
    return ProfileSearchResult(_profiles_from_coeffs(sol.x), sol.x, float(sol.cost), float(np.max(r)), bool(sol.success), str(sol.message))


# conjugate functions ----------------------------------------------------------


@dataclass
class ConjugatePair:
    """Complex ``f + ig`` and its gradient ``grad f + i grad g``.

    ``fg(x)`` and ``grad(x)`` take points of shape (..., 3). ``provenance``
    is ``"closed-form"`` or ``"nurowski"``; numerically generated pairs also
    carry their grid data and solver statistics.
    """

    fg: Callable
    grad: Callable
    provenance: str = "closed-form"
    name: str = "conjugate_pair"
    grid: Optional[dict] = None
    stats: dict = dc_field(default_factory=dict)


def _ad_pair(expr, name, dens=None):
    def fg(x):
        xx, yy, zz = _xyz(x)
        if dens is not None and np.any(np.abs(dens(xx, yy, zz)) <= POLE_TOL):
            raise PoleError(f"{name}: denominator vanishes")
        return np.asarray(expr(xx, yy, zz), dtype=complex) + 0.0 * xx

    def grad(x):
        xx, yy, zz = _xyz(x)
        if dens is not None and np.any(np.abs(dens(xx, yy, zz)) <= POLE_TOL):
            raise PoleError(f"{name}: denominator vanishes")
        xs = ad.seed([xx, yy, zz])
        q = expr(*xs)
        return np.stack([np.broadcast_to(np.asarray(ad.deriv(q, j, xs[0].tag), complex), xx.shape) for j in range(3)], -1)

    return fg, grad


def known_family_pair() -> ConjugatePair:
    """Closed-form conjugate pair ``f + ig = 4(x - iy) / (r^2 - 1 + 2iz)`` (valid at t = 0)."""

    def expr(x, y, z):
        return 4.0 * (x - 1j * y) / (x * x + y * y + z * z - 1.0 + 2j * z)

    def dens(x, y, z):
        return x * x + y * y + z * z - 1.0 + 2j * z

    fg, grad = _ad_pair(expr, "known_family_pair", dens)
    return ConjugatePair(fg, grad, "closed-form", "known_family_pair")


def known_family_prefactor(m: int, n: int) -> Callable:
    """``p = mn A^(m+1) b^(n-1) / D^(m+n+1)`` at ``t = 0`` with
    ``A = r^2 - 1 + 2iz``, ``b = 2(x - iy)``, ``D = r^2 + 1``."""
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ConfigError("m and n must be positive integers")

    def p(x, y, z):
        r2 = x * x + y * y + z * z
        A = r2 - 1.0 + 2j * z
        b = 2.0 * (x - 1j * y)
        D = r2 + 1.0
        return (m * n) * A ** (m + 1) * b ** (n - 1) / D ** (m + n + 1)

    return p


def known_family_initial_field(m: int, n: int) -> AnalyticField:
    """``F = p grad(f + ig)`` from the closed-form conjugate pair and prefactor.

    An independent route to the family's ``t = 0`` data; the time argument
    must be 0.
    """
    p = known_family_prefactor(m, n)

    def fn(t, x, y, z):
        if np.any(np.asarray(t) != 0):
            raise ConfigError("the conjugate-pair form of the family is used at t = 0 only")
        xs = ad.seed([x, y, z])
        tag = xs[0].tag
        q = 4.0 * (xs[0] - 1j * xs[1]) / (xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2] - 1.0 + 2j * xs[2])
        pv = p(x, y, z)
        return tuple(pv * ad.deriv(q, j, tag) for j in range(3))

    def dens(t, x, y, z):
        return [x * x + y * y + z * z - 1.0 + 2j * z]

    return AnalyticField(f"known_family_initial({m},{n})", fn, denominators=dens, notes="t = 0 only", params={"m": m, "n": n})


def conjugacy_residuals(pair: ConjugatePair, x):
    """``(||grad f| - |grad g|| / (|grad f| + |grad g|), |grad f . grad g| / (|grad f||grad g|))``."""
    G = np.asarray(pair.grad(x), dtype=complex)
    return conjugacy_from_gradient(G)


def conjugacy_from_gradient(G):
    gf, gg = G.real, G.imag
    nf, ng = np.linalg.norm(gf, axis=-1), np.linalg.norm(gg, axis=-1)
    r1 = np.abs(nf - ng) / np.maximum(nf + ng, EPS)
    r2 = np.abs(np.sum(gf * gg, -1)) / np.maximum(nf * ng, EPS)
    return r1, r2


def field_from_conjugate_pair(pair: ConjugatePair, prefactor, x):
    """``F = p (grad f + i grad g)``; returns ``(F, degenerate)``.

    ``prefactor`` is a constant or a callable ``p(x, y, z)``. ``degenerate``
    marks points where the pair has zero gradient (F vanishes there for a
    reason unrelated to ``p``).
    """
    G = np.asarray(pair.grad(x), dtype=complex)
    xx, yy, zz = _xyz(x)
    pv = prefactor(xx, yy, zz) if callable(prefactor) else prefactor
    pv = np.asarray(pv, dtype=complex)
    if not np.all(np.isfinite(pv)):
        raise PoleError("prefactor is not finite")
    degenerate = np.linalg.norm(G, axis=-1) == 0
    return pv[..., None] * G, degenerate


# Nurowski system --------------------------------------------------------------


@dataclass(frozen=True)
class HolomorphicSeed:
    """Holomorphic ``F(phi1, phi2)`` written with dual-aware operations."""

    F: Callable
    name: str = "seed"

    def partials(self, p1, p2):
        """``(F1, F2, F11, F12, F22)`` via nested duals along real directions.

        For a holomorphic function the derivative along a real direction equals
        the complex derivative, so seeding real unit perturbations suffices.
        """
        p1 = np.asarray(p1, dtype=complex)
        p2 = np.asarray(p2, dtype=complex)
        inner = ad.seed([p1, p2])
        outer = ad.seed(inner)
        ti, to = inner[0].tag, outer[0].tag
        q = self.F(*outer)
        d1 = ad.deriv(q, 0, to)
        d2 = ad.deriv(q, 1, to)
        shape = np.broadcast_shapes(p1.shape, p2.shape)
        full = lambda a: np.broadcast_to(np.asarray(a, dtype=complex), shape)
        F1, F2 = full(ad.value(d1, ti)), full(ad.value(d2, ti))
        F11, F12 = full(ad.deriv(d1, 0, ti)), full(ad.deriv(d1, 1, ti))
        F22 = full(ad.deriv(d2, 1, ti))
        return F1, F2, F11, F12, F22

    @classmethod
    def from_json(cls, spec: dict):
        """``{"terms": [[re, im, a, b], ...]}`` for ``sum c phi1^a phi2^b``."""
        try:
            items = spec["terms"]
        except (KeyError, TypeError) as exc:
            raise ConfigError("seed spec needs 'terms'") from exc
        terms = []
        for it in items:
            try:
                if isinstance(it, dict):
                    c = complex(float(it.get("re", 0.0)), float(it.get("im", 0.0)))
                    a, b = (int(e) for e in it["exp"])
                else:
                    re, im, a, b = it
                    c, a, b = complex(float(re), float(im)), int(a), int(b)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad seed term {it!r}") from exc
            if a < 0 or b < 0:
                raise ConfigError("seed exponents must be non-negative")
            terms.append((c, a, b))

        def F(p1, p2):
            out = 0.0 * p1
            for c, a, b in terms:
                out = out + c * _mono(p1, a) * _mono(p2, b)
            return out

        return cls(F, spec.get("name", "polynomial_seed"))


def zero_seed() -> HolomorphicSeed:
    return HolomorphicSeed(lambda p1, p2: 0.0 * p1, "zero")


def linear_seed(c: complex) -> HolomorphicSeed:
    """``F = c phi1``; closed form ``phi1 = c (x - iy) / r^2``, ``phi2 = c z / r^2``."""
    c = complex(c)
    return HolomorphicSeed(lambda p1, p2: c * p1 + 0.0 * p2, f"linear({c})")


NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50


def nurowski_residual(seed: HolomorphicSeed, x, phi):
    """Residual of ``(x+iy) phi1 + z phi2 = dF/dphi1`` and ``-(x-iy) phi2 + z phi1 = dF/dphi2``.

    Returns ``(R, scale)`` with ``R`` of shape (..., 2) and ``scale`` the sum
    of term magnitudes used for the relative test.
    """
    xx, yy, zz = _xyz(x)
    p1, p2 = np.asarray(phi[0], complex), np.asarray(phi[1], complex)
    F1, F2, *_ = seed.partials(p1, p2)
    w, wb = xx + 1j * yy, xx - 1j * yy
    R = np.stack([w * p1 + zz * p2 - F1, -wb * p2 + zz * p1 - F2], -1)
    scale = np.abs(w * p1) + np.abs(zz * p2) + np.abs(F1) + np.abs(wb * p2) + np.abs(zz * p1) + np.abs(F2)
    return R, scale


def nurowski_solve(seed: HolomorphicSeed, x, guess, tol: float = NEWTON_TOL, maxit: int = NEWTON_MAXIT, return_info=False):
    """Newton iteration for ``(phi1, phi2)`` at points ``x`` (shape (..., 3)).

    Converged when ``|R| <= tol * scale`` (an exactly zero residual always
    counts). Raises NoConvergenceError with the worst relative residual.
    """
    xx, yy, zz = _xyz(x)
    shape = xx.shape
    p1 = np.broadcast_to(np.asarray(guess[0], complex), shape).copy()
    p2 = np.broadcast_to(np.asarray(guess[1], complex), shape).copy()
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise ConfigError("Newton guess must be finite")
    w, wb = xx + 1j * yy, xx - 1j * yy
    rel = np.full(shape, np.inf)
    for it in range(maxit + 1):
        F1, F2, F11, F12, F22 = seed.partials(p1, p2)
        R1 = w * p1 + zz * p2 - F1
        R2 = -wb * p2 + zz * p1 - F2
        nrm = np.sqrt(np.abs(R1) ** 2 + np.abs(R2) ** 2)
        scale = np.abs(w * p1) + np.abs(zz * p2) + np.abs(F1) + np.abs(wb * p2) + np.abs(zz * p1) + np.abs(F2)
        done = (nrm == 0) | (nrm <= tol * scale)
        rel = np.where(nrm == 0, 0.0, nrm / np.maximum(scale, 1e-300))
        if np.all(done):
            if return_info:
                return (p1, p2), {"iterations": it, "max_rel_residual": float(np.max(rel)) if rel.size else 0.0}
            return p1, p2
        if it == maxit:
            break
        a, b = w - F11, zz - F12
        c, d = zz - F12, -wb - F22
        det = a * d - b * c
        jscale = np.maximum(np.abs(a) * np.abs(d) + np.abs(b) * np.abs(c), 1e-300)
        bad = (~done) & (np.abs(det) <= 1e-14 * jscale)
        if np.any(bad):
            raise SingularJacobianError("Newton Jacobian of the Nurowski system is singular")
        det = np.where(done, 1.0, det)
        d1 = (d * R1 - b * R2) / det
        d2 = (-c * R1 + a * R2) / det
        p1 = np.where(done, p1, p1 - d1)
        p2 = np.where(done, p2, p2 - d2)
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
            break
    worst = float(np.nanmax(np.where(np.isfinite(rel), rel, np.inf))) if rel.size else float("inf")
    raise NoConvergenceError(f"Newton did not converge in {maxit} iterations (relative residual {worst:.3e})", residual=worst)


def _differential(p1, p2):
    """``d(f + ig) = (phi1^2 - phi2^2) dx + i (phi1^2 + phi2^2) dy + 2 phi1 phi2 dz``."""
    a, b = p1 * p1, p2 * p2
    return np.stack([a - b, 1j * (a + b), 2.0 * p1 * p2], -1)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class Region:
    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        if len(self.lo) != 3 or len(self.hi) != 3 or len(self.shape) != 3:
            raise ConfigError("region needs three bounds and three counts")
        if any(h <= l for l, h in zip(self.lo, self.hi)) or any(int(n) < 2 for n in self.shape):
            raise ConfigError("region must have hi > lo and at least 2 nodes per axis")

    def axes(self):
        return [np.linspace(l, h, int(n)) for l, h, n in zip(self.lo, self.hi, self.shape)]


class _Continuation:
    """Solves along many parallel paths at once, tracking branches."""

    def __init__(self, seed, tol, maxit, jump_rel, jump_abs):
        self.seed, self.tol, self.maxit = seed, tol, maxit
        self.jump_rel, self.jump_abs = jump_rel, jump_abs
        self.max_rel = 0.0
        self.solves = 0

    def solve(self, pts, guess, where, check_jump=True):
        try:
            (p1, p2), info = nurowski_solve(self.seed, pts, guess, self.tol, self.maxit, return_info=True)
        except NoConvergenceError as exc:
            raise NoConvergenceError(f"{exc} on {where}", residual=exc.residual, line=where) from exc
        self.max_rel = max(self.max_rel, info["max_rel_residual"])
        self.solves += int(np.size(p1))
        if not check_jump:
            return p1, p2
        g1, g2 = (np.broadcast_to(np.asarray(g, complex), np.shape(p1)) for g in guess)
        jump = np.sqrt(np.abs(p1 - g1) ** 2 + np.abs(p2 - g2) ** 2)
        size = 0.5 * (np.sqrt(np.abs(p1) ** 2 + np.abs(p2) ** 2) + np.sqrt(np.abs(g1) ** 2 + np.abs(g2) ** 2))
        bad = jump > self.jump_rel * size + self.jump_abs
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise BranchJumpError(f"continuation jumped branches on {where} at index {idx}", line=(where, idx))
        return p1, p2

    def integrate(self, start, direction, length_nodes, guess, comp, where):
        """March from ``start`` (..., 3) along ``direction`` through ``length_nodes``
        (1-D offsets, first = 0). Returns (integral at nodes, phi at nodes)."""
        start = np.asarray(start, float)
        e = np.asarray(direction, float)
        n = len(length_nodes)
        shp = start.shape[:-1]
        vals = np.zeros((n,) + shp, complex)
        phis = np.zeros((n, 2) + shp, complex)
        p = self.solve(start, guess, where, check_jump=False)
        phis[0] = p
        acc = np.zeros(shp, complex)
        for k in range(n - 1):
            a, b = length_nodes[k], length_nodes[k + 1]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            for xg, wg in zip(_GL_X, _GL_W):
                q = start + (mid + half * xg) * e
                p = self.solve(q, p, where)
                acc = acc + half * wg * _differential(*p)[..., comp]
            q = start + b * e
            p = self.solve(q, p, where)
            vals[k + 1] = acc
            phis[k + 1] = p
        return vals, phis


def conjugate_pair_from_seed(
    seed: HolomorphicSeed,
    region: Region,
    guess,
    tol: float = NEWTON_TOL,
    maxit: int = NEWTON_MAXIT,
    jump_rel: float = 0.5,
    jump_abs: float = 1e-9,
) -> ConjugatePair:
    """Conjugate pair on a grid over ``region`` from a Nurowski seed.

    ``f + ig`` vanishes at the ``lo`` corner. Values on the ``x = lo`` face are
    built by quadrature along y and then z; every node is then reached by
    composite 4-point Gauss quadrature of ``phi1^2 - phi2^2`` along x.
    Integrating along x alone would leave each line with its own constant
    and spoil the y and z gradients. ``guess`` is a pair of complex numbers or
    a callable returning one for a point.
    """
    xs, ys, zs = region.axes()
    x0, y0, z0 = region.lo
    cont = _Continuation(seed, tol, maxit, jump_rel, jump_abs)
    corner = np.array([x0, y0, z0], float)
    g0 = guess(corner) if callable(guess) else guess
    # along y at (x0, z0)
    vy, py = cont.integrate(corner, (0, 1, 0), ys - y0, g0, 1, "y-edge")
    # along z at x0 for every y
    starts = np.stack([np.full_like(ys, x0), ys, np.full_like(ys, z0)], -1)
    vz, pz = cont.integrate(starts, (0, 0, 1), zs - z0, (py[:, 0], py[:, 1]), 2, "x0-face z-lines")
    face = vy[None, :] + vz  # (nz, ny)
    # along x for every (y, z)
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    starts = np.stack([np.full_like(Y, x0), Y, Z], -1)
    face_phi = (pz[:, 0].T, pz[:, 1].T)  # (ny, nz)
    vx, px = cont.integrate(starts, (1, 0, 0), xs - x0, face_phi, 0, "x-lines")
    values = face.T[None, :, :] + vx  # (nx, ny, nz)
    phi1, phi2 = px[:, 0], px[:, 1]
    grid = {
        "axes": (xs, ys, zs),
        "fg": values,
        "grad": _differential(phi1, phi2),
        "phi": (phi1, phi2),
    }
    stats = {"max_newton_rel_residual": cont.max_rel, "newton_solves": cont.solves}

    def nearest(x):
        x = np.asarray(x, float)
        idx = [np.clip(np.rint((x[..., k] - (xs, ys, zs)[k][0]) / np.diff((xs, ys, zs)[k][:2])[0]).astype(int), 0, len((xs, ys, zs)[k]) - 1) for k in range(3)]
        node = np.stack([(xs, ys, zs)[k][idx[k]] for k in range(3)], -1)
        return idx, node

    def grad(x):
        idx, _ = nearest(x)
        g = (phi1[tuple(idx)], phi2[tuple(idx)])
        p1, p2 = nurowski_solve(seed, x, g, tol, maxit)
        return _differential(p1, p2)

    def fg(x):
        x = np.asarray(x, float)
        idx, node = nearest(x)
        base = values[tuple(idx)]
        d = x - node
        p = (phi1[tuple(idx)], phi2[tuple(idx)])
        acc = np.zeros(x.shape[:-1], complex)
        for xg, wg in zip(_GL_X, _GL_W):
            q = node + (0.5 + 0.5 * xg) * d
            p = nurowski_solve(seed, q, p, tol, maxit)
            acc = acc + 0.5 * wg * np.sum(_differential(*p) * d, -1)
        return base + acc

    return ConjugatePair(fg, grad, "nurowski", seed.name, grid=grid, stats=stats)


def grid_fd_gradient(pair: ConjugatePair) -> np.ndarray:
    """Fourth-order central differences of the gridded ``f + ig`` (interior nodes).

    Compared against the exact differential this measures quadrature and
    integrability error. Returns an array shaped like ``grid['grad']`` with NaN
    on the two-node boundary layer.
    """
    if pair.grid is None:
        raise ConfigError("pair has no grid data")
    v = pair.grid["fg"]
    axes = pair.grid["axes"]
    out = np.full(v.shape + (3,), np.nan + 0j)
    for k in range(3):
        h = axes[k][1] - axes[k][0]
        vm2, vm1, vp1, vp2 = (np.roll(v, s, axis=k) for s in (2, 1, -1, -2))
        d = (vm2 - 8 * vm1 + 8 * vp1 - vp2) / (12 * h)
        sl = [slice(None)] * 3
        sl[k] = slice(2, v.shape[k] - 2)
        out[tuple(sl) + (k,)] = d[tuple(sl)]
    return out
