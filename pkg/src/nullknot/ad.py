"""Forward-mode dual numbers over complex (or real) numpy arrays.

A :class:`Dual` carries a value and a tuple of directional derivatives, one
per seeded variable. Values and derivatives may themselves be duals, which
gives exact higher derivatives by nesting. Every seeding call draws a fresh
tag from a monotone counter, so an inner differentiation performed inside a
function that is itself being differentiated never confuses the two
perturbations: the dual with the larger tag is always the outer layer.

Only real independent variables are seeded. Non-holomorphic operations
(``conj``, ``real``, ``imag``, ``abs``) are real-linear or real-smooth and are
therefore differentiated componentwise.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = [
    "Dual",
    "seed",
    "value",
    "deriv",
    "is_dual",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "conj",
    "real",
    "imag",
    "abs2",
    "absolute",
    "arctan2",
    "arg",
    "jacobian",
]

_tags = itertools.count(1)


class Dual:
    __slots__ = ("val", "der", "tag")

    def __init__(self, val, der, tag):
        self.val = val
        self.der = tuple(der)
        self.tag = tag

    def __repr__(self):
        return f"Dual(tag={self.tag}, val={self.val!r}, der={self.der!r})"

    # arithmetic --------------------------------------------------------

    def __neg__(self):
        return Dual(-self.val, [-d for d in self.der], self.tag)

    def __pos__(self):
        return self

    def __add__(self, other):
        tag = _top(self, other)
        av, ad = _split(self, tag)
        bv, bd = _split(other, tag)
        if ad is None:
            return Dual(av + bv, bd, tag)
        if bd is None:
            return Dual(av + bv, ad, tag)
        return Dual(av + bv, [x + y for x, y in zip(ad, bd)], tag)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        tag = _top(self, other)
        av, ad = _split(self, tag)
        bv, bd = _split(other, tag)
        if ad is None:
            return Dual(av * bv, [av * y for y in bd], tag)
        if bd is None:
            return Dual(av * bv, [x * bv for x in ad], tag)
        return Dual(av * bv, [x * bv + av * y for x, y in zip(ad, bd)], tag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        tag = _top(self, other)
        av, ad = _split(self, tag)
        bv, bd = _split(other, tag)
        q = av / bv
        if bd is None:
            return Dual(q, [x / bv for x in ad], tag)
        if ad is None:
            return Dual(q, [-(q * y) / bv for y in bd], tag)
        return Dual(q, [(x - q * y) / bv for x, y in zip(ad, bd)], tag)

    def __rtruediv__(self, other):
        tag = self.tag
        q = other / self.val
        return Dual(q, [-(q * y) / self.val for y in self.der], tag)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Dual powers are restricted to integer exponents")
        n = int(n)
        if n == 0:
            return Dual(self.val * 0 + 1, [d * 0 for d in self.der], self.tag)
        if n < 0:
            return 1.0 / (self ** (-n))
        # value computed exactly as the plain-array path would
        v1 = self.val ** (n - 1)
        return Dual(self.val ** n, [(n * v1) * d for d in self.der], self.tag)

    # numpy interop: make ``ndarray * Dual`` defer to Dual
    __array_ufunc__ = None


def _top(a, b):
    ta = a.tag if isinstance(a, Dual) else 0
    tb = b.tag if isinstance(b, Dual) else 0
    return ta if ta >= tb else tb


def _split(a, tag):
    if isinstance(a, Dual) and a.tag == tag:
        return a.val, a.der
    return a, None


def is_dual(a) -> bool:
    return isinstance(a, Dual)


def seed(values, nvars=None):
    """Return duals for independent variables ``values`` sharing one tag.

    ``values[i]`` receives the unit derivative in direction ``i``.
    """
    values = list(values)
    d = len(values) if nvars is None else nvars
    tag = next(_tags)
    out = []
    for i, v in enumerate(values):
        der = [0.0] * d
        der[i] = 1.0
        out.append(Dual(v, der, tag))
    return out


def value(a, tag=None):
    """Strip one dual layer (the one with ``tag``; outermost if None)."""
    if isinstance(a, Dual) and (tag is None or a.tag == tag):
        return a.val
    return a


def deriv(a, i, tag):
    """Derivative of ``a`` along seeded direction ``i`` of the layer ``tag``."""
    if isinstance(a, Dual) and a.tag == tag:
        return a.der[i]
    return 0.0 * _leaf(a)


def _leaf(a):
    while isinstance(a, Dual):
        a = a.val
    return a


def _unary(a, f, df):
    """Apply f with derivative df; df receives the (possibly dual) value."""
    if not isinstance(a, Dual):
        return f(a)
    v = a.val
    fv = _unary(v, f, df)
    g = df(v, fv)
    return Dual(fv, [g * d for d in a.der], a.tag)


def exp(a):
    return _unary(a, np.exp, lambda v, fv: fv)


def log(a):
    return _unary(a, np.log, lambda v, fv: 1.0 / v)


def sqrt(a):
    return _unary(a, np.sqrt, lambda v, fv: 0.5 / fv)


def sin(a):
    return _unary(a, np.sin, lambda v, fv: cos(v))


def cos(a):
    return _unary(a, np.cos, lambda v, fv: -sin(v))


def conj(a):
    if not isinstance(a, Dual):
        return np.conj(a)
    return Dual(conj(a.val), [conj(d) for d in a.der], a.tag)


def real(a):
    if not isinstance(a, Dual):
        return np.real(a)
    return Dual(real(a.val), [real(d) for d in a.der], a.tag)


def imag(a):
    if not isinstance(a, Dual):
        return np.imag(a)
    return Dual(imag(a.val), [imag(d) for d in a.der], a.tag)


def abs2(a):
    """|a|^2 as a real quantity."""
    re, im = real(a), imag(a)
    return re * re + im * im


def absolute(a):
    return sqrt(abs2(a))


def arctan2(y, x):
    """Real two-argument arctangent with dual support in both arguments."""
    if not isinstance(y, Dual) and not isinstance(x, Dual):
        return np.arctan2(y, x)
    tag = _top(y, x)
    yv, yd = _split(y, tag)
    xv, xd = _split(x, tag)
    val = arctan2(yv, xv)
    r2 = xv * xv + yv * yv
    d = len(yd if yd is not None else xd)
    der = []
    for i in range(d):
        dy = yd[i] if yd is not None else 0.0
        dx = xd[i] if xd is not None else 0.0
        der.append((xv * dy - yv * dx) / r2)
    return Dual(val, der, tag)


def arg(a):
    """Phase of a complex dual in (-pi, pi]."""
    return arctan2(imag(a), real(a))


def jacobian(fn, xs):
    """Evaluate ``fn(*xs)`` with first derivatives.

    Returns ``(values, jac)`` where ``values`` is the list of outputs and
    ``jac[i][j] = d out_i / d xs_j``.
    """
    ds = seed(xs)
    tag = ds[0].tag
    outs = fn(*ds)
    vals = [value(o, tag) for o in outs]
    jac = [[deriv(o, j, tag) for j in range(len(xs))] for o in outs]
    return vals, jac
