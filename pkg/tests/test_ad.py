import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullknot import ad

finite = st.floats(-2.0, 2.0, allow_nan=False)


def fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_polynomial_first_derivative():
    x, = ad.seed([1.5])
    y = 3 * x**3 - 2 * x + 1
    assert ad.value(y) == pytest.approx(3 * 1.5**3 - 3 + 1)
    assert ad.deriv(y, 0, x.tag) == pytest.approx(9 * 1.5**2 - 2)


def test_two_variables_independent_directions():
    x, y = ad.seed([2.0, 3.0])
    q = x * y + y * y
    assert ad.deriv(q, 0, x.tag) == pytest.approx(3.0)
    assert ad.deriv(q, 1, x.tag) == pytest.approx(2.0 + 6.0)


def test_nested_second_derivative():
    inner = ad.seed([0.7])
    outer = ad.seed(inner)
    x = outer[0]
    q = ad.sin(x) * x
    d1 = ad.deriv(q, 0, outer[0].tag)
    d2 = ad.deriv(d1, 0, inner[0].tag)
    v = 0.7
    assert ad.value(d1, inner[0].tag) == pytest.approx(np.cos(v) * v + np.sin(v))
    assert d2 == pytest.approx(-np.sin(v) * v + 2 * np.cos(v))


def test_no_perturbation_confusion():
    # d/dx [ x * d/dy (x + y) ] at x = 1 is 1, not 2
    x, = ad.seed([1.0])

    def inner_deriv(xv):
        y, = ad.seed([2.0])
        return ad.deriv(xv + y, 0, y.tag)

    q = x * inner_deriv(x)
    assert ad.deriv(q, 0, x.tag) == pytest.approx(1.0)


def test_deriv_of_foreign_tag_is_zero():
    x, = ad.seed([1.0])
    y, = ad.seed([1.0])
    assert ad.deriv(x * 2.0, 0, y.tag) == 0.0


def test_complex_and_conj():
    x, y = ad.seed([0.3, -0.4])
    w = x + 1j * y
    q = ad.abs2(w)
    assert ad.value(q) == pytest.approx(0.25)
    assert ad.deriv(q, 0, x.tag) == pytest.approx(0.6)
    assert ad.deriv(q, 1, x.tag) == pytest.approx(-0.8)
    c = ad.conj(w)
    assert ad.deriv(c, 1, x.tag) == pytest.approx(-1j)


def test_arctan2_gradient():
    x, y = ad.seed([1.0, 1.0])
    a = ad.arctan2(y, x)
    assert ad.value(a) == pytest.approx(np.pi / 4)
    assert ad.deriv(a, 0, x.tag) == pytest.approx(-0.5)
    assert ad.deriv(a, 1, x.tag) == pytest.approx(0.5)


def test_jacobian_helper():
    vals, J = ad.jacobian(lambda a, b: (a * b, a + ad.exp(b)), [2.0, 0.0])
    assert vals == [pytest.approx(0.0), pytest.approx(3.0)]
    assert np.allclose(np.array(J, dtype=float), [[0.0, 2.0], [1.0, 1.0]])


def test_vectorized_values():
    xs = np.linspace(0.1, 1.0, 5)
    x, = ad.seed([xs])
    q = ad.log(x)
    assert np.allclose(ad.deriv(q, 0, x.tag), 1 / xs)


@settings(max_examples=40, deadline=None)
@given(finite)
def test_elementary_functions_match_finite_differences(v):
    x, = ad.seed([v])
    for f_ad, f_np in [
        (lambda a: ad.exp(a) * ad.cos(a), lambda a: np.exp(a) * np.cos(a)),
        (lambda a: ad.sqrt(a * a + 1.0), lambda a: np.sqrt(a * a + 1.0)),
        (lambda a: ad.sin(a) / (a * a + 2.0), lambda a: np.sin(a) / (a * a + 2.0)),
        (lambda a: ad.log(a * a + 0.5) ** 3, lambda a: np.log(a * a + 0.5) ** 3),
    ]:
        got = ad.deriv(f_ad(x), 0, x.tag)
        assert got == pytest.approx(fd(f_np, v), rel=1e-6, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(finite, finite)
def test_complex_power_rule(a, b):
    x, = ad.seed([a])
    z = (x + 1j * b) ** 3
    assert ad.deriv(z, 0, x.tag) == pytest.approx(3 * (a + 1j * b) ** 2, rel=1e-12, abs=1e-12)
