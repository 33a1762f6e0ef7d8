import numpy as np
import pytest

from nullknot import ad
from nullknot.bateman import (
    BatemanPair,
    KnottedFamilyParams,
    bateman_constraint_relative,
    bateman_constraint_residual,
    field_from_bateman,
    first_integrals,
    knotted_family,
    knotted_family_pair,
    magnitude_parallel_relative,
    magnitude_parallel_residual,
    phase_parallel_residual,
)
from nullknot.core import eval
from nullknot.diagnostics import null_residuals
from nullknot.errors import ZeroModulusError


def pts(n, seed=0, R=2.5):
    return np.random.default_rng(seed).uniform(-R, R, (n, 3))


def pair(alpha, beta):
    return BatemanPair(alpha, beta)


XY = pair(lambda t, x, y, z: x + 0 * y, lambda t, x, y, z: y + 0 * x)
PLANE = pair(lambda t, x, y, z: x + 1j * y, lambda t, x, y, z: z - t)


def test_family_at_origin_components():
    F, _ = eval(knotted_family((1, 1)), (0, 0, 0, 0))
    E, B = F.real, F.imag
    W = 0.5 * (E @ E + B @ B)
    assert np.allclose(E, [-4, 0, 0]) and np.allclose(B, [0, 4, 0])
    assert W == pytest.approx(16.0)
    assert np.allclose(np.cross(E, B) / W, [0, 0, -1])


def test_family_zero_factor_on_axis():
    F, _ = eval(knotted_family((1, 2)), (0, 0, 0, 0))
    assert np.all(F == 0)


def test_family_23_null():
    F, _ = eval(knotted_family((2, 3)), (0.5, 0.1, -0.2, 0.3))
    assert null_residuals(F).relative(F) <= 1e-10


def test_family_params_validation():
    with pytest.raises(ValueError):
        KnottedFamilyParams(0, 1)
    with pytest.raises(ValueError):
        knotted_family((1.5, 1))


def test_field_from_constant_gradients():
    F, _ = eval(field_from_bateman(XY), (0.3, 1, 2, 3))
    assert np.allclose(F, [0, 0, 1])
    F, _ = eval(field_from_bateman(PLANE), (0.0, 0.2, 0.1, -0.4))
    assert np.allclose(F, [1j, -1, 0])


@pytest.mark.parametrize("mn", [(1, 1), (2, 3), (1, 2)])
def test_bateman_route_reproduces_family(mn):
    f = knotted_family(mn)
    g = field_from_bateman(knotted_family_pair(mn))
    P = pts(40, 1)
    for t in (0.0, 0.6):
        a = f.value(t, *P.T)
        b = g.value(t, *P.T)
        assert np.max(np.linalg.norm(a - b, axis=-1) / np.linalg.norm(a, axis=-1).max()) <= 1e-12


def test_constraint_residual_examples():
    assert np.allclose(bateman_constraint_residual(PLANE, (0.1, 1, 2, 3)), 0)
    assert np.allclose(bateman_constraint_residual(XY, (0.1, 1, 2, 3)), [0, 0, 1])


def test_family_pair_satisfies_constraint():
    P = pts(100, 2)
    r = bateman_constraint_relative(knotted_family_pair((1, 1)), (0.4, *P.T))
    assert r.max() <= 1e-9


def test_constraint_implies_null_for_hopf_type_pair():
    pr = knotted_family_pair((2, 1))
    f = field_from_bateman(pr)
    P = pts(100, 3)
    for t in (0.0, 0.9):
        assert bateman_constraint_relative(pr, (t, *P.T)).max() <= 1e-9
        F = f.value(t, *P.T)
        assert null_residuals(F).relative(F).max() <= 1e-9


def test_first_integrals_examples():
    pr = pair(lambda t, x, y, z: x + 1j * y, lambda t, x, y, z: z + 0 * x)
    assert first_integrals(pr, (0, 1.0, 2.0, 3.0)) == (pytest.approx(3.0), pytest.approx(6.0))
    zero = pair(lambda t, x, y, z: 0 * x, lambda t, x, y, z: z + 0 * x)
    assert first_integrals(zero, (0, 1.0, 2.0, 3.0)) == (0.0, 0.0)


def test_parallel_residual_examples():
    dep = pair(lambda t, x, y, z: x + 1j * y, lambda t, x, y, z: 2 * (x + 1j * y))
    p = (0, 0.7, -0.3, 0.2)
    assert np.allclose(magnitude_parallel_residual(dep, p), 0, atol=1e-14)
    assert np.allclose(phase_parallel_residual(dep, p), 0, atol=1e-14)
    ind = pair(lambda t, x, y, z: x + 1j * y, lambda t, x, y, z: z + 1j * x)
    assert np.allclose(magnitude_parallel_residual(ind, (0, 1.0, 1.0, 1.0)), [4, -4, -4])


def test_family_magnitude_parallel():
    P = pts(100, 4)
    assert magnitude_parallel_relative(knotted_family_pair((1, 1)), (0.0, *P.T)).max() <= 1e-9


def test_phase_residual_refuses_zero_modulus():
    with pytest.raises(ZeroModulusError):
        phase_parallel_residual(PLANE, (0.0, 0.0, 0.0, 0.5))


def test_gradients4_time_slot():
    a, b, ga, gb = PLANE.gradients4((0.3, 1.0, 2.0, 3.0))
    assert np.allclose(ga, [0, 1, 1j, 0]) and np.allclose(gb, [-1, 0, 0, 1])
    assert b == pytest.approx(2.7)


def test_pair_callables_accept_duals():
    x, = ad.seed([0.5])
    q = knotted_family_pair((1, 1)).alpha(0.0, x, 0.1, 0.2)
    assert ad.is_dual(q)
