import numpy as np
import pytest

from nullknot import construct as C
from nullknot.bateman import knotted_family
from nullknot.core import eval_many
from nullknot.diagnostics import null_residuals
from nullknot.errors import ConfigError, DegenerateDirectionError, PoleError, ZeroPsiError

X100 = np.random.default_rng(11).uniform(-2, 2, (100, 3))


def const_map(c):
    return C.RationalMap(C.Poly3(((complex(c), (0, 0, 0)),)), C.Poly3(((1.0, (0, 0, 0)),)), name="const")


def test_chi_eta_examples():
    assert C.chi_eta(const_map(1), np.array([0.3, 0.2, 0.1])) == (pytest.approx(0.5), pytest.approx(0.0))
    chi, eta = C.chi_eta(const_map(1j), np.array([0.3, 0.2, 0.1]))
    assert chi == pytest.approx(0.5) and eta == pytest.approx(np.pi / 2)


def test_chi_tends_to_one_near_pole():
    hm = C.hopf_map()
    # denominator 2z + i(r^2 - 1) vanishes on the unit circle in z = 0
    chi, _ = C.chi_eta(hm, np.array([[1.0 + 1e-5, 0.0, 0.0], [1.0 + 1e-3, 0.0, 0.0]]))
    assert chi[0] > chi[1] > 0.99 and chi[0] > 1 - 1e-9


def test_chi_eta_refusals():
    with pytest.raises(ZeroPsiError):
        C.chi_eta(C.planar_map(), np.array([0.0, 0.0, 1.0]))
    both_zero = C.RationalMap(C.planar_map().num, C.planar_map().num, name="0/0")
    with pytest.raises(PoleError):
        C.chi_eta(both_zero, np.array([0.0, 0.0, 1.0]))


def test_knotted_B_examples():
    assert np.allclose(C.knotted_B(const_map(2 + 1j), C.ProfileFunctions(), X100[:5]), 0)
    B = C.knotted_B(C.planar_map(), C.ProfileFunctions(), np.array([1.0, 0, 0]))
    assert np.allclose(B, [0, 0, 0.5])


def test_knotted_B_is_divergence_free():
    F, J = eval_many(C.rational_map_field(C.hopf_map()), 0.0, *X100.T)
    JB = J.imag
    div = np.trace(JB, axis1=-2, axis2=-1)
    assert np.max(np.abs(div) / np.linalg.norm(JB, axis=(-2, -1))) <= 1e-9


def test_perpendicular_V_examples():
    V = C.perpendicular_V(C.planar_map(), C.ProfileFunctions(), np.array([1.0, 0, 0]))
    assert np.allclose(V, [1, 0, 0])
    off = C.ProfileFunctions(g=lambda c, e: 0.0 * c, h=lambda c, e: 0.0 * c)
    with pytest.raises(DegenerateDirectionError):
        C.perpendicular_V(C.hopf_map(), off, X100[:3])


def test_V_orthogonal_to_B_and_triple_null():
    E, B, V = C.assemble_initial_data(C.hopf_map(), C.ProfileFunctions(), X100)
    scale = np.linalg.norm(B, axis=-1)
    assert np.max(np.abs(np.sum(V * B, -1)) / scale) <= 1e-12
    F = E + 1j * B
    assert np.max(null_residuals(F).relative(F)) <= 1e-15


def test_planar_triple_composition():
    E, B, V = C.assemble_initial_data(C.planar_map(), C.ProfileFunctions(), np.array([1.0, 0, 0]))
    assert np.allclose(B, [0, 0, 0.5]) and np.allclose(V, [1, 0, 0])
    assert np.allclose(E, np.cross(B, V))


def test_constant_map_is_flagged_degenerate():
    with pytest.raises(DegenerateDirectionError):
        C.assemble_initial_data(const_map(1), C.ProfileFunctions(), X100[:2])
    with pytest.raises(DegenerateDirectionError):
        C.initial_condition_residuals(const_map(1), C.ProfileFunctions(), X100[:2])


def test_shear_free_profiles_give_small_residuals():
    r = C.initial_condition_residuals(C.helical_map(), C.helical_profiles(), X100)
    assert np.nanmax(r) <= 1e-10


def test_helical_triple_reproduces_wave():
    E, B, V = C.assemble_initial_data(C.helical_map(), C.helical_profiles(), X100)
    z = X100[:, 2]
    assert np.allclose(E, np.stack([np.cos(z), -np.sin(z), 0 * z], -1), atol=1e-12)
    assert np.allclose(B, np.stack([np.sin(z), np.cos(z), 0 * z], -1), atol=1e-12)


def test_hopf_counterexample_is_not_shear_free():
    r = C.initial_condition_residuals(C.hopf_map(), C.ProfileFunctions(), X100)
    assert np.max(r[:, 0]) <= 1e-12
    assert np.max(r[:, 1]) > 1e-3 and np.max(r[:, 2]) > 1e-3


def test_rational_map_json_forms():
    spec = {
        "numerator": [[2, 0, 1, 0, 0], {"re": 0, "im": 2, "exp": [0, 1, 0]}],
        "denominator": [[0, 1, 2, 0, 0], [0, 1, 0, 2, 0], [0, 1, 0, 0, 2], [2, 0, 0, 0, 1], [0, -1, 0, 0, 0]],
        "center": [0, 0, 0],
    }
    rm = C.RationalMap.from_json(spec)
    assert np.allclose(rm.psi(*X100.T), C.hopf_map().psi(*X100.T))
    with pytest.raises(ConfigError):
        C.RationalMap.from_json({"numerator": [[1, 0, 0, 0]]})
    with pytest.raises(ConfigError):
        C.Poly3.from_json([[1, 0, -1, 0, 0]])


def test_profile_search_is_best_effort():
    P = X100[:8]
    base = np.nansum(C.initial_condition_residuals(C.hopf_map(), C.ProfileFunctions(), P) ** 2) / 2
    res = C.profile_search(C.hopf_map(), P, max_nfev=15)
    assert res.cost <= base + 1e-12
    assert res.coeffs.shape == (12,)


# conjugate pairs ---------------------------------------------------------------


def test_known_pair_is_conjugate():
    r1, r2 = C.conjugacy_residuals(C.known_family_pair(), X100)
    assert r1.max() <= 1e-10 and r2.max() <= 1e-10


@pytest.mark.parametrize("mn", [(1, 1), (2, 3), (1, 2)])
def test_conjugate_route_matches_family_at_t0(mn):
    F, deg = C.field_from_conjugate_pair(C.known_family_pair(), C.known_family_prefactor(*mn), X100)
    ref = knotted_family(mn).value(0.0, *X100.T)
    assert not deg.any()
    assert np.max(np.linalg.norm(F - ref, axis=-1)) <= 1e-10 * np.max(np.linalg.norm(ref, axis=-1))


def test_zero_prefactor_and_constant_pair():
    F, _ = C.field_from_conjugate_pair(C.known_family_pair(), 0.0, X100[:5])
    assert np.all(F == 0)
    const = C.ConjugatePair(lambda x: np.zeros(np.shape(x)[:-1], complex), lambda x: np.zeros(np.shape(x), complex))
    F, deg = C.field_from_conjugate_pair(const, 3.0, X100[:5])
    assert np.all(F == 0) and deg.all()


def test_known_initial_field_is_t0_only():
    f = C.known_family_initial_field(1, 1)
    assert np.allclose(f.value(0.0, 0.0, 0.0, 0.0), [-4, 4j, 0])
    with pytest.raises(ConfigError):
        f.value(0.5, 0.1, 0.2, 0.3)
