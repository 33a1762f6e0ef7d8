import numpy as np
import pytest

from nullknot import construct as C
from nullknot import flow
from nullknot.bateman import knotted_family
from nullknot.core import eval_many, plane_wave
from nullknot.diagnostics import (
    VERDICT_TOL,
    curl,
    null_residuals,
    shear_relative,
    shear_residuals,
    summarize,
    tetrad_shear,
)
from nullknot.errors import DegenerateFlowError, NotNullError


def state(field, P, t=0.0):
    F, J = eval_many(field, t, *P.T)
    st = flow.flow_state_many(field, t, *P.T)
    return F, J, st.V, st.JV


def hopf():
    return C.rational_map_field(C.hopf_map(), C.ProfileFunctions())


def probes(n, seed, R=2.0):
    return np.random.default_rng(seed).uniform(-R, R, (n, 3))


def test_null_residual_examples():
    r = null_residuals(np.array([1, 1j, 0]))
    assert (r.dot_EB, r.energy_imbalance, r.rs_null) == (0, 0, 0)
    r = null_residuals(np.array([1, 0, 0], complex))
    assert (r.dot_EB, r.energy_imbalance, r.rs_null) == (0, 1, 1)
    r = null_residuals(np.array([-4, 4j, 0]))
    assert r.rs_null == 0


def test_plane_wave_all_formulations_zero():
    P = probes(10, 0)
    s = shear_residuals(*state(plane_wave(), P, 0.3))
    assert np.max(np.abs(s.rs_shear)) <= 1e-14
    assert np.max(np.abs(s.comp_sym)) <= 1e-14
    assert np.max(np.abs(s.foliation)) <= 1e-14
    assert np.max(np.abs(s.tetrad_sigma)) <= 1e-14


def test_plane_wave_curl_equals_field():
    F, J = eval_many(plane_wave(), 0.0, *probes(5, 1).T)
    assert np.allclose(curl(J), F, atol=1e-14)


def test_constant_field():
    F = np.array([1, 1j, 0])
    J = np.zeros((3, 3), complex)
    s = shear_residuals(F, J, np.array([0, 0, 1.0]), np.zeros((3, 3)))
    assert s.rs_shear == 0 and np.all(s.comp_sym == 0)


def test_identities_on_null_counterexample():
    F, J, V, JV = state(hopf(), probes(60, 2))
    s = shear_residuals(F, J, V, JV)
    c1, c2 = s.foliation[:, 0], s.foliation[:, 1]
    W = 0.5 * np.sum(np.abs(F) ** 2, -1)
    scale = np.linalg.norm(F, axis=-1) * np.sqrt(np.sum(np.abs(J) ** 2, axis=(-2, -1)))
    assert np.max(np.abs(s.rs_shear - (c1 - 1j * c2)) / scale) <= 1e-12
    assert np.max(np.abs(s.comp_sym[:, 0] + c2) / scale) <= 1e-12
    assert np.max(np.abs(s.comp_sym[:, 1] + c1) / scale) <= 1e-12
    sig = -(s.comp_sym[:, 0] + 1j * s.comp_sym[:, 1]) / (2 * np.sqrt(2) * W)
    assert np.allclose(s.tetrad_sigma, sig, rtol=1e-12, atol=0)


def test_counterexample_verdicts_agree_and_are_nonzero():
    F, J, V, JV = state(hopf(), probes(60, 3))
    s = shear_residuals(F, J, V, JV)
    v = s.verdicts()
    assert np.all(v)
    big = s.rel_rs > 1e-3
    assert np.all(np.abs(s.tetrad_sigma[big]) > 1e-3)


def test_family_tetrad_shear_small():
    f = knotted_family((1, 1))
    P = probes(50, 4, 3.0)
    F, J, V, JV = state(f, P)
    sig = tetrad_shear(F, J, V, JV)
    assert np.max(np.abs(sig) / np.sqrt(np.sum(JV**2, axis=(-2, -1)))) <= 1e-8
    assert np.max(shear_relative(F, J)) <= 1e-8
    assert not np.any(shear_residuals(F, J, V, JV).verdicts(VERDICT_TOL))


def test_helical_triple_is_shear_free_in_every_form():
    f = C.rational_map_field(C.helical_map(), C.helical_profiles())
    s = shear_residuals(*state(f, probes(40, 5)))
    assert not np.any(s.verdicts())


def test_tetrad_refuses_non_null():
    F = np.array([[1.0, 0, 0]], complex)
    J = np.zeros((1, 3, 3), complex)
    with pytest.raises(NotNullError):
        tetrad_shear(F, J, np.array([[0, 0, 1.0]]), np.zeros((1, 3, 3)))


def test_sigma_is_nan_off_null():
    F = np.array([[1.0, 0.5j, 0]], complex)
    s = shear_residuals(F, np.zeros((1, 3, 3), complex), np.array([[0, 0, 1.0]]), np.zeros((1, 3, 3)))
    assert np.isnan(s.tetrad_sigma[0])


def test_zero_energy_is_degenerate():
    with pytest.raises(DegenerateFlowError):
        shear_residuals(np.zeros((1, 3), complex), np.zeros((1, 3, 3), complex), np.zeros((1, 3)), np.zeros((1, 3, 3)))


def test_summarize():
    s = summarize([1.0, 2.0, np.nan, 3.0])
    assert s["count"] == 3 and s["max"] == 3.0 and s["p50"] == 2.0
    assert summarize([])["max"] is None
