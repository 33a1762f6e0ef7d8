import numpy as np
import pytest

from nullknot import fieldlines as FL
from nullknot.bateman import BatemanPair, knotted_family, knotted_family_pair
from nullknot.core import AnalyticField, plane_wave
from nullknot.errors import ConfigError, DegenerateSeedError

UNIFORM = AnalyticField("uniform", lambda t, x, y, z: (0 * x, 0 * x, 1j + 0 * x))  # B = z_hat
SWIRL = AnalyticField("swirl", lambda t, x, y, z: (-1j * y, 1j * x, 0 * z + 0j))  # B = (-y, x, 0)


def test_straight_segment():
    line = FL.trace(UNIFORM, "B", (0, 0, 0), cfg=FL.TracerConfig(max_length=2.0))
    assert line.stop_reason == "max_length" and not line.closed
    assert line.length == pytest.approx(2.0)
    assert np.allclose(line.points[-1], [0, 0, 2], atol=1e-12)
    assert np.allclose(line.points[:, :2], 0)


def test_unit_circle_closes():
    line = FL.trace(SWIRL, "B", (1, 0, 0), cfg=FL.TracerConfig(max_length=2 * np.pi + 0.5))
    assert line.closed and line.return_distance <= 1e-6
    assert line.length == pytest.approx(2 * np.pi, abs=1e-6)
    assert np.allclose(np.linalg.norm(line.points[:, :2], axis=-1), 1.0, atol=1e-8)


def test_family_B_line_golden():
    # golden values recorded from the first verified run
    line = FL.trace(knotted_family((1, 1)), "B", (0.5, 0, 0), cfg=FL.TracerConfig(max_length=20.0))
    assert line.closed and line.return_distance <= 1e-6
    assert line.length == pytest.approx(2.5 * np.pi, rel=1e-7)


def test_reversibility():
    f = knotted_family((1, 1))
    cfg = FL.TracerConfig(max_length=3.0, close=False, rtol=1e-11, atol=1e-13)
    fwd = FL.trace(f, "E", (0.4, 0.3, 0.2), cfg=cfg)
    back = FL.trace(f, "E", fwd.points[-1], cfg=cfg, direction=-1.0)
    assert np.linalg.norm(back.points[-1] - fwd.points[0]) <= 1e-8


def test_tolerance_halving_converges():
    f = knotted_family((1, 1))
    a = FL.trace(f, "E", (0.4, 0.3, 0.2), cfg=FL.TracerConfig(max_length=5.0, close=False, rtol=1e-8, atol=1e-11))
    b = FL.trace(f, "E", (0.4, 0.3, 0.2), cfg=FL.TracerConfig(max_length=5.0, close=False, rtol=5e-9, atol=5e-12))
    assert FL.hausdorff(a.points, b.points) <= 1e-6


def test_degenerate_seed():
    with pytest.raises(DegenerateSeedError):
        FL.trace(SWIRL, "B", (0, 0, 0))


def test_config_validation():
    with pytest.raises(ConfigError):
        FL.TracerConfig(rtol=0)
    with pytest.raises(ConfigError):
        FL.TracerConfig(selector="Q")
    with pytest.raises(ConfigError):
        FL.trace(UNIFORM, "Q", (0, 0, 0))


def test_hausdorff_basics():
    P = np.stack([np.linspace(0, 1, 50), 0 * np.linspace(0, 1, 50), np.zeros(50)], -1)
    assert FL.hausdorff(P, P) <= 1e-15
    assert FL.hausdorff(P, P + [0, 0.25, 0]) == pytest.approx(0.25)


def test_first_integral_drift():
    const = BatemanPair(lambda t, x, y, z: 2.0 + 0 * x, lambda t, x, y, z: 1j + 0 * x)
    line = FL.trace(plane_wave(), "B", (0, 0, 0), cfg=FL.TracerConfig(max_length=1.0))
    assert FL.first_integral_drift(line, const, "Re") == 0.0
    pair = knotted_family_pair((1, 1))
    f = knotted_family((1, 1))
    lb = FL.trace(f, "B", (0.5, 0, 0), cfg=FL.TracerConfig(max_length=20.0), pair=pair)
    assert FL.first_integral_drift(lb, pair, "Re") <= 1e-6 * FL.first_integral_scale(lb, pair, "Re")
    assert lb.re_ab is not None and len(lb.re_ab) == len(lb.s)
    le = FL.trace(f, "E", (0.4, 0.3, 0.2), cfg=FL.TracerConfig(selector="E", max_length=20.0))
    assert FL.first_integral_drift(le, pair, "Im") <= 1e-6 * FL.first_integral_scale(le, pair, "Im")


def test_transported_line_plane_wave_is_rigid():
    d = FL.transported_line_mismatch(plane_wave(), (0, 0, 0), 0.7, FL.TracerConfig(max_length=3.0))
    assert d <= 1e-9


def test_transported_line_family():
    f = knotted_family((1, 1))
    d0 = FL.transported_line_mismatch(f, (0.5, 0, 0), 0.0)
    assert d0 <= 1e-9
    d, l0, _, _ = FL.transported_line_mismatch(f, (0.5, 0, 0), 0.25, return_lines=True)
    assert d <= 1e-3 * l0.length
