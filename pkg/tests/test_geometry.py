import numpy as np
import pytest
from hypothesis import given, strategies as st

from boxembed.geometry import BoundaryCurve, nearest_grid_snap, sample_boundary
from boxembed.spectral_core import make_grid


def ellipse_samples(n, a=2.0, b=1.2, reverse=False):
    t = 2 * np.pi * np.arange(n) / n
    P = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
    if reverse:
        P = np.stack([a * np.cos(t), -b * np.sin(t)], axis=1)
    return t, P


def test_unit_circle_n4_sample():
    s = sample_boundary(BoundaryCurve.circle(radius=1.0), 4, 0.1)
    np.testing.assert_allclose(s.points, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    np.testing.assert_allclose(s.normals, s.points, atol=1e-15)
    np.testing.assert_allclose(s.offsets, 1.1 * s.points, atol=1e-15)
    np.testing.assert_allclose(s.tangents, [[0, 1], [-1, 0], [0, -1], [1, 0]], atol=1e-15)


@pytest.mark.parametrize("n", [3, 0, 2.5])
def test_too_few_points(n):
    with pytest.raises(ValueError):
        sample_boundary(BoundaryCurve.circle(radius=1.0), n, 0.1)


def test_offsets_escaping_box_rejected():
    with pytest.raises(ValueError, match="escape"):
        sample_boundary(BoundaryCurve.circle(radius=2.0), 16, 1.5)
    with pytest.raises(ValueError):
        sample_boundary(BoundaryCurve.circle(radius=1.0), 16, -0.1)
    with pytest.raises(ValueError):
        sample_boundary(BoundaryCurve.circle(radius=3.3), 16, 0.0)


@given(st.integers(4, 200), st.floats(0.0, 1.0))
def test_circle_sample_invariants(n, d):
    s = sample_boundary(BoundaryCurve.circle(radius=2.0), n, d)
    np.testing.assert_allclose(np.hypot(*s.normals.T), 1.0, atol=1e-14)
    np.testing.assert_allclose(np.sum(s.normals * s.tangents, axis=1), 0.0, atol=1e-14)
    # outward and counterclockwise: nu = tau rotated clockwise
    np.testing.assert_allclose(s.normals, np.stack([s.tangents[:, 1], -s.tangents[:, 0]], 1), atol=1e-14)
    np.testing.assert_allclose(np.hypot(*(s.offsets - s.points).T), d, atol=1e-13)


def test_line_integral_circumference():
    s = sample_boundary(BoundaryCurve.circle(radius=1.5), 64, 0.0)
    assert s.line_integral(np.ones(64)) == pytest.approx(3 * np.pi)


def test_interpolated_ellipse_reproduces_curve():
    t, P = ellipse_samples(64)
    c = BoundaryCurve.from_samples(t, P)
    s = np.linspace(0, 2 * np.pi, 37)
    np.testing.assert_allclose(c.gamma(s), np.stack([2 * np.cos(s), 1.2 * np.sin(s)], 1), atol=1e-13)
    np.testing.assert_allclose(c.dgamma(s), np.stack([-2 * np.sin(s), 1.2 * np.cos(s)], 1), atol=1e-12)
    assert c.orientation() == 1.0


def test_clockwise_samples_are_reoriented():
    t, P = ellipse_samples(32, reverse=True)
    c = BoundaryCurve.from_samples(t, P)
    assert c.orientation() == 1.0
    s = sample_boundary(c, 32, 0.2)
    # outward: offsets outside the ellipse
    assert not c.contains(s.offsets[:, 0], s.offsets[:, 1]).any()
    assert np.all((s.offsets[:, 0] / 2) ** 2 + (s.offsets[:, 1] / 1.2) ** 2 > 1)


def test_from_samples_validation():
    t, P = ellipse_samples(6)
    with pytest.raises(ValueError):
        BoundaryCurve.from_samples(t, P)
    t, P = ellipse_samples(16)
    with pytest.raises(ValueError):
        BoundaryCurve.from_samples(t ** 1.01, P)
    with pytest.raises(ValueError):
        BoundaryCurve.from_samples(t, P[:, :1])


def test_from_file_formats(tmp_path):
    t, P = ellipse_samples(16)
    f = tmp_path / "c.txt"
    lines = ["# t y1 y2"] + [f"{a:.17g}, {x:.17g} {y:.17g}" for a, (x, y) in zip(t[::-1], P[::-1])]
    f.write_text("\n".join(lines) + "\n")
    c = BoundaryCurve.from_file(f)
    np.testing.assert_allclose(c.gamma(t), P, atol=1e-13)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n")
    with pytest.raises(ValueError):
        BoundaryCurve.from_file(bad)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_polygon_contains_matches_ellipse(x1, x2):
    t, P = ellipse_samples(64)
    c = BoundaryCurve.from_samples(t, P)
    q = (x1 / 2) ** 2 + (x2 / 1.2) ** 2
    if abs(q - 1) > 1e-3:
        assert bool(c.contains(x1, x2)) == (q < 1)


def test_circle_contains_is_strict():
    c = BoundaryCurve.circle(radius=1.0)
    assert not c.contains(1.0, 0.0)
    assert c.contains(0.999, 0.0)
    with pytest.raises(ValueError):
        BoundaryCurve.circle(radius=0)


def test_nearest_grid_snap():
    g = make_grid(32)
    s = sample_boundary(BoundaryCurve.circle(radius=2.0), 20, 0.3)
    snapped = nearest_grid_snap(s, g)
    assert snapped.snapped and not s.snapped
    np.testing.assert_allclose(snapped.offsets, g.axis[snapped.offset_index])
    assert snapped.snap_displacement <= np.pi * np.sqrt(2) / 32 + 1e-15
    np.testing.assert_array_equal(snapped.points, s.points)
