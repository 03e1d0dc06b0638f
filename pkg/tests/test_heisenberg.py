import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmtlab import heisenberg as hb

coord = st.floats(-2, 2, allow_nan=False)
hpoint = st.tuples(coord, coord, coord).map(np.array)
lam = st.sampled_from([0.5, 1.0, 2.0])

# Frozen oracle values: the CC sphere height at phi = pi and the axis reach.
ALPHA_CC = 1.0 / math.pi
BETA_CC = 1.0 / (2.0 * math.pi)


def test_group_examples():
    assert np.allclose(hb.multiply([1, 0, 0], [0, 1, 0]), [1, 1, 0.5])
    p = np.array([0.3, -2.0, 1.1])
    assert np.allclose(hb.multiply(p, hb.invert(p)), 0.0)
    assert np.allclose(hb.dilate([1, 1, 1], 2), [2, 2, 4])
    assert np.allclose(hb.group_op([1, 1, 1], mode="dilate", lam=2), [2, 2, 4])


@given(hpoint, hpoint, hpoint)
def test_group_axioms(p, q, r):
    assert np.allclose(hb.multiply(hb.multiply(p, q), r), hb.multiply(p, hb.multiply(q, r)), atol=1e-12)
    assert np.allclose(hb.multiply(p, np.zeros(3)), p, atol=1e-12)
    assert np.allclose(hb.multiply(hb.invert(p), p), 0.0, atol=1e-12)


def test_koranyi_units():
    assert hb.koranyi_distance(np.zeros(3), np.array([1.0, 0, 0])) == pytest.approx(1.0)
    assert hb.koranyi_distance(np.zeros(3), np.array([0, 0, 0.25])) == pytest.approx(1.0)


@given(hpoint, lam)
def test_homogeneity(p, scale):
    assert hb.koranyi_norm(hb.dilate(p, scale)) == pytest.approx(scale * hb.koranyi_norm(p), rel=1e-12, abs=1e-12)
    assert hb.cc_norm(hb.dilate(p, scale)) == pytest.approx(scale * hb.cc_norm(p), rel=1e-8, abs=1e-10)


def test_cc_horizontal_and_axis():
    assert hb.cc_norm(np.array([1.0, 0, 0])) == pytest.approx(1.0)
    for tau in (0.01, 0.1, 1.0, -0.3):
        assert hb.cc_norm(np.array([0, 0, tau])) == pytest.approx(math.sqrt(4 * math.pi * abs(tau)), rel=1e-12)


def test_cc_vectorised_matches_scalar():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(300, 3)) * np.array([1, 1, 10.0]) ** rng.uniform(-4, 4, size=(300, 1))
    vec = hb.cc_norm(pts)
    scal = np.array([hb.cc_norm(p) for p in pts])
    assert np.allclose(vec, scal, rtol=1e-9)


@pytest.mark.parametrize("p", [[0.3, 0.2, 0.05], [0.1, 0.0, 0.4], [1.0, -0.5, -0.2], [0.0, 0.0, 0.1]])
def test_cc_closed_form_matches_shooting(p):
    p = np.array(p)
    assert hb.cc_norm(p) == pytest.approx(hb.cc_norm_shooting(p), rel=1e-6)


def test_cc_sphere_points_are_unit():
    w = np.linspace(-1, 1, 41)
    pts = hb.unit_sphere_point("cc", w, np.full_like(w, 0.7))
    assert np.allclose(hb.cc_norm(pts), 1.0, atol=5e-8)
    kpts = hb.unit_sphere_point("koranyi", w, np.full_like(w, 0.7))
    assert np.allclose(hb.koranyi_norm(kpts), 1.0, atol=1e-12)


def test_fast_membership_agrees_away_from_boundary():
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1.2, 1.2, size=(4000, 3)) * np.array([1, 1, 0.3])
    d = hb.cc_norm(pts)
    clear = np.abs(d - 1) > 1e-3
    assert np.array_equal(hb.cc_in_unit_ball_fast(pts)[clear], (d <= 1)[clear])


def test_profiles():
    cc = hb.unit_ball_profile("cc")
    lo, hi = cc.chords_at(0.0)[0]
    assert (lo, hi) == pytest.approx((-1 / (4 * math.pi), 1 / (4 * math.pi)), rel=1e-9)
    assert cc.chords_at(1 + 1e-6) == []
    k = hb.unit_ball_profile("koranyi")
    assert k.chords_at(0.0)[0] == pytest.approx((-0.25, 0.25))
    with pytest.raises(ValueError):
        hb.unit_ball_profile("cc", (32, 128))
    with pytest.raises(ValueError):
        hb.unit_ball_profile("riemannian")


def test_profile_boundary_points_are_unit():
    cc = hb.unit_ball_profile("cc")
    rows = np.array(cc.to_rows()[1:-1:7])
    pts = np.concatenate([
        np.stack([rows[:, 0], 0 * rows[:, 0], rows[:, 1]], -1),
        np.stack([rows[:, 0], 0 * rows[:, 0], rows[:, 2]], -1),
    ])
    assert np.allclose(hb.cc_norm(pts), 1.0, atol=5e-8)


def test_alpha_beta():
    alpha, beta, arg = hb.alpha_beta(hb.unit_ball_profile("cc"))
    assert beta == pytest.approx(BETA_CC, abs=1e-3)
    assert alpha == pytest.approx(ALPHA_CC, rel=1e-8)
    assert 1 < alpha / beta <= 4
    assert arg == pytest.approx(2 / math.pi, rel=1e-6)
    ka, kb, karg = hb.alpha_beta(hb.unit_ball_profile("koranyi"))
    assert ka == pytest.approx(kb, abs=1e-4) and karg == pytest.approx(0.0, abs=1e-9)


def tilted(a=1.0, b=1.0):
    return hb.CurveSpec.from_functions(
        lambda s: np.stack([a * s, 0 * s, b * s], -1),
        lambda s: np.stack([a + 0 * s, 0 * s, b + 0 * s], -1), 0.0, 1.0)


def test_intrinsic_measure_examples():
    assert hb.intrinsic_measure(hb.CurveSpec.vertical_segment(0.7)) == pytest.approx(0.7, rel=1e-12)
    assert hb.intrinsic_measure(tilted(b=0.0)) == 0.0
    c = tilted()
    assert hb.intrinsic_measure(c) == pytest.approx(1.0, rel=1e-12)
    assert abs(hb.intrinsic_measure(c) - hb.intrinsic_measure(c, refine=10)) < 1e-6
    with pytest.raises(ValueError):
        hb.intrinsic_measure(c, (0.5, 1.5))


def test_intrinsic_measure_additive():
    circle = hb.CurveSpec.from_functions(
        lambda s: np.stack([np.cos(s), np.sin(s), 0.3 * s], -1),
        lambda s: np.stack([-np.sin(s), np.cos(s), 0.3 + 0 * s], -1), 0.0, 3.0)
    whole = hb.intrinsic_measure(circle)
    parts = hb.intrinsic_measure(circle, (0.0, 1.3)) + hb.intrinsic_measure(circle, (1.3, 3.0))
    assert parts == pytest.approx(whole, rel=1e-12)


def test_nonhorizontal_set():
    assert hb.nonhorizontal_set(hb.CurveSpec.vertical_segment(1.0), 0.1) == [(0.0, 1.0)]
    assert hb.nonhorizontal_set(tilted(b=0.0), 0.1) == []
    # v(s) = t' - (x y' - y x')/2 = s - 1/2 for the curve below
    c = hb.CurveSpec.from_functions(
        lambda s: np.stack([0 * s, 0 * s, 0.5 * s * s - 0.5 * s], -1),
        lambda s: np.stack([0 * s, 0 * s, s - 0.5], -1), 0.0, 1.0)
    (a0, a1), (b0, b1) = hb.nonhorizontal_set(c, 0.1)
    assert (a0, a1, b0, b1) == pytest.approx((0.0, 0.4, 0.6, 1.0), abs=1e-9)


def test_curve_spec_json_and_check():
    c = tilted()
    c.check()
    again = hb.CurveSpec.from_json(c.to_json())
    assert hb.intrinsic_measure(again) == pytest.approx(1.0, rel=1e-9)
    bad = c.to_json()
    bad["derivatives"] = [[5.0, 0.0, 0.0]] * len(bad["nodes"])
    with pytest.raises(ValueError):
        hb.CurveSpec.from_json(bad).check()
