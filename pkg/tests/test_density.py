import math

import numpy as np
import pytest

from gmtlab import heisenberg as hb
from gmtlab.caratheodory import SizeFunction
from gmtlab.density import (
    CurveMeasure,
    SearchBudget,
    WeightedCloud,
    admissible,
    centered_density,
    classify_trend,
    federer_density,
    quotient,
    quotient_value,
)
from gmtlab.metric import Ball, MetricSpec

E2 = MetricSpec.euclidean(2)
SMALL = SearchBudget(center_grid=16, radii=8, refine_steps=20, restarts=1, coarse_nodes=200, fine_nodes=400)


def test_quotient_cases():
    assert quotient_value(0.3, 0.0) == math.inf
    assert quotient_value(1.0, 2.0) == 0.5
    assert quotient_value(1.0, math.inf) == 0.0
    assert not admissible(0.0, 0.0)
    mu = WeightedCloud(np.array([[0.0, 0.0]]), np.array([2.0]))
    assert quotient(mu, SizeFunction.spherical(1.0), E2, Ball((0, 0), 0.5)) == 2.0


def test_weighted_cloud_measure():
    mu = WeightedCloud(np.array([[0, 0], [1, 0], [5, 5]]), np.array([1.0, 2.0, 4.0]))
    assert mu.total_mass == 7.0
    assert mu.measure(E2, Ball((0, 0), 1.0)) == 3.0
    assert mu.measure(E2, Ball((0, 0), 1.0, closed=False)) == 1.0
    with pytest.raises(ValueError):
        WeightedCloud(np.array([[0, 0]]), np.array([-1.0]))


def test_curve_measure_masses():
    mu = CurveMeasure.arclength([0, 0], [2, 0])
    assert mu.total_mass == pytest.approx(2.0)
    assert mu.measure(E2, Ball((0.5, 0.3), 0.5)) == pytest.approx(0.8, rel=1e-9)
    with pytest.raises(ValueError):
        mu.localize(E2, np.array([5.0, 5.0]), 0.1)


def test_segment_federer_density():
    mu = CurveMeasure.arclength([0, 0], [1, 0])
    est = federer_density(E2, mu, SizeFunction.spherical(1.0), [0.5, 0.0], [0.1, 0.01, 0.001], SMALL)
    assert est.extrapolated == pytest.approx(1.0, rel=0.02)
    assert est.trend == "stable"
    for rung in est.ladder:
        assert E2.distance(rung.ball.center, [0.5, 0]) <= rung.ball.radius
        assert 2 * rung.ball.radius < rung.epsilon


@pytest.mark.parametrize("scale", [0.5, 2.0])
def test_segment_density_scale_invariant(scale):
    mu = CurveMeasure.arclength([0, 0], [scale, 0])
    est = federer_density(E2, mu, SizeFunction.spherical(1.0), [0.5 * scale, 0.0],
                          [0.1 * scale, 0.01 * scale], SMALL)
    assert est.extrapolated == pytest.approx(1.0, rel=0.02)


def test_zero_mass_near_point():
    mu = WeightedCloud(np.array([[3.0, 3.0]]), np.array([1.0]))
    est = federer_density(E2, mu, SizeFunction.spherical(1.0), [0.0, 0.0], [0.5, 0.1], SMALL)
    assert est.values == [0.0, 0.0]


def test_federer_needs_balls():
    mu = CurveMeasure.arclength([0, 0], [1, 0])
    with pytest.raises(ValueError):
        federer_density(E2, mu, SizeFunction.hausdorff(1.0), [0.5, 0], [0.1])


def test_centered_examples():
    mu = CurveMeasure.arclength([0, 0], [1, 0])
    est = centered_density(E2, mu, 1.0, [0.5, 0.0], [0.1, 0.01])
    assert est.extrapolated == pytest.approx(2.0, rel=0.02)
    atom = WeightedCloud(np.array([[0.0, 0.0]]), np.array([0.7]))
    est = centered_density(E2, atom, 2.0, [0.0, 0.0], [0.1, 0.05, 0.025])
    assert est.values == pytest.approx([70.0, 280.0, 1120.0])
    assert est.trend == "increasing"


def test_cc_vertical_line_densities():
    space = MetricSpec.cc()
    mu = CurveMeasure.intrinsic(hb.CurveSpec.vertical_segment(1.0))
    x = [0.0, 0.0, 0.5]
    cen = centered_density(space, mu, 2.0, x, [0.1, 0.05])
    assert cen.extrapolated == pytest.approx(1 / (2 * math.pi), rel=0.03)
    fed = federer_density(space, mu, SizeFunction.spherical(2.0, 0.25), x, [0.1], SearchBudget(center_grid=24))
    assert fed.extrapolated == pytest.approx(1 / math.pi, rel=0.03)
    assert fed.extrapolated >= cen.extrapolated


def test_classify_trend():
    assert classify_trend([1.0, 1.001, 1.0]) == "stable"
    assert classify_trend([1.0, 2.0, 3.0]) == "increasing"
    assert classify_trend([3.0, 2.0, 1.0]) == "decreasing"
    assert classify_trend([1.0, 2.0, 1.0]) == "noisy"
