import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmtlab import heisenberg as hb
from gmtlab.caratheodory import (
    DomainError,
    SizeFunction,
    approx_measure_ladder,
    ball_candidates,
    brute_force_cover,
    default_ladder,
    exact_set_cover,
    greedy_set_cover,
    size_value,
    verify_cover,
    zeta_delta_exact,
    zeta_delta_upper,
)
from gmtlab.metric import Ball, Cloud, CurveSegment, MetricSpec, ParametricCurve

E2 = MetricSpec.euclidean(2)
AB = MetricSpec.finite(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def unit_segment(n=2001):
    return CurveSegment(ParametricCurve.segment([0, 0], [1, 0]), (0.0, 1.0), n)


def test_size_values():
    assert size_value(SizeFunction.spherical(2, 0.25), MetricSpec.cc(), Ball(np.zeros(3), 0.3)) == pytest.approx(0.09)
    assert size_value(SizeFunction.hausdorff(1, 1), E2, Cloud(np.array([[0, 0], [3, 4]]))) == 5.0
    assert size_value(SizeFunction.hausdorff(1.5, 2), E2, Cloud(np.array([[1, 1]]))) == 0.0
    with pytest.raises(DomainError):
        size_value(SizeFunction.spherical(1), E2, Cloud(np.array([[0, 0], [1, 0]])))
    with pytest.raises(ValueError):
        SizeFunction.hausdorff(-1.0)


def test_exact_examples():
    cands = [(["a"], 1.0), (["b"], 1.0), (["a", "b"], 1.5)]
    assert zeta_delta_exact(AB, ["a", "b"], cands).value == 1.5
    assert zeta_delta_exact(AB, ["a"], [(["a"], 0.3)]).value == 0.3
    miss = zeta_delta_exact(AB, ["a", "b"], [(["a"], 1.0)])
    assert miss.value == math.inf and miss.witness == "b"


def test_exact_rejects_continuous_and_oversized():
    with pytest.raises(ValueError):
        zeta_delta_exact(E2, [], [])
    many = MetricSpec.finite([str(i) for i in range(6)], np.abs(np.subtract.outer(np.arange(6.0), np.arange(6.0))))
    cands = [([str(i)], 1.0) for i in range(6)] * 5
    with pytest.raises(ValueError):
        zeta_delta_exact(many, ["0"], cands, max_candidates=24)


@st.composite
def cover_instances(draw):
    n = draw(st.integers(1, 7))
    k = draw(st.integers(1, 10))
    masks = [draw(st.integers(1, 2 ** n - 1)) for _ in range(k)]
    costs = [draw(st.floats(0, 5)) for _ in range(k)]
    return (2 ** n - 1), masks, costs


@given(cover_instances())
def test_branch_and_bound_matches_brute_force(inst):
    universe, masks, costs = inst
    brute = brute_force_cover(universe, masks, costs)
    chosen, value = exact_set_cover(universe, masks, costs)
    assert value == pytest.approx(brute, abs=1e-12) if math.isfinite(brute) else value == math.inf
    greedy_value = greedy_set_cover(universe, masks, costs)[1]
    assert greedy_value >= value - 1e-12


@given(st.integers(0, 2 ** 20), st.floats(0.1, 10))
def test_scaling_law_on_finite_spaces(seed, scale):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(5, 2))
    table = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    labels = list("vwxyz")
    base = MetricSpec.finite(labels, table)
    scaled = MetricSpec.finite(labels, scale * table)
    z = SizeFunction.hausdorff(1.5)
    cands = ball_candidates(base)
    delta = float(np.median(table))
    a = zeta_delta_exact(base, labels, cands, z, delta).value
    b = zeta_delta_exact(scaled, labels, cands, z, scale * delta).value
    assert b == pytest.approx(scale ** 1.5 * a, rel=1e-12, abs=1e-300)


def test_segment_hausdorff_measure():
    z = SizeFunction.hausdorff(1.0, 1.0)
    est = zeta_delta_upper(E2, unit_segment(), z, 0.1)
    assert 1.0 <= est.value <= 1.2
    assert verify_cover(E2, unit_segment(), est)
    ladder = approx_measure_ladder(E2, unit_segment(), z, [0.5, 0.25, 0.125])
    assert ladder.extrapolated == pytest.approx(1.0, rel=0.02)


def test_singleton_and_empty_targets():
    z = SizeFunction.hausdorff(1.0)
    est = zeta_delta_upper(E2, Cloud(np.array([[0.3, 0.3]])), z, 0.1)
    assert est.value == 0.0 and len(est.cover) == 1
    ladder = approx_measure_ladder(E2, Cloud(np.zeros((0, 2))), z, [0.5, 0.1])
    assert ladder.values == [0.0, 0.0]


def test_delta_below_resolution_is_an_error():
    with pytest.raises(ValueError):
        zeta_delta_upper(E2, unit_segment(11), SizeFunction.hausdorff(1.0), 0.01)
    with pytest.raises(ValueError):
        approx_measure_ladder(E2, unit_segment(), SizeFunction.hausdorff(1.0), [0.1, 0.2])


def test_koranyi_vertical_segment_is_twice_length():
    # each axis-centred ball of radius r covers height r^2/2 at cost r^2
    space = MetricSpec.koranyi()
    curve = hb.CurveSpec.vertical_segment(0.5)
    target = CurveSegment(curve, curve.interval, 20001)
    est = zeta_delta_upper(space, target, SizeFunction.spherical(2, 0.25), 0.2)
    assert est.value == pytest.approx(1.0, rel=0.05)
    assert verify_cover(space, target, est)


def test_cloud_net_cover_is_feasible():
    rng = np.random.default_rng(4)
    pts = rng.uniform(size=(300, 2))
    est = zeta_delta_upper(E2, Cloud(pts), SizeFunction.spherical(1.0), 0.2)
    assert verify_cover(E2, Cloud(pts), est)


def test_finite_exact_ladder_is_sup_of_rungs():
    z = SizeFunction.from_table({frozenset("a"): 0.5, frozenset("b"): 0.5, frozenset("c"): 0.5,
                                 frozenset("ab"): 0.6, frozenset("abc"): 0.7})
    cands = list(z.table)
    ladder = approx_measure_ladder(AB, Cloud(["a", "b", "c"]), z, [3.0, 1.5, 0.5], candidates=cands, exact=True)
    rungs = [zeta_delta_exact(AB, ["a", "b", "c"], cands, z, d).value for d in (3.0, 1.5, 0.5)]
    assert ladder.values == rungs and ladder.extrapolated == max(rungs) == 1.5


def test_default_ladder():
    assert default_ladder(1.0) == [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
