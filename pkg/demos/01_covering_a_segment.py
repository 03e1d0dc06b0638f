"""Covering a segment with small sets and recovering its length.

The one-dimensional Hausdorff premeasure of a unit segment is estimated on a
shrinking ladder of cover diameters, then the arclength measure is rebuilt
from its density.
"""
import numpy as np

from gmtlab import (
    CurveMeasure,
    CurveSegment,
    MetricSpec,
    ParametricCurve,
    SizeFunction,
    approx_measure_ladder,
    centered_density,
    federer_density,
)

plane = MetricSpec.euclidean(2)
segment = CurveSegment(ParametricCurve.segment([0, 0], [1, 0]), (0.0, 1.0), 2001)

ladder = approx_measure_ladder(plane, segment, SizeFunction.hausdorff(1.0), [0.4, 0.2, 0.1, 0.05])
for delta, value in zip(ladder.deltas, ladder.values):
    print(f"delta = {delta:<5}  cover cost = {value:.6f}")

# Arclength has density 1 against diameter-normalised balls, 2 against radius-normalised ones.
mu = CurveMeasure.arclength([0, 0], [1, 0])
x = np.array([0.3, 0.0])
fed = federer_density(plane, mu, SizeFunction.spherical(1.0), x, [0.1, 0.01])
cen = centered_density(plane, mu, 1.0, x, [0.1, 0.01])
print(f"Federer density at x: {fed.extrapolated:.4f} ({fed.trend})")
print(f"centred density at x: {cen.extrapolated:.4f} ({cen.trend})")
