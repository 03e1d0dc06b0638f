"""Centred and off-centre densities of the intrinsic measure on a vertical line.

Balls centred on the line see the axis chord; balls that merely contain the
point can be shifted sideways to see the longest chord instead.
"""
import math

from gmtlab import CurveMeasure, CurveSpec, MetricSpec, SizeFunction, centered_density, federer_density

space = MetricSpec.cc()
mu = CurveMeasure.intrinsic(CurveSpec.vertical_segment(1.0))
x = [0.0, 0.0, 0.5]

cen = centered_density(space, mu, 2.0, x, [0.1, 0.05, 0.025])
fed = federer_density(space, mu, SizeFunction.spherical(2.0, 0.25), x, [0.2, 0.1])
print("centred ladder:", [f"{v:.8f}" for v in cen.values], "vs 1/(2 pi) =", f"{1 / (2 * math.pi):.8f}")
print("Federer ladder:", [f"{v:.8f}" for v in fed.values], "vs 1/pi =", f"{1 / math.pi:.8f}")
best = fed.ladder[-1].ball
print(f"best ball at the finest rung: centre {best.center.round(6)}, radius {best.radius:.6f}")
