"""Exact covering premeasures and densities on a six-point space."""
from gmtlab.caratheodory import zeta_delta_exact
from gmtlab.experiments import check_instance, finite_density, six_point_instance

inst = six_point_instance()
labels = list(inst.space.labels)
cands = [(s, inst.sizes[s]) for s in inst.family]
for delta in (5.0, 2.0, 1.0, 0.5):
    est = zeta_delta_exact(inst.space, labels, cands, delta=delta)
    print(f"delta = {delta:<4} exact cover cost {est.value:.3f} using {len(est.cover)} sets")

print("densities:", {x: round(finite_density(inst, x), 3) for x in labels})
print("checks:", {k: v for k, v in check_instance(inst).items() if k != "reasons"})
