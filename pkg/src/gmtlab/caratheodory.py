"""Carathéodory construction: size functions, delta-premeasures and measure ladders.

Continuous targets only ever get upper bounds (feasible ball covers).  On
finite metric spaces :func:`zeta_delta_exact` solves the covering problem
exactly by best-first branch and bound.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import heisenberg as hb
from .metric import Ball, Cloud, CurveSegment, MetricSpec, cloud_diameter, set_diameter

INF = math.inf


class DomainError(ValueError):
    """A set outside the domain of a size function."""


@dataclass(frozen=True)
class SizeFunction:
    """``c diam(S)^alpha`` on closed sets (hausdorff) or closed balls (spherical), or a table.

    Table keys are frozensets of labels; values may be ``math.inf``.
    """

    kind: str
    alpha: float = 1.0
    c: float = 1.0
    table: Mapping[frozenset, float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("hausdorff", "spherical", "table"):
            raise ValueError(f"unknown size function kind {self.kind!r}")
        if self.kind != "table" and (self.alpha <= 0 or self.c <= 0):
            raise ValueError("alpha and c must be positive")
        if self.kind == "table" and self.table is None:
            raise ValueError("table size function needs a table")

    @classmethod
    def hausdorff(cls, alpha: float, c: float = 1.0) -> "SizeFunction":
        return cls("hausdorff", alpha, c)

    @classmethod
    def spherical(cls, alpha: float, c: float = 1.0) -> "SizeFunction":
        return cls("spherical", alpha, c)

    @classmethod
    def from_table(cls, table: Mapping) -> "SizeFunction":
        return cls("table", table={frozenset(k): float(v) for k, v in table.items()})

    @property
    def domain(self) -> str:
        return "closed_balls_only" if self.kind == "spherical" else "all_closed_sets"

    def of_diameter(self, diam: float) -> float:
        if diam == 0.0:
            return 0.0
        return self.c * diam ** self.alpha


def _labels_of(space: MetricSpec, s) -> frozenset:
    if isinstance(s, Cloud):
        return frozenset(s.points)
    if isinstance(s, Ball):
        d = space.table[space.index(s.center)]
        inside = d <= s.radius if s.closed else d < s.radius
        return frozenset(lab for lab, keep in zip(space.labels, inside) if keep)
    if isinstance(s, (set, frozenset, list, tuple)):
        return frozenset(s)
    raise TypeError(f"cannot read labels from {type(s).__name__}")


def size_value(z: SizeFunction, space: MetricSpec, s) -> float:
    if z.kind == "table":
        key = _labels_of(space, s)
        if key not in z.table:
            raise DomainError(f"set {sorted(key)} not in the size table")
        return z.table[key]
    if z.kind == "spherical" and not isinstance(s, Ball):
        raise DomainError("spherical size functions are defined on closed balls only")
    if isinstance(s, Ball) and not s.closed:
        raise DomainError("size functions are defined on closed sets")
    return z.of_diameter(set_diameter(space, s))


@dataclass
class CoverEstimate:
    value: float
    delta: float
    cover: list
    exact: bool = False
    gap_bound: float | None = None
    strategy: str = ""
    witness: Any = None

    def to_json(self, include_cover: bool = False) -> dict:
        doc = {
            "value": self.value,
            "delta": self.delta,
            "n_sets": len(self.cover),
            "exact": self.exact,
            "gap_bound": self.gap_bound,
            "strategy": self.strategy,
        }
        if self.witness is not None:
            doc["uncovered_witness"] = self.witness
        if include_cover:
            doc["cover"] = [s.to_json() for s in self.cover]
        return doc


@dataclass
class MeasureLadder:
    entries: list[tuple[float, CoverEstimate]]
    extrapolated: float
    monotone_ok: bool

    @property
    def deltas(self) -> list[float]:
        return [d for d, _ in self.entries]

    @property
    def values(self) -> list[float]:
        return [e.value for _, e in self.entries]

    def to_json(self) -> dict:
        return {
            "rungs": [e.to_json() for _, e in self.entries],
            "extrapolated": self.extrapolated,
            "monotone_ok": self.monotone_ok,
        }


def default_ladder(delta0: float, rungs: int = 6, ratio: float = 0.5) -> list[float]:
    return [delta0 * ratio ** k for k in range(rungs)]


# ----------------------------------------------------------------------------
# Set cover on bitmasks
# ----------------------------------------------------------------------------

def _popcount(x: int) -> int:
    return bin(x).count("1")


def greedy_set_cover(universe: int, masks: Sequence[int], costs: Sequence[float]) -> tuple[list[int], float]:
    """Cheapest-per-new-element greedy; ties go to the lower index."""
    uncovered = universe
    chosen: list[int] = []
    total = 0.0
    while uncovered:
        best, best_ratio = -1, INF
        for j, (m, c) in enumerate(zip(masks, costs)):
            gain = _popcount(m & uncovered)
            if gain == 0 or j in chosen:
                continue
            ratio = c / gain
            if ratio < best_ratio:
                best, best_ratio = j, ratio
        if best < 0:
            return chosen, INF
        chosen.append(best)
        total += costs[best]
        uncovered &= ~masks[best]
    return chosen, total


def exact_set_cover(universe: int, masks: Sequence[int], costs: Sequence[float]) -> tuple[list[int], float]:
    """Minimum-cost cover by best-first branch and bound.

    Node bound: cost so far plus (uncovered count) times the smallest
    cost-per-new-element among unused candidates.  Each node branches on the
    candidates covering its lowest uncovered element.
    """
    m = len(masks)
    if universe == 0:
        return [], 0.0
    if universe & ~_union(masks):
        return [], INF

    def bound(covered: int, used: tuple) -> float:
        unc = universe & ~covered
        k = _popcount(unc)
        if k == 0:
            return 0.0
        best = INF
        for j in range(m):
            if j in used:
                continue
            gain = _popcount(masks[j] & unc)
            if gain:
                best = min(best, costs[j] / gain)
        return k * best

    heap = [(bound(0, ()), 0.0, (), 0)]
    seen: dict[int, float] = {}
    while heap:
        lb, cost, used, covered = heapq.heappop(heap)
        if covered == universe:
            return list(used), cost
        if seen.get(covered, INF) <= cost:
            continue
        seen[covered] = cost
        unc = universe & ~covered
        e = (unc & -unc)
        for j in range(m):
            if j in used or not masks[j] & e:
                continue
            new_cov = covered | masks[j]
            new_cost = cost + costs[j]
            if seen.get(new_cov, INF) <= new_cost:
                continue
            new_used = tuple(sorted(used + (j,)))
            heapq.heappush(heap, (new_cost + bound(new_cov, new_used), new_cost, new_used, new_cov))
    return [], INF


def _union(masks: Iterable[int]) -> int:
    out = 0
    for m in masks:
        out |= m
    return out


def brute_force_cover(universe: int, masks: Sequence[int], costs: Sequence[float]) -> float:
    """Enumerate every subcollection; reference oracle for small instances."""
    best = INF
    m = len(masks)
    for pick in range(1 << m):
        cov, cost = 0, 0.0
        for j in range(m):
            if pick >> j & 1:
                cov |= masks[j]
                cost += costs[j]
        if cov & universe == universe:
            best = min(best, cost)
    return best


# ----------------------------------------------------------------------------
# Finite instances
# ----------------------------------------------------------------------------

def _finite_problem(space: MetricSpec, target, candidates, z: SizeFunction | None, delta: float):
    """Bitmask form of a finite covering problem; drops sets wider than delta and infinite costs."""
    bit = {lab: 1 << i for i, lab in enumerate(space.labels)}
    universe = 0
    for lab in target:
        universe |= bit[lab]
    sets, masks, costs = [], [], []
    for cand in candidates:
        if isinstance(cand, tuple) and len(cand) == 2 and not isinstance(cand[0], str):
            subset, cost = frozenset(cand[0]), float(cand[1])
        else:
            subset = frozenset(cand)
            if z is None:
                raise ValueError("candidates without sizes need a size function")
            cost = size_value(z, space, subset) if z.kind == "table" else z.of_diameter(cloud_diameter(space, list(subset)))
        if not subset:
            continue
        if cloud_diameter(space, sorted(subset, key=space.index)) > delta:
            continue
        if not math.isfinite(cost):
            continue
        mask = 0
        for lab in subset:
            mask |= bit[lab]
        sets.append(subset)
        masks.append(mask)
        costs.append(cost)
    return universe, sets, masks, costs


def _witness(space: MetricSpec, universe: int, masks: Sequence[int]):
    missing = universe & ~_union(masks)
    if not missing:
        return None
    return space.labels[(missing & -missing).bit_length() - 1]


def ball_candidates(space: MetricSpec, z: SizeFunction | None = None) -> list[frozenset]:
    """All distinct closed balls of a finite space (as label sets)."""
    out, seen = [], set()
    for i, lab in enumerate(space.labels):
        for r in np.unique(space.table[i]):
            members = _labels_of(space, Ball(lab, float(r)))
            if members not in seen:
                seen.add(members)
                out.append(members)
    return out


def zeta_delta_exact(space: MetricSpec, target, candidates, z: SizeFunction | None = None,
                     delta: float = INF, max_candidates: int = 24) -> CoverEstimate:
    """Exact infimum over subcollections of ``candidates`` covering ``target``.

    ``candidates`` holds label sets (sized by ``z``) or ``(labels, size)`` pairs.
    Infeasible problems return ``+inf`` with an uncovered label as witness.
    """
    if space.kind != "finite":
        raise ValueError("the exact oracle runs on finite metric spaces only")
    target = list(target)
    universe, sets, masks, costs = _finite_problem(space, target, candidates, z, delta)
    if len(sets) > max_candidates:
        raise ValueError(f"{len(sets)} admissible candidates exceed the branch-and-bound budget of {max_candidates}")
    witness = _witness(space, universe, masks)
    if witness is not None:
        return CoverEstimate(INF, delta, [], exact=True, gap_bound=0.0, strategy="exact", witness=witness)
    chosen, value = exact_set_cover(universe, masks, costs)
    cover = [Cloud(sorted(sets[j], key=space.index)) for j in chosen]
    return CoverEstimate(value, delta, cover, exact=True, gap_bound=0.0, strategy="exact")


def _greedy_finite(space, target, candidates, z, delta) -> CoverEstimate:
    target = list(target)
    if candidates is None:
        if z is not None and z.kind == "table":
            candidates = list(z.table)
        else:
            candidates = ball_candidates(space)
    universe, sets, masks, costs = _finite_problem(space, target, candidates, z, delta)
    witness = _witness(space, universe, masks)
    if witness is not None:
        return CoverEstimate(INF, delta, [], strategy="greedy", witness=witness)
    chosen, value = greedy_set_cover(universe, masks, costs)
    cover = [Cloud(sorted(sets[j], key=space.index)) for j in chosen]
    return CoverEstimate(value, delta, cover, strategy="greedy")


# ----------------------------------------------------------------------------
# Continuous targets
# ----------------------------------------------------------------------------

@dataclass
class CoverStrategy:
    """Tuning for :func:`zeta_delta_upper`.

    ``name`` is ``"auto"``, ``"net"`` (greedy ball cover centred on target
    samples), ``"offset"`` (chained cover of a curve with optimised centre
    offsets) or ``"greedy"`` (finite spaces).
    """

    name: str = "auto"
    polar_steps: int = 33
    azimuth_steps: int = 8
    direction_steps: int = 64
    refine_steps: int = 8
    initial_window: int = 32


def _offset_family(space: MetricSpec, strategy: CoverStrategy):
    """Unit-sphere offsets as (params, points) with params in a box for refinement."""
    if space.kind == "euclidean":
        if space.dim == 1:
            params = np.array([[0.0], [1.0]])
            return params, lambda p: np.where(p[:, :1] < 0.5, -1.0, 1.0)
        if space.dim == 2:
            ang = np.linspace(0.0, 2 * np.pi, strategy.direction_steps, endpoint=False)
            return ang[:, None], lambda p: np.stack([np.cos(p[:, 0]), np.sin(p[:, 0])], axis=1)
        k = np.arange(strategy.direction_steps * 2) + 0.5
        params = np.stack([np.arccos(1 - 2 * k / len(k)), np.pi * (1 + 5 ** 0.5) * k], axis=1)

        def sph(p):
            st = np.sin(p[:, 0])
            out = np.zeros((len(p), space.dim))
            out[:, :3] = np.stack([st * np.cos(p[:, 1]), st * np.sin(p[:, 1]), np.cos(p[:, 0])], axis=1)
            return out
        return params, sph
    w = np.linspace(-1.0, 1.0, strategy.polar_steps)
    a = np.linspace(0.0, 2 * np.pi, strategy.azimuth_steps, endpoint=False)
    W, A = np.meshgrid(w, a, indexing="ij")
    params = np.stack([W.ravel(), A.ravel()], axis=1)
    return params, lambda p: hb.unit_sphere_point(space.kind, np.clip(p[:, 0], -1, 1), p[:, 1])


def _shrink(space: MetricSpec, u: np.ndarray, factor: float) -> np.ndarray:
    if space.kind == "euclidean":
        return u * factor
    return hb.dilate(u, factor)


def _runs(space: MetricSpec, centers: np.ndarray, radius: float, window: np.ndarray) -> np.ndarray:
    """Length of the initial run of window samples inside each candidate ball (fast test)."""
    w = space.normalise(centers[:, None, :], radius, window[None, :, :])
    inside = space.in_unit_ball_fast(w)
    full = inside.all(axis=1)
    first_out = np.argmin(inside, axis=1)
    return np.where(full, window.shape[0], first_out)


def sampling_resolution(space: MetricSpec, samples: np.ndarray) -> float:
    """Largest metric gap between consecutive curve samples."""
    if len(samples) < 2:
        return 0.0
    gaps = [space.distance(samples[i], samples[i + 1]) for i in _gap_probe(len(samples))]
    return float(max(gaps))


def _gap_probe(n: int, k: int = 64) -> list[int]:
    # a spread of gap indices; uniform parameter grids make gaps nearly equal
    return sorted(set(np.linspace(0, n - 2, min(k, n - 1)).astype(int).tolist()))


def _chain_cover(space: MetricSpec, samples: np.ndarray, z: SizeFunction, delta: float,
                 strategy: CoverStrategy) -> tuple[list, float]:
    """Cover consecutive curve samples by balls of radius delta/2, each starting at the last covered sample.

    Consecutive balls share a sample, so for curves whose intersection with
    every ball is connected the union covers the whole sampled arc.
    """
    n = len(samples)
    radius = 0.5 * delta
    params, to_offset = _offset_family(space, strategy)
    grid_step = np.array([np.ptp(params[:, j]) / max(len(np.unique(params[:, j])) - 1, 1) for j in range(params.shape[1])])
    keep = 1.0 - 1e-7
    cover, total = [], 0.0
    start, window = 0, strategy.initial_window
    while True:
        while True:
            stop = min(n, start + window)
            win = samples[start:stop]
            centers = space.offset_center(samples[start], radius, _shrink(space, to_offset(params), keep))
            runs = _runs(space, centers, radius, win)
            k = int(np.argmax(runs))
            if runs[k] < len(win) or stop == n:
                break
            window *= 2
        best_p, best_run = params[k].copy(), int(runs[k])
        step = grid_step.copy()
        for _ in range(strategy.refine_steps):
            trials = []
            for j in range(len(step)):
                for sgn in (1.0, -1.0):
                    p = best_p.copy()
                    p[j] += sgn * step[j]
                    trials.append(p)
            trials = np.array(trials)
            c = space.offset_center(samples[start], radius, _shrink(space, to_offset(trials), keep))
            r = _runs(space, c, radius, win)
            j = int(np.argmax(r))
            if r[j] > best_run:
                best_p, best_run = trials[j], int(r[j])
            else:
                step *= 0.5
        center = space.offset_center(samples[start], radius, _shrink(space, to_offset(best_p[None, :]), keep))[0]
        # exact membership re-check on the run found by the fast test
        d = space.distances(center, win[: max(best_run, 1) + 1])
        inside = d <= radius
        run = int(np.argmin(inside)) if not inside.all() else len(inside)
        run = min(run, best_run) if best_run > 0 else run
        if run < 2 and start < n - 1:
            raise ValueError(
                f"delta={delta:.4g} is below the sampling resolution of the target; "
                "add samples or increase delta"
            )
        last = start + run - 1
        if last >= n - 1 and z.kind == "spherical":
            center, d = _tighten_last(space, samples[start], win[:run], radius, params, to_offset, center, d)
        run_pts = win[:run]
        if z.kind == "spherical":
            r_tight = float(d[:run].max())
            cover.append(Ball(center, r_tight))
            total += z.of_diameter(2.0 * r_tight)
        else:
            cover.append(Cloud(run_pts))
            total += z.of_diameter(cloud_diameter(space, run_pts))
        if last >= n - 1:
            break
        window = max(strategy.initial_window, 2 * run)
        start = last
    return cover, total


def _tighten_last(space, anchor, run_pts, radius, params, to_offset, center, d, iters: int = 30):
    """Smallest anchored ball from the offset family that still holds the final run."""
    lo, hi = 0.0, radius
    best_center = center
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        c = space.offset_center(anchor, mid, _shrink(space, to_offset(params), 1.0 - 1e-7))
        ok = np.nonzero(_runs(space, c, mid, run_pts) >= len(run_pts))[0]
        found = False
        for k in ok[:4]:
            dk = space.distances(c[k], run_pts)
            if np.all(dk <= mid):
                best_center, hi, found = c[k], mid, True
                break
        if not found:
            lo = mid
    return best_center, space.distances(best_center, run_pts)


def _net_cover(space: MetricSpec, pts: np.ndarray, z: SizeFunction, delta: float) -> tuple[list, float]:
    """Greedy cover by balls of radius delta/2 centred on target points."""
    radius = 0.5 * delta
    n = len(pts)
    member = space.pairwise(pts) <= radius
    uncovered = np.ones(n, dtype=bool)
    cover, total = [], 0.0
    while uncovered.any():
        gain = (member & uncovered[None, :]).sum(axis=1)
        if z.kind == "spherical":
            cost = np.full(n, z.of_diameter(delta))
        else:
            cost = np.array([z.of_diameter(cloud_diameter(space, pts[member[i] & uncovered])) if gain[i] else INF
                             for i in range(n)])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(gain > 0, cost / np.maximum(gain, 1), INF)
        i = int(np.argmin(ratio))
        newly = member[i] & uncovered
        if z.kind == "spherical":
            cover.append(Ball(pts[i], radius))
        else:
            cover.append(Cloud(pts[newly]))
        total += float(cost[i])
        uncovered &= ~newly
    return cover, total


def zeta_delta_upper(space: MetricSpec, target, z: SizeFunction, delta: float,
                     strategy: CoverStrategy | str | None = None, candidates=None) -> CoverEstimate:
    """Cost of a feasible cover by sets of diameter at most ``delta``: an upper bound for zeta_delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if strategy is None or isinstance(strategy, str):
        strategy = CoverStrategy(strategy or "auto")
    if space.kind == "finite":
        labels = target.points if isinstance(target, Cloud) else target
        return _greedy_finite(space, labels, candidates, z, delta)
    if z.kind == "table":
        raise DomainError("table size functions need a finite space")
    if isinstance(target, Cloud):
        pts = space.as_points(target.points)
        if len(pts) == 0:
            return CoverEstimate(0.0, delta, [], strategy="empty")
        if len(pts) == 1:
            single = Ball(pts[0], 0.0) if z.kind == "spherical" else Cloud(pts)
            return CoverEstimate(0.0, delta, [single], strategy="singleton")
        cover, value = _net_cover(space, pts, z, delta)
        return CoverEstimate(value, delta, cover, strategy="net")
    if isinstance(target, CurveSegment):
        pts = target.samples()
        res = sampling_resolution(space, pts)
        if delta < res:
            raise ValueError(f"delta={delta:.4g} is below the target sampling resolution {res:.4g}")
        if strategy.name == "net":
            cover, value = _net_cover(space, pts, z, delta)
            return CoverEstimate(value, delta, cover, strategy="net")
        cover, value = _chain_cover(space, pts, z, delta, strategy)
        return CoverEstimate(value, delta, cover, strategy="offset")
    if isinstance(target, Ball):
        raise DomainError("ball targets: sample them as a cloud first")
    raise TypeError(f"unsupported target {type(target).__name__}")


def verify_cover(space: MetricSpec, target, estimate: CoverEstimate) -> bool:
    """Exact re-check that every target sample lies in some cover element of diameter <= delta."""
    if space.kind == "finite":
        labels = target.points if isinstance(target, Cloud) else list(target)
        covered = set().union(*(set(c.points) for c in estimate.cover)) if estimate.cover else set()
        small = all(cloud_diameter(space, c.points) <= estimate.delta for c in estimate.cover)
        return small and set(labels) <= covered
    pts = target.samples() if isinstance(target, CurveSegment) else space.as_points(target.points)
    if len(pts) == 0:
        return True
    hit = np.zeros(len(pts), dtype=bool)
    for elem in estimate.cover:
        if isinstance(elem, Ball):
            if 2 * elem.radius > estimate.delta * (1 + 1e-12):
                return False
            hit |= space.distances(elem.center, pts) <= elem.radius
        else:
            e = space.as_points(elem.points)
            if cloud_diameter(space, e) > estimate.delta * (1 + 1e-12):
                return False
            hit |= (space.pairwise(pts, e) <= 1e-12).any(axis=1)
    return bool(hit.all())


def approx_measure_ladder(space: MetricSpec, target, z: SizeFunction, delta_ladder: Sequence[float],
                          strategy: CoverStrategy | str | None = None, candidates=None,
                          exact: bool = False, monotone_tol: float = 0.02) -> MeasureLadder:
    """Run the delta-premeasure estimator on each rung of a strictly decreasing ladder."""
    deltas = list(delta_ladder)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta ladder must be strictly decreasing")
    empty = (isinstance(target, Cloud) and len(target) == 0) or (
        not isinstance(target, (Cloud, CurveSegment)) and len(list(target)) == 0)
    entries = []
    for d in deltas:
        if empty:
            est = CoverEstimate(0.0, d, [], exact=exact, gap_bound=0.0 if exact else None, strategy="empty")
        elif exact:
            labels = target.points if isinstance(target, Cloud) else list(target)
            est = zeta_delta_exact(space, labels, candidates, z, d)
        else:
            est = zeta_delta_upper(space, target, z, d, strategy, candidates)
        entries.append((d, est))
    values = [e.value for _, e in entries]
    monotone = all(
        b >= a - monotone_tol * max(abs(a), 1e-300) if math.isfinite(a) else b == INF
        for a, b in zip(values, values[1:])
    )
    extrapolated = max(values) if exact else values[-1]
    return MeasureLadder(entries, extrapolated, monotone)
