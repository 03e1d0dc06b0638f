"""Quotients, Federer densities over off-centre balls, and centred upper densities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import heisenberg as hb
from .caratheodory import SizeFunction, size_value
from .metric import Ball, Cloud, MetricSpec, ParametricCurve, ball_members

INF = math.inf


# ----------------------------------------------------------------------------
# Measures
# ----------------------------------------------------------------------------

@dataclass
class WeightedCloud:
    """Atomic measure: ``weights[i]`` at ``points[i]`` (coordinates or labels)."""

    points: object
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if len(self.weights) != len(self.points):
            raise ValueError("one weight per point")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def measure(self, space: MetricSpec, s) -> float:
        if isinstance(s, Ball):
            return float(self.weights[ball_members(space, s, self.points)].sum())
        if isinstance(s, Cloud):
            if space.kind == "finite":
                wanted = set(s.points)
                return float(sum(w for p, w in zip(self.points, self.weights) if p in wanted))
            pts = space.as_points(s.points)
            if len(pts) == 0:
                return 0.0
            hit = (space.pairwise(space.as_points(self.points), pts) == 0).any(axis=1)
            return float(self.weights[hit].sum())
        raise TypeError(f"cannot measure {type(s).__name__}")

    def coarse_masses(self, space: MetricSpec, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
        pts = space.as_points(self.points)
        d = space.pairwise(centers, pts)
        return (d <= radii[:, None]) @ self.weights

    def localize(self, space: MetricSpec, x, radius: float, nodes: int | None = None) -> "WeightedCloud":
        keep = space.distances(x, self.points) <= radius
        pts = space.as_points(self.points)[keep]
        return WeightedCloud(pts, self.weights[keep])


@dataclass
class CurveMeasure:
    """Measure on a curve with a density along its parameter.

    ``measure`` finds where the curve enters and leaves a ball by scanning
    ``nodes`` uniform parameters and bisecting each crossing, then integrates
    the density between crossings with Gauss-Legendre quadrature.
    """

    curve: object
    density: Callable
    interval: tuple[float, float]
    nodes: int = 2001
    _mass: float | None = field(default=None, init=False, repr=False)

    @classmethod
    def arclength(cls, start, end, nodes: int = 2001) -> "CurveMeasure":
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        speed = float(np.linalg.norm(end - start))
        return cls(ParametricCurve.segment(start, end), lambda s: np.full(np.shape(s), speed), (0.0, 1.0), nodes)

    @classmethod
    def intrinsic(cls, curve: hb.CurveSpec, interval=None, nodes: int = 2001) -> "CurveMeasure":
        """Intrinsic measure of a Heisenberg curve: density ``|v(s)|``."""
        return cls(curve, lambda s: np.abs(curve.vertical_component(s)), interval or curve.interval, nodes)

    def parameters(self, n: int | None = None) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], n or self.nodes)

    def mass_between(self, lo, hi, panels: int = 4) -> np.ndarray:
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        out = np.zeros(len(lo))
        for k, (a, b) in enumerate(zip(lo, hi)):
            out[k] = hb.gauss_legendre(self.density, a, b, panels)
        return out

    @property
    def total_mass(self) -> float:
        if self._mass is None:
            self._mass = float(self.mass_between(*self.interval, panels=max(8, self.nodes // 8))[0])
        return self._mass

    def _crossing(self, space: MetricSpec, center, radius: float, lo, hi) -> list[float]:
        def gap(t):
            return space.distance(center, self.curve.position(np.array([t]))[0]) - radius

        out = []
        for a, b in zip(lo, hi):
            fa, fb = gap(a), gap(b)
            if fa == 0.0 or fb == 0.0 or fa * fb > 0:
                out.append(float(a if fa == 0.0 else b))
            else:
                out.append(brentq(gap, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        return out

    def inside_intervals(self, space: MetricSpec, ball: Ball) -> list[tuple[float, float]]:
        s = self.parameters()
        inside = space.distances(ball.center, self.curve.position(s))
        inside = inside <= ball.radius if ball.closed else inside < ball.radius
        if not inside.any():
            return []
        flips = np.nonzero(inside[1:] != inside[:-1])[0]
        cuts = self._crossing(space, ball.center, ball.radius, s[flips], s[flips + 1])
        edges = []
        if inside[0]:
            edges.append(s[0])
        edges.extend(cuts)
        if inside[-1]:
            edges.append(s[-1])
        return [(float(a), float(b)) for a, b in zip(edges[0::2], edges[1::2])]

    def measure(self, space: MetricSpec, s) -> float:
        if isinstance(s, Cloud):
            return 0.0
        if not isinstance(s, Ball):
            raise TypeError(f"cannot measure {type(s).__name__}")
        parts = self.inside_intervals(space, s)
        if not parts:
            return 0.0
        lo, hi = zip(*parts)
        return float(self.mass_between(lo, hi).sum())

    def coarse_masses(self, space: MetricSpec, centers: np.ndarray, radii: np.ndarray, chunk: int = 2048) -> np.ndarray:
        """Node-counting masses for many balls at once (fast membership test)."""
        s = self.parameters()
        pts = self.curve.position(s)
        w = self.density(s) * (s[1] - s[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        out = np.empty(len(centers))
        for i in range(0, len(centers), chunk):
            c = centers[i:i + chunk]
            r = radii[i:i + chunk]
            if space.kind == "euclidean":
                inside = np.linalg.norm(pts[None, :, :] - c[:, None, :], axis=-1) <= r[:, None]
            else:
                rel = hb.multiply(hb.invert(c)[:, None, :], pts[None, :, :])
                scale = np.stack([1 / r, 1 / r, 1 / r ** 2], axis=-1)[:, None, :]
                inside = space.in_unit_ball_fast(rel * scale)
            out[i:i + chunk] = inside @ w
        return out

    def localize(self, space: MetricSpec, x, radius: float, nodes: int | None = None) -> "CurveMeasure":
        """Restriction to a parameter window holding every curve point within ``radius`` of ``x``."""
        a, b = self.interval
        n = self.nodes
        for _ in range(60):
            s = np.linspace(a, b, n)
            d = space.distances(x, self.curve.position(s))
            idx = np.nonzero(d <= radius)[0]
            if len(idx) == 0:
                k = int(np.argmin(d))
                i0, i1 = k, k
            else:
                i0, i1 = idx[0], idx[-1]
            na, nb = s[max(i0 - 1, 0)], s[min(i1 + 1, n - 1)]
            shrunk = (nb - na) < 0.5 * (b - a)
            a, b = na, nb
            if not shrunk and len(idx) > 2:
                break
        s = np.linspace(a, b, n)
        if np.min(space.distances(x, self.curve.position(s))) > radius:
            raise ValueError("point lies outside the support of the measure")
        return CurveMeasure(self.curve, self.density, (float(a), float(b)), nodes or self.nodes)


MeasureRep = WeightedCloud | CurveMeasure


# ----------------------------------------------------------------------------
# Quotient
# ----------------------------------------------------------------------------

def quotient_value(mu_s: float, zeta_s: float) -> float:
    if zeta_s == 0.0:
        return INF
    if zeta_s == INF:
        return 0.0
    return mu_s / zeta_s


def quotient(mu, z: SizeFunction, space: MetricSpec, s) -> float:
    """``+inf`` if zeta(S) = 0, ``mu(S)/zeta(S)`` if finite and positive, ``0`` if zeta(S) = inf."""
    return quotient_value(mu.measure(space, s), size_value(z, space, s))


def admissible(mu_s: float, zeta_s: float) -> bool:
    """Membership in the family left after dropping sets with mu = zeta = 0 or mu = zeta = inf."""
    return not ((mu_s == 0 and zeta_s == 0) or (mu_s == INF and zeta_s == INF))


# ----------------------------------------------------------------------------
# Density estimates
# ----------------------------------------------------------------------------

@dataclass
class SearchBudget:
    """Ball search effort per rung.

    ``center_grid`` points per axis of the offset grid, ``radii`` radius
    levels, ``azimuths`` (Heisenberg only) rotations of the planar offset,
    ``refine_steps`` coordinate-descent sweeps from each of ``restarts`` best
    coarse candidates.
    """

    center_grid: int = 32
    radii: int = 16
    azimuths: int = 4
    refine_steps: int = 40
    restarts: int = 2
    coarse_nodes: int = 400
    fine_nodes: int = 1000
    seed: int = 0


@dataclass
class DensityRung:
    epsilon: float
    value: float
    ball: Ball | None
    evaluations: int = 0


@dataclass
class DensityEstimate:
    ladder: list[DensityRung]
    extrapolated: float
    trend: str
    mode: str = "federer"

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.ladder]

    @property
    def spread(self) -> float:
        """Relative spread of the two finest rungs, a crude uncertainty."""
        v = self.values
        if len(v) < 2 or not all(map(math.isfinite, v[-2:])):
            return INF if not math.isfinite(v[-1]) else 0.0
        return abs(v[-1] - v[-2]) / max(abs(v[-1]), 1e-300)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "extrapolated": self.extrapolated,
            "trend": self.trend,
            "ladder": [
                {"epsilon": r.epsilon, "value": r.value, "evaluations": r.evaluations,
                 "ball": r.ball.to_json()["ball"] if r.ball is not None else None}
                for r in self.ladder
            ],
        }


def classify_trend(values: Sequence[float], tol: float = 0.01) -> str:
    """``stable``, ``increasing``, ``decreasing`` or ``noisy`` as the scale shrinks."""
    v = list(values)
    if len(v) < 2:
        return "stable"
    if not math.isfinite(v[-1]):
        return "increasing"
    diffs = []
    for a, b in zip(v, v[1:]):
        scale = max(abs(a), abs(b), 1e-300)
        diffs.append((b - a) / scale)
    if all(abs(d) <= tol for d in diffs):
        return "stable"
    if all(d >= -tol for d in diffs):
        return "increasing"
    if all(d <= tol for d in diffs):
        return "decreasing"
    return "noisy"


def _check_ladder(ladder: Sequence[float]) -> list[float]:
    ladder = [float(e) for e in ladder]
    if not ladder or any(e <= 0 for e in ladder):
        raise ValueError("ladder entries must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    return ladder


class _OffsetBall:
    """Balls ``B(x * offset, r)`` containing ``x`` through a box-constrained parametrisation."""

    def __init__(self, space: MetricSpec, x, rmax: float, budget: SearchBudget):
        self.space = space
        self.x = space.as_points(x)
        self.rmax = rmax
        self.budget = budget
        self.heis = space.kind in ("koranyi", "cc")

    def offsets(self, p: np.ndarray) -> np.ndarray:
        """Unit-ball offsets from box parameters (scaled slightly inside the ball)."""
        if self.heis:
            s = np.clip(p[:, 1], 0.0, 1.0)
            if self.space.kind == "cc":
                s_tab, t_tab = hb._cc_height_table()
                half = np.interp(s, s_tab, t_tab)
            else:
                half = np.sqrt(np.clip(1 - s ** 4, 0, None)) / 4
            tau = np.clip(p[:, 2], -1.0, 1.0) * half
            u = np.stack([s * np.cos(p[:, 3]), s * np.sin(p[:, 3]), tau], axis=1)
            return hb.dilate(u, 1.0 - 1e-9)
        u = np.clip(p[:, 1:], -1.0, 1.0)
        norm = np.linalg.norm(u, axis=1, keepdims=True)
        u = np.where(norm > 1.0, u / np.maximum(norm, 1e-300), u)
        return u * (1.0 - 1e-9)

    def balls(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        r = np.clip(p[:, 0], 1e-3, 1.0) * self.rmax
        u = self.offsets(p)
        if self.heis:
            scale = np.stack([r, r, r * r], axis=1)
            centers = hb.multiply(np.broadcast_to(self.x, u.shape), u * scale)
        else:
            centers = self.x + r[:, None] * u
        return centers, r

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.budget
        rad = np.linspace(1.0 / b.radii, 1.0, b.radii)
        if self.heis:
            s = np.linspace(0.0, 1.0, b.center_grid)
            tau = np.linspace(-1.0, 1.0, b.center_grid)
            az = np.linspace(0.0, 2 * np.pi, b.azimuths, endpoint=False)
            mesh = np.meshgrid(rad, s, tau, az, indexing="ij")
            step = np.array([rad[1] - rad[0] if len(rad) > 1 else 0.5, s[1] - s[0], tau[1] - tau[0],
                             2 * np.pi / b.azimuths])
        else:
            axis = np.linspace(-1.0, 1.0, b.center_grid)
            mesh = np.meshgrid(rad, *([axis] * self.space.dim), indexing="ij")
            step = np.array([rad[1] - rad[0] if len(rad) > 1 else 0.5] + [axis[1] - axis[0]] * self.space.dim)
        params = np.stack([m.ravel() for m in mesh], axis=1)
        if not self.heis:
            params = params[np.linalg.norm(params[:, 1:], axis=1) <= 1.0]
        return params, step


def _zeta_ball(z: SizeFunction, radius: np.ndarray) -> np.ndarray:
    r = np.asarray(radius, dtype=float)
    return np.where(r == 0, 0.0, z.c * (2.0 * r) ** z.alpha)


def federer_density(space: MetricSpec, mu, z: SizeFunction, x, epsilon_ladder: Sequence[float],
                    budget: SearchBudget | None = None, trend_tol: float = 0.01) -> DensityEstimate:
    """Covering-limsup density over closed balls containing ``x``.

    Each rung maximises ``mu(B)/zeta(B)`` over balls ``B(y, r)`` with ``x`` in
    the ball and ``2r < epsilon``: a coarse grid over (radius, centre offset)
    scored by node counting, then coordinate descent on exact masses.  The
    reported value is the finest rung; no limit is extrapolated.
    """
    if z.kind != "spherical":
        raise ValueError("federer_density searches closed balls; use a spherical size function")
    budget = budget or SearchBudget()
    ladder = _check_ladder(epsilon_ladder)
    x = space.as_points(x)
    rungs = []
    for eps in ladder:
        rmax = 0.5 * eps * (1.0 - 1e-9)
        local = mu.localize(space, x, eps, budget.coarse_nodes)
        fam = _OffsetBall(space, x, rmax, budget)
        params, step = fam.grid()
        centers, radii = fam.balls(params)
        masses = local.coarse_masses(space, centers, radii)
        zeta = _zeta_ball(z, radii)
        keep = np.array([admissible(m, zt) for m, zt in zip(masses, zeta)])
        q = np.where(keep, masses / np.where(zeta > 0, zeta, 1.0), -INF)
        evaluations = len(params)
        if not np.isfinite(q).any() or np.max(q) == -INF:
            raise RuntimeError(f"no admissible ball found at epsilon={eps:.4g}; increase the search budget")
        fine = local if isinstance(local, WeightedCloud) else CurveMeasure(
            local.curve, local.density, local.interval, budget.fine_nodes)
        order = np.lexsort((np.arange(len(q)), -q))
        best_val, best_ball = -INF, None
        for idx in order[: budget.restarts]:
            val, ball, n_eval = _refine(space, fine, z, fam, params[idx], step, budget.refine_steps)
            evaluations += n_eval
            if val > best_val:
                best_val, best_ball = val, ball
        if space.distance(best_ball.center, x) > best_ball.radius or 2 * best_ball.radius >= eps:
            raise AssertionError("recorded argmax ball is infeasible")
        rungs.append(DensityRung(eps, float(best_val), best_ball, evaluations))
    values = [r.value for r in rungs]
    return DensityEstimate(rungs, values[-1], classify_trend(values, trend_tol), "federer")


def _exact_q(space, mu, z, fam, p):
    centers, radii = fam.balls(p[None, :])
    ball = Ball(centers[0], float(radii[0]))
    m = mu.measure(space, ball)
    zeta = float(_zeta_ball(z, radii)[0])
    if not admissible(m, zeta):
        return -INF, ball
    return quotient_value(m, zeta), ball


def _refine(space, mu, z, fam, p0, step0, sweeps):
    best_p = np.array(p0, dtype=float)
    best_v, best_ball = _exact_q(space, mu, z, fam, best_p)
    step = np.array(step0, dtype=float)
    n_eval = 1
    for _ in range(sweeps):
        improved = False
        for j in range(len(best_p)):
            for sgn in (1.0, -1.0):
                p = best_p.copy()
                p[j] += sgn * step[j]
                v, ball = _exact_q(space, mu, z, fam, p)
                n_eval += 1
                if v > best_v:
                    best_p, best_v, best_ball, improved = p, v, ball, True
        if not improved:
            step *= 0.5
    return best_v, best_ball, n_eval


def centered_density(space: MetricSpec, mu, alpha: float, x, radius_ladder: Sequence[float],
                     trend_tol: float = 0.01) -> DensityEstimate:
    """``mu(B(x, r)) / r^alpha`` along a decreasing radius ladder."""
    ladder = _check_ladder(radius_ladder)
    x = space.as_points(x)
    rungs = []
    for r in ladder:
        ball = Ball(x, r)
        local = mu.localize(space, x, r) if isinstance(mu, CurveMeasure) else mu
        m = local.measure(space, ball)
        rungs.append(DensityRung(r, m / r ** alpha, ball, 1))
    values = [r.value for r in rungs]
    return DensityEstimate(rungs, values[-1], classify_trend(values, trend_tol), "centered")
