"""First Heisenberg group in exponential coordinates ``(x, y, t)``.

Conventions used throughout the package:

* group law ``(x, y, t)(x', y', t') = (x + x', y + y', t + t' + (x y' - y x') / 2)``;
* left-invariant frame ``X = dx - (y/2) dt``, ``Y = dy + (x/2) dt``, ``T = dt``,
  with the Riemannian metric ``g`` making ``(X, Y, T)`` orthonormal;
* Korányi gauge ``((x^2 + y^2)^2 + 16 t^2)^(1/4)``;
* dilations ``(x, y, t) -> (l x, l y, l^2 t)``.

With this law a horizontal loop gains height equal to the signed area it
encloses, so the CC distance from the origin to ``(0, 0, tau)`` is
``sqrt(4 pi |tau|)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq, least_squares, minimize_scalar
from scipy.integrate import solve_ivp

TWO_PI = 2.0 * math.pi
KORANYI_CONSTANT = 16.0


class ConvergenceError(RuntimeError):
    """Raised when the CC geodesic solve misses its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


def _as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError(f"Heisenberg points need 3 coordinates, got shape {arr.shape}")
    return arr


# ----------------------------------------------------------------------------
# Group structure
# ----------------------------------------------------------------------------

def multiply(p, q) -> np.ndarray:
    p = _as_points(p)
    q = _as_points(q)
    x = p[..., 0] + q[..., 0]
    y = p[..., 1] + q[..., 1]
    t = p[..., 2] + q[..., 2] + 0.5 * (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    return np.stack([x, y, t], axis=-1)


def invert(p) -> np.ndarray:
    return -_as_points(p)


def dilate(p, lam: float) -> np.ndarray:
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    p = _as_points(p)
    scale = np.array([lam, lam, lam * lam])
    return p * scale


def group_op(p, q=None, mode: str = "multiply", lam: float | None = None) -> np.ndarray:
    """Dispatch ``multiply``, ``invert`` or ``dilate`` by name."""
    if mode == "multiply":
        return multiply(p, q)
    if mode == "invert":
        return invert(p)
    if mode == "dilate":
        if lam is None:
            raise ValueError("dilate needs lam")
        return dilate(p, lam)
    raise ValueError(f"unknown group operation {mode!r}")


# ----------------------------------------------------------------------------
# Korányi distance
# ----------------------------------------------------------------------------

def koranyi_norm(p) -> np.ndarray:
    p = _as_points(p)
    r2 = p[..., 0] ** 2 + p[..., 1] ** 2
    return (r2 * r2 + KORANYI_CONSTANT * p[..., 2] ** 2) ** 0.25


def koranyi_distance(p, q):
    d = koranyi_norm(multiply(invert(p), q))
    return float(d) if np.ndim(d) == 0 else d


# ----------------------------------------------------------------------------
# Carnot-Carathéodory distance
# ----------------------------------------------------------------------------
#
# Unit-speed geodesics from the origin with curvature phi (total turning over
# unit length) end at planar radius 2|sin(phi/2)|/|phi| and height
# (phi - sin phi) / (2 phi^2).  They minimise up to |phi| = 2 pi.

def _phi_minus_sin(phi):
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < 0.1
    p2 = phi * phi
    series = phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    return np.where(small, series, phi - np.sin(phi))


def sphere_radius(phi):
    """Planar radius of the CC unit-sphere point reached with curvature ``phi``."""
    phi = np.abs(np.asarray(phi, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(phi < 1e-12, 1.0, 2.0 * np.sin(0.5 * phi) / np.where(phi == 0, 1.0, phi))
    return np.where(phi >= TWO_PI, 0.0, np.maximum(s, 0.0))


def sphere_height(phi):
    """Height of the CC unit-sphere point reached with curvature ``phi`` (odd in phi)."""
    phi = np.asarray(phi, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        h = _phi_minus_sin(phi) / (2.0 * np.where(phi == 0, 1.0, phi) ** 2)
    return np.where(phi == 0, 0.0, h)


def _height_ratio(phi):
    # |t| / r^2 along the geodesic family, increasing from 0 to inf on [0, 2 pi)
    half = np.sin(0.5 * phi)
    with np.errstate(divide="ignore"):
        return _phi_minus_sin(phi) / (8.0 * half * half)


@lru_cache(maxsize=1)
def _ratio_table(n: int = 4097):
    phi = np.linspace(0.0, TWO_PI, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.log(_height_ratio(phi))
    g[0] = -np.inf
    g[-1] = np.inf
    return phi, g


def _solve_phi(ratio: np.ndarray, tol: float) -> np.ndarray:
    """Root of ``log(height ratio) = log(ratio)`` for phi in [0, 2 pi).

    The tabulated bracket is refined by the Illinois variant of regula falsi
    on the still-unconverged entries only.
    """
    phi_grid, g_grid = _ratio_table()
    ratio = np.asarray(ratio, dtype=float)
    tiny = np.ravel(ratio) < 1e-7
    target = np.log(np.ravel(np.where(tiny.reshape(ratio.shape), 1.0, ratio)))
    idx = np.clip(np.searchsorted(g_grid, target) - 1, 0, len(phi_grid) - 2)
    lo = phi_grid[idx].copy()
    hi = phi_grid[idx + 1].copy()
    flo = g_grid[idx] - target
    fhi = g_grid[idx + 1] - target
    side = np.zeros(lo.shape, dtype=int)
    out = np.full(lo.shape, np.nan)
    act = np.arange(len(target))
    step_tol = tol * 1e-3
    for it in range(60):
        l, h, fl, fh, tg = lo[act], hi[act], flo[act], fhi[act], target[act]
        if it < 40:
            with np.errstate(divide="ignore", invalid="ignore"):
                mid = h - fh * (h - l) / (fh - fl)
            bad = (mid <= l) | (mid >= h) | ~np.isfinite(mid)
            mid = np.where(bad, 0.5 * (l + h), mid)
        else:
            mid = 0.5 * (l + h)
        with np.errstate(divide="ignore", invalid="ignore"):
            fmid = np.log(_height_ratio(mid)) - tg
        right = fmid > 0
        sd = side[act]
        fl = np.where(right, fl, fmid)
        fh = np.where(right, fmid, fh)
        # Illinois: halve the stale endpoint value when the same side moves twice
        fl = np.where(right & (sd == 1), 0.5 * fl, fl)
        fh = np.where(~right & (sd == -1), 0.5 * fh, fh)
        lo[act] = np.where(right, l, mid)
        hi[act] = np.where(right, mid, h)
        flo[act], fhi[act] = fl, fh
        side[act] = np.where(right, 1, -1)
        done = (np.abs(mid - out[act]) <= step_tol) | (fmid == 0) | (hi[act] - lo[act] <= step_tol)
        out[act] = mid
        act = act[~done]
        if act.size == 0:
            break
    rt = np.ravel(ratio)[tiny]
    out[tiny] = 12.0 * rt * (1.0 - 4.8 * rt * rt)
    return out.reshape(np.shape(ratio))


_VERTICAL_RATIO = 1e24


def cc_norm(p, tol: float = 1e-8):
    """CC distance from the origin, vectorised over leading axes."""
    p = _as_points(p)
    if p.ndim == 1:
        return _cc_norm_scalar(float(p[0]), float(p[1]), float(p[2]), tol)
    r = np.hypot(p[..., 0], p[..., 1])
    at = np.abs(p[..., 2])
    out = np.empty(np.broadcast(r, at).shape)
    out = np.asarray(out)
    horizontal = at == 0
    vertical = (at > _VERTICAL_RATIO * r * r) & ~horizontal
    generic = ~(horizontal | vertical)
    out[horizontal] = r[horizontal]
    out[vertical] = np.sqrt(4.0 * math.pi * at[vertical])
    if np.any(generic):
        rr = r[generic]
        tt = at[generic]
        phi = _solve_phi(tt / (rr * rr), tol)
        half = np.sin(0.5 * phi)
        via_radius = rr * phi / (2.0 * np.where(half == 0, 1.0, half))
        with np.errstate(divide="ignore", invalid="ignore"):
            via_height = np.sqrt(2.0 * phi * phi * tt / _phi_minus_sin(phi))
        d = np.where(phi < math.pi, via_radius, via_height)
        resid = np.maximum(
            np.abs(sphere_height(phi) * d * d - tt) / np.maximum(d * d, 1e-300),
            np.abs(sphere_radius(phi) * d - rr) / np.maximum(d, 1e-300),
        )
        worst = float(np.max(resid)) if resid.size else 0.0
        if not np.isfinite(worst) or worst > max(10 * tol, 1e-9):
            raise ConvergenceError("CC geodesic solve did not converge", worst)
        out[generic] = d
    return float(out) if out.ndim == 0 else out


def _scalar_phi_minus_sin(phi: float) -> float:
    if abs(phi) < 0.1:
        p2 = phi * phi
        return phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    return phi - math.sin(phi)


def _cc_norm_scalar(x: float, y: float, t: float, tol: float) -> float:
    r = math.hypot(x, y)
    at = abs(t)
    if at == 0.0:
        return r
    # beyond this height ratio the planar offset changes d by under 1e-12 relative
    if r == 0.0 or at > _VERTICAL_RATIO * r * r:
        return math.sqrt(4.0 * math.pi * at)
    ratio = at / (r * r)
    if ratio < 1e-7:
        # height ratio = phi (1 + phi^2 / 30) / 12 + O(phi^5)
        phi = 12.0 * ratio * (1.0 - 4.8 * ratio * ratio)
    else:
        target = math.log(ratio)

        def f(phi):
            half = math.sin(0.5 * phi)
            if half == 0.0:
                return math.inf
            return math.log(_scalar_phi_minus_sin(phi) / (8.0 * half * half)) - target

        hi = TWO_PI * (1 - 1e-15)
        if f(hi) < 0:
            return math.sqrt(4.0 * math.pi * at)
        phi = brentq(f, 1e-9, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps)
    if phi < math.pi:
        d = r * phi / (2.0 * math.sin(0.5 * phi))
    else:
        d = math.sqrt(2.0 * phi * phi * at / _scalar_phi_minus_sin(phi))
    resid = max(abs(float(sphere_height(phi)) * d * d - at) / (d * d), abs(float(sphere_radius(phi)) * d - r) / d)
    if resid > max(10 * tol, 1e-9):
        raise ConvergenceError("CC geodesic solve did not converge", resid)
    return d


def cc_distance(p, q, tol: float = 1e-8):
    return cc_norm(multiply(invert(p), q), tol=tol)


@lru_cache(maxsize=1)
def _cc_height_table(n: int = 16385):
    phi = np.linspace(0.0, TWO_PI, n)
    s = sphere_radius(phi)[::-1]
    t = sphere_height(phi)[::-1]
    s[0] = 0.0
    return s, t


def cc_in_unit_ball_fast(p) -> np.ndarray:
    """Approximate ``cc_norm(p) <= 1`` from a tabulated sphere profile.

    Used only to rank candidate balls; callers re-check membership exactly.
    """
    p = _as_points(p)
    s = np.hypot(p[..., 0], p[..., 1])
    s_tab, t_tab = _cc_height_table()
    limit = np.interp(s, s_tab, t_tab, right=-1.0)
    return (s <= 1.0) & (np.abs(p[..., 2]) <= limit)


def unit_sphere_point(metric: str, w, a) -> np.ndarray:
    """Point on the unit sphere for ``w`` in [-1, 1] (pole to pole) and azimuth ``a``.

    ``w = -1`` is the bottom pole, ``w = 0`` the equator, ``w = 1`` the top pole.
    """
    w = np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    if metric == "cc":
        phi = TWO_PI * w
        s = sphere_radius(phi)
        t = sphere_height(phi)
    elif metric == "koranyi":
        psi = 0.5 * math.pi * w
        s = np.sqrt(np.clip(np.cos(psi), 0.0, None))
        t = np.sin(psi) / 4.0
    else:
        raise ValueError(f"unknown Heisenberg metric {metric!r}")
    s, t, a = np.broadcast_arrays(s, t, a)
    return np.stack([s * np.cos(a), s * np.sin(a), t], axis=-1)


# ----------------------------------------------------------------------------
# Independent oracle: shooting on the Pontryagin extremal system
# ----------------------------------------------------------------------------

def _extremal_rhs(_, z, length, turning):
    x, y, t, h1, h2 = z
    return [
        length * h1,
        length * h2,
        length * 0.5 * (x * h2 - y * h1),
        -turning * h2,
        turning * h1,
    ]


def _shoot(theta0: float, turning: float, length: float) -> np.ndarray:
    z0 = [0.0, 0.0, 0.0, math.cos(theta0), math.sin(theta0)]
    sol = solve_ivp(
        _extremal_rhs, (0.0, 1.0), z0, args=(length, turning),
        method="DOP853", rtol=1e-12, atol=1e-14,
    )
    return sol.y[:3, -1]


def cc_norm_shooting(p, starts: Sequence[float] = (0.5, 2.0, 4.0, 5.5, 6.2)) -> float:
    """CC distance from the origin by ODE shooting.

    Integrates the normal extremal equations numerically and solves for the
    initial direction, total turning and length reaching ``p``; the shortest
    extremal with total turning at most ``2 pi`` wins.  Shares no code with
    :func:`cc_norm`.
    """
    target = np.asarray(p, dtype=float)
    x, y, t = target
    r = math.hypot(x, y)
    if t == 0.0:
        return r
    sign = 1.0 if t > 0 else -1.0
    best = math.inf
    for k0 in starts:
        k0 = sign * k0
        # rough length guess from the closed-loop relation
        l0 = max(r, math.sqrt(4 * math.pi * abs(t)))
        if r == 0.0:
            def resid(v):
                turning, length = v
                end = _shoot(0.0, turning, length)
                return [end[0], end[1], end[2] - t]
            sol = least_squares(resid, [k0, l0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
            turning, length = sol.x
        else:
            theta_guess = math.atan2(y, x) - 0.5 * k0

            def resid(v):
                theta0, turning, length = v
                end = _shoot(theta0, turning, length)
                return end - target
            sol = least_squares(resid, [theta_guess, k0, l0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
            turning, length = sol.x[1], sol.x[2]
        if np.max(np.abs(sol.fun)) < 1e-9 and abs(turning) <= TWO_PI + 1e-6 and length > 0:
            best = min(best, abs(length))
    if not math.isfinite(best):
        raise ConvergenceError("shooting found no admissible extremal", float("inf"))
    return best


# ----------------------------------------------------------------------------
# Unit ball profiles and the chord constants
# ----------------------------------------------------------------------------

@dataclass
class BallProfile:
    """Vertical chords of a unit ball as a function of planar radius."""

    metric: str
    radii: np.ndarray
    chords: list
    resolution: tuple
    sweep_phi: np.ndarray | None = field(default=None, repr=False)

    def chords_at(self, s: float) -> list[tuple[float, float]]:
        """Chord intervals at an arbitrary planar radius (exact, not interpolated)."""
        return _chords_at(self.metric, float(s), self.sweep_phi)

    def chord_length(self, s: float) -> float:
        return sum(hi - lo for lo, hi in self.chords_at(s))

    def lengths(self) -> np.ndarray:
        return np.array([sum(hi - lo for lo, hi in ch) for ch in self.chords])

    def max_planar_extent(self) -> float:
        return 1.0

    def to_rows(self) -> list[tuple[float, float, float]]:
        rows = []
        for s, chords in zip(self.radii, self.chords):
            for lo, hi in chords:
                rows.append((float(s), float(lo), float(hi)))
        return rows


def _koranyi_chords(s: float) -> list[tuple[float, float]]:
    if s > 1.0:
        return []
    h = math.sqrt(max(1.0 - s ** 4, 0.0)) / 4.0
    return [(-h, h)]


def _chords_at(metric: str, s: float, sweep_phi: np.ndarray | None) -> list[tuple[float, float]]:
    if s < 0:
        raise ValueError("planar radius must be nonnegative")
    if metric == "koranyi":
        return _koranyi_chords(s)
    if metric != "cc":
        raise ValueError(f"unknown Heisenberg metric {metric!r}")
    if s > 1.0:
        return []
    phi = sweep_phi if sweep_phi is not None else np.linspace(-TWO_PI, TWO_PI, 513)
    f = sphere_radius(phi) - s
    heights = []
    for k in range(len(phi) - 1):
        if f[k] == 0.0:
            heights.append(float(sphere_height(phi[k])))
        elif f[k] * f[k + 1] < 0.0:
            root = brentq(lambda v: float(sphere_radius(v)) - s, phi[k], phi[k + 1], xtol=1e-14, rtol=1e-15)
            heights.append(float(sphere_height(root)))
    if f[-1] == 0.0:
        heights.append(float(sphere_height(phi[-1])))
    if not heights:
        return []
    heights = sorted(heights)
    uniq = [heights[0]]
    for h in heights[1:]:
        if h - uniq[-1] > 1e-12:
            uniq.append(h)
    if len(uniq) == 1:
        return [(uniq[0], uniq[0])]
    chords: list[tuple[float, float]] = []
    for lo, hi in zip(uniq[:-1], uniq[1:]):
        mid = np.array([s, 0.0, 0.5 * (lo + hi)])
        if cc_norm(mid) <= 1.0:
            if chords and abs(chords[-1][1] - lo) < 1e-12:
                chords[-1] = (chords[-1][0], hi)
            else:
                chords.append((lo, hi))
    return chords


def unit_ball_profile(metric: str, resolution: tuple[int, int] = (64, 256)) -> BallProfile:
    """Tabulate the vertical chords of the unit ball centred at the origin.

    For ``"cc"`` the sphere is traced by sweeping the geodesic endpoint map
    over curvature in ``[-2 pi, 2 pi]``; crossings with each planar radius
    are refined by root finding.  ``"koranyi"`` chords are closed form.
    """
    radial_steps, parameter_steps = resolution
    if radial_steps < 64 or parameter_steps < 256:
        raise ValueError(
            f"profile resolution {resolution} too coarse to resolve chords near the equator; "
            "need at least (64, 256)"
        )
    radii = np.linspace(0.0, 1.0, radial_steps + 1)
    sweep = None
    if metric == "cc":
        sweep = np.linspace(-TWO_PI, TWO_PI, parameter_steps + 1)
    elif metric != "koranyi":
        raise ValueError(f"unknown Heisenberg metric {metric!r}")
    chords = [_chords_at(metric, float(s), sweep) for s in radii]
    return BallProfile(metric, radii, chords, (radial_steps, parameter_steps), sweep)


def alpha_beta(profile: BallProfile) -> tuple[float, float, float]:
    """Maximal vertical chord ``alpha``, axis chord ``beta`` and the argmax radius."""
    lengths = profile.lengths()
    beta = float(lengths[0])
    k = int(np.argmax(lengths))
    lo = profile.radii[max(k - 1, 0)]
    hi = profile.radii[min(k + 1, len(profile.radii) - 1)]
    res = minimize_scalar(
        lambda s: -profile.chord_length(s), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10},
    )
    alpha, arg = float(lengths[k]), float(profile.radii[k])
    if -res.fun > alpha:
        alpha, arg = float(-res.fun), float(res.x)
    return alpha, beta, arg


# ----------------------------------------------------------------------------
# Curves and their intrinsic measure
# ----------------------------------------------------------------------------

def frame_coefficients(points, velocity) -> np.ndarray:
    """Coefficients ``(h1, h2, v)`` of ``velocity`` in the frame ``(X, Y, T)``."""
    points = _as_points(points)
    velocity = _as_points(velocity)
    h1 = velocity[..., 0]
    h2 = velocity[..., 1]
    v = velocity[..., 2] - 0.5 * (points[..., 0] * h2 - points[..., 1] * h1)
    return np.stack([h1, h2, v], axis=-1)


@dataclass
class CurveSpec:
    """Sampled C^1 curve in the Heisenberg group.

    ``path`` and ``velocity`` are optional exact callables; without them the
    curve is evaluated by cubic Hermite interpolation of the stored nodes.
    """

    interval: tuple[float, float]
    nodes: np.ndarray
    positions: np.ndarray
    derivatives: np.ndarray
    frame: np.ndarray = field(init=False)
    path: Callable | None = field(default=None, repr=False)
    velocity: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.positions = _as_points(self.positions).reshape(-1, 3)
        self.derivatives = _as_points(self.derivatives).reshape(-1, 3)
        a, b = self.interval
        if not b > a:
            raise ValueError("curve interval must be nondegenerate")
        if len(self.nodes) < 2 or len(self.nodes) != len(self.positions):
            raise ValueError("need at least two nodes with matching positions")
        self.frame = frame_coefficients(self.positions, self.derivatives)
        self._spline = CubicHermiteSpline(self.nodes, self.positions, self.derivatives, axis=0)

    @classmethod
    def from_functions(cls, path: Callable, velocity: Callable, a: float, b: float, n: int = 257) -> "CurveSpec":
        nodes = np.linspace(a, b, n)
        return cls((a, b), nodes, path(nodes), velocity(nodes), path=path, velocity=velocity)

    @classmethod
    def vertical_segment(cls, length: float, base=(0.0, 0.0, 0.0), n: int = 257) -> "CurveSpec":
        base = np.asarray(base, dtype=float)

        def path(s):
            s = np.asarray(s, dtype=float)
            return multiply(base, np.stack([np.zeros_like(s), np.zeros_like(s), s], axis=-1))

        def velocity(s):
            s = np.asarray(s, dtype=float)
            return np.stack([np.zeros_like(s), np.zeros_like(s), np.ones_like(s)], axis=-1)

        return cls.from_functions(path, velocity, 0.0, float(length), n)

    def position(self, s) -> np.ndarray:
        if self.path is not None:
            return np.asarray(self.path(np.asarray(s, dtype=float)), dtype=float)
        return self._spline(s)

    def tangent(self, s) -> np.ndarray:
        if self.velocity is not None:
            return np.asarray(self.velocity(np.asarray(s, dtype=float)), dtype=float)
        return self._spline.derivative()(s)

    def vertical_component(self, s) -> np.ndarray:
        """The T-coefficient ``v(s)`` of the tangent in the left-invariant frame."""
        return frame_coefficients(self.position(s), self.tangent(s))[..., 2]

    def check(self, frame_tol: float = 1e-10, c1_tol: float = 1e-3) -> None:
        """Verify the frame decomposition and a finite-difference C^1 proxy."""
        h1, h2, v = self.frame.T
        x, y = self.positions[:, 0], self.positions[:, 1]
        rebuilt = np.stack([h1, h2, v - 0.5 * y * h1 + 0.5 * x * h2], axis=-1)
        if np.max(np.abs(rebuilt - self.derivatives)) > frame_tol:
            raise ValueError("frame coefficients do not reproduce the tangent")
        fd = np.gradient(self.positions, self.nodes, axis=0, edge_order=2)
        scale = max(1.0, float(np.max(np.abs(self.derivatives))))
        if np.max(np.abs(fd - self.derivatives)) > c1_tol * scale:
            raise ValueError("stored derivatives disagree with finite differences of positions")

    def to_json(self) -> dict:
        return {
            "interval": list(self.interval),
            "nodes": self.nodes.tolist(),
            "positions": self.positions.tolist(),
            "derivatives": self.derivatives.tolist(),
        }

    @classmethod
    def from_json(cls, doc) -> "CurveSpec":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(tuple(doc["interval"]), doc["nodes"], doc["positions"], doc["derivatives"])


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def gauss_legendre(f: Callable, a: float, b: float, panels: int) -> float:
    """Composite 8-point Gauss-Legendre rule for a vectorised integrand."""
    if b <= a:
        return 0.0
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = np.asarray(f(pts), dtype=float).reshape(panels, -1)
    return float(np.sum(half * (vals @ _GL_W)))


def intrinsic_measure(curve: CurveSpec, sub_interval=None, refine: int = 1) -> float:
    """Intrinsic measure: integral of ``|v(s)|`` over ``sub_interval``.

    One Gauss-Legendre panel per node gap, times ``refine``.
    """
    a, b = curve.interval
    lo, hi = (a, b) if sub_interval is None else sub_interval
    if lo < a - 1e-12 or hi > b + 1e-12 or hi < lo:
        raise ValueError(f"sub-interval {sub_interval} outside curve interval {curve.interval}")
    if hi == lo:
        return 0.0
    gap = (b - a) / (len(curve.nodes) - 1)
    panels = max(1, int(math.ceil((hi - lo) / gap))) * refine
    return gauss_legendre(lambda s: np.abs(curve.vertical_component(s)), lo, hi, panels)


def nonhorizontal_set(curve: CurveSpec, threshold: float) -> list[tuple[float, float]]:
    """Maximal parameter intervals on which ``|v| >= threshold``.

    Interval ends are located by linear interpolation between nodes.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    s = curve.nodes
    g = np.abs(curve.vertical_component(s)) - threshold
    inside = g >= 0
    out: list[tuple[float, float]] = []
    start = None
    for k in range(len(s)):
        if inside[k] and start is None:
            if k == 0:
                start = s[0]
            else:
                start = s[k - 1] + (s[k] - s[k - 1]) * (-g[k - 1]) / (g[k] - g[k - 1])
        elif not inside[k] and start is not None:
            end = s[k - 1] + (s[k] - s[k - 1]) * (-g[k - 1]) / (g[k] - g[k - 1])
            out.append((float(start), float(end)))
            start = None
    if start is not None:
        out.append((float(start), float(s[-1])))
    return out
