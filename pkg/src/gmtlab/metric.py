"""Metric spaces, balls, and set representations."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import heisenberg as hb

KINDS = ("euclidean", "koranyi", "cc", "finite")


class CoarseSamplingWarning(UserWarning):
    """A curve diameter was computed from samples spaced wider than the floor."""


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """A named metric space.

    Points are coordinate vectors for the continuous kinds and labels for
    ``finite`` spaces.  Use the ``euclidean``, ``koranyi``, ``cc``, ``finite``
    and ``from_json`` constructors rather than the raw initializer.
    """

    kind: str
    dim: int
    labels: tuple = ()
    table: np.ndarray | None = field(default=None, repr=False)
    cc_tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")

    @classmethod
    def euclidean(cls, dim: int) -> "MetricSpec":
        if dim < 1:
            raise ValueError("dimension must be positive")
        return cls("euclidean", dim)

    @classmethod
    def koranyi(cls) -> "MetricSpec":
        return cls("koranyi", 3)

    @classmethod
    def cc(cls, tol: float = 1e-8) -> "MetricSpec":
        return cls("cc", 3, cc_tol=tol)

    @classmethod
    def finite(cls, labels: Sequence, table, check: bool = True, tol: float = 1e-12) -> "MetricSpec":
        table = np.asarray(table, dtype=float)
        labels = tuple(labels)
        n = len(labels)
        if table.shape != (n, n):
            raise ValueError(f"distance table must be {n}x{n}, got {table.shape}")
        if len(set(labels)) != n:
            raise ValueError("labels must be distinct")
        if check:
            validate_table(table, tol)
        table.setflags(write=False)
        return cls("finite", 0, labels, table)

    @classmethod
    def from_json(cls, doc) -> "MetricSpec":
        """Load ``{"labels": [...], "distances": [[...]]}`` from a dict, string or path."""
        if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
            doc = json.loads(Path(doc).read_text())
        elif isinstance(doc, str):
            doc = json.loads(doc)
        return cls.finite(doc["labels"], doc["distances"])

    @classmethod
    def named(cls, name: str) -> "MetricSpec":
        """Parse ``euclidean2``, ``euclidean-3``, ``koranyi`` or ``cc``."""
        name = name.lower().replace("-", "").replace("_", "")
        if name.startswith("euclidean"):
            return cls.euclidean(int(name[len("euclidean"):] or 2))
        if name == "koranyi":
            return cls.koranyi()
        if name in ("cc", "ccheisenberg"):
            return cls.cc()
        raise ValueError(f"unknown space {name!r}")

    def to_json(self) -> dict:
        if self.kind != "finite":
            return {"kind": self.kind, "dim": self.dim}
        return {"labels": list(self.labels), "distances": self.table.tolist()}

    # -- points -------------------------------------------------------------

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def indices(self, labels) -> np.ndarray:
        return np.array([self.index(lab) for lab in labels], dtype=int)

    def as_points(self, pts) -> np.ndarray:
        """Coordinates as a float array of shape ``(..., dim)``; label indices for finite spaces."""
        if self.kind == "finite":
            if np.ndim(pts) == 0 or isinstance(pts, str):
                return np.asarray(self.index(pts))
            return self.indices(pts)
        arr = np.asarray(pts, dtype=float)
        if arr.shape[-1] != self.dim:
            raise ValueError(f"point dimension {arr.shape[-1]} does not match space dimension {self.dim}")
        return arr

    # -- distances ----------------------------------------------------------

    def _raw(self, p: np.ndarray, q: np.ndarray):
        if self.kind == "euclidean":
            return np.linalg.norm(q - p, axis=-1)
        if self.kind == "koranyi":
            return hb.koranyi_norm(hb.multiply(hb.invert(p), q))
        if self.kind == "cc":
            return hb.cc_norm(hb.multiply(hb.invert(p), q), tol=self.cc_tol)
        return self.table[p, q]

    def distance(self, p, q) -> float:
        return float(self._raw(self.as_points(p), self.as_points(q)))

    def distances(self, p, qs) -> np.ndarray:
        """Distances from one point to many, vectorised."""
        p = self.as_points(p)
        qs = self.as_points(qs)
        return np.asarray(self._raw(p, qs), dtype=float)

    def pairwise(self, ps, qs=None) -> np.ndarray:
        ps = self.as_points(ps)
        qs = ps if qs is None else self.as_points(qs)
        if self.kind == "finite":
            return self.table[np.ix_(ps, qs)]
        return np.asarray(self._raw(ps[:, None, :], qs[None, :, :]), dtype=float)

    def offset_center(self, p, radius: float, u) -> np.ndarray:
        """Centre ``y`` with ``d(p, y) = radius * |u|`` for unit-ball offsets ``u``.

        Euclidean: ``p + radius u``; Heisenberg: ``p * dilate(u, radius)``.
        """
        p = self.as_points(p)
        u = np.asarray(u, dtype=float)
        if self.kind == "euclidean":
            return p + radius * u
        if self.kind in ("koranyi", "cc"):
            return hb.multiply(p, hb.dilate(u, radius)) if radius > 0 else np.broadcast_to(p, u.shape).copy()
        raise ValueError("offset centres are defined for continuous spaces only")

    def in_unit_ball_fast(self, w) -> np.ndarray:
        """Approximate unit-ball membership test for already normalised offsets."""
        if self.kind == "euclidean":
            return np.linalg.norm(w, axis=-1) <= 1.0
        if self.kind == "koranyi":
            return hb.koranyi_norm(w) <= 1.0
        if self.kind == "cc":
            return hb.cc_in_unit_ball_fast(w)
        raise ValueError("defined for continuous spaces only")

    def normalise(self, center, radius: float, pts) -> np.ndarray:
        """Map ``pts`` by the similarity sending ``B(center, radius)`` to the unit ball."""
        center = self.as_points(center)
        pts = self.as_points(pts)
        if self.kind == "euclidean":
            return (pts - center) / radius
        return hb.dilate(hb.multiply(hb.invert(center), pts), 1.0 / radius)


def validate_table(table: np.ndarray, tol: float = 1e-12) -> None:
    """Reject tables that are not symmetric, zero-diagonal, nonnegative metrics."""
    if np.any(table < 0) or not np.all(np.isfinite(table)):
        raise ValueError("distances must be finite and nonnegative")
    if np.any(np.abs(np.diag(table)) > tol):
        raise ValueError("distance table must have zero diagonal")
    if np.any(np.abs(table - table.T) > tol):
        raise ValueError("distance table is not symmetric")
    off = ~np.eye(len(table), dtype=bool)
    if np.any(table[off] <= 0):
        raise ValueError("distinct labels must be at positive distance")
    # d(i,k) <= d(i,j) + d(j,k) for all triples
    via = table[:, :, None] + table[None, :, :]
    if np.any(table[:, None, :] > via + tol):
        i, j, k = np.argwhere(table[:, None, :] > via + tol)[0]
        raise ValueError(f"triangle inequality fails on labels ({i}, {j}, {k})")


# ----------------------------------------------------------------------------
# Sets
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """Closed (default) or open ball ``B(center, radius)``."""

    center: Any
    radius: float
    closed: bool = True

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def to_json(self) -> dict:
        c = self.center
        c = c.tolist() if isinstance(c, np.ndarray) else c
        return {"ball": {"center": c, "radius": float(self.radius), "closed": self.closed}}


BallDescriptor = Ball


@dataclass(frozen=True, eq=False)
class Cloud:
    """Finite point set; coordinates of shape ``(n, dim)`` or a list of labels."""

    points: Any

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        pts = self.points
        pts = pts.tolist() if isinstance(pts, np.ndarray) else list(pts)
        return {"cloud": pts}


class ParametricCurve:
    """A curve given by a vectorised callable ``s -> (n, dim)``."""

    def __init__(self, func: Callable, name: str = "curve"):
        self.func = func
        self.name = name

    def position(self, s) -> np.ndarray:
        return np.asarray(self.func(np.asarray(s, dtype=float)), dtype=float)

    @classmethod
    def segment(cls, start, end) -> "ParametricCurve":
        """Straight segment ``start + s (end - start)`` for ``s`` in [0, 1]."""
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        curve = cls(lambda s: start + np.multiply.outer(s, end - start), "segment")
        curve.endpoints = (start, end)
        return curve


@dataclass(frozen=True, eq=False)
class CurveSegment:
    """Curve restricted to ``interval`` and sampled at ``n_samples`` uniform parameters.

    ``resolution_floor`` is the largest parameter gap trusted for diameters.
    """

    curve: Any
    interval: tuple[float, float]
    n_samples: int = 1001
    resolution_floor: float = 1e-2

    def __post_init__(self):
        a, b = self.interval
        if not b > a:
            raise ValueError("curve interval must be nondegenerate")
        if self.n_samples < 2:
            raise ValueError("need at least two samples")

    @property
    def parameter_gap(self) -> float:
        a, b = self.interval
        return (b - a) / (self.n_samples - 1)

    def parameters(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.n_samples)

    def samples(self) -> np.ndarray:
        return np.asarray(self.curve.position(self.parameters()), dtype=float)

    def to_json(self) -> dict:
        name = getattr(self.curve, "name", type(self.curve).__name__)
        doc = {"curve_segment": {"curve": name, "interval": list(self.interval), "n_samples": self.n_samples}}
        if hasattr(self.curve, "endpoints"):
            doc["curve_segment"]["endpoints"] = [e.tolist() for e in self.curve.endpoints]
        return doc


SetRep = Cloud | Ball | CurveSegment


def set_from_json(doc) -> Cloud | Ball | CurveSegment:
    """Decode a set description.

    Accepted shapes: ``{"cloud": [...]}``, ``{"ball": {"center", "radius", "closed"}}``,
    ``{"segment": {"start", "end", "n_samples"}}`` and
    ``{"vertical": {"length", "base", "n_samples"}}`` (Heisenberg vertical segment).
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "cloud" in doc:
        pts = doc["cloud"]
        if pts and not isinstance(pts[0], str):
            pts = np.asarray(pts, dtype=float)
        return Cloud(pts)
    if "ball" in doc:
        b = doc["ball"]
        c = b["center"]
        c = c if isinstance(c, str) else np.asarray(c, dtype=float)
        return Ball(c, float(b["radius"]), bool(b.get("closed", True)))
    if "segment" in doc:
        s = doc["segment"]
        return CurveSegment(ParametricCurve.segment(s["start"], s["end"]), (0.0, 1.0), int(s.get("n_samples", 1001)))
    if "vertical" in doc:
        v = doc["vertical"]
        length = float(v["length"])
        curve = hb.CurveSpec.vertical_segment(length, v.get("base", (0.0, 0.0, 0.0)))
        return CurveSegment(curve, (0.0, length), int(v.get("n_samples", 1001)))
    raise ValueError(f"unrecognised set description: {sorted(doc)}")


# ----------------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------------

def distance(space: MetricSpec, p, q) -> float:
    return space.distance(p, q)


def ball_contains(space: MetricSpec, ball: Ball, p) -> bool:
    d = space.distance(ball.center, p)
    return d <= ball.radius if ball.closed else d < ball.radius


def ball_members(space: MetricSpec, ball: Ball, pts) -> np.ndarray:
    d = space.distances(ball.center, pts)
    return d <= ball.radius if ball.closed else d < ball.radius


def cloud_diameter(space: MetricSpec, pts, chunk: int = 512) -> float:
    """Exact maximum pairwise distance of a finite point set."""
    pts = space.as_points(pts)
    n = len(pts)
    if n == 0:
        raise ValueError("diameter of an empty set")
    if space.kind == "finite":
        return float(space.table[np.ix_(pts, pts)].max())
    best = 0.0
    for i in range(0, n, chunk):
        block = space.pairwise(pts[i:i + chunk], pts)
        best = max(best, float(block.max()))
    return best


def curve_diameter(space: MetricSpec, seg: CurveSegment) -> tuple[float, bool]:
    """Sampled diameter (a lower bound) and whether the sampling is under-resolved."""
    return cloud_diameter(space, seg.samples()), seg.parameter_gap > seg.resolution_floor


def set_diameter(space: MetricSpec, s) -> float:
    if isinstance(s, Cloud):
        return cloud_diameter(space, s.points)
    if isinstance(s, Ball):
        if space.kind == "finite":
            members = [lab for lab in space.labels if ball_contains(space, s, lab)]
            return cloud_diameter(space, members)
        return 2.0 * s.radius
    if isinstance(s, CurveSegment):
        value, coarse = curve_diameter(space, s)
        if coarse:
            warnings.warn(
                f"curve sampled with parameter gap {s.parameter_gap:.3g} above floor "
                f"{s.resolution_floor:.3g}; diameter is a lower bound",
                CoarseSamplingWarning,
                stacklevel=2,
            )
        return value
    raise TypeError(f"not a set representation: {type(s).__name__}")


def sampled_ball_diameter(space: MetricSpec, ball: Ball, n: int = 2000, seed: int = 0) -> float:
    """Sampling fallback: max pairwise distance over sampled ball boundary points.

    Heisenberg spheres are sampled through their pole-to-pole parametrisation.
    """
    rng = np.random.default_rng(seed)
    if space.kind == "euclidean":
        u = rng.normal(size=(n, space.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        u = np.vstack([u, -u])
    elif space.kind in ("koranyi", "cc"):
        u = hb.unit_sphere_point(space.kind, rng.uniform(-1, 1, n), rng.uniform(0, 2 * np.pi, n))
        # include the antipodal equator pair explicitly
        u = np.vstack([u, [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]])
    else:
        return set_diameter(space, ball)
    pts = space.offset_center(ball.center, ball.radius, u)
    return cloud_diameter(space, pts)
