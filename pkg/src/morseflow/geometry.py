"""Coordinate charts for compact 1- and 2-manifolds with boundary.

Two chart shapes cover the built-in catalog: a box region cut out by smooth
inequality constraints, and a periodic strip glued by a deck transformation
(u, v) ~ (u + period, flip * v).  All evaluators are pure; chart values are
immutable after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import AmbiguousBoundary, NotOnBoundary, PointOutsideManifold
from .params import DEFAULT, Tolerances

Array = np.ndarray


@dataclass(frozen=True)
class BoundaryConstraint:
    """Smooth scalar map b; the manifold side is {b <= 0}, the wall is {b = 0}."""

    name: str
    value: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]


@dataclass(frozen=True)
class RegionChart:
    dim: int
    box: tuple[tuple[float, float], ...]
    constraints: tuple[BoundaryConstraint, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if len(self.box) != self.dim:
            raise ValueError("box must have one (lo, hi) pair per axis")


@dataclass(frozen=True)
class QuotientChart:
    """Strip R x [v_min, v_max] with deck map (u, v) -> (u + period, flip * v)."""

    period: float
    v_min: float
    v_max: float
    flip: int

    def __post_init__(self):
        if self.flip not in (-1, 1):
            raise ValueError("flip must be +1 or -1")
        if self.flip == -1 and abs(self.v_min + self.v_max) > 1e-15:
            raise ValueError("flip = -1 requires v_min = -v_max")

    @property
    def dim(self) -> int:
        return 2

    @property
    def box(self) -> tuple[tuple[float, float], ...]:
        return ((0.0, self.period), (self.v_min, self.v_max))


ChartModel = Union[RegionChart, QuotientChart]


@dataclass(frozen=True)
class Point:
    """Chart coordinates in canonical form (quotient: first coordinate in [0, P))."""

    coords: tuple[float, ...]

    @property
    def array(self) -> Array:
        return np.asarray(self.coords, dtype=float)

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class MetricField:
    """Symmetric positive-definite bilinear form on chart coordinates."""

    matrix: Callable[[Array], Array]
    identity: bool = False

    @classmethod
    def euclidean(cls, dim: int) -> "MetricField":
        eye = np.eye(dim)
        return cls(matrix=lambda x: eye, identity=True)

    @classmethod
    def scaled(cls, dim: int, factor: float) -> "MetricField":
        mat = factor * np.eye(dim)
        return cls(matrix=lambda x: mat)


def deck_sign(chart: QuotientChart, k: int) -> int:
    return 1 if k % 2 == 0 else chart.flip


def deck_apply(chart: QuotientChart, k: int, xy: Array) -> Array:
    """k-fold deck transformation applied to raw strip coordinates."""
    out = np.array(xy, dtype=float)
    out[0] += k * chart.period
    out[1] *= deck_sign(chart, k)
    return out


def _region_violation(chart: RegionChart, x: Array, tol: float) -> str | None:
    for axis, (lo, hi) in enumerate(chart.box):
        if x[axis] < lo - tol or x[axis] > hi + tol:
            return f"axis {axis} outside box"
    for con in chart.constraints:
        if float(con.value(x)) > tol:
            return f"constraint {con.name} positive"
    return None


def normalize_point(chart: ChartModel, raw: Sequence[float],
                    tol: Tolerances = DEFAULT) -> tuple[Point, int]:
    """Reduce raw coordinates to canonical form.

    Returns the canonical point and the net orientation sign accumulated by
    the deck applications (always +1 on a region chart).  Raises
    PointOutsideManifold when the input does not lie on the manifold.
    """
    x = np.asarray(raw, dtype=float)
    if isinstance(chart, RegionChart):
        if x.shape != (chart.dim,):
            raise ValueError("wrong coordinate length")
        reason = _region_violation(chart, x, tol.tol_geom)
        if reason is not None:
            raise PointOutsideManifold(reason)
        return Point(tuple(float(c) for c in x)), 1
    if x.shape != (2,):
        raise ValueError("wrong coordinate length")
    k = int(math.floor(x[0] / chart.period))
    canon = deck_apply(chart, -k, x)
    # floor can land exactly on the period due to rounding
    if canon[0] >= chart.period:
        canon = deck_apply(chart, -1, canon)
        k += 1
    if canon[0] < 0.0:
        canon = deck_apply(chart, 1, canon)
        k -= 1
    sign = deck_sign(chart, k)
    if canon[1] < chart.v_min - tol.tol_geom or canon[1] > chart.v_max + tol.tol_geom:
        raise PointOutsideManifold("strip bounds violated")
    return Point((float(canon[0]), float(canon[1]))), sign


def contains(chart: ChartModel, raw: Sequence[float], tol: Tolerances = DEFAULT) -> bool:
    try:
        normalize_point(chart, raw, tol)
        return True
    except PointOutsideManifold:
        return False


def chart_distance(chart: ChartModel, a: Sequence[float], b: Sequence[float]) -> float:
    """Distance between two raw coordinate tuples, minimized over deck images."""
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if isinstance(chart, RegionChart):
        d = xa - xb
        return math.sqrt(float(d @ d))
    best = math.inf
    shift = round((xb[0] - xa[0]) / chart.period)
    for k in (shift - 1, shift, shift + 1):
        d = deck_apply(chart, k, xa) - xb
        best = min(best, math.sqrt(float(d @ d)))
    return best


def deck_match(chart: QuotientChart, target: Sequence[float], probe: Sequence[float]) -> int:
    """Deck power j with T^j(target) closest to the raw probe coordinates."""
    xt = np.asarray(target, dtype=float)
    xp = np.asarray(probe, dtype=float)
    shift = round((xp[0] - xt[0]) / chart.period)
    best_j, best_d = 0, math.inf
    for j in (shift - 1, shift, shift + 1):
        d = float(np.linalg.norm(deck_apply(chart, j, xt) - xp))
        if d < best_d:
            best_j, best_d = j, d
    return best_j


def metric_normal(metric: MetricField, x: Array, covector: Array) -> Array:
    """Unit vector metric-dual to a covector (direction of steepest increase)."""
    if metric.identity:
        length = math.sqrt(float(covector @ covector))
        if length == 0.0:
            raise ValueError("vanishing covector has no normal direction")
        return covector / length
    g = np.asarray(metric.matrix(x), dtype=float)
    vec = np.linalg.solve(g, covector)
    length = math.sqrt(float(vec @ g @ vec))
    if length == 0.0:
        raise ValueError("vanishing covector has no normal direction")
    return vec / length


def boundary_data(chart: ChartModel, p: Point, metric: MetricField | None = None,
                  tol: Tolerances = DEFAULT) -> tuple[str, Array] | None:
    """Active boundary piece and outward unit normal at p, or None in the interior.

    Raises AmbiguousBoundary when two constraints are active at once (corner).
    """
    x = p.array
    metric = metric or MetricField.euclidean(len(x))
    if isinstance(chart, QuotientChart):
        at_min = abs(x[1] - chart.v_min) <= tol.tol_geom
        at_max = abs(x[1] - chart.v_max) <= tol.tol_geom
        if at_min and at_max:
            raise AmbiguousBoundary("degenerate strip")
        if at_min:
            return "v_min", metric_normal(metric, x, np.array([0.0, -1.0]))
        if at_max:
            return "v_max", metric_normal(metric, x, np.array([0.0, 1.0]))
        return None
    active = [con for con in chart.constraints if abs(float(con.value(x))) <= tol.tol_geom]
    if len(active) > 1:
        raise AmbiguousBoundary(f"constraints {[c.name for c in active]} all active")
    if not active:
        return None
    con = active[0]
    grad = np.asarray(con.gradient(x), dtype=float)
    return con.name, metric_normal(metric, x, grad)


def tangent_of_normal(normal: Array) -> Array:
    """Boundary tangent convention in dimension 2: rotate the normal clockwise."""
    return np.array([normal[1], -normal[0]])


def boundary_frame(chart: ChartModel, p: Point, metric: MetricField | None = None,
                   tol: Tolerances = DEFAULT) -> tuple[str, Array, Array]:
    """(piece name, outward normal, tangent) at a boundary point; raises otherwise."""
    data = boundary_data(chart, p, metric, tol)
    if data is None:
        raise NotOnBoundary(f"{p.coords} is interior")
    name, normal = data
    if len(p) == 1:
        return name, normal, np.zeros(1)
    return name, normal, tangent_of_normal(normal)


def path_orientation_sign(chart: ChartModel, polyline: Sequence[Sequence[float]]) -> int:
    """Product of deck-flip signs over signed seam crossings of a raw polyline."""
    if isinstance(chart, RegionChart):
        return 1
    pts = [np.asarray(q, dtype=float) for q in polyline]
    total = 0
    for a, b in zip(pts[:-1], pts[1:]):
        total += int(math.floor(b[0] / chart.period)) - int(math.floor(a[0] / chart.period))
    return deck_sign(chart, total)


def boundary_distance(chart: ChartModel, raw: Array) -> float:
    """First-order distance from raw coordinates to the nearest boundary piece."""
    x = np.asarray(raw, dtype=float)
    if isinstance(chart, QuotientChart):
        return float(min(abs(x[1] - chart.v_min), abs(chart.v_max - x[1])))
    best = math.inf
    for con in chart.constraints:
        g = np.asarray(con.gradient(x), dtype=float)
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            continue
        best = min(best, abs(float(con.value(x))) / norm)
    return best
