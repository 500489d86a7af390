"""Smooth scalar functions on a chart, with exact first and second derivatives.

Derivative closures are supplied analytically per catalog entry; finite
differences appear only as consistency oracles.  Every evaluator accepts a
single coordinate vector or a batch with the coordinates on the last axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateCritical, NotMorse, NotOnBoundary, TypeUndetermined
from .geometry import (ChartModel, MetricField, Point, QuotientChart,
                       boundary_frame, deck_apply)
from .params import DEFAULT, Tolerances

Array = np.ndarray


@dataclass(frozen=True)
class MorseField:
    """Scalar function with gradient covector and coordinate hessian."""

    value: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]

    def negated(self) -> "MorseField":
        return MorseField(
            value=lambda x: -self.value(x),
            gradient=lambda x: -self.gradient(x),
            hessian=lambda x: -self.hessian(x),
        )


def _sample_points(chart: ChartModel, count: int, rng: np.random.Generator) -> Array:
    if isinstance(chart, QuotientChart):
        lo = np.array([0.0, chart.v_min])
        hi = np.array([chart.period, chart.v_max])
    else:
        lo = np.array([b[0] for b in chart.box])
        hi = np.array([b[1] for b in chart.box])
    return lo + (hi - lo) * rng.random((count, len(lo)))


def check_deck_invariance(field: MorseField, chart: ChartModel,
                          samples: int = 100, tol: float = 1e-9,
                          seed: int = 7) -> float:
    """Worst deviation of value/gradient/hessian from deck equivariance."""
    if not isinstance(chart, QuotientChart):
        return 0.0
    rng = np.random.default_rng(seed)
    pts = _sample_points(chart, samples, rng)
    worst = 0.0
    flip = np.diag([1.0, float(chart.flip)])
    for x in pts:
        tx = deck_apply(chart, 1, x)
        worst = max(worst, abs(float(field.value(tx)) - float(field.value(x))))
        gx = np.asarray(field.gradient(x), dtype=float)
        gt = np.asarray(field.gradient(tx), dtype=float)
        worst = max(worst, float(np.max(np.abs(gt - flip @ gx))))
        hx = np.asarray(field.hessian(x), dtype=float)
        ht = np.asarray(field.hessian(tx), dtype=float)
        worst = max(worst, float(np.max(np.abs(ht - flip @ hx @ flip))))
    if worst > tol:
        raise NotMorse(f"field is not deck invariant (deviation {worst:.2e})")
    return worst


def check_derivative_consistency(field: MorseField, chart: ChartModel,
                                 samples: int = 100, seed: int = 11) -> float:
    """Hessian versus central differences of the gradient; returns worst rel error."""
    rng = np.random.default_rng(seed)
    pts = _sample_points(chart, samples, rng)
    dim = pts.shape[1]
    step = 1e-5
    worst = 0.0
    for x in pts:
        h_exact = np.asarray(field.hessian(x), dtype=float)
        h_fd = np.zeros((dim, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = step
            h_fd[:, j] = (np.asarray(field.gradient(x + e), dtype=float)
                          - np.asarray(field.gradient(x - e), dtype=float)) / (2 * step)
        scale = max(1.0, float(np.max(np.abs(h_exact))))
        worst = max(worst, float(np.max(np.abs(h_fd - h_exact))) / scale)
    if worst > 1e-4:
        raise NotMorse(f"hessian disagrees with finite differences ({worst:.2e})")
    return worst


def validate_field(field: MorseField, chart: ChartModel) -> None:
    """Construction-time checks: deck equivariance and derivative consistency."""
    check_deck_invariance(field, chart)
    check_derivative_consistency(field, chart)


def curvature_form(chart: ChartModel, p: Point, normal: Array, tangent: Array,
                   metric: MetricField | None = None) -> float:
    """Second fundamental form II(t, t) of the boundary, outward normal convention.

    tangent is assumed metric-unit; the constraint gradient is normalized in the
    dual metric norm so the result is frame consistent.
    """
    if isinstance(chart, QuotientChart):
        return 0.0
    x = p.array
    for con in chart.constraints:
        if abs(float(con.value(x))) <= 1e-7:
            grad = np.asarray(con.gradient(x), dtype=float)
            hess = np.asarray(con.hessian(x), dtype=float)
            if metric is None or metric.identity:
                gl = math.sqrt(float(grad @ grad))
            else:
                ginv_grad = np.linalg.solve(np.asarray(metric.matrix(x)), grad)
                gl = math.sqrt(float(grad @ ginv_grad))
            return float(tangent @ hess @ tangent) / gl
    raise NotOnBoundary(f"{p.coords} has no active constraint")


def boundary_restriction_derivatives(field: MorseField, chart: ChartModel,
                                     p: Point, metric: MetricField | None = None,
                                     tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """Arclength first and second derivatives of the boundary restriction at p.

    The second derivative carries the curvature correction
    t.(d2f).t - <df, n> II(t, t) coming from the bending of the wall.
    Only meaningful in dimension 2 (the boundary is a curve).
    """
    if chart.dim != 2:
        raise NotOnBoundary("boundary of a 1-manifold is zero-dimensional")
    _, normal, tangent = boundary_frame(chart, p, metric, tol)
    x = p.array
    grad = np.asarray(field.gradient(x), dtype=float)
    hess = np.asarray(field.hessian(x), dtype=float)
    g_t = float(grad @ tangent)
    nu = float(grad @ normal)
    second = float(tangent @ hess @ tangent) \
        - nu * curvature_form(chart, p, normal, tangent, metric)
    return g_t, second


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    checked_points: int
    min_value_gap: float
    min_interior_det: float
    min_boundary_hess: float
    min_type_margin: float


def validate_morse(field: MorseField, chart: ChartModel, crit,
                   tol: Tolerances = DEFAULT) -> ValidationReport:
    """Assert the located critical data satisfies the admissibility clauses.

    `crit` is a CriticalSet from the critical module; checks are re-run on its
    points so a corrupted set cannot slip through assembly.
    """
    pts = list(crit.points)
    min_det = math.inf
    min_bh = math.inf
    min_margin = math.inf
    for cp in pts:
        x = cp.point.array
        if cp.kind == "interior":
            hess = np.asarray(field.hessian(x), dtype=float)
            det = abs(float(np.linalg.det(hess)))
            min_det = min(min_det, det)
            if det < tol.tol_nondeg:
                raise DegenerateCritical(f"interior point {cp.point.coords}")
        else:
            margin = abs(cp.normal_slope)
            min_margin = min(min_margin, margin)
            if margin <= tol.tol_type:
                raise TypeUndetermined(
                    f"df vanishes on the boundary at {cp.point.coords}")
            if chart.dim == 2:
                min_bh = min(min_bh, abs(cp.tangential_hessian))
                if abs(cp.tangential_hessian) < tol.tol_nondeg:
                    raise DegenerateCritical(f"boundary point {cp.point.coords}")
    values = sorted(cp.value for cp in pts)
    min_gap = math.inf
    for a, b in zip(values[:-1], values[1:]):
        min_gap = min(min_gap, b - a)
        if b - a <= tol.tol_val:
            raise NotMorse(f"critical values {a} and {b} too close")
    return ValidationReport(
        ok=True,
        checked_points=len(pts),
        min_value_gap=min_gap,
        min_interior_det=min_det,
        min_boundary_hess=min_bh,
        min_type_margin=min_margin,
    )
