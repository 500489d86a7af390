"""Locating and classifying critical points of f and of its boundary restriction.

Interior points come from a batched damped Newton iteration on grad f = 0 over
a seed grid; boundary points from a walk along each boundary component with
sign-change bracketing on the tangential derivative followed by an on-curve
Newton refinement.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateCritical, PointOutsideManifold, TypeUndetermined
from .fields import MorseField, boundary_restriction_derivatives, validate_morse
from .geometry import (ChartModel, MetricField, Point, QuotientChart, RegionChart,
                       boundary_distance, boundary_frame, chart_distance,
                       normalize_point)
from .params import DEFAULT, Tolerances

Array = np.ndarray

INTERIOR = "interior"
BOUNDARY_N = "boundary_n"
BOUNDARY_D = "boundary_d"


def sign_fix(vec: Array) -> Array:
    """Normalize and flip so the first non-negligible coordinate is positive."""
    v = np.asarray(vec, dtype=float)
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-12:
            return v if comp > 0 else -v
    return v


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    id: int
    point: Point
    value: float
    kind: str                 # interior / boundary_n / boundary_d
    index: int                # interior Morse index, or boundary index of f|dM
    grading: int
    unstable_dim: int
    orientation_ref: tuple[tuple[float, ...], ...]
    normal_slope: float = 0.0       # <df, n> for boundary points
    tangential_hessian: float = 0.0
    constraint: str = ""
    normal: tuple[float, ...] = ()
    tangent: tuple[float, ...] = ()
    reference_sign: int = 1

    @property
    def coords(self) -> Array:
        return self.point.array

    def frame_arrays(self) -> list[Array]:
        return [np.asarray(v, dtype=float) for v in self.orientation_ref]

    def flipped(self) -> "CriticalPoint":
        """Reverse the chosen orientation (negate the first frame vector)."""
        if not self.orientation_ref:
            return self
        frame = list(self.orientation_ref)
        frame[0] = tuple(-c for c in frame[0])
        return replace(self, orientation_ref=tuple(frame))


@dataclass(frozen=True, eq=False)
class CriticalSet:
    dim: int
    points: tuple[CriticalPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {p.id: p for p in self.points})

    def by_id(self, ident: int) -> CriticalPoint:
        return self._by_id[ident]  # type: ignore[attr-defined]

    def of_kind(self, kind: str) -> list[CriticalPoint]:
        return [p for p in self.points if p.kind == kind]

    def generators(self, side: str) -> list[list[CriticalPoint]]:
        """Per-degree generator lists: side N keeps interior+type-N, D keeps interior+type-D."""
        keep = {INTERIOR, BOUNDARY_N if side == "N" else BOUNDARY_D}
        out: list[list[CriticalPoint]] = [[] for _ in range(self.dim + 1)]
        for p in self.points:
            if p.kind in keep:
                out[p.grading].append(p)
        return out

    def counts(self) -> list[tuple[int, int, int]]:
        """Per degree (|C_k|, |N_k|, |D_k|)."""
        out = [[0, 0, 0] for _ in range(self.dim + 1)]
        for p in self.points:
            col = {INTERIOR: 0, BOUNDARY_N: 1, BOUNDARY_D: 2}[p.kind]
            out[p.grading][col] += 1
        return [tuple(row) for row in out]

    def euler_characteristic(self) -> int:
        total = 0
        for k, (c, nn, _) in enumerate(self.counts()):
            total += (-1) ** k * (c + nn)
        return total

    def replace_point(self, new_point: CriticalPoint) -> "CriticalSet":
        pts = tuple(new_point if p.id == new_point.id else p for p in self.points)
        return CriticalSet(self.dim, pts)


# ---------------------------------------------------------------------------
# interior search


def _seed_grid(chart: ChartModel, density: int) -> Array:
    axes = [np.linspace(lo, hi, density) for lo, hi in chart.box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, chart.dim)


def find_interior_critical(field: MorseField, chart: ChartModel,
                           seed_grid_density: int | None = None,
                           tol: Tolerances = DEFAULT) -> list[CriticalPoint]:
    """Newton search for zeros of grad f; classified by hessian signature.

    Returned points carry provisional ids (-1); assembly assigns final ones.
    """
    density = seed_grid_density or tol.seed_grid_density
    dim = chart.dim
    x = _seed_grid(chart, density)
    alive = np.ones(len(x), dtype=bool)
    grad = np.asarray(field.gradient(x), dtype=float).reshape(len(x), dim)
    gnorm = np.linalg.norm(grad, axis=1)

    spans = np.array([hi - lo for lo, hi in chart.box])
    los = np.array([lo for lo, _ in chart.box])
    his = np.array([hi for _, hi in chart.box])

    for _ in range(tol.newton_max_iter):
        work = alive & (gnorm > tol.tol_crit)
        if not work.any():
            break
        hess = np.asarray(field.hessian(x[work]), dtype=float)
        det = np.linalg.det(hess)
        singular = ~np.isfinite(det) | (np.abs(det) < 1e-14)
        hess[singular] = np.eye(dim)
        step = -np.linalg.solve(hess, grad[work][..., None])[..., 0]
        step[singular] = 0.0
        idx = np.flatnonzero(work)
        alive[idx[singular]] = False

        trial = x[work] + step
        gt = np.asarray(field.gradient(trial), dtype=float).reshape(len(trial), dim)
        worse = np.linalg.norm(gt, axis=1) > gnorm[work]
        if worse.any():
            trial[worse] = x[work][worse] + 0.5 * step[worse]
            gt[worse] = np.asarray(field.gradient(trial[worse]), dtype=float).reshape(-1, dim)
        x[work] = trial
        grad[work] = gt
        gnorm[work] = np.linalg.norm(gt, axis=1)
        escaped = np.any((x < los - spans) | (x > his + spans), axis=1)
        alive &= ~escaped

    found: list[CriticalPoint] = []
    for i in np.flatnonzero(alive & (gnorm <= tol.tol_crit)):
        try:
            pt, _ = normalize_point(chart, x[i], tol)
        except PointOutsideManifold:
            continue
        if boundary_distance(chart, pt.array) <= tol.tol_geom:
            continue
        if any(chart_distance(chart, pt.array, q.coords) < tol.dedup_dist for q in found):
            continue
        hess = np.asarray(field.hessian(pt.array), dtype=float)
        if abs(float(np.linalg.det(hess))) < tol.tol_nondeg:
            raise DegenerateCritical(f"interior critical point near {pt.coords}")
        eigvals = np.linalg.eigvalsh(hess)
        index = int(np.sum(eigvals < 0))
        found.append(CriticalPoint(
            id=-1, point=pt, value=float(field.value(pt.array)), kind=INTERIOR,
            index=index, grading=index, unstable_dim=index, orientation_ref=(),
        ))
    return found


# ---------------------------------------------------------------------------
# boundary walk


def _project_to_zero(con, x: Array, max_iter: int = 60) -> Array | None:
    x = np.array(x, dtype=float)
    for _ in range(max_iter):
        val = float(con.value(x))
        if abs(val) < 1e-13:
            return x
        grad = np.asarray(con.gradient(x), dtype=float)
        gg = float(grad @ grad)
        if gg < 1e-30:
            return None
        x = x - val * grad / gg
    return None


def _trace_region_loop(chart: RegionChart, con, samples: int,
                       tol: Tolerances) -> Array | None:
    """Ordered closed loop of points on one constraint's zero set, or None."""
    probe = _seed_grid(chart, 40)
    vals = np.abs(np.asarray(con.value(probe), dtype=float))
    order = np.argsort(vals)
    start = None
    for i in order[:200]:
        cand = _project_to_zero(con, probe[i])
        if cand is None:
            continue
        inside_box = all(lo - 1e-9 <= cand[a] <= hi + 1e-9
                         for a, (lo, hi) in enumerate(chart.box))
        others_ok = all(float(c.value(cand)) <= tol.tol_geom
                        for c in chart.constraints if c is not con)
        if inside_box and others_ok:
            start = cand
            break
    if start is None:
        return None

    def walk(step: float, cap: int) -> list[Array] | None:
        pts = [start]
        x = start
        for _ in range(cap):
            grad = np.asarray(con.gradient(x), dtype=float)
            normal = grad / np.linalg.norm(grad)
            tangent = np.array([normal[1], -normal[0]])
            nxt = _project_to_zero(con, x + step * tangent)
            if nxt is None:
                return None
            if len(pts) > 5 and float(np.linalg.norm(nxt - start)) < 0.6 * step:
                return pts
            pts.append(nxt)
            x = nxt
        return None

    span = max(hi - lo for lo, hi in chart.box)
    probe_pts = walk(0.02 * span, 20000)
    if probe_pts is None:
        return None
    length = sum(float(np.linalg.norm(b - a))
                 for a, b in zip(probe_pts, probe_pts[1:] + [probe_pts[0]]))
    loop = walk(length / samples, 4 * samples)
    if loop is None:
        loop = probe_pts
    return np.array(loop)


def boundary_components(chart: ChartModel, samples: int | None = None,
                        tol: Tolerances = DEFAULT) -> list[Array]:
    """Ordered sample loops covering every boundary component."""
    samples = samples or tol.boundary_samples
    if isinstance(chart, QuotientChart):
        per_edge = samples // 2 if chart.flip == -1 else samples
        us = np.linspace(0.0, chart.period, max(per_edge, 8), endpoint=False)
        top = np.stack([us, np.full_like(us, chart.v_max)], axis=-1)
        bottom = np.stack([us, np.full_like(us, chart.v_min)], axis=-1)
        if chart.flip == -1:
            # the deck map glues the two strip edges into a single circle
            return [np.concatenate([top, bottom], axis=0)]
        return [top, bottom]
    if chart.dim == 1:
        out = []
        for con in chart.constraints:
            grid = _seed_grid(chart, 64)
            vals = np.abs(np.asarray(con.value(grid), dtype=float))
            cand = _project_to_zero(con, grid[int(np.argmin(vals))])
            if cand is not None:
                out.append(cand.reshape(1, 1))
        return out
    loops = []
    for con in chart.constraints:
        loop = _trace_region_loop(chart, con, samples, tol)
        if loop is not None:
            loops.append(loop)
    return loops


def _refine_on_boundary(field: MorseField, chart: ChartModel, x0: Array,
                        metric: MetricField | None, tol: Tolerances,
                        max_move: float) -> Array | None:
    """Newton on the tangential derivative, staying on the boundary curve."""
    x = np.array(x0, dtype=float)
    pt, _ = normalize_point(chart, x, tol)
    # the walk moves in chart arclength, so convert the metric-frame Newton
    # step by the euclidean length of the metric-unit tangent
    _, _, tangent = boundary_frame(chart, pt, metric, tol)
    t_len = float(np.linalg.norm(tangent))
    g_t, h_t = boundary_restriction_derivatives(field, chart, pt, metric, tol)
    for _ in range(tol.newton_max_iter):
        if abs(g_t) < tol.tol_crit:
            return pt.array
        if abs(h_t) < 1e-14:
            return None
        delta = float(np.clip(-g_t / h_t * t_len, -max_move, max_move))
        while True:
            cand = _boundary_step(chart, pt.array, delta)
            if cand is None:
                return None
            try:
                cand_pt, _ = normalize_point(chart, cand, tol)
            except PointOutsideManifold:
                cand_pt = None
            if cand_pt is not None:
                g_new, h_new = boundary_restriction_derivatives(
                    field, chart, cand_pt, metric, tol)
                if abs(g_new) < 0.7 * abs(g_t) or abs(delta) < 1e-15:
                    pt, g_t, h_t = cand_pt, g_new, h_new
                    break
            delta *= 0.5
            if abs(delta) < 1e-16:
                return None
    return pt.array if abs(g_t) < tol.tol_crit else None


def _boundary_step(chart: ChartModel, x: Array, delta: float) -> Array | None:
    """Move arclength delta along the boundary through x (t = (n_y, -n_x))."""
    if isinstance(chart, QuotientChart):
        at_min = abs(x[1] - chart.v_min) < abs(x[1] - chart.v_max)
        # tangent convention: (n_y, -n_x) with n = -+e_v
        tangent = np.array([1.0, 0.0]) if at_min else np.array([-1.0, 0.0])
        return x + delta * tangent
    for con in chart.constraints:
        if abs(float(con.value(x))) <= 1e-7:
            grad = np.asarray(con.gradient(x), dtype=float)
            normal = grad / np.linalg.norm(grad)
            tangent = np.array([normal[1], -normal[0]])
            return _project_to_zero(con, x + delta * tangent)
    return None


def find_boundary_critical(field: MorseField, chart: ChartModel,
                           seed_density: int | None = None,
                           metric: MetricField | None = None,
                           tol: Tolerances = DEFAULT) -> list[CriticalPoint]:
    """Critical points of the boundary restriction, classified by type and index."""
    if chart.dim == 1:
        return _boundary_critical_1d(field, chart, metric, tol)
    found: list[Array] = []
    for loop in boundary_components(chart, seed_density, tol):
        n_pts = len(loop)
        g_vals = np.empty(n_pts)
        for i, x in enumerate(loop):
            pt, _ = normalize_point(chart, x, tol)
            g_vals[i], _ = boundary_restriction_derivatives(field, chart, pt, metric, tol)
        typical_step = float(np.linalg.norm(loop[1] - loop[0])) if n_pts > 1 else 0.1
        candidates = []
        for i in range(n_pts):
            j = (i + 1) % n_pts
            if g_vals[i] == 0.0 or g_vals[i] * g_vals[j] < 0.0:
                candidates.append(loop[i])
            elif abs(g_vals[i]) < 1e-12:
                candidates.append(loop[i])
        for cand in candidates:
            refined = _refine_on_boundary(field, chart, cand, metric, tol,
                                          max_move=4 * typical_step)
            if refined is None:
                continue
            if any(chart_distance(chart, refined, q) < tol.dedup_dist for q in found):
                continue
            found.append(refined)
    return [_classify_boundary(field, chart, x, metric, tol) for x in found]


def _boundary_critical_1d(field, chart, metric, tol) -> list[CriticalPoint]:
    out = []
    for pts in boundary_components(chart, None, tol):
        x = pts[0]
        out.append(_classify_boundary(field, chart, x, metric, tol))
    return out


def _classify_boundary(field: MorseField, chart: ChartModel, x: Array,
                       metric: MetricField | None, tol: Tolerances) -> CriticalPoint:
    pt, _ = normalize_point(chart, x, tol)
    name, normal, tangent = boundary_frame(chart, pt, metric, tol)
    grad = np.asarray(field.gradient(pt.array), dtype=float)
    nu = float(grad @ normal)
    if abs(nu) <= tol.tol_type:
        raise TypeUndetermined(f"<df, n> = {nu:.2e} at {pt.coords}")
    if chart.dim == 2:
        _, h_t = boundary_restriction_derivatives(field, chart, pt, metric, tol)
        if abs(h_t) < tol.tol_nondeg:
            raise DegenerateCritical(f"boundary restriction degenerate at {pt.coords}")
        b_index = 0 if h_t > 0 else 1
    else:
        h_t = 0.0
        b_index = 0
    if nu < 0:
        kind, grading = BOUNDARY_N, b_index
    else:
        kind, grading = BOUNDARY_D, b_index + 1
    return CriticalPoint(
        id=-1, point=pt, value=float(field.value(pt.array)), kind=kind,
        index=b_index, grading=grading, unstable_dim=grading, orientation_ref=(),
        normal_slope=nu, tangential_hessian=h_t, constraint=name,
        normal=tuple(float(c) for c in normal),
        tangent=tuple(float(c) for c in tangent),
    )


# ---------------------------------------------------------------------------
# assembly


def _orientation_frame(field: MorseField, cp: CriticalPoint, dim: int) -> tuple:
    if cp.kind == INTERIOR:
        hess = np.asarray(field.hessian(cp.coords), dtype=float)
        eigvals, eigvecs = np.linalg.eigh(hess)
        frame = [sign_fix(eigvecs[:, i]) for i in range(dim) if eigvals[i] < 0]
    elif cp.kind == BOUNDARY_N:
        frame = [sign_fix(np.asarray(cp.tangent))] if cp.index == 1 else []
    else:
        # never used dynamically on this side; tangential descent directions
        # followed by the outward normal, a fixed reproducible convention
        frame = []
        if cp.index >= 1:
            frame.append(sign_fix(np.asarray(cp.tangent)))
        frame.append(sign_fix(np.asarray(cp.normal)))
    return tuple(tuple(float(c) for c in v) for v in frame)


def assemble_critical_set(field: MorseField, chart: ChartModel,
                          interior: Sequence[CriticalPoint],
                          boundary: Sequence[CriticalPoint],
                          tol: Tolerances = DEFAULT,
                          validate: bool = True) -> CriticalSet:
    merged = sorted(list(interior) + list(boundary), key=lambda p: p.value)
    out = []
    for ident, cp in enumerate(merged):
        cp = replace(cp, id=ident)
        cp = replace(cp, orientation_ref=_orientation_frame(field, cp, chart.dim))
        out.append(cp)
    crit = CriticalSet(chart.dim, tuple(out))
    if validate:
        validate_morse(field, chart, crit, tol)
    return crit


def find_critical_set(field: MorseField, chart: ChartModel,
                      metric: MetricField | None = None,
                      tol: Tolerances = DEFAULT) -> CriticalSet:
    interior = find_interior_critical(field, chart, tol=tol)
    boundary = find_boundary_critical(field, chart, metric=metric, tol=tol)
    return assemble_critical_set(field, chart, interior, boundary, tol)


def reclassify_negated(crit: CriticalSet, field: MorseField,
                       chart: ChartModel) -> CriticalSet:
    """Critical data of -f: same points and ids, complementary indices, N/D swap."""
    dim = crit.dim
    neg = field.negated()
    out = []
    for cp in crit.points:
        if cp.kind == INTERIOR:
            new = replace(cp, value=-cp.value, index=dim - cp.index,
                          grading=dim - cp.grading, unstable_dim=dim - cp.grading)
        else:
            b_index = (dim - 1) - cp.index
            kind = BOUNDARY_D if cp.kind == BOUNDARY_N else BOUNDARY_N
            grading = b_index if kind == BOUNDARY_N else b_index + 1
            new = replace(cp, value=-cp.value, kind=kind, index=b_index,
                          grading=grading, unstable_dim=grading,
                          normal_slope=-cp.normal_slope,
                          tangential_hessian=-cp.tangential_hessian)
        new = replace(new, orientation_ref=_orientation_frame(neg, new, dim))
        out.append(new)
    out.sort(key=lambda p: p.value)
    return CriticalSet(dim, tuple(out))
