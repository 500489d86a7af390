"""Trajectory integration and connecting-orbit counting.

Integration uses an embedded Dormand-Prince 5(4) pair with a boundary guard:
steps that would leave the manifold are shortened by bisection to land on the
wall, where only tangent or inward field directions are tolerated.  Orbit
counting is dimension specific: one-dimensional unstable manifolds are
followed branch by branch; two-dimensional ones are swept by launch angle
with bisection on a level-set cross-section coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critical import BOUNDARY_N, INTERIOR, CriticalPoint
from .errors import (CertificateViolation, DimensionMismatch, FlowTimeout,
                     NonTransverse)
from .geometry import (QuotientChart, RegionChart, chart_distance, deck_apply,
                       deck_match, deck_sign)
from .params import DEFAULT, Tolerances
from .pseudogradient import PseudoGradientField, _project_to_boundary

Array = np.ndarray

# Dormand-Prince 5(4) tableau (FSAL)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
       187 / 2100, 1 / 40)

CONVERGED = "converged"
LEFT_DOMAIN = "left_domain"
TIMEOUT = "timeout"
LEVEL = "level"


@dataclass(eq=False)
class Trajectory:
    times: Array
    points: Array                  # raw (cover) coordinates, one row per sample
    values: Array                  # objective values along the samples
    termination: str
    target: int | None = None      # critical id for CONVERGED
    end_point: Array | None = None

    @property
    def start(self) -> Array:
        return self.points[0]

    @property
    def end(self) -> Array:
        return self.end_point if self.end_point is not None else self.points[-1]

    def seam_sign(self, chart) -> int:
        """Net deck-flip sign accumulated between first and last sample."""
        if isinstance(chart, RegionChart):
            return 1
        d = (int(math.floor(self.end[0] / chart.period))
             - int(math.floor(self.start[0] / chart.period)))
        return deck_sign(chart, d)

    def end_floor(self, chart) -> int:
        if isinstance(chart, RegionChart):
            return 0
        return int(math.floor(self.end[0] / chart.period))


def _rk_step(deriv, x: Array, h: float, k1: Array | None = None):
    """One Dormand-Prince step; returns (x5, err_vec, k_last)."""
    k = [k1 if k1 is not None else deriv(x)]
    for stage in range(1, 7):
        acc = x.copy()
        coeffs = _A[stage]
        for j, c in enumerate(coeffs):
            if c != 0.0:
                acc = acc + (h * c) * k[j]
        k.append(deriv(acc))
    x5 = x.copy()
    err = np.zeros_like(x)
    for j in range(7):
        if _B5[j] != 0.0:
            x5 = x5 + (h * _B5[j]) * k[j]
        diff = _B5[j] - _B4[j]
        if diff != 0.0:
            err = err + (h * diff) * k[j]
    return x5, err, k[6]


def _violation(chart, x: Array) -> float:
    """Positive when x lies outside the manifold (worst constraint excess)."""
    if isinstance(chart, QuotientChart):
        return max(chart.v_min - x[1], x[1] - chart.v_max)
    worst = -math.inf
    for con in chart.constraints:
        worst = max(worst, float(con.value(x)))
    return worst


def _outward_direction(chart, x: Array) -> Array | None:
    if isinstance(chart, QuotientChart):
        if abs(x[1] - chart.v_min) < abs(x[1] - chart.v_max):
            return np.array([0.0, -1.0])
        return np.array([0.0, 1.0])
    best, grad = math.inf, None
    for con in chart.constraints:
        g = np.asarray(con.gradient(x), dtype=float)
        gl = float(np.linalg.norm(g))
        if gl == 0.0:
            continue
        d = abs(float(con.value(x))) / gl
        if d < best:
            best, grad = d, g / gl
    return grad


def _pull_inside(chart, x: Array) -> Array:
    """Nudge a point with a tiny constraint excess back onto the manifold."""
    out = np.array(x, dtype=float)
    if isinstance(chart, QuotientChart):
        out[1] = min(max(out[1], chart.v_min), chart.v_max)
        return out
    for _ in range(4):
        worst, con = 0.0, None
        for c in chart.constraints:
            v = float(c.value(out))
            if v > worst:
                worst, con = v, c
        if con is None:
            return out
        g = np.asarray(con.gradient(out), dtype=float)
        out = out - (worst / float(g @ g)) * g
    return out


def integrate(field: PseudoGradientField, start, tol: Tolerances = DEFAULT,
              reverse: bool = False, allow_exit: bool = False,
              stop_level: float | None = None) -> Trajectory:
    """Flow a trajectory of the field (or of its time reversal).

    Terminates on convergence to a critical point of the build, on leaving the
    manifold (LEFT_DOMAIN when allow_exit, CertificateViolation otherwise), on
    crossing a target objective level, or on timeout.
    """
    chart = field.chart
    sgn = -1.0 if reverse else 1.0
    deriv = lambda x: sgn * field.evaluate(x)
    value = lambda x: float(field.objective.value(x))

    x = np.asarray(start, dtype=float).copy()
    t = 0.0
    times, points, values = [t], [x.copy()], [value(x)]

    crit = field.crit.points

    def near_critical(y: Array, speed: float) -> int | None:
        if speed >= tol.field_stop:
            return None
        for cp in crit:
            if chart_distance(chart, y, cp.coords) <= tol.r_conv:
                return cp.id
        return None

    k1 = deriv(x)
    hit = near_critical(x, float(np.linalg.norm(k1)))
    if hit is not None:
        return Trajectory(np.array(times), np.array(points), np.array(values),
                          CONVERGED, target=hit)

    h = 1e-4
    h_max = 0.5
    steps = 0
    while True:
        if t >= tol.t_max or steps >= tol.max_steps:
            return Trajectory(np.array(times), np.array(points), np.array(values),
                              TIMEOUT)
        steps += 1
        h = min(h, h_max, tol.t_max - t + 1e-9)
        x_new, err_vec, k_last = _rk_step(deriv, x, h, k1)
        scale = tol.atol + tol.rtol * np.maximum(np.abs(x), np.abs(x_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err > 1.0 and h > 1e-13:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        # boundary guard
        if _violation(chart, x_new) > 1e-12:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                x_mid, _, _ = _rk_step(deriv, x, h * mid)
                if _violation(chart, x_mid) > 0.0:
                    hi = mid
                else:
                    lo = mid
            x_land, _, _ = _rk_step(deriv, x, h * hi)
            x_land = _pull_inside(chart, x_land)
            t_land = t + h * hi
            outward = _outward_direction(chart, x_land)
            speed_vec = deriv(x_land)
            push = float(speed_vec @ outward) if outward is not None else 0.0
            if push > 1e-8 * (1.0 + float(np.linalg.norm(speed_vec))):
                times.append(t_land)
                points.append(x_land.copy())
                values.append(value(x_land))
                if allow_exit:
                    return Trajectory(np.array(times), np.array(points),
                                      np.array(values), LEFT_DOMAIN,
                                      end_point=x_land)
                raise CertificateViolation(
                    f"trajectory pushed out of the manifold at {x_land}")
            x, t, k1 = x_land, t_land, speed_vec
            times.append(t)
            points.append(x.copy())
            values.append(value(x))
            h = max(h * 0.5, 1e-10)
            continue

        # level crossing
        v_new = value(x_new)
        if stop_level is not None and v_new <= stop_level:
            lo, hi = 0.0, 1.0
            x_cross = x_new
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                x_mid, _, _ = _rk_step(deriv, x, h * mid)
                if value(x_mid) <= stop_level:
                    hi = mid
                    x_cross = x_mid
                else:
                    lo = mid
                if abs(value(x_cross) - stop_level) < 1e-12:
                    break
            times.append(t + h * hi)
            points.append(x_cross.copy())
            values.append(value(x_cross))
            return Trajectory(np.array(times), np.array(points), np.array(values),
                              LEVEL, end_point=x_cross)

        t += h
        x = x_new
        k1 = k_last
        times.append(t)
        points.append(x.copy())
        values.append(v_new)

        hit = near_critical(x, float(np.linalg.norm(k_last)))
        if hit is not None:
            return Trajectory(np.array(times), np.array(points), np.array(values),
                              CONVERGED, target=hit)
        if err == 0.0:
            h = h * 5.0
        else:
            h = h * min(5.0, max(0.2, 0.9 * err ** -0.2))


# ---------------------------------------------------------------------------
# launches


def unstable_launches(field: PseudoGradientField, cp: CriticalPoint,
                      tol: Tolerances = DEFAULT) -> list[tuple[int, Array]]:
    """Launch points for the two branches of a one-dimensional unstable manifold."""
    frame = cp.frame_arrays()
    if len(frame) != 1:
        raise DimensionMismatch(f"generator {cp.id} has unstable dimension "
                                f"{len(frame)}, expected 1")
    e_u = frame[0]
    out = []
    for label in (1, -1):
        x0 = cp.coords + tol.r_launch * label * e_u
        if cp.kind == BOUNDARY_N:
            x0 = _project_to_boundary(field.chart, cp, x0)
        out.append((label, x0))
    return out


def stable_launches(field: PseudoGradientField, cp: CriticalPoint,
                    tol: Tolerances = DEFAULT) -> list[tuple[int, Array]]:
    """Launch points spanning a one-dimensional local stable manifold."""
    if cp.kind == INTERIOR:
        hess = np.asarray(field.objective.hessian(cp.coords), dtype=float)
        eigvals, eigvecs = np.linalg.eigh(hess)
        stable = [eigvecs[:, i] for i in range(len(eigvals)) if eigvals[i] > 0]
        if len(stable) != 1:
            raise DimensionMismatch(f"generator {cp.id} has stable dimension "
                                    f"{len(stable)}, expected 1")
        from .critical import sign_fix
        e_s = sign_fix(stable[0])
        return [(1, cp.coords + tol.r_launch * e_s),
                (-1, cp.coords - tol.r_launch * e_s)]
    # boundary tangency point: the stable direction is the inward normal ray
    inward = -np.asarray(cp.normal, dtype=float)
    return [(1, cp.coords + tol.r_launch * inward)]


# ---------------------------------------------------------------------------
# orbit counting


@dataclass(frozen=True, eq=False)
class ConnectingOrbit:
    source: int
    sink: int
    sign: int
    twist: int
    trajectory: Trajectory

    @property
    def twisted_sign(self) -> int:
        return self.sign * self.twist


@dataclass(frozen=True, eq=False)
class IncidenceCount:
    source: int
    sink: int
    count: int            # plain signed orbit count
    count_twisted: int    # signs multiplied by the orientation twist
    orbits: tuple[ConnectingOrbit, ...]

    def flavor(self, coefficients: str) -> int:
        return self.count if coefficients == "untwisted" else self.count_twisted


def _orbit_twist(field: PseudoGradientField, traj: Trajectory,
                 source: CriticalPoint, sink: CriticalPoint) -> int:
    """Orientation twist of the orbit loop closed through canonical positions."""
    chart = field.chart
    if isinstance(chart, RegionChart):
        return source.reference_sign * sink.reference_sign
    j = traj.end_floor(chart)
    return deck_sign(chart, j) * source.reference_sign * sink.reference_sign


def _count_branches(field: PseudoGradientField, p: CriticalPoint,
                    q: CriticalPoint, tol: Tolerances) -> IncidenceCount:
    orbits = []
    for label, x0 in unstable_launches(field, p, tol):
        traj = integrate(field, x0, tol)
        if traj.termination == TIMEOUT:
            raise FlowTimeout(f"branch from generator {p.id} timed out")
        if traj.termination != CONVERGED:
            raise CertificateViolation(
                f"branch from generator {p.id} ended with {traj.termination}")
        hit = field.crit.by_id(traj.target)
        if hit.grading == p.grading:
            raise NonTransverse(
                f"orbit between equal gradings {p.id} -> {hit.id}")
        if hit.id != q.id:
            continue
        orbits.append(ConnectingOrbit(
            source=p.id, sink=q.id, sign=label,
            twist=_orbit_twist(field, traj, p, q), trajectory=traj))
    total = sum(o.sign for o in orbits)
    twisted = sum(o.twisted_sign for o in orbits)
    return IncidenceCount(p.id, q.id, total, twisted, tuple(orbits))


def _section_frame(field: PseudoGradientField, q: CriticalPoint):
    """Stable direction and co-orientation vector of the local stable manifold."""
    if q.kind == INTERIOR:
        hess = np.asarray(field.objective.hessian(q.coords), dtype=float)
        eigvals, eigvecs = np.linalg.eigh(hess)
        stab = [eigvecs[:, i] for i in range(len(eigvals)) if eigvals[i] > 0]
        e_s = stab[0]
    else:
        e_s = -np.asarray(q.normal, dtype=float)
    e_u = q.frame_arrays()[0]
    co = np.array([-e_s[1], e_s[0]])
    if float(co @ e_u) < 0:
        co = -co
    return e_s, co


def _sweep_side(field: PseudoGradientField, q: CriticalPoint, co: Array,
                traj: Trajectory) -> tuple[float, float, int]:
    """Signed section coordinate, distance to q, and deck index of a crossing."""
    chart = field.chart
    y = traj.end
    if isinstance(chart, QuotientChart):
        j = deck_match(chart, q.coords, y)
        q_img = deck_apply(chart, j, q.coords)
        co_img = co.copy()
        co_img[1] *= deck_sign(chart, j)
        delta = y - q_img
        return float(delta @ co_img), float(np.linalg.norm(delta)), j
    delta = y - q.coords
    return float(delta @ co), float(np.linalg.norm(delta)), 0


def _count_sweep(field: PseudoGradientField, p: CriticalPoint,
                 q: CriticalPoint, tol: Tolerances) -> IncidenceCount:
    """Orbits from a two-dimensional source to a grading-one target."""
    frame = p.frame_arrays()
    w1v, w2v = frame
    level = q.value + tol.eps_lvl
    _, co = _section_frame(field, q)
    or_source = 1 if np.linalg.det(np.stack([w1v, w2v], axis=1)) > 0 else -1

    def launch(theta: float) -> Trajectory:
        x0 = p.coords + tol.r_launch * (math.cos(theta) * w1v + math.sin(theta) * w2v)
        return integrate(field, x0, tol, stop_level=level)

    def side_of(theta: float):
        traj = launch(theta)
        if traj.termination == TIMEOUT:
            raise FlowTimeout(f"sweep from generator {p.id} timed out")
        if traj.termination != LEVEL:
            return None, traj
        s, _, _ = _sweep_side(field, q, co, traj)
        return s, traj

    n0 = tol.sweep_samples
    thetas = [2.0 * math.pi * i / n0 for i in range(n0)]
    sides = []
    for th in thetas:
        s, _ = side_of(th)
        sides.append(s)

    orbits = []
    seen_angles: list[float] = []
    for i in range(n0):
        jn = (i + 1) % n0
        a, b = sides[i], sides[jn]
        if a is None or b is None or a * b > 0.0:
            continue
        lo, hi = thetas[i], thetas[i] + 2.0 * math.pi / n0
        s_lo = a
        while hi - lo > tol.theta_bisect_tol:
            mid = 0.5 * (lo + hi)
            s_mid, _ = side_of(mid)
            if s_mid is None:
                break
            if s_mid == 0.0 or (s_lo < 0) == (s_mid < 0):
                lo, s_lo = mid, s_mid
            else:
                hi = mid
        theta_star = 0.5 * (lo + hi)
        if any(abs(theta_star - t0) < 10 * tol.theta_bisect_tol
               or abs(abs(theta_star - t0) - 2 * math.pi) < 10 * tol.theta_bisect_tol
               for t0 in seen_angles):
            continue
        s_star, traj = side_of(theta_star)
        if s_star is None:
            continue
        _, dist, j = _sweep_side(field, q, co, traj)
        if dist > 10.0 * tol.eps_lvl:
            continue  # separatrix toward some other limit set
        seen_angles.append(theta_star)
        # sign: compare (flow direction, section co-orientation) with the
        # transported source orientation
        y = traj.end
        vel = field.evaluate(y)
        vel = vel / np.linalg.norm(vel)
        co_img = co.copy()
        if isinstance(field.chart, QuotientChart):
            co_img[1] *= deck_sign(field.chart, j)
        det = float(np.linalg.det(np.stack([vel, co_img], axis=1)))
        if abs(det) < 1e-10:
            raise NonTransverse(
                f"tangential section crossing between {p.id} and {q.id}")
        sign = or_source * (1 if det > 0 else -1)
        twist = (deck_sign(field.chart, j) if isinstance(field.chart, QuotientChart)
                 else 1) * p.reference_sign * q.reference_sign
        orbits.append(ConnectingOrbit(p.id, q.id, sign, twist, traj))
    orbits.sort(key=lambda o: o.trajectory.times[-1])
    total = sum(o.sign for o in orbits)
    twisted = sum(o.twisted_sign for o in orbits)
    return IncidenceCount(p.id, q.id, total, twisted, tuple(orbits))


def count_connecting_orbits(field: PseudoGradientField, p: CriticalPoint,
                            q: CriticalPoint,
                            tol: Tolerances = DEFAULT) -> IncidenceCount:
    """Signed connecting orbits from p (grading k) down to q (grading k-1)."""
    if p.grading != q.grading + 1:
        raise DimensionMismatch("orbit counting needs a grading gap of one")
    if p.value <= q.value:
        return IncidenceCount(p.id, q.id, 0, 0, ())
    if p.grading == 1:
        return _count_branches(field, p, q, tol)
    if p.grading == 2 and field.chart.dim == 2:
        return _count_sweep(field, p, q, tol)
    raise DimensionMismatch(
        f"unsupported source grading {p.grading} in dimension {field.chart.dim}")


# ---------------------------------------------------------------------------
# intersection pairing


def _resample(points: Array, max_len: float) -> Array:
    """Subdivide long polyline segments so crossings are localized."""
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        seg = float(np.linalg.norm(b - a))
        k = max(1, int(math.ceil(seg / max_len)))
        for i in range(1, k + 1):
            out.append(a + (b - a) * (i / k))
    return np.array(out)


def _polyline_crossings(pa: Array, pb: Array) -> list[tuple[Array, Array, Array, float]]:
    """Transversal crossings between two polylines.

    Returns (point, direction_a, direction_b, sin_angle) per crossing.
    """
    if len(pa) < 2 or len(pb) < 2:
        return []
    a0, a1 = pa[:-1], pa[1:]
    b0, b1 = pb[:-1], pb[1:]
    da = a1 - a0
    db = b1 - b0
    hits = []
    chunk = 256
    for start in range(0, len(a0), chunk):
        sl = slice(start, min(start + chunk, len(a0)))
        ca0 = a0[sl][:, None, :]
        cda = da[sl][:, None, :]
        rb0 = b0[None, :, :]
        rdb = db[None, :, :]
        denom = cda[..., 0] * rdb[..., 1] - cda[..., 1] * rdb[..., 0]
        diff = rb0 - ca0
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (diff[..., 0] * rdb[..., 1] - diff[..., 1] * rdb[..., 0]) / denom
            t = (diff[..., 0] * cda[..., 1] - diff[..., 1] * cda[..., 0]) / denom
        ok = np.isfinite(s) & np.isfinite(t)
        ok &= (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= 1.0)
        for i, j in zip(*np.nonzero(ok)):
            ia = start + i
            point = a0[ia] + s[i, j] * da[ia]
            na = float(np.linalg.norm(da[ia]))
            nb = float(np.linalg.norm(db[j]))
            if na == 0.0 or nb == 0.0:
                continue
            sin_angle = abs(denom[i, j]) / (na * nb)
            hits.append((point, da[ia] / na, db[j] / nb, sin_angle))
    # merge duplicates produced by shared segment endpoints
    merged: list[tuple[Array, Array, Array, float]] = []
    for hit in hits:
        if any(np.linalg.norm(hit[0] - m[0]) < 1e-9 for m in merged):
            continue
        merged.append(hit)
    return merged


def relative_cycle_curves(field_neg: PseudoGradientField, p: CriticalPoint,
                          tol: Tolerances = DEFAULT) -> list[tuple[int, Trajectory]]:
    """Polyline representative of the relative cycle attached to a generator.

    Interior generators use the one-dimensional unstable manifold of the
    reversed-function field; boundary generators use its local stable manifold,
    flowed backwards until it exits through the boundary.
    """
    cp = field_neg.crit.by_id(p.id)
    out = []
    if cp.kind == INTERIOR:
        for label, x0 in unstable_launches(field_neg, cp, tol):
            out.append((label, integrate(field_neg, x0, tol)))
    else:
        for label, x0 in stable_launches(field_neg, cp, tol):
            traj = integrate(field_neg, x0, tol, reverse=True, allow_exit=True)
            if traj.termination == TIMEOUT:
                raise FlowTimeout(f"relative curve from {p.id} timed out")
            if traj.termination == LEFT_DOMAIN:
                exit_pt = traj.end
                for other in field_neg.crit.points:
                    if chart_distance(field_neg.chart, exit_pt,
                                      other.coords) < tol.degeneracy_tol:
                        raise NonTransverse(
                            "relative curve exits at a critical point; "
                            "general position fails")
            out.append((label, traj))
    return out


def intersection_pairing(field_neg: PseudoGradientField,
                         field_pos: PseudoGradientField,
                         p: CriticalPoint, p_abs: CriticalPoint,
                         tol: Tolerances = DEFAULT) -> int:
    """Signed intersection count pairing a relative generator with an absolute one.

    p lives on the reversed-function side with unstable dimension n-k; p_abs on
    the plain side with unstable dimension n-k.  The count realizes the duality
    pairing between the two homology classes.
    """
    chart = field_pos.chart
    n = chart.dim
    dim_rel = n - p.grading
    dim_abs = p_abs.grading
    if dim_rel + dim_abs != n:
        raise DimensionMismatch(
            f"unstable dimensions {dim_rel} + {dim_abs} != {n}")
    total = 0

    cp_neg = field_neg.crit.by_id(p.id)
    cp_pos = field_pos.crit.by_id(p_abs.id)

    if p.id == p_abs.id:
        # both invariant manifolds pass through the shared point; the local
        # contribution is the orientation of the combined eigenframe
        frame_rel = cp_neg.frame_arrays()
        frame_abs = cp_pos.frame_arrays()
        mat = np.stack(frame_rel + frame_abs, axis=1)
        det = float(np.linalg.det(mat))
        if abs(det) < 1e-8:
            raise NonTransverse("invariant manifolds tangent at the shared point")
        total += (1 if det > 0 else -1) * p.reference_sign

    rel_curves = relative_cycle_curves(field_neg, p, tol)
    abs_curves = [(label, integrate(field_pos, x0, tol))
                  for label, x0 in unstable_launches(field_pos, cp_pos, tol)]

    for label_r, traj_r in rel_curves:
        pr = _resample(traj_r.points, 0.02)
        for label_a, traj_a in abs_curves:
            pa = _resample(traj_a.points, 0.02)
            for point, dir_r, dir_a, sin_angle in _polyline_crossings(pr, pa):
                if chart_distance(chart, point, cp_pos.coords) < 10 * tol.r_launch \
                        and p.id == p_abs.id:
                    continue  # germ artifacts next to the shared point
                if sin_angle < 1e-4:
                    raise NonTransverse("near-tangential crossing "
                                        f"between {p.id} and {p_abs.id}")
                o_rel = dir_r if label_r > 0 else -dir_r
                o_abs = dir_a if label_a > 0 else -dir_a
                det = float(np.linalg.det(np.stack([o_rel, o_abs], axis=1)))
                seam = 1
                if isinstance(chart, QuotientChart):
                    seam = (_path_sign_to(chart, traj_r.points, point)
                            * _path_sign_to(chart, traj_a.points, point))
                total += (1 if det > 0 else -1) * seam * p.reference_sign
    return total


def _path_sign_to(chart: QuotientChart, points: Array, stop: Array) -> int:
    """Deck-flip sign accumulated along a polyline up to the sample nearest stop."""
    dists = np.linalg.norm(points - stop[None, :], axis=1)
    idx = int(np.argmin(dists))
    d = (int(math.floor(points[idx][0] / chart.period))
         - int(math.floor(points[0][0] / chart.period)))
    return deck_sign(chart, d)
