import math

import numpy as np
import pytest

from morseflow import catalog
from morseflow.critical import (BOUNDARY_D, BOUNDARY_N, INTERIOR,
                                find_boundary_critical, find_critical_set,
                                find_interior_critical)
from morseflow.geometry import MetricField, QuotientChart, chart_distance


def test_expected_partition_reproduced(packages):
    for name, pkg in packages.items():
        entry = catalog.get(name)
        found = list(pkg.crit.points)
        assert len(found) == len(entry.expected)
        for exp in entry.expected:
            matches = [cp for cp in found
                       if cp.kind == exp.kind and cp.grading == exp.grading
                       and chart_distance(entry.chart, cp.point.coords,
                                          exp.location) < 1e-6]
            assert len(matches) == 1, f"{name}: {exp} not matched exactly once"


def test_moebius_interior_saddle():
    e = catalog.get("moebius")
    pts = find_interior_critical(e.field, e.chart)
    assert len(pts) == 1
    cp = pts[0]
    assert cp.kind == INTERIOR and cp.index == 1
    assert cp.value == pytest.approx(0.0, abs=1e-12)
    eigs = np.linalg.eigvalsh(e.field.hessian(cp.coords))
    assert eigs == pytest.approx([-0.5, 0.5])


def test_annulus_has_no_interior_criticals():
    e = catalog.get("annulus")
    assert find_interior_critical(e.field, e.chart) == []


def test_dome_interior_maximum():
    e = catalog.get("tilted_dome")
    pts = find_interior_critical(e.field, e.chart)
    assert len(pts) == 1
    assert pts[0].grading == 2
    assert pts[0].point.coords == pytest.approx((0.0, 0.25), abs=1e-9)
    assert pts[0].value == pytest.approx(17.0 / 16.0)


def test_interval_boundary_classification():
    e = catalog.get("interval")
    pts = find_boundary_critical(e.field, e.chart)
    kinds = {round(cp.point.coords[0]): (cp.kind, cp.grading) for cp in pts}
    assert kinds[0] == (BOUNDARY_N, 0)
    assert kinds[1] == (BOUNDARY_D, 1)


def test_disk_boundary_classification():
    e = catalog.get("disk")
    pts = sorted(find_boundary_critical(e.field, e.chart), key=lambda p: p.value)
    assert [(p.kind, p.grading) for p in pts] == [(BOUNDARY_N, 0), (BOUNDARY_D, 2)]


def test_moebius_boundary_types_and_values():
    e = catalog.get("moebius")
    pts = sorted(find_boundary_critical(e.field, e.chart), key=lambda p: p.value)
    assert [(p.kind, p.grading) for p in pts] == [(BOUNDARY_N, 0), (BOUNDARY_D, 2)]
    assert [p.value for p in pts] == pytest.approx([-1.0, 1.0])
    for p in pts:
        assert p.point.coords[0] == pytest.approx(math.pi)


def _interior_oracle(entry, density=400):
    """Grid scan for local minima of |grad f|, polished by a few Newton steps."""
    chart, field = entry.chart, entry.field
    axes = [np.linspace(lo, hi, density) for lo, hi in chart.box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    grad = np.asarray(field.gradient(pts))
    mag = np.sqrt(np.sum(grad * grad, axis=-1))
    hits = []
    if chart.dim == 1:
        return hits
    inside = np.ones(mag.shape, dtype=bool)
    if isinstance(chart, QuotientChart):
        inside &= (pts[..., 1] > chart.v_min + 1e-3) & (pts[..., 1] < chart.v_max - 1e-3)
    else:
        for con in chart.constraints:
            inside &= np.asarray(con.value(pts)) < -1e-3
    for i in range(1, density - 1):
        for j in range(1, density - 1):
            if not inside[i, j] or mag[i, j] >= 1e-3:
                continue
            window = mag[i - 1:i + 2, j - 1:j + 2]
            if mag[i, j] <= window.min():
                x = pts[i, j].copy()
                for _ in range(8):
                    hess = np.asarray(field.hessian(x))
                    x = x - np.linalg.solve(hess, np.asarray(field.gradient(x)))
                hits.append(x)
    return hits


def test_interior_search_complete_against_grid(packages):
    for name, pkg in packages.items():
        entry = catalog.get(name)
        reported = [cp for cp in pkg.crit.points if cp.kind == INTERIOR]
        for hit in _interior_oracle(entry):
            dists = [chart_distance(entry.chart, hit, cp.point.coords)
                     for cp in reported]
            assert dists and min(dists) < 1e-4, f"{name}: missed critical near {hit}"


def test_boundary_search_complete_against_walk(packages):
    from morseflow.critical import boundary_components
    from morseflow.fields import boundary_restriction_derivatives
    from morseflow.geometry import normalize_point
    for name, pkg in packages.items():
        entry = catalog.get(name)
        if entry.chart.dim != 2:
            continue
        reported = [cp for cp in pkg.crit.points if cp.kind != INTERIOR]
        for loop in boundary_components(entry.chart, 4000):
            g = []
            for x in loop:
                pt, _ = normalize_point(entry.chart, x)
                g_t, _ = boundary_restriction_derivatives(entry.field, entry.chart, pt)
                g.append(abs(g_t))
            g = np.array(g)
            for i in range(len(g)):
                lo, hi = (i - 1) % len(g), (i + 1) % len(g)
                if g[i] < 1e-3 and g[i] <= min(g[lo], g[hi]):
                    dists = [chart_distance(entry.chart, loop[i], cp.point.coords)
                             for cp in reported]
                    assert min(dists) < 1e-2, f"{name}: walk minimum missed"


def test_euler_characteristic(packages):
    for name, pkg in packages.items():
        assert pkg.crit.euler_characteristic() == catalog.get(name).chi


def test_classification_stable_under_metric_scaling(packages):
    for name in catalog.names():
        entry = catalog.get(name)
        scaled = MetricField.scaled(entry.chart.dim, 4.0)
        crit = find_critical_set(entry.field, entry.chart, scaled)
        base = packages[name].crit
        assert [(p.kind, p.grading) for p in crit.points] \
            == [(p.kind, p.grading) for p in base.points]


def test_partitions_disjoint_and_sorted(packages):
    for pkg in packages.values():
        values = [cp.value for cp in pkg.crit.points]
        assert values == sorted(values)
        assert all(b - a > 1e-6 for a, b in zip(values, values[1:]))
        counted = sum(sum(row) for row in pkg.crit.counts())
        assert counted == len(pkg.crit.points)


def test_orientation_frames_span_unstable_directions(packages):
    for pkg in packages.values():
        for cp in pkg.crit.points:
            if cp.kind in (INTERIOR, BOUNDARY_N):
                assert len(cp.orientation_ref) == cp.unstable_dim
                for vec in cp.frame_arrays():
                    assert np.linalg.norm(vec) == pytest.approx(1.0)
