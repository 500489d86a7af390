import math

import numpy as np
import pytest

from morseflow import catalog
from morseflow.critical import BOUNDARY_D, BOUNDARY_N, INTERIOR
from morseflow.geometry import boundary_distance, chart_distance
from morseflow.params import DEFAULT
from morseflow.pseudogradient import (PseudoGradientField, certify_adapted,
                                      halton_sequence)


def test_certificates_pass_with_stated_margins(packages):
    for name, pkg in packages.items():
        for fld in (pkg.field_pos, pkg.field_neg):
            cert = fld.certificate
            assert cert.passed, f"{name}: {cert.as_dict()}"
            assert cert.descent_margin < -1e-6
            assert cert.inward_margin > 1e-6
            assert cert.interior_definiteness < 0
            assert cert.tangency_definiteness < 0


def test_raw_gradient_fails_inwardness_on_annulus(packages):
    pkg = packages["annulus"]
    base = pkg.field_pos
    raw = PseudoGradientField(
        chart=base.chart, metric=base.metric, objective=base.objective,
        crit=base.crit, patches=(), r_n=base.r_n, delta_c=0.0)
    cert = certify_adapted(raw, DEFAULT)
    assert cert.inward_margin < 0  # -grad f points outward near the tangency points


def test_field_vanishes_exactly_at_build_zeros(packages):
    for pkg in packages.values():
        for fld in (pkg.field_pos, pkg.field_neg):
            for cp in fld.crit.points:
                if cp.kind in (INTERIOR, BOUNDARY_N):
                    assert np.linalg.norm(fld.evaluate(cp.coords)) < 1e-10
                else:
                    assert np.linalg.norm(fld.evaluate(cp.coords)) > 1e-3


def test_hyperbolic_with_unstable_dimension_equal_grading(packages):
    for pkg in packages.values():
        for fld in (pkg.field_pos, pkg.field_neg):
            for cp in fld.crit.points:
                if cp.kind not in (INTERIOR, BOUNDARY_N):
                    continue
                lam = np.linalg.eigvals(fld.linearization(cp.coords))
                assert np.min(np.abs(lam.real)) > 1e-8
                assert int(np.sum(lam.real > 0)) == cp.grading


def test_moebius_patch_keeps_field_tangent_to_edge(packages):
    fld = packages["moebius"].field_pos
    # pure model zone: exactly tangent to the wall
    for du in np.linspace(-0.07, 0.07, 13):
        vec = fld.evaluate([math.pi + du, -1.0])
        assert abs(vec[1]) < 1e-12
    # blend zone: never outward
    for du in np.linspace(-0.14, 0.14, 13):
        vec = fld.evaluate([math.pi + du, -1.0])
        assert vec[1] > -1e-12
    assert np.linalg.norm(fld.evaluate([math.pi, -1.0])) < 1e-12


def test_reversed_build_patches_sit_at_former_type_d_points(packages):
    for name, pkg in packages.items():
        entry = catalog.get(name)
        d_points = [cp for cp in pkg.crit.points if cp.kind == BOUNDARY_D]
        centers = [patch.center for patch in pkg.field_neg.patches]
        assert len(centers) == len(d_points)
        for cp in d_points:
            assert any(chart_distance(entry.chart, c, cp.coords) < 1e-9
                       for c in centers)


def test_interval_field_shape(packages):
    fld = packages["interval"].field_pos
    assert fld.evaluate([0.5]) == pytest.approx([-1.0])
    # near the tangency point at the origin the model field is linear
    assert fld.evaluate([0.0]) == pytest.approx([0.0], abs=1e-15)
    assert fld.evaluate([0.01])[0] == pytest.approx(-0.01, rel=1e-6)


def test_descent_quadratic_form_negative_definite(packages):
    pkg = packages["tilted_dome"]
    fld = pkg.field_pos
    cp = next(p for p in fld.crit.points if p.kind == INTERIOR)
    hess = np.asarray(fld.objective.hessian(cp.coords))
    lin = fld.linearization(cp.coords)
    form = 0.5 * (hess @ lin + lin.T @ hess)
    assert np.max(np.linalg.eigvalsh(form)) < 0


def test_flow_enters_interior_from_boundary(packages):
    from morseflow.critical import boundary_components
    for name, pkg in packages.items():
        entry = catalog.get(name)
        if entry.chart.dim != 2:
            continue
        fld = pkg.field_pos
        n_pts = [cp for cp in fld.crit.points if cp.kind == BOUNDARY_N]
        for loop in boundary_components(entry.chart, 40):
            for x in loop:
                if any(chart_distance(entry.chart, x, cp.coords) < fld.r_n
                       for cp in n_pts):
                    continue
                step = 1e-4 * fld.evaluate(x)
                assert boundary_distance(entry.chart, x + step) \
                    > boundary_distance(entry.chart, x)


def test_bulk_region_is_plain_descent(packages):
    fld = packages["annulus"].field_pos
    assert fld.evaluate([1.5, 0.0]) == pytest.approx([0.0, -1.0], abs=1e-12)


def test_halton_points_fill_unit_square():
    pts = halton_sequence(512, 2)
    assert pts.shape == (512, 2)
    assert pts.min() > 0.0 and pts.max() < 1.0
    # low-discrepancy: every quadrant is hit roughly equally
    quad = (pts[:, 0] > 0.5).astype(int) * 2 + (pts[:, 1] > 0.5).astype(int)
    counts = np.bincount(quad, minlength=4)
    assert counts.min() > 100


def test_perturbed_field_still_certifies(packages):
    from morseflow.pseudogradient import build_adapted
    entry = catalog.get("annulus")
    crit = packages["annulus"].crit
    fld = build_adapted(entry.field, entry.chart, crit, entry.metric,
                        perturb_seed=5)
    assert fld.certificate.passed
    # the perturbation vanishes on the boundary and near critical points
    assert np.linalg.norm(fld._perturb(np.array([0.0, -2.0]))) == 0.0
    probe = fld._perturb(np.array([1.5, 0.2]))
    assert 0.0 < np.linalg.norm(probe) < 2e-3
