import pytest

from morseflow import catalog
from morseflow.chains import HomologyResult
from morseflow.critical import BOUNDARY_D, BOUNDARY_N, INTERIOR
from morseflow.errors import InvarianceFailure
from morseflow.pipeline import (assert_identical_homology, complex_key,
                                invariance_check)


def test_generator_partitions(packages):
    for name, pkg in packages.items():
        crit = pkg.crit
        for side, keep in (("N", BOUNDARY_N), ("D", BOUNDARY_D)):
            gens = crit.generators(side)
            expected = [p.id for p in crit.points if p.kind in (INTERIOR, keep)]
            flattened = [gid for lst in pkg.complexes[
                complex_key(side, "untwisted")].generators for gid in lst]
            assert sorted(flattened) == sorted(expected)
            for k, lst in enumerate(gens):
                assert all(p.grading == k for p in lst)


def test_complex_ranks(packages):
    ranks = {name: tuple(len(g) for g in
                         packages[name].complexes["N_untwisted"].generators)
             for name in packages}
    assert ranks["interval"] == (1, 0)
    assert ranks["disk"] == (1, 0, 0)
    assert ranks["annulus"] == (1, 1, 0)
    assert ranks["moebius"] == (1, 1, 0)
    assert ranks["tilted_dome"] == (1, 1, 1)


def test_incidence_matrices(packages):
    ann = packages["annulus"].complexes["N_untwisted"]
    assert ann.matrix(1) == [[0]]
    moe_tw = packages["moebius"].complexes["N_orientation"]
    assert moe_tw.matrix(1) in ([[2]], [[-2]])
    moe = packages["moebius"].complexes["N_untwisted"]
    assert moe.matrix(1) == [[0]]
    dome = packages["tilted_dome"].complexes["N_untwisted"]
    assert abs(dome.matrix(2)[0][0]) == 1
    assert dome.matrix(1) == [[0]]


def test_relative_side_matrices(packages):
    ann_d = packages["annulus"].complexes["D_untwisted"]
    assert ann_d.step == 1
    assert ann_d.matrix(1) == [[0]]
    moe_d = packages["moebius"].complexes["D_orientation"]
    assert moe_d.matrix(1) in ([[2]], [[-2]])


def test_homology_matches_catalog_references(packages):
    for name, pkg in packages.items():
        refs = catalog.get(name).references()
        targets = {
            "N_untwisted": "H_*(M;Z)",
            "N_orientation": "H_*(M;Z^or)",
            "D_untwisted": "H^*(M,dM;Z^or)",
            "D_orientation": "H^*(M,dM;Z)",
            "D_dual": "H_*(M,dM;Z^or)",
        }
        for key, target in targets.items():
            got = pkg.homology[key]
            ref = refs[target]
            assert got.matches(ref.betti, ref.torsion), \
                f"{name}/{key}: {got.as_dict()} != {ref.as_dict()}"


def test_dual_complex_shape(packages):
    dual = packages["annulus"].complexes["D_dual"]
    assert dual.step == -1
    assert dual.homology().betti == (0, 1, 1)
    rebuilt = dual.transpose_dual()
    original = packages["annulus"].complexes["D_untwisted"]
    assert rebuilt.matrices == original.matrices


def test_pairing_annulus_unimodular(packages):
    rep = packages["annulus"].pairing[1]
    assert rep.matrix is not None
    assert abs(rep.matrix[0][0]) == 1
    assert rep.determinant() in (1, -1)


def test_pairing_moebius_diagonal(packages):
    rep = packages["moebius"].pairing[1]
    assert rep.matrix is not None
    assert abs(rep.matrix[0][0]) == 1


def test_pairing_dimension_mismatch_reported(packages):
    rep = packages["disk"].pairing[2]
    assert rep.matrix is None
    assert "precondition" in rep.reason
    rep0 = packages["disk"].pairing[0]
    assert rep0.matrix is None


def test_all_checks_pass(packages):
    for name, pkg in packages.items():
        failed = [c.name for c in pkg.checks if not c.passed]
        assert not failed, f"{name}: {failed}"


def test_invariance_two_entries():
    for name in ("annulus", "moebius"):
        report = invariance_check(catalog.get(name), seeds=(1, 2))
        assert report.passed


def test_invariance_failure_detected():
    good = {"N_untwisted": HomologyResult((1, 1, 0), ((), (), ()))}
    bad = {"N_untwisted": HomologyResult((1, 0, 0), ((), (), ()))}
    with pytest.raises(InvarianceFailure):
        assert_identical_homology({1: good, 2: bad})


def test_single_seed_rejected():
    with pytest.raises(ValueError):
        invariance_check(catalog.get("disk"), seeds=(1,))
