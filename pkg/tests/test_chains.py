import pytest

from morseflow.chains import (IntPolynomial, IntegerChainComplex,
                              double_manifold_check, duality_symmetry_check,
                              morse_inequality_quotient, smith_normal_form)
from morseflow.errors import (BoundarySquareNonzero, NegativeCoefficient,
                              NotDivisible)
from morseflow.verify import rational_rank, snf_fuzz, snf_oracle


def test_snf_single_entry():
    assert smith_normal_form([[2]]) == ((2,), 1)


def test_snf_rank_deficient():
    assert smith_normal_form([[1, 0], [0, 0]]) == ((1,), 1)


def test_snf_two_by_two():
    assert smith_normal_form([[2, 4], [6, 8]]) == ((2, 4), 2)


def test_snf_empty_and_zero():
    assert smith_normal_form([]) == ((), 0)
    assert smith_normal_form([[0, 0], [0, 0]]) == ((), 0)


def test_snf_agrees_with_oracle():
    count, msg = snf_fuzz(1000)
    assert count == 1000, msg


def test_oracle_helpers_consistent():
    mat = [[2, 4], [6, 8]]
    assert snf_oracle(mat) == ((2, 4), 2)
    assert rational_rank(mat) == 2


def _complex(ranks, d1, step=-1):
    gens = tuple(tuple(range(sum(ranks[:k]), sum(ranks[:k + 1])))
                 for k in range(len(ranks)))
    matrices = {1: d1} if step == -1 else {0: d1}
    return IntegerChainComplex(len(ranks) - 1, step, gens, matrices)


def test_homology_annulus_shape():
    cx = _complex((1, 1), [[0]])
    h = cx.homology()
    assert h.betti == (1, 1)
    assert h.torsion == ((), ())


def test_homology_twisted_band_shape():
    cx = _complex((1, 1), [[2]])
    h = cx.homology()
    assert h.betti == (0, 0)
    assert h.torsion == ((2,), ())


def test_homology_zero_complex():
    cx = IntegerChainComplex(2, -1, ((), (), ()), {})
    assert cx.homology().betti == (0, 0, 0)


def test_square_zero_enforced():
    gens = ((0,), (1,), (2,))
    with pytest.raises(BoundarySquareNonzero):
        IntegerChainComplex(2, -1, gens, {1: [[1]], 2: [[1]]})


def test_transpose_dual_involution():
    cx = _complex((2, 1), [[3, -1]])
    assert cx.transpose_dual().transpose_dual().matrices == cx.matrices


def test_homology_invariant_under_conjugation():
    cx = _complex((2, 2), [[1, 2], [0, 2]])
    base = cx.homology()
    shuffled = cx.conjugated(order={0: [1, 0], 1: [1, 0]},
                             signs={0: -1, 3: -1})
    got = shuffled.homology()
    assert got.betti == base.betti and got.torsion == base.torsion


def test_quotient_dome():
    q = morse_inequality_quotient(IntPolynomial.of(1, 1, 1), IntPolynomial.of(1))
    assert q == IntPolynomial.of(0, 1)


def test_quotient_equal_polynomials():
    q = morse_inequality_quotient(IntPolynomial.of(1, 1), IntPolynomial.of(1, 1))
    assert q.coeffs == ()


def test_quotient_impossible_pair_flagged():
    # M - P = -T has remainder 1 at T = -1, so divisibility fails first
    with pytest.raises((NotDivisible, NegativeCoefficient)):
        morse_inequality_quotient(IntPolynomial.of(1), IntPolynomial.of(1, 1))


def test_quotient_negative_coefficient_flagged():
    # M - P = T^2 - 1 = (1 + T)(T - 1): divisible, but the quotient dips negative
    with pytest.raises(NegativeCoefficient):
        morse_inequality_quotient(IntPolynomial.of(0, 0, 1), IntPolynomial.of(1))


def test_quotient_nonzero_remainder():
    with pytest.raises(NotDivisible):
        morse_inequality_quotient(IntPolynomial.of(1, 0, 1), IntPolynomial.of(1))


def test_duality_symmetry_examples():
    assert duality_symmetry_check(IntPolynomial.of(1, 1), IntPolynomial.of(0, 1, 1), 2)
    assert duality_symmetry_check(IntPolynomial.of(1), IntPolynomial.of(0, 0, 1), 2)
    assert not duality_symmetry_check(IntPolynomial.of(1), IntPolynomial.of(1), 2)


def test_double_manifold_annulus():
    counts = [(0, 1, 0), (0, 1, 1), (0, 0, 1)]
    rep = double_manifold_check(counts, IntPolynomial.of(1, 1),
                                IntPolynomial.of(0, 1, 1), orientable=True)
    assert rep.m_double == IntPolynomial.of(1, 2, 1)
    assert rep.quotient.coeffs == ()


def test_double_manifold_disk():
    counts = [(0, 1, 0), (0, 0, 0), (0, 0, 1)]
    rep = double_manifold_check(counts, IntPolynomial.of(1),
                                IntPolynomial.of(0, 0, 1), orientable=True)
    assert rep.quotient.coeffs == ()


def test_double_manifold_nonorientable_recorded_only():
    counts = [(0, 1, 0), (1, 0, 0), (0, 0, 1)]
    rep = double_manifold_check(counts, IntPolynomial.of(1, 1),
                                IntPolynomial.of(), orientable=False)
    assert rep.additivity_ok and not rep.asserted
    assert rep.quotient == IntPolynomial.of(0, 1)


def test_euler_alternating_sum(packages):
    for pkg in packages.values():
        for cx in pkg.complexes.values():
            h = cx.homology()
            chi_h = sum((-1) ** k * b for k, b in enumerate(h.betti))
            assert chi_h == cx.euler_characteristic()


def test_polynomial_trims_and_evaluates():
    p = IntPolynomial((1, 2, 0, 0))
    assert p.coeffs == (1, 2)
    assert p(-1) == -1
    assert (p - p).coeffs == ()
