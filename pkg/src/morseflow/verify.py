"""Acceptance checks over the whole catalog, shared by the CLI and the tests.

Each criterion returns a CheckResult; `run_acceptance` executes all of them
with one shared set of per-entry builds.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import catalog
from .chains import IntPolynomial, mat_mul, smith_normal_form
from .critical import BOUNDARY_N, INTERIOR
from .errors import MorseflowError
from .fields import boundary_restriction_derivatives
from .geometry import normalize_point
from .params import DEFAULT, Tolerances
from .pipeline import (MorsePackage, build_package, complex_key,
                       homologies_for_seed, assert_identical_homology)

EXPECTED_ABSOLUTE = {
    "interval": (1, 0),
    "disk": (1, 0, 0),
    "annulus": (1, 1, 0),
    "moebius": (1, 1, 0),
    "tilted_dome": (1, 0, 0),
}

EXPECTED_RELATIVE = {
    "interval": (0, 1),
    "disk": (0, 0, 1),
    "annulus": (0, 1, 1),
    "moebius": (0, 1, 1),
    "tilted_dome": (0, 0, 1),
}


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.criterion:2d} {self.name}: {self.detail}"


class VerificationContext:
    """Caches the expensive per-entry builds across criteria."""

    def __init__(self, seed: int = 0, tol: Tolerances = DEFAULT):
        self.seed = seed
        self.tol = tol
        self._packages: dict[str, MorsePackage] = {}

    def package(self, name: str) -> MorsePackage:
        if name not in self._packages:
            self._packages[name] = build_package(catalog.get(name), self.seed, self.tol)
        return self._packages[name]


def _guard(criterion: int, name: str, fn) -> CheckResult:
    try:
        return fn()
    except MorseflowError as exc:
        return CheckResult(criterion, name, False, f"{type(exc).__name__}: {exc}")


def check_absolute_homology(ctx: VerificationContext) -> CheckResult:
    def run():
        bad = []
        for name in catalog.names():
            pkg = ctx.package(name)
            got = pkg.homology[complex_key("N", "untwisted")]
            want = EXPECTED_ABSOLUTE[name]
            if got.betti != want or any(got.torsion):
                bad.append(f"{name}: {got.as_dict()}")
        return CheckResult(1, "absolute homology from the plain complex",
                           not bad, "; ".join(bad) or "all entries exact")
    return _guard(1, "absolute homology from the plain complex", run)


def check_twisted_moebius(ctx: VerificationContext) -> CheckResult:
    def run():
        pkg = ctx.package("moebius")
        twisted = pkg.homology[complex_key("N", "orientation")]
        ok = twisted.betti == (0, 0, 0) and twisted.torsion == ((2,), (), ())
        dual = pkg.homology["D_dual"]
        ok = ok and dual.betti == (0, 1, 1) and not any(dual.torsion)
        return CheckResult(2, "twisted moebius homology",
                           ok, f"twisted {twisted.as_dict()}, relative {dual.as_dict()}")
    return _guard(2, "twisted moebius homology", run)


def check_relative_cohomology(ctx: VerificationContext) -> CheckResult:
    def run():
        bad = []
        for name in catalog.names():
            pkg = ctx.package(name)
            got = pkg.homology[complex_key("D", "untwisted")]
            want = EXPECTED_RELATIVE[name]
            if got.betti != want or any(got.torsion):
                bad.append(f"{name}: {got.as_dict()}")
        return CheckResult(3, "relative cohomology from the degree-raising complex",
                           not bad, "; ".join(bad) or "all entries exact")
    return _guard(3, "relative cohomology from the degree-raising complex", run)


def check_square_zero(ctx: VerificationContext) -> CheckResult:
    def run():
        worst = 0
        for name in catalog.names():
            pkg = ctx.package(name)
            for cx in pkg.complexes.values():
                for k in range(cx.top_dim + 1):
                    mid = k + cx.step
                    if not (0 <= mid <= cx.top_dim):
                        continue
                    comp = mat_mul(cx.matrix(k), cx.matrix(mid))
                    worst = max([worst] + [abs(v) for row in comp for v in row])
        return CheckResult(4, "composite differential vanishes",
                           worst == 0, f"max |entry| of composites = {worst}")
    return _guard(4, "composite differential vanishes", run)


def check_morse_inequalities(ctx: VerificationContext) -> CheckResult:
    def run():
        bad = []
        for name in catalog.names():
            pkg = ctx.package(name)
            qn, qd = pkg.polynomials["q_n"], pkg.polynomials["q_d"]
            if any(c < 0 for c in qn.coeffs) or any(c < 0 for c in qd.coeffs):
                bad.append(f"{name}: q_n={qn.as_list()}, q_d={qd.as_list()}")
        dome_q = ctx.package("tilted_dome").polynomials["q_n"]
        if dome_q != IntPolynomial.of(0, 1):
            bad.append(f"tilted_dome q_n = {dome_q.as_list()} != T")
        return CheckResult(5, "staircase inequalities with non-negative quotients",
                           not bad, "; ".join(bad) or "quotients exact, dome q_n = T")
    return _guard(5, "staircase inequalities with non-negative quotients", run)


def _find_id(pkg: MorsePackage, kind: str, grading: int) -> int:
    for cp in pkg.crit.points:
        if cp.kind == kind and cp.grading == grading:
            return cp.id
    raise KeyError((kind, grading))


def check_forced_orbit_counts(ctx: VerificationContext) -> CheckResult:
    def run():
        msgs, ok = [], True
        pkg = ctx.package("annulus")
        inc = pkg.incidences["N"][(_find_id(pkg, BOUNDARY_N, 1),
                                   _find_id(pkg, BOUNDARY_N, 0))]
        good = (inc.count == 0 and len(inc.orbits) == 2
                and sorted(o.sign for o in inc.orbits) == [-1, 1])
        ok &= good
        msgs.append(f"annulus m={inc.count} from {len(inc.orbits)} orbits")
        pkg = ctx.package("moebius")
        inc = pkg.incidences["N"][(_find_id(pkg, INTERIOR, 1),
                                   _find_id(pkg, BOUNDARY_N, 0))]
        good = (inc.count == 0 and abs(inc.count_twisted) == 2
                and len(inc.orbits) == 2)
        ok &= good
        msgs.append(f"moebius m={inc.count}, twisted={inc.count_twisted}")
        pkg = ctx.package("tilted_dome")
        inc = pkg.incidences["N"][(_find_id(pkg, INTERIOR, 2),
                                   _find_id(pkg, BOUNDARY_N, 1))]
        ok &= abs(inc.count) == 1
        msgs.append(f"dome |m|={abs(inc.count)}")
        return CheckResult(6, "forced orbit multiplicities and signs",
                           bool(ok), "; ".join(msgs))
    return _guard(6, "forced orbit multiplicities and signs", run)


def check_pairing(ctx: VerificationContext) -> CheckResult:
    def run():
        rep = ctx.package("annulus").pairing[1]
        ok = rep.matrix is not None and len(rep.matrix) == 1 \
            and abs(rep.matrix[0][0]) == 1
        return CheckResult(7, "duality pairing is unimodular",
                           ok, f"annulus degree-1 matrix {rep.matrix}")
    return _guard(7, "duality pairing is unimodular", run)


def check_double_identities(ctx: VerificationContext) -> CheckResult:
    def run():
        bad = []
        for name in catalog.names():
            pkg = ctx.package(name)
            rep = pkg.double_report
            if not rep.additivity_ok:
                bad.append(f"{name}: additivity fails")
            if rep.asserted:
                if rep.quotient is None or any(c < 0 for c in rep.quotient.coeffs):
                    bad.append(f"{name}: quotient {None if rep.quotient is None else rep.quotient.as_list()}")
        for name in ("disk", "annulus"):
            q = ctx.package(name).double_report.quotient
            if q is None or q.coeffs != ():
                bad.append(f"{name}: doubled quotient {q and q.as_list()} != 0")
        return CheckResult(8, "doubled-manifold polynomial identities",
                           not bad, "; ".join(bad) or "identities exact")
    return _guard(8, "doubled-manifold polynomial identities", run)


def check_invariance(ctx: VerificationContext, seeds=(1, 2, 3)) -> CheckResult:
    def run():
        for name in catalog.names():
            entry = catalog.get(name)
            per_seed = {s: homologies_for_seed(entry, s, ctx.tol) for s in seeds}
            assert_identical_homology(per_seed)
        return CheckResult(9, "homology invariant across perturbation seeds",
                           True, f"seeds {tuple(seeds)} agree on every entry and flavor")
    return _guard(9, "homology invariant across perturbation seeds", run)


# --- numerical hygiene -------------------------------------------------------


def _int_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [[m[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        total += (-1) ** j * m[0][j] * _int_det(minor)
    return total


def snf_oracle(mat: list[list[int]]) -> tuple[tuple[int, ...], int]:
    """Invariant factors from determinant-divisor gcds (brute force)."""
    rows, cols = len(mat), len(mat[0]) if mat else 0
    diag = []
    prev = 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rsel in combinations(range(rows), k):
            for csel in combinations(range(cols), k):
                sub = [[mat[i][j] for j in csel] for i in rsel]
                g = math.gcd(g, abs(_int_det(sub)))
        if g == 0:
            break
        diag.append(g // prev)
        prev = g
    return tuple(diag), len(diag)


def rational_rank(mat: list[list[int]]) -> int:
    work = [[Fraction(v) for v in row] for row in mat]
    rows, cols = len(work), len(work[0]) if mat else 0
    rank, pivot_row = 0, 0
    for col in range(cols):
        pivot = None
        for r in range(pivot_row, rows):
            if work[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        work[pivot_row], work[pivot] = work[pivot], work[pivot_row]
        inv = work[pivot_row][col]
        for r in range(pivot_row + 1, rows):
            if work[r][col] != 0:
                factor = work[r][col] / inv
                work[r] = [a - factor * b for a, b in zip(work[r], work[pivot_row])]
        pivot_row += 1
        rank += 1
        if pivot_row == rows:
            break
    return rank


def snf_fuzz(cases: int = 1000, seed: int = 20240501) -> tuple[int, str]:
    rng = random.Random(seed)
    for i in range(cases):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        mat = [[rng.randint(-5, 5) for _ in range(cols)] for _ in range(rows)]
        got_diag, got_rank = smith_normal_form(mat)
        want_diag, want_rank = snf_oracle(mat)
        want_diag = tuple(d for d in want_diag if d != 0)
        if got_rank != rational_rank(mat) or got_diag != want_diag:
            return i, f"case {i}: {mat} -> {got_diag} vs oracle {want_diag}"
    return cases, "all cases agree"


def check_numerics(ctx: VerificationContext) -> CheckResult:
    def run():
        bad = []
        rng = np.random.default_rng(4242)
        for name in catalog.names():
            pkg = ctx.package(name)
            for label, fld in (("descent", pkg.field_pos), ("ascent", pkg.field_neg)):
                cert = fld.certificate
                if cert.descent_margin >= -1e-6 or cert.inward_margin <= 1e-6 \
                        or not cert.passed:
                    bad.append(f"{name}/{label}: {cert.as_dict()}")
            entry = catalog.get(name)
            worst = _gradient_fd_error(entry, rng, samples=200)
            if worst > 1e-5:
                bad.append(f"{name}: gradient fd error {worst:.2e}")
            worst_b = _boundary_fd_error(entry, pkg)
            if worst_b > 1e-4:
                bad.append(f"{name}: boundary fd error {worst_b:.2e}")
        count, msg = snf_fuzz()
        if count != 1000:
            bad.append(f"snf oracle: {msg}")
        return CheckResult(10, "numerical hygiene",
                           not bad, "; ".join(bad) or
                           "certificates, derivative checks, and snf fuzz all pass")
    return _guard(10, "numerical hygiene", run)


def _gradient_fd_error(entry, rng, samples: int = 200) -> float:
    chart, field = entry.chart, entry.field
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    worst = 0.0
    count = 0
    attempts = 0
    step = 1e-6
    while count < samples and attempts < 100 * samples:
        attempts += 1
        x = lo + (hi - lo) * rng.random(chart.dim)
        try:
            pt, _ = normalize_point(chart, x)
        except MorseflowError:
            continue
        from .geometry import boundary_distance
        if boundary_distance(chart, pt.array) < 10 * step:
            continue
        count += 1
        grad = np.asarray(field.gradient(pt.array), dtype=float)
        for j in range(chart.dim):
            e = np.zeros(chart.dim)
            e[j] = step
            fd = (float(field.value(pt.array + e))
                  - float(field.value(pt.array - e))) / (2 * step)
            scale = max(1.0, abs(grad[j]))
            worst = max(worst, abs(fd - grad[j]) / scale)
    return worst


def _boundary_fd_error(entry, pkg) -> float:
    """Arclength finite differences of the restriction at boundary criticals."""
    from .critical import _boundary_step
    chart, field = entry.chart, entry.field
    if chart.dim != 2:
        return 0.0
    worst = 0.0
    h = 1e-4
    for cp in pkg.crit.points:
        if cp.kind == INTERIOR:
            continue
        x0 = cp.coords
        f0 = float(field.value(x0))
        plus = _boundary_step(chart, x0, h)
        minus = _boundary_step(chart, x0, -h)
        if plus is None or minus is None:
            continue
        fd_second = (float(field.value(plus)) - 2 * f0 + float(field.value(minus))) / h ** 2
        pt, _ = normalize_point(chart, x0)
        _, h_t = boundary_restriction_derivatives(field, chart, pt, entry.metric)
        worst = max(worst, abs(fd_second - h_t) / max(1.0, abs(h_t)))
    return worst


ALL_CHECKS = (
    check_absolute_homology,
    check_twisted_moebius,
    check_relative_cohomology,
    check_square_zero,
    check_morse_inequalities,
    check_forced_orbit_counts,
    check_pairing,
    check_double_identities,
    check_invariance,
    check_numerics,
)


def run_acceptance(seed: int = 0, tol: Tolerances = DEFAULT) -> list[CheckResult]:
    ctx = VerificationContext(seed, tol)
    return [fn(ctx) for fn in ALL_CHECKS]
