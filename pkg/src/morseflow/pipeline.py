"""Full construction: complexes in every flavor, homology against references,
duality pairing matrices, and the empirical seed-invariance check."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import CatalogEntry
from .chains import (DoubleManifoldReport, HomologyResult, IntPolynomial,
                     IntegerChainComplex, double_manifold_check,
                     duality_symmetry_check, morse_inequality_quotient)
from .critical import BOUNDARY_N, INTERIOR, CriticalSet, find_critical_set
from .errors import InvarianceFailure, NonTransverse
from .flow import IncidenceCount, count_connecting_orbits, intersection_pairing
from .params import DEFAULT, Tolerances
from .pseudogradient import PseudoGradientField, build_adapted

SIDES = ("N", "D")
FLAVORS = ("untwisted", "orientation")

COMPLEX_TARGETS = {
    ("N", "untwisted"): "H_*(M;Z)",
    ("N", "orientation"): "H_*(M;Z^or)",
    ("D", "untwisted"): "H^*(M,dM;Z^or)",
    ("D", "orientation"): "H^*(M,dM;Z)",
}
DUAL_TARGET = "H_*(M,dM;Z^or)"


def complex_key(side: str, flavor: str) -> str:
    return f"{side}_{flavor}"


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class PairingReport:
    degree: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...] | None
    reason: str = ""

    def determinant(self) -> int | None:
        if self.matrix is None or not self.rows or len(self.rows) != len(self.cols):
            return None
        mat = np.array(self.matrix, dtype=float)
        return int(round(float(np.linalg.det(mat))))

    def as_dict(self) -> dict:
        return {
            "degree": self.degree,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "matrix": None if self.matrix is None else [list(r) for r in self.matrix],
            "reason": self.reason,
        }


@dataclass(eq=False)
class MorsePackage:
    entry: CatalogEntry
    seed: int
    crit: CriticalSet
    field_pos: PseudoGradientField
    field_neg: PseudoGradientField
    incidences: dict[str, dict[tuple[int, int], IncidenceCount]]
    complexes: dict[str, IntegerChainComplex]
    homology: dict[str, HomologyResult]
    polynomials: dict[str, IntPolynomial]
    double_report: DoubleManifoldReport
    pairing: dict[int, PairingReport]
    pairing_seed: int | None
    checks: list[CheckRecord]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _retry_seeds(base_seed: int, tol: Tolerances) -> list[int | None]:
    first = None if base_seed == 0 else base_seed
    return [first] + [7919 * (base_seed + 1) + i for i in range(1, tol.perturb_retries + 1)]


def build_incidences(field: PseudoGradientField,
                     tol: Tolerances) -> dict[tuple[int, int], IncidenceCount]:
    """Connecting-orbit counts between the field's zeros at grading gap one."""
    zeros = [cp for cp in field.crit.points if cp.kind in (INTERIOR, BOUNDARY_N)]
    table: dict[tuple[int, int], IncidenceCount] = {}
    for p in zeros:
        for q in zeros:
            if p.grading == q.grading + 1:
                table[(p.id, q.id)] = count_connecting_orbits(field, p, q, tol)
    return table


def _build_side(entry: CatalogEntry, crit: CriticalSet, for_negative: bool,
                base_seed: int, tol: Tolerances):
    """Field plus incidence table, retrying with perturbation seeds as needed."""
    last: Exception | None = None
    for seed in _retry_seeds(base_seed, tol):
        field = build_adapted(entry.field, entry.chart, crit, entry.metric,
                              for_negative=for_negative, perturb_seed=seed, tol=tol)
        try:
            return field, build_incidences(field, tol)
        except NonTransverse as exc:
            last = exc
    raise last  # type: ignore[misc]


def assemble_complex(crit: CriticalSet, side: str, flavor: str,
                     incidences: dict[tuple[int, int], IncidenceCount],
                     ) -> IntegerChainComplex:
    """Incidence matrices over the generator partition of one side.

    The N side is a chain complex in the plain grading; the D side keeps the
    same grading, so its differential raises degree by one.
    """
    gens = crit.generators(side)
    ids = tuple(tuple(p.id for p in lst) for lst in gens)
    n = crit.dim
    step = -1 if side == "N" else 1
    matrices = {}
    for k in range(n + 1):
        tgt = k + step
        if not (0 <= tgt <= n):
            continue
        rows = gens[k]
        cols = gens[tgt]
        mat = [[0] * len(cols) for _ in rows]
        for i, p in enumerate(rows):
            for j, q in enumerate(cols):
                inc = incidences.get((p.id, q.id))
                if inc is not None:
                    mat[i][j] = inc.flavor(flavor)
        matrices[k] = mat
    return IntegerChainComplex(n, step, ids, matrices)


def _pairing_matrices(entry: CatalogEntry, crit: CriticalSet,
                      field_pos: PseudoGradientField, base_seed: int,
                      tol: Tolerances) -> tuple[dict[int, PairingReport], int | None]:
    n = entry.chart.dim
    gens_d = crit.generators("D")
    gens_n = crit.generators("N")
    out: dict[int, PairingReport] = {}
    used_seed: int | None = None
    for k in range(n + 1):
        rows = tuple(p.id for p in gens_d[k])
        cols = tuple(p.id for p in gens_n[n - k])
        if 2 * (n - k) != n:
            out[k] = PairingReport(k, rows, cols, None,
                                   reason="complementary-dimension precondition fails")
            continue
        if not rows or not cols:
            out[k] = PairingReport(k, rows, cols, tuple(() for _ in rows))
            continue
        matrix = None
        last: Exception | None = None
        for seed in _retry_seeds(base_seed, tol):
            field_neg = build_adapted(entry.field, entry.chart, crit, entry.metric,
                                      for_negative=True, perturb_seed=seed, tol=tol)
            try:
                matrix = tuple(
                    tuple(intersection_pairing(field_neg, field_pos,
                                               crit.by_id(pid), crit.by_id(qid), tol)
                          for qid in cols)
                    for pid in rows)
                used_seed = seed
                break
            except NonTransverse as exc:
                last = exc
        if matrix is None:
            raise last  # type: ignore[misc]
        out[k] = PairingReport(k, rows, cols, matrix)
    return out, used_seed


def build_package(entry: CatalogEntry, seed: int = 0,
                  tol: Tolerances = DEFAULT) -> MorsePackage:
    """Run the whole construction for one catalog entry."""
    crit = find_critical_set(entry.field, entry.chart, entry.metric, tol)
    field_pos, inc_pos = _build_side(entry, crit, False, seed, tol)
    field_neg, inc_neg = _build_side(entry, crit, True, seed, tol)

    complexes: dict[str, IntegerChainComplex] = {}
    homology: dict[str, HomologyResult] = {}
    for side, table in (("N", inc_pos), ("D", inc_neg)):
        for flavor in FLAVORS:
            key = complex_key(side, flavor)
            cx = assemble_complex(crit, side, flavor, table)
            complexes[key] = cx
            homology[key] = cx.homology()
    complexes["D_dual"] = complexes[complex_key("D", "untwisted")].transpose_dual()
    homology["D_dual"] = complexes["D_dual"].homology()

    counts = crit.counts()
    n = entry.chart.dim
    polys = {
        "morse_n": IntPolynomial(tuple(c + nn for c, nn, _ in counts)),
        "morse_d": IntPolynomial(tuple(c + d for c, _, d in counts)),
        "poincare": IntPolynomial(entry.h_abs.betti),
        "poincare_rel": IntPolynomial(entry.h_rel_co_or.betti),
    }
    polys["q_n"] = morse_inequality_quotient(polys["morse_n"], polys["poincare"])
    polys["q_d"] = morse_inequality_quotient(polys["morse_d"], polys["poincare_rel"])
    double_report = double_manifold_check(
        counts, polys["poincare"], IntPolynomial(entry.h_rel_co.betti),
        orientable=entry.orientable)

    pairing, pairing_seed = _pairing_matrices(entry, crit, field_pos, seed, tol)

    checks = _collect_checks(entry, crit, field_pos, field_neg, complexes,
                             homology, polys, double_report, pairing)
    return MorsePackage(
        entry=entry, seed=seed, crit=crit, field_pos=field_pos,
        field_neg=field_neg, incidences={"N": inc_pos, "D": inc_neg},
        complexes=complexes, homology=homology, polynomials=polys,
        double_report=double_report, pairing=pairing, pairing_seed=pairing_seed,
        checks=checks,
    )


def _collect_checks(entry, crit, field_pos, field_neg, complexes, homology,
                    polys, double_report, pairing) -> list[CheckRecord]:
    refs = entry.references()
    named_targets = [(complex_key(side, flavor), target)
                     for (side, flavor), target in COMPLEX_TARGETS.items()]
    named_targets.append(("D_dual", DUAL_TARGET))
    checks = []
    for name, target in named_targets:
        got = homology[name]
        ref = refs[target]
        ok = got.matches(ref.betti, ref.torsion)
        checks.append(CheckRecord(f"homology:{name}={target}", ok,
                                  f"got {got.as_dict()}, want {ref.as_dict()}"))
    for name, cx in complexes.items():
        checks.append(CheckRecord(f"square_zero:{name}", True, "verified at build"))
    for label, fld in (("descent", field_pos), ("ascent", field_neg)):
        cert = fld.certificate
        checks.append(CheckRecord(f"certificate:{label}", cert.passed,
                                  f"margins {cert.descent_margin:.3e}, "
                                  f"{cert.inward_margin:.3e}"))
    checks.append(CheckRecord(
        "euler_characteristic",
        crit.euler_characteristic() == entry.chi,
        f"counts give {crit.euler_characteristic()}, reference {entry.chi}"))
    checks.append(CheckRecord(
        "morse_quotient_n", all(c >= 0 for c in polys["q_n"].coeffs),
        f"q_n = {polys['q_n'].as_list()}"))
    checks.append(CheckRecord(
        "morse_quotient_d", all(c >= 0 for c in polys["q_d"].coeffs),
        f"q_d = {polys['q_d'].as_list()}"))
    checks.append(CheckRecord(
        "duality_symmetry",
        duality_symmetry_check(polys["poincare"], polys["poincare_rel"],
                               entry.chart.dim),
        "rank-level coefficient reversal"))
    checks.append(CheckRecord(
        "double_manifold", double_report.additivity_ok and
        (not double_report.asserted or double_report.quotient is not None
         and all(c >= 0 for c in double_report.quotient.coeffs)),
        f"{double_report.as_dict()}"))
    for k, rep in pairing.items():
        det = rep.determinant()
        if det is None:
            continue
        ref_rel = entry.h_rel_or.betti
        ref_abs = entry.h_abs.betti
        n = entry.chart.dim
        both_z = (ref_rel[k] == 1 and not entry.h_rel_or.torsion[k]
                  and ref_abs[n - k] == 1 and not entry.h_abs.torsion[n - k]
                  and len(rep.rows) == 1)
        if both_z:
            checks.append(CheckRecord(
                f"pairing_unimodular:deg{k}", abs(det) == 1,
                f"matrix {rep.matrix}"))
    return checks


# ---------------------------------------------------------------------------
# seed invariance


@dataclass(frozen=True)
class InvarianceReport:
    seeds: tuple[int, ...]
    homology: dict[int, dict[str, HomologyResult]]
    passed: bool


def homologies_for_seed(entry: CatalogEntry, seed: int,
                        tol: Tolerances = DEFAULT,
                        crit: CriticalSet | None = None) -> dict[str, HomologyResult]:
    if crit is None:
        crit = find_critical_set(entry.field, entry.chart, entry.metric, tol)
    out = {}
    for side, for_negative in (("N", False), ("D", True)):
        _, table = _build_side(entry, crit, for_negative, seed, tol)
        for flavor in FLAVORS:
            cx = assemble_complex(crit, side, flavor, table)
            out[complex_key(side, flavor)] = cx.homology()
    return out


def assert_identical_homology(per_seed: dict[int, dict[str, HomologyResult]]) -> None:
    seeds = sorted(per_seed)
    base = per_seed[seeds[0]]
    for s in seeds[1:]:
        for key, res in per_seed[s].items():
            if not res.matches(base[key].betti, base[key].torsion):
                raise InvarianceFailure(
                    f"seed {s} gives {res.as_dict()} for {key}, "
                    f"seed {seeds[0]} gave {base[key].as_dict()}")


def invariance_check(entry: CatalogEntry, seeds=(1, 2, 3),
                     tol: Tolerances = DEFAULT) -> InvarianceReport:
    """Rebuild the fields with independently seeded perturbations and compare."""
    if len(seeds) < 2:
        raise ValueError("need at least two seeds")
    crit = find_critical_set(entry.field, entry.chart, entry.metric, tol)
    per_seed = {s: homologies_for_seed(entry, s, tol, crit) for s in seeds}
    assert_identical_homology(per_seed)
    return InvarianceReport(tuple(seeds), per_seed, True)
