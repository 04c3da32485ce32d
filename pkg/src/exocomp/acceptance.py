"""End-to-end acceptance checks with pinned seeds and runtime budgets.

Each criterion is a self-contained function that regenerates its corpus
from the given seed, so running the suite twice with the same seed must
produce byte-identical reports; the final criterion checks exactly that.
Wall-clock numbers never enter the report (they would break the byte
comparison); they ride along on the result objects for the test suite to
check against the budgets.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import (
    __version__,
    adiabatic,
    blackbox,
    bounds,
    ctc,
    hiddenvar,
    nonlinear,
    postselect,
    steiner,
)
from .instances import (
    CnfFormula,
    QbfFormula,
    brute_force_count,
    brute_force_isomorphic,
    brute_force_qbf,
    brute_force_sat,
    compile_qbf_machine,
    random_3sat,
    random_graph_pair,
    run_machine,
)
from .rng import spawn

DEFAULT_SEED = 2026

# Satisfiable 6-variable instance with a unique solution, picked once by a
# seeded hunt and frozen so the adiabatic criterion is stable: overlap rises
# from 0.021 at T=1 to 0.999 at T=100 and the minimum gap is 0.32.
ADIABATIC_DEMO_CLAUSES = (
    (-5, -6, -3), (3, 4, -6), (3, -5, -4), (-3, -1, -4), (-1, -4, 3),
    (-3, -5, 1), (-5, -6, 4), (-5, 6, 4), (6, 1, -4), (6, -5, 2),
    (1, 5, -4), (2, 6, -3), (1, 5, 3), (5, 1, 6), (-3, -6, 5),
    (-1, 6, -2), (-5, -4, 2), (-3, 1, -2),
)


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    name: str
    passed: bool
    expected: str
    measured: dict
    runtime_budget_s: float | None
    runtime_s: float


def _all_clauses(num_vars: int) -> list[tuple[int, int, int]]:
    """Every 3-literal clause on 3 distinct variables out of num_vars."""
    from itertools import combinations, product

    out = []
    for trio in combinations(range(1, num_vars + 1), 3):
        for signs in product((1, -1), repeat=3):
            out.append(tuple(v * s for v, s in zip(trio, signs)))
    return out


def _criterion_1(seed: int, shared: dict) -> tuple[bool, str, dict]:
    disagreements = 0
    total = 0
    min_branch = 1.0

    def check(formula: CnfFormula, rng) -> None:
        nonlocal disagreements, total, min_branch
        got = nonlinear.detect_satisfiable(formula, rng)
        want = brute_force_sat(formula)
        total += 1
        if got != want:
            disagreements += 1
        min_branch = min(min_branch, nonlinear.zero_branch_probability(formula))

    idx = 0
    for n in (3, 4):
        clauses = _all_clauses(n)
        singles = [(c,) for c in clauses]
        from itertools import combinations

        pairs = list(combinations(clauses, 2))
        for clause_tuple in singles + pairs:
            check(CnfFormula(n, clause_tuple), spawn(seed, "c1-exhaustive", idx))
            idx += 1

    for i in range(500):
        rng = spawn(seed, "c1-random", i)
        n = 4 + i % 7
        m = int(rng.integers(2 * n, 5 * n + 1))
        check(random_3sat(n, m, rng), rng)

    shared["c1_min_branch_probability"] = min_branch
    passed = disagreements == 0
    return passed, "0 disagreements with enumeration", {
        "instances": total,
        "disagreements": disagreements,
    }


def _criterion_2(seed: int, shared: dict) -> tuple[bool, str, dict]:
    mismatches = 0
    for i in range(100):
        rng = spawn(seed, "c2", i)
        n = 4 + i % 7
        m = int(rng.integers(n, 4 * n + 1))
        formula = random_3sat(n, m, rng)
        if nonlinear.count_solutions(formula, rng) != brute_force_count(formula):
            mismatches += 1
    return mismatches == 0, "0 counting mismatches on 100 instances", {
        "instances": 100,
        "mismatches": mismatches,
    }


def _criterion_3(seed: int, shared: dict) -> tuple[bool, str, dict]:
    mismatches = 0
    for bits in range(256):
        table = [(bits >> i) & 1 == 1 for i in range(8)]
        qbf = QbfFormula(3, np.array(table, dtype=bool))
        if nonlinear.eval_qbf_nonlinear(qbf) != brute_force_qbf(qbf):
            mismatches += 1
    random_checked = 0
    for i in range(100):
        rng = spawn(seed, "c3", i)
        n = 1 + int(rng.integers(6))
        table = rng.random(2**n) < 0.5
        qbf = QbfFormula(n, table)
        if nonlinear.eval_qbf_nonlinear(qbf) != brute_force_qbf(qbf):
            mismatches += 1
        random_checked += 1
    return mismatches == 0, "0 QBF mismatches (256 exhaustive + 100 random)", {
        "exhaustive_tables": 256,
        "random_qbfs": random_checked,
        "mismatches": mismatches,
    }


def _criterion_4(seed: int, shared: dict) -> tuple[bool, str, dict]:
    min_branch = shared.get("c1_min_branch_probability")
    if min_branch is None:  # pragma: no cover - criteria run in order
        raise RuntimeError("criterion 1 must run first")
    passed = min_branch >= 0.25 - 1e-15
    return passed, "flagged-branch probability >= 0.25 on the whole corpus", {
        "min_branch_probability": float(min_branch),
    }


def _criterion_5(seed: int, shared: dict) -> tuple[bool, str, dict]:
    from .instances import OracleFunction

    worst_closed_form = 0.0
    for n in (2, 3, 4, 8, 12):
        for s in (1, 2):
            oracle = OracleFunction.from_marked(n, list(range(s)))
            for k in (0, 1, 2, 5, 20, 200):
                result = blackbox.grover(oracle, k)
                closed = blackbox.grover_success_probability(n, s, k)
                worst_closed_form = max(worst_closed_form, abs(result.success_probability - closed))

    scaling = blackbox.scaling_experiment(range(4, 17), trials=3, rng=spawn(seed, "c5-scaling"))
    exponent = scaling["fitted_exponent"]

    rng = spawn(seed, "c5-classical")
    n = 10
    big_n = 2**n
    total_queries = 0
    for _ in range(1000):
        marked = int(rng.integers(big_n))
        oracle = OracleFunction.from_marked(n, [marked])
        total_queries += blackbox.classical_search(oracle, rng).queries_used
    mean_queries = total_queries / 1000
    expected_mean = (big_n + 1) / 2

    passed = (
        worst_closed_form <= 1e-9
        and 0.45 <= exponent <= 0.55
        and abs(mean_queries - expected_mean) <= 0.1 * expected_mean
    )
    return passed, "closed form within 1e-9; exponent in [0.45, 0.55]; classical mean within 10%", {
        "worst_closed_form_error": float(worst_closed_form),
        "fitted_exponent": float(exponent),
        "classical_mean_queries": float(mean_queries),
        "classical_expected_mean": float(expected_mean),
    }


def _criterion_6(seed: int, shared: dict) -> tuple[bool, str, dict]:
    formula = CnfFormula(6, ADIABATIC_DEMO_CLAUSES)
    h0, h1 = adiabatic.build_hamiltonians(formula)
    gap0 = adiabatic.spectral_gap(h0, h1, 0.0)
    scan = adiabatic.success_vs_T(formula, (1.0, 100.0))
    overlaps = {row[0]: row[1] for row in scan["rows"]}
    passed = (
        abs(gap0 - 1.0) <= 1e-9
        and overlaps[100.0] > overlaps[1.0]
        and overlaps[100.0] > 0.9
    )
    return passed, "overlap(T=100) > overlap(T=1) and > 0.9; gap(s=0) = 1 within 1e-9", {
        "gap_at_s0": float(gap0),
        "overlap_T1": float(overlaps[1.0]),
        "overlap_T100": float(overlaps[100.0]),
        "min_gap": float(scan["rows"][0][2]),
    }


def _criterion_7(seed: int, shared: dict) -> tuple[bool, str, dict]:
    false_positives = 0
    false_negatives = 0
    for i in range(200):
        rng = spawn(seed, "c7", i)
        want_iso = i % 2 == 0
        g, h = random_graph_pair(6, want_iso, rng)
        truth = brute_force_isomorphic(g, h)
        got = hiddenvar.decide_isomorphic(g, h, k=30, rng=rng)
        if got and not truth:
            false_positives += 1
        if truth and not got:
            false_negatives += 1
    bound = 2.0**-20
    passed = false_positives == 0 and false_negatives == 0
    return passed, "0 false positives; false-negative rate within 2^-20 + sampling error", {
        "pairs": 200,
        "false_positives": false_positives,
        "false_negatives": false_negatives,
        "false_negative_bound_per_pair": bound,
    }


def _criterion_8(seed: int, shared: dict) -> tuple[bool, str, dict]:
    failures = 0
    for i in range(200):
        rng = spawn(seed, "c8", i)
        n = 4 + i % 9
        m = int(rng.integers(2 * n, 5 * n + 1))
        formula = random_3sat(n, m, rng)
        want = brute_force_sat(formula)
        answer = ctc.solve_np_ctc(formula, rng, adversarial=i % 2 == 1)
        if want:
            if answer == ctc.UNSATISFIABLE or not formula.evaluate(answer):
                failures += 1
        elif answer != ctc.UNSATISFIABLE:
            failures += 1
    return failures == 0, "verdict and witness match enumeration under both cycle choices", {
        "instances": 200,
        "failures": failures,
    }


def _criterion_9(seed: int, shared: dict) -> tuple[bool, str, dict]:
    mismatches = 0
    bad_cycles = 0
    for bits in range(256):
        table = np.array([(bits >> i) & 1 == 1 for i in range(8)], dtype=bool)
        qbf = QbfFormula(3, table)
        machine = compile_qbf_machine(qbf)
        want = brute_force_qbf(qbf)
        rng = spawn(seed, "c9", bits)
        if ctc.solve_pspace_ctc(machine, rng) != want:
            mismatches += 1
        decomposition = ctc.cycle_decompose(ctc.build_pspace_table(machine))
        path_len = len(run_machine(machine))
        cycle_ok = (
            len(decomposition.cycles) == 1
            and len(decomposition.cycles[0]) == path_len
            and {v & 1 for v in decomposition.cycles[0]} == {1 if want else 0}
        )
        if not cycle_ok:
            bad_cycles += 1
    passed = mismatches == 0 and bad_cycles == 0
    return passed, "all 256 verdicts match; single verdict-carrying cycle of length T", {
        "machines": 256,
        "verdict_mismatches": mismatches,
        "bad_cycle_structures": bad_cycles,
    }


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _criterion_10(seed: int, shared: dict) -> tuple[bool, str, dict]:
    worst_residual = 0.0
    shapes = [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    for i in range(50):
        rng = spawn(seed, "c10", i)
        num_a, num_b = shapes[i % len(shapes)]
        u = _haar_unitary(2 ** (num_a + num_b), rng)
        fp = ctc.deutsch_fixed_point(u, num_a, num_b)
        worst_residual = max(worst_residual, fp.residual)

    not_gate = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    fp_not = ctc.deutsch_fixed_point(not_gate, 0, 1)
    not_error = float(np.abs(fp_not.rho.matrix - np.eye(2) / 2).max())
    diagonal = np.real(np.diag(fp_not.rho.matrix))
    diag_error = float(np.abs(diagonal - 0.5).max())

    passed = worst_residual <= 1e-8 and not_error <= 1e-9 and diag_error <= 1e-9
    return passed, "residual <= 1e-8 on 50 unitaries; NOT-gate fixed point I/2, diagonal (1/2, 1/2)", {
        "worst_residual": float(worst_residual),
        "not_gate_error": not_error,
        "not_gate_diagonal": [float(x) for x in diagonal],
    }


def _criterion_11(seed: int, shared: dict) -> tuple[bool, str, dict]:
    stays_zero = float(ctc.bacon_iterate(0.0, 10**6)[-1]) == 0.0

    trajectory = ctc.bacon_iterate(2.0**-20, 25)
    in_band = np.where((trajectory >= 1 / 3) & (trajectory <= 2 / 3))[0]
    iterations_to_band = int(in_band[0]) if len(in_band) else -1

    gate_gap = 0.0
    for p0 in (0.0, 2.0**-20, 0.1, 0.5, 0.9):
        scalar = ctc.bacon_iterate(p0, 30)
        gate = ctc.bacon_iterate_gate(p0, 30)
        gate_gap = max(gate_gap, float(np.abs(scalar - gate).max()))

    mismatches = 0
    for i in range(100):
        rng = spawn(seed, "c11", i)
        n = 4 + i % 7
        m = int(rng.integers(2 * n, 5 * n + 1))
        formula = random_3sat(n, m, rng)
        if ctc.bacon_detect(formula, rng) != brute_force_sat(formula):
            mismatches += 1

    passed = (
        stays_zero
        and 0 <= iterations_to_band <= 25
        and gate_gap <= 1e-12
        and mismatches == 0
    )
    return passed, "0 stays 0 for 1e6 steps; 2^-20 reaches [1/3,2/3] within 25; gate = scalar within 1e-12", {
        "zero_stays_zero": stays_zero,
        "iterations_to_band": iterations_to_band,
        "gate_vs_scalar_gap": gate_gap,
        "detect_mismatches": mismatches,
    }


def _criterion_12(seed: int, shared: dict) -> tuple[bool, str, dict]:
    verdict_failures = 0
    unverified_witnesses = 0
    worst_survival_error = 0.0
    for i in range(200):
        rng = spawn(seed, "c12", i)
        n = 8 + i % 7
        rich = i % 10 != 9
        m = int(rng.integers(2 * n, 3 * n + 1)) if rich else int(rng.integers(5 * n, 6 * n))
        formula = random_3sat(n, m, rng)
        s = brute_force_count(formula)
        closed = 2.0 ** (-2 * n) + (1 - 2.0 ** (-2 * n)) * s / 2.0**n
        worst_survival_error = max(
            worst_survival_error, abs(postselect.survival_probability(formula) - closed)
        )
        answer = postselect.anthropic_3sat(formula, rng)
        if s > 0:
            if answer == postselect.PROBABLY_UNSAT or not formula.evaluate(answer):
                unverified_witnesses += 1
        elif answer != postselect.PROBABLY_UNSAT:
            verdict_failures += 1

    unique = []
    hunt = 0
    while len(unique) < 3:
        rng = spawn(seed, "c12-unique", hunt)
        formula = random_3sat(8, 34, rng)
        if brute_force_count(formula) == 1:
            unique.append(formula)
        hunt += 1

    p = 2.0**-8
    sigma = math.sqrt(p * (1 - p) / 1e5)
    worst_error_rate = 0.0
    for j, formula in enumerate(unique):
        trials = postselect.anthropic_trials(formula, 100000, spawn(seed, "c12-trials", j))
        worst_error_rate = max(worst_error_rate, trials["hedge_count"] / 100000)

    passed = (
        verdict_failures == 0
        and unverified_witnesses == 0
        and worst_survival_error <= 1e-12
        and worst_error_rate <= p + 3 * sigma
    )
    return passed, "all witnesses verify; survival exact to 1e-12; error rate <= 2^-8 + 3 sigma", {
        "instances": 200,
        "verdict_failures": verdict_failures,
        "unverified_witnesses": unverified_witnesses,
        "worst_survival_error": worst_survival_error,
        "worst_error_rate": worst_error_rate,
        "error_rate_bound": p + 3 * sigma,
    }


def _criterion_13(seed: int, shared: dict) -> tuple[bool, str, dict]:
    tri = steiner.SteinerInstance(((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)))
    tri_tree = steiner.exact_steiner(tri)
    tri_error = abs(tri_tree.total_length - math.sqrt(3))

    demo_tree = steiner.exact_steiner(steiner.demo_instance())
    targets = ((0.24, 0.19), (0.80, 0.26))
    vertex_misses = []
    for tx, ty in targets:
        best = min(math.hypot(sx - tx, sy - ty) for sx, sy in demo_tree.steiner_points)
        vertex_misses.append(best)

    corpus = [tri, steiner.demo_instance()]
    for i, size in enumerate((3, 4, 4, 5, 5, 6, 6, 7)):
        rng = spawn(seed, "c13", i)
        corpus.append(steiner.SteinerInstance(tuple(map(tuple, rng.random((size, 2))))))

    violations = 0
    mst_breaches = 0
    for instance in corpus:
        tree = steiner.exact_steiner(instance)
        if steiner.validate_tree(tree):
            violations += 1
        if tree.total_length > steiner.mst_length(instance) + 1e-9:
            mst_breaches += 1

    passed = (
        tri_error <= 1e-6
        and max(vertex_misses) < 0.01
        and violations == 0
        and mst_breaches == 0
    )
    return passed, "demo vertices within 0.01; triangle sqrt(3) within 1e-6; exact <= MST; no violations", {
        "triangle_error": float(tri_error),
        "demo_vertex_misses": [float(v) for v in vertex_misses],
        "corpus_size": len(corpus),
        "validation_violations": violations,
        "mst_breaches": mst_breaches,
    }


def _criterion_14(seed: int, shared: dict) -> tuple[bool, str, dict]:
    square = steiner.SteinerInstance(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    optimum = steiner.exact_steiner(square).total_length
    wrong_pairing = steiner.FilmTopology(
        np.array([[0.45, 0.5], [0.55, 0.5]]),
        ((0, 4), (2, 4), (1, 5), (3, 5), (4, 5)),
    )
    film = steiner.relax_film(square, topology=wrong_pairing)
    local_gap = film.energy - optimum

    monotone_failures = 0

    def monotone(history) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    if not monotone(film.history):
        monotone_failures += 1

    demo = steiner.demo_instance()
    demo_optimum = steiner.exact_steiner(demo).total_length
    energies = set()
    below_optimum = 0
    for i in range(50):
        run = steiner.relax_film(demo, rng=spawn(seed, "c14", i))
        energies.add(round(run.energy, 6))
        if not monotone(run.history):
            monotone_failures += 1
        if run.energy < demo_optimum - 1e-9:
            below_optimum += 1

    passed = (
        local_gap >= 0.01
        and monotone_failures == 0
        and len(energies) >= 2
        and below_optimum == 0
    )
    return passed, "wrong pairing lands >= optimum + 0.01; monotone histories; >= 2 distinct energies", {
        "local_optimum_gap": float(local_gap),
        "distinct_energies": len(energies),
        "monotone_failures": monotone_failures,
        "runs_below_optimum": below_optimum,
    }


def _criterion_15(seed: int, shared: dict) -> tuple[bool, str, dict]:
    lp = bounds.planck_length()
    tp = bounds.planck_time()
    lp_error = abs(lp - 1.62e-35) / 1.62e-35
    tp_error = abs(tp - 5.39e-44) / 5.39e-44
    holo = bounds.holographic_bits(1.0)

    ratios = 2.0 ** np.arange(5, 21)
    one_minus_v = 1 - np.array([bounds.speed_for_dilation(r) for r in ratios])
    slope = float(np.polyfit(np.log(ratios), np.log(one_minus_v), 1)[0])

    passed = (
        lp_error <= 0.005
        and tp_error <= 0.005
        and holo == 1.4e69
        and abs(slope + 2.0) <= 0.01 * 2.0
    )
    return passed, "Planck scales within 0.5%; holographic bound pinned; dilation slope -2 within 1%", {
        "planck_length_m": lp,
        "planck_length_rel_error": lp_error,
        "planck_time_s": tp,
        "planck_time_rel_error": tp_error,
        "holographic_bits_per_m2": holo,
        "dilation_loglog_slope": slope,
    }


_CRITERIA: list[tuple[int, str, float | None, Callable]] = [
    (1, "nonlinear detection agrees with enumeration", 60.0, _criterion_1),
    (2, "nonlinear counting is exact", 120.0, _criterion_2),
    (3, "nonlinear qbf evaluation is exact", 120.0, _criterion_3),
    (4, "flagged branch keeps probability at least one quarter", None, _criterion_4),
    (5, "grover closed form, scaling exponent, classical baseline", 90.0, _criterion_5),
    (6, "adiabatic overlap grows with total time", 120.0, _criterion_6),
    (7, "hidden-variable graph isomorphism agrees with brute force", 60.0, _criterion_7),
    (8, "ctc np verdicts and witnesses", 60.0, _criterion_8),
    (9, "ctc pspace single-cycle verdicts", 60.0, _criterion_9),
    (10, "deutsch fixed points are causally consistent", 60.0, _criterion_10),
    (11, "bacon amplification and detection", 30.0, _criterion_11),
    (12, "postselected 3sat witnesses and survival", 120.0, _criterion_12),
    (13, "steiner exact solver geometry", 60.0, _criterion_13),
    (14, "soap-film relaxation local optima", 60.0, _criterion_14),
    (15, "physical bounds calculators", 5.0, _criterion_15),
]


def run_criteria(seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    """Criteria 1 through 15, freshly computed from the seed."""
    shared: dict = {}
    results = []
    for cid, name, budget, fn in _CRITERIA:
        start = time.perf_counter()
        passed, expected, measured = fn(seed, shared)
        elapsed = time.perf_counter() - start
        results.append(CriterionResult(cid, name, passed, expected, measured, budget, elapsed))
    return results


def _payload(results: list[CriterionResult], seed: int) -> dict:
    return {
        "version": __version__,
        "seed": seed,
        "all_passed": all(r.passed for r in results),
        "criteria": [
            {
                "id": r.cid,
                "name": r.name,
                "passed": r.passed,
                "expected": r.expected,
                "measured": r.measured,
                "runtime_budget_s": r.runtime_budget_s,
            }
            for r in results
        ],
    }


def report_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run_all(seed: int = DEFAULT_SEED) -> tuple[dict, list[CriterionResult]]:
    """The full suite: criteria 1-15 twice, plus the determinism criterion.

    Returns the report payload (16 entries) and the first run's results
    with their runtimes attached.
    """
    start = time.perf_counter()
    first = run_criteria(seed)
    second = run_criteria(seed)
    elapsed = time.perf_counter() - start
    bytes_1 = report_json(_payload(first, seed)).encode()
    bytes_2 = report_json(_payload(second, seed)).encode()
    identical = bytes_1 == bytes_2
    c16 = CriterionResult(
        16,
        "acceptance report is deterministic",
        identical,
        "two full runs with one seed serialize to identical bytes",
        {
            "first_sha256": hashlib.sha256(bytes_1).hexdigest(),
            "second_sha256": hashlib.sha256(bytes_2).hexdigest(),
            "identical": identical,
        },
        None,
        elapsed,
    )
    results = first + [c16]
    return _payload(results, seed), results
