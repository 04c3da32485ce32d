"""Seeded experiment runner and acceptance-suite driver.

Every experiment is a named, parameterized, deterministic run: the same
name, params, and seed serialize to byte-identical JSON. Wall-clock time
is reported on stderr only, never inside the record, so records stay
comparable. CSV output exposes the row-oriented table of each experiment
for plotting; the JSON record carries the same rows plus summary metrics.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import Callable

import numpy as np

from . import (
    __version__,
    acceptance,
    adiabatic,
    blackbox,
    bounds,
    ctc,
    hiddenvar,
    nonlinear,
    postselect,
    steiner,
)
from .acceptance import ADIABATIC_DEMO_CLAUSES, DEFAULT_SEED
from .instances import (
    CnfFormula,
    OracleFunction,
    QbfFormula,
    brute_force_count,
    brute_force_isomorphic,
    brute_force_qbf,
    brute_force_sat,
    compile_qbf_machine,
    random_3sat,
    random_graph_pair,
)
from .rng import spawn


class UsageError(ValueError):
    """Bad experiment name or parameters; maps to exit code 2."""


def _coerce(value: str):
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def parse_params(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"parameter {pair!r} is not of the form key=value")
        key, _, value = pair.partition("=")
        out[key.strip()] = _coerce(value.strip())
    return out


def read_config(path: str) -> dict:
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if line:
                pairs.append(line)
    return parse_params(pairs)


# ---------------------------------------------------------------------------
# Experiments. Each runner: (params, seed) -> (metrics, rows).


def _run_detect(params: dict, seed: int):
    metrics = {"instances": params["instances"], "agreements": 0, "detected_satisfiable": 0}
    min_branch = 1.0
    rows = []
    for i in range(params["instances"]):
        rng = spawn(seed, "detect-nonlinear", i)
        formula = random_3sat(params["num_vars"], params["num_clauses"], rng)
        detected = nonlinear.detect_satisfiable(formula, rng)
        truth = brute_force_sat(formula)
        branch = nonlinear.zero_branch_probability(formula)
        min_branch = min(min_branch, branch)
        metrics["agreements"] += detected == truth
        metrics["detected_satisfiable"] += detected
        rows.append(
            {"index": i, "detected": detected, "brute_force": truth, "branch_probability": branch}
        )
    metrics["min_branch_probability"] = min_branch
    return metrics, rows


def _run_count(params: dict, seed: int):
    metrics = {"instances": params["instances"], "exact_matches": 0}
    rows = []
    for i in range(params["instances"]):
        rng = spawn(seed, "count-nonlinear", i)
        formula = random_3sat(params["num_vars"], params["num_clauses"], rng)
        counted = nonlinear.count_solutions(formula, rng)
        truth = brute_force_count(formula)
        metrics["exact_matches"] += counted == truth
        rows.append({"index": i, "counted": counted, "brute_force": truth})
    return metrics, rows


def _run_qbf(params: dict, seed: int):
    metrics = {"instances": params["instances"], "agreements": 0}
    rows = []
    for i in range(params["instances"]):
        rng = spawn(seed, "qbf-nonlinear", i)
        table = rng.random(2 ** params["num_vars"]) < 0.5
        qbf = QbfFormula(params["num_vars"], table)
        got = nonlinear.eval_qbf_nonlinear(qbf)
        want = brute_force_qbf(qbf)
        metrics["agreements"] += got == want
        rows.append({"index": i, "nonlinear": got, "brute_force": want})
    return metrics, rows


def _run_grover(params: dict, seed: int):
    result = blackbox.scaling_experiment(
        range(params["min_bits"], params["max_bits"] + 1),
        trials=params["trials"],
        rng=spawn(seed, "grover-scaling"),
    )
    rows = [
        {"n_items": n, "quantum_queries": k, "classical_mean_queries": c}
        for n, k, c in result["rows"]
    ]
    return {"fitted_exponent": result["fitted_exponent"]}, rows


def _run_adiabatic(params: dict, seed: int):
    formula = CnfFormula(6, ADIABATIC_DEMO_CLAUSES)
    times = params["total_times"]
    if isinstance(times, str):
        times = tuple(float(part) for part in times.split(","))
    else:
        times = (float(times),)
    scan = adiabatic.success_vs_T(formula, times)
    rows = [
        {"total_time": t, "ground_overlap": overlap, "min_gap": gap}
        for t, overlap, gap in scan["rows"]
    ]
    return {"min_gap": rows[0]["min_gap"], "final_overlap": rows[-1]["ground_overlap"]}, rows


def _run_gi(params: dict, seed: int):
    metrics = {"pairs": params["pairs"], "agreements": 0, "false_positives": 0, "false_negatives": 0}
    rows = []
    for i in range(params["pairs"]):
        rng = spawn(seed, "gi-hiddenvar", i)
        g, h = random_graph_pair(params["vertices"], i % 2 == 0, rng)
        truth = brute_force_isomorphic(g, h)
        decided = hiddenvar.decide_isomorphic(g, h, k=params["peeks"], rng=rng)
        metrics["agreements"] += decided == truth
        metrics["false_positives"] += decided and not truth
        metrics["false_negatives"] += truth and not decided
        rows.append({"index": i, "isomorphic": truth, "decided": decided})
    return metrics, rows


def _run_ctc_np(params: dict, seed: int):
    metrics = {"instances": params["instances"], "correct": 0}
    rows = []
    for i in range(params["instances"]):
        rng = spawn(seed, "ctc-np", i)
        n = 4 + i % (params["max_vars"] - 3)
        m = int(rng.integers(2 * n, 5 * n + 1))
        formula = random_3sat(n, m, rng)
        want = brute_force_sat(formula)
        answer = ctc.solve_np_ctc(formula, rng, adversarial=params["adversarial"])
        if want:
            correct = answer != ctc.UNSATISFIABLE and formula.evaluate(answer)
        else:
            correct = answer == ctc.UNSATISFIABLE
        metrics["correct"] += correct
        rows.append({"index": i, "num_vars": n, "satisfiable": want, "correct": correct})
    return metrics, rows


def _run_ctc_pspace(params: dict, seed: int):
    if params["num_vars"] != 3:
        raise UsageError("exhaustive run is defined for num_vars=3 (256 truth tables)")
    metrics = {"machines": 256, "verdict_matches": 0}
    rows = []
    for bits in range(256):
        table = np.array([(bits >> i) & 1 == 1 for i in range(8)], dtype=bool)
        machine = compile_qbf_machine(QbfFormula(3, table))
        want = brute_force_qbf(QbfFormula(3, table))
        got = ctc.solve_pspace_ctc(machine, spawn(seed, "ctc-pspace", bits))
        decomposition = ctc.cycle_decompose(ctc.build_pspace_table(machine))
        metrics["verdict_matches"] += got == want
        rows.append(
            {
                "table": bits,
                "verdict": got,
                "brute_force": want,
                "cycle_length": len(decomposition.cycles[0]),
            }
        )
    return metrics, rows


def _run_ctc_fixedpoint(params: dict, seed: int):
    num_a, num_b = params["num_a"], params["num_b"]
    dim = 2 ** (num_a + num_b)
    worst = 0.0
    rows = []
    for i in range(params["trials"]):
        rng = spawn(seed, "ctc-fixedpoint", i)
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(z)
        unitary = q * (np.diag(r) / np.abs(np.diag(r)))
        fp = ctc.deutsch_fixed_point(unitary, num_a, num_b)
        eigs = np.linalg.eigvalsh(fp.rho.matrix)
        eigs = eigs[eigs > 1e-15]
        entropy = float(-(eigs * np.log2(eigs)).sum())
        worst = max(worst, fp.residual)
        rows.append({"index": i, "residual": fp.residual, "entropy_bits": entropy})
    return {"trials": params["trials"], "worst_residual": worst}, rows


def _run_bacon(params: dict, seed: int):
    p0 = 2.0 ** -params["p0_exponent"]
    trajectory = ctc.bacon_iterate(p0, params["max_iterations"])
    rows = [{"iteration": i, "probability": float(p)} for i, p in enumerate(trajectory)]
    in_band = np.where((trajectory >= 1 / 3) & (trajectory <= 2 / 3))[0]
    mismatches = 0
    for i in range(params["instances"]):
        rng = spawn(seed, "bacon", i)
        n = 4 + i % 5
        formula = random_3sat(n, int(rng.integers(2 * n, 5 * n + 1)), rng)
        mismatches += ctc.bacon_detect(formula, rng) != brute_force_sat(formula)
    metrics = {
        "iterations_to_band": int(in_band[0]) if len(in_band) else -1,
        "detect_instances": params["instances"],
        "detect_mismatches": mismatches,
    }
    return metrics, rows


def _run_postselect(params: dict, seed: int):
    metrics = {"instances": params["instances"], "correct": 0, "worst_survival_error": 0.0}
    rows = []
    for i in range(params["instances"]):
        rng = spawn(seed, "postselect-3sat", i)
        n = 8 + i % (params["max_vars"] - 7)
        m = int(rng.integers(2 * n, 3 * n + 1))
        formula = random_3sat(n, m, rng)
        s = brute_force_count(formula)
        survival = postselect.survival_probability(formula)
        closed = 2.0 ** (-2 * n) + (1 - 2.0 ** (-2 * n)) * s / 2.0**n
        metrics["worst_survival_error"] = max(
            metrics["worst_survival_error"], abs(survival - closed)
        )
        answer = postselect.anthropic_3sat(formula, rng, mode=params["mode"])
        if s > 0:
            correct = answer != postselect.PROBABLY_UNSAT and formula.evaluate(answer)
        else:
            correct = answer == postselect.PROBABLY_UNSAT
        metrics["correct"] += correct
        rows.append(
            {
                "index": i,
                "num_vars": n,
                "solutions": s,
                "survival_probability": survival,
                "correct": correct,
            }
        )
    return metrics, rows


def _steiner_instance(params: dict) -> steiner.SteinerInstance:
    path = params.get("file", "")
    if path:
        with open(path, encoding="utf-8") as handle:
            return steiner.parse_orlib(handle.read())
    return steiner.demo_instance()


def _run_steiner_exact(params: dict, seed: int):
    instance = _steiner_instance(params)
    tree = steiner.exact_steiner(instance)
    violations = steiner.validate_tree(tree)
    rows = [
        {"vertex": i, "kind": "terminal", "x": x, "y": y}
        for i, (x, y) in enumerate(tree.terminals)
    ] + [
        {"vertex": len(tree.terminals) + i, "kind": "steiner", "x": x, "y": y}
        for i, (x, y) in enumerate(tree.steiner_points)
    ]
    metrics = {
        "total_length": tree.total_length,
        "mst_length": steiner.mst_length(instance),
        "steiner_points": len(tree.steiner_points),
        "violations": len(violations),
    }
    return metrics, rows


def _run_steiner_relax(params: dict, seed: int):
    instance = _steiner_instance(params)
    energies = set()
    monotone_failures = 0
    rows = []
    for i in range(params["seeds"]):
        film = steiner.relax_film(instance, rng=spawn(seed, "steiner-relax", i))
        monotone = all(b <= a + 1e-12 for a, b in zip(film.history, film.history[1:]))
        monotone_failures += not monotone
        energies.add(round(film.energy, 6))
        rows.append(
            {
                "seed_index": i,
                "energy": film.energy,
                "converged": film.converged,
                "descent_steps": len(film.history) - 1,
            }
        )
    metrics = {
        "runs": params["seeds"],
        "distinct_energies": len(energies),
        "best_energy": min(row["energy"] for row in rows),
        "monotone_failures": monotone_failures,
    }
    return metrics, rows


def _run_bounds(params: dict, seed: int):
    summary = bounds.bounds_summary(dilation_ratio=float(params["dilation_ratio"]))
    rows = [
        {"quantity": name, "value": q.value, "unit": q.unit} for name, q in sorted(summary.items())
    ]
    metrics = {name: q.value for name, q in summary.items()}
    return metrics, rows


EXPERIMENTS: dict[str, tuple[str, dict, Callable]] = {
    "detect-nonlinear": (
        "nonlinear gate satisfiability detection",
        {"instances": 50, "num_vars": 8, "num_clauses": 24},
        _run_detect,
    ),
    "count-nonlinear": (
        "nonlinear gate solution counting",
        {"instances": 20, "num_vars": 8, "num_clauses": 20},
        _run_count,
    ),
    "qbf-nonlinear": (
        "nonlinear gate quantified-formula evaluation",
        {"instances": 30, "num_vars": 5},
        _run_qbf,
    ),
    "grover-scaling": (
        "black-box search query scaling",
        {"min_bits": 4, "max_bits": 16, "trials": 5},
        _run_grover,
    ),
    "adiabatic-scan": (
        "ground-state overlap against total evolution time",
        {"total_times": "1,2,5,10,20,50,100"},
        _run_adiabatic,
    ),
    "gi-hiddenvar": (
        "hidden-variable sampling for graph isomorphism",
        {"pairs": 40, "vertices": 6, "peeks": 30},
        _run_gi,
    ),
    "ctc-np": (
        "stationary-distribution search over a self-consistent cycle",
        {"instances": 60, "max_vars": 10, "adversarial": False},
        _run_ctc_np,
    ),
    "ctc-pspace": (
        "history threading through a single verdict-carrying cycle",
        {"num_vars": 3},
        _run_ctc_pspace,
    ),
    "ctc-fixedpoint": (
        "maximum-entropy causally consistent channel states",
        {"trials": 20, "num_a": 1, "num_b": 2},
        _run_ctc_fixedpoint,
    ),
    "bacon": (
        "logistic amplification of an exponentially small bias",
        {"p0_exponent": 20, "max_iterations": 25, "instances": 40},
        _run_bacon,
    ),
    "postselect-3sat": (
        "postselected search with a hedge branch",
        {"instances": 60, "max_vars": 12, "mode": "exact"},
        _run_postselect,
    ),
    "steiner-exact": (
        "exact minimal trees by full-topology enumeration",
        {"file": ""},
        _run_steiner_exact,
    ),
    "steiner-relax": (
        "soap-film relaxation into local optima",
        {"seeds": 50, "file": ""},
        _run_steiner_relax,
    ),
    "bounds": (
        "relativistic and information-theoretic limits",
        {"dilation_ratio": 1024.0},
        _run_bounds,
    ),
}


def run_experiment(name: str, params: dict, seed: int) -> dict:
    """Execute one named experiment and build its result record."""
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}")
    topic, defaults, runner = EXPERIMENTS[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise UsageError(f"unknown parameters for {name}: {sorted(unknown)}")
    merged = {**defaults, **params}
    metrics, rows = runner(merged, seed)
    return {
        "experiment": name,
        "topic": topic,
        "params": merged,
        "seed": seed,
        "metrics": metrics,
        "rows": rows,
        "wall_time_s": None,
        "version": __version__,
    }


def record_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def record_csv(record: dict) -> str:
    rows = record["rows"]
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buffer.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exocomp", description="seeded experiments over the simulation lab"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (topic, _, _) in EXPERIMENTS.items():
        p = sub.add_parser(name, help=topic)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
        p.add_argument("--config", default=None, help="key=value file applied before --params")
    p = sub.add_parser("accept", help="run the full acceptance suite")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "accept":
        payload, results = acceptance.run_all(args.seed)
        for result in results:
            budget = "" if result.runtime_budget_s is None else f" (budget {result.runtime_budget_s:g}s)"
            status = "PASS" if result.passed else "FAIL"
            print(
                f"criterion {result.cid:2d} {status} {result.runtime_s:8.2f}s{budget}  {result.name}",
                file=sys.stderr,
            )
        _emit(acceptance.report_json(payload), args.out)
        return 0 if payload["all_passed"] else 1

    try:
        params = read_config(args.config) if args.config else {}
        params.update(parse_params(args.params))
        start = time.perf_counter()
        record = run_experiment(args.command, params, args.seed)
        elapsed = time.perf_counter() - start
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: {elapsed:.2f}s", file=sys.stderr)
    _emit(record_json(record) if args.format == "json" else record_csv(record), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
