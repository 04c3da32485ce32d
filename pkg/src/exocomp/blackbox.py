"""Black-box search: Grover iteration versus classical sequential query.

The oracle is charged exactly one query per application, quantum or
classical, so the query counts reported here are the honest complexity
measure. Grover's success probability after k iterations is
``sin^2((2k+1) theta)`` with ``theta = arcsin(sqrt(s/N))``; the simulation
reproduces that closed form to 1e-9, and the scaling experiment fits the
query exponent (about 1/2) against the classical mean of (N+1)/2 for a
single marked item.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .instances import OracleFunction


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search run; queries_used is an exact oracle-counter delta."""

    found_index: int | None
    queries_used: int
    success_probability: float

    def __post_init__(self) -> None:
        if self.queries_used < 0:
            raise ValueError("queries_used cannot be negative")
        if not 0.0 <= self.success_probability <= 1.0 + 1e-12:
            raise ValueError(f"success probability {self.success_probability} out of range")


def grover_success_probability(num_bits: int, marked: int, iterations: int) -> float:
    """Closed form sin^2((2k+1) arcsin sqrt(s/N)); the oracle for the simulator."""
    n_total = 2**num_bits
    if not 0 <= marked <= n_total:
        raise ValueError(f"marked count {marked} out of range")
    theta = np.arcsin(np.sqrt(marked / n_total))
    return float(np.sin((2 * iterations + 1) * theta) ** 2)


def _diffusion(state: qsim.PureState) -> qsim.PureState:
    """Inversion about the uniform state: 2|u><u| - I."""
    amps = state.amplitudes
    mean = amps.mean()
    return qsim.PureState(state.num_qubits, 2.0 * mean - amps)


def grover(oracle: OracleFunction, iterations: int) -> SearchResult:
    """Run k Grover iterations; one phase-flip oracle query per iteration.

    The success probability is the exact marked-item mass of the final
    state. found_index is the lexicographically smallest most-probable
    basis index (deterministic; no measurement randomness is consumed).
    """
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    if oracle.marked_count == 0:
        raise ValueError("grover requires at least one marked item")
    before = oracle.queries
    state = qsim.PureState.uniform(oracle.num_bits)
    for _ in range(iterations):
        state = oracle.phase_flip(state)
        state = _diffusion(state)
    probs = state.probabilities()
    success = float(probs[oracle.table].sum())
    found = int(np.argmax(probs))
    return SearchResult(
        found_index=found,
        queries_used=oracle.queries - before,
        success_probability=success,
    )


def classical_search(oracle: OracleFunction, rng: np.random.Generator) -> SearchResult:
    """Query a uniformly random order until a marked item appears.

    For a single marked item the expected query count is (N+1)/2. If no
    item is marked, all N queries are spent and found_index is None.
    """
    before = oracle.queries
    order = rng.permutation(2**oracle.num_bits)
    for x in order:
        if oracle.query(int(x)):
            return SearchResult(
                found_index=int(x),
                queries_used=oracle.queries - before,
                success_probability=1.0,
            )
    return SearchResult(
        found_index=None,
        queries_used=oracle.queries - before,
        success_probability=0.0,
    )


def quantum_queries_to_threshold(num_bits: int, threshold: float = 2.0 / 3.0) -> int:
    """Minimal k with closed-form success >= threshold for one marked item."""
    k = 0
    while grover_success_probability(num_bits, 1, k) < threshold:
        k += 1
    return k


def scaling_experiment(
    bit_range: range | list[int],
    trials: int,
    rng: np.random.Generator,
) -> dict:
    """Quantum-vs-classical query scaling for single-marked-item search.

    For each n in bit_range: the minimal Grover iteration count reaching
    success 2/3, and the mean classical query count over ``trials`` random
    marked positions. Returns rows (N, k_quantum, mean_queries_classical)
    plus the fitted log-log exponent of k_quantum against N.
    """
    bits = list(bit_range)
    if any(not 2 <= n <= 20 for n in bits):
        raise ValueError("bit sizes must lie in [2, 20]")
    if trials < 1:
        raise ValueError("trials must be positive")
    rows = []
    for n in bits:
        big_n = 2**n
        k_quantum = quantum_queries_to_threshold(n)
        total = 0
        for _ in range(trials):
            marked = int(rng.integers(big_n))
            oracle = OracleFunction.from_marked(n, [marked])
            total += classical_search(oracle, rng).queries_used
        rows.append((big_n, k_quantum, total / trials))
    logs_n = np.log([row[0] for row in rows])
    logs_k = np.log([row[1] for row in rows])
    exponent = float(np.polyfit(logs_n, logs_k, 1)[0])
    return {"rows": rows, "fitted_exponent": exponent}
