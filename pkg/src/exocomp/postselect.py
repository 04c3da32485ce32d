"""Postselection as a computational primitive, and the anthropic 3SAT trick.

Conditioning on an unlikely-but-possible measurement outcome is modeled
exactly: :func:`postselect_run` renormalizes the Born distribution on the
flag-equals-1 slice of a state vector. No rejection sampling is involved,
so the survival probabilities carry no Monte Carlo error and can be
asserted to 1e-12.

The anthropic algorithm guesses a uniform assignment and survives only if
it satisfies the formula, hedged by a do-nothing branch of probability
2^-2n so that something always survives. Conditioned on survival, a
satisfiable formula hands over a witness with error probability at most
2^-n; an unsatisfiable one leaves only the hedge branch, hence the
deliberately modest verdict string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .instances import CnfFormula, index_assignment, satisfying_mask

MAX_ANTHROPIC_VARS = 16
PROBABLY_UNSAT = "probably unsatisfiable"


class ZeroPostselectionError(ValueError):
    """The conditioning outcome has probability zero, so conditioning is undefined."""


@dataclass(frozen=True)
class PostselectedOutcome:
    """Conditional Born distribution given flag = 1, plus the flag probability."""

    conditional_distribution: dict[int, float]
    flag_probability: float

    def __post_init__(self) -> None:
        total = sum(self.conditional_distribution.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"conditional probabilities sum to {total!r}, not 1")
        if not 0.0 <= self.flag_probability <= 1.0:
            raise ValueError(f"flag probability {self.flag_probability!r} outside [0, 1]")


def postselect_run(state: qsim.PureState, flag_qubit: int) -> PostselectedOutcome:
    """Exact distribution over the remaining qubits conditioned on flag = 1.

    Outcome keys are basis indices over the non-flag qubits, kept in their
    original order. Raises :class:`ZeroPostselectionError` when the flag
    can never read 1, since conditioning on a null event is undefined.
    """
    n = state.num_qubits
    if not 0 <= flag_qubit < n:
        raise ValueError(f"flag qubit {flag_qubit} out of range for {n} qubits")
    probs = state.probabilities().reshape([2] * n)
    flag_slice = np.moveaxis(probs, flag_qubit, -1)[..., 1].reshape(-1)
    flag_probability = float(flag_slice.sum())
    if flag_probability <= 0.0:
        raise ZeroPostselectionError("flag qubit is never 1; nothing survives postselection")
    conditional = {
        int(idx): float(p / flag_probability)
        for idx, p in enumerate(flag_slice)
        if p > 0.0
    }
    return PostselectedOutcome(conditional, flag_probability)


def build_anthropic_state(formula: CnfFormula) -> qsim.PureState:
    """State vector of the hedged guess-and-survive branching process.

    Layout: hedge qubit, then the n guess qubits, then the survival flag.
    The hedge branch (amplitude 2^-n, hence probability 2^-2n) does not
    guess and always survives; each guess branch carries the uniform share
    of the remaining weight and survives exactly when its assignment
    satisfies the formula.
    """
    n = formula.num_vars
    if n > MAX_ANTHROPIC_VARS:
        raise ValueError(f"at most {MAX_ANTHROPIC_VARS} variables supported")
    hedge_amp = 2.0**-n
    guess_amp = np.sqrt((1.0 - hedge_amp**2) / 2**n)
    amps = np.zeros(2 ** (n + 2), dtype=np.complex128)
    sat = satisfying_mask(formula)
    guesses = np.arange(2**n)
    amps[(guesses << 1) | sat] = guess_amp  # hedge bit 0
    amps[(1 << (n + 1)) | 1] = hedge_amp  # hedge bit 1, x = 0..0, flag 1
    return qsim.PureState(n + 2, amps)


def survival_probability(formula: CnfFormula) -> float:
    """Exact probability that a run survives postselection."""
    return postselect_run(build_anthropic_state(formula), formula.num_vars + 1).flag_probability


def anthropic_3sat(
    formula: CnfFormula, rng: np.random.Generator, mode: str = "exact"
) -> tuple[int, ...] | str:
    """One surviving run of the anthropic algorithm.

    ``mode="exact"`` samples the conditional distribution computed from
    the state vector; ``mode="rejection"`` actually replays the branching
    process until a run survives, which emulates what the desperate
    experimenter would go through. Both return a satisfying assignment or
    :data:`PROBABLY_UNSAT` when the hedge branch is the survivor.
    """
    n = formula.num_vars
    if mode == "exact":
        outcome = postselect_run(build_anthropic_state(formula), n + 1)
        keys = sorted(outcome.conditional_distribution)
        weights = np.array([outcome.conditional_distribution[k] for k in keys])
        drawn = keys[int(rng.choice(len(keys), p=weights / weights.sum()))]
    elif mode == "rejection":
        drawn = _rejection_run(formula, rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if drawn >> n:
        return PROBABLY_UNSAT
    return index_assignment(drawn, n)


def _rejection_run(formula: CnfFormula, rng: np.random.Generator, chunk: int = 65536) -> int:
    n = formula.num_vars
    hedge_prob = 2.0 ** (-2 * n)
    sat = satisfying_mask(formula)
    while True:
        hedged = rng.random(chunk) < hedge_prob
        guesses = rng.integers(0, 2**n, size=chunk)
        survived = hedged | sat[guesses]
        hits = np.nonzero(survived)[0]
        if hits.size:
            first = int(hits[0])
            return (1 << n) if hedged[first] else int(guesses[first])


def anthropic_trials(formula: CnfFormula, trials: int, rng: np.random.Generator) -> dict:
    """Tally many independent surviving runs of the exact sampler.

    Returns the hedge-branch count, a per-witness count dictionary, and
    the underlying flag probability; vectorized so that 10^5 trials cost
    one choice() call.
    """
    n = formula.num_vars
    outcome = postselect_run(build_anthropic_state(formula), n + 1)
    keys = sorted(outcome.conditional_distribution)
    weights = np.array([outcome.conditional_distribution[k] for k in keys])
    draws = rng.choice(len(keys), size=trials, p=weights / weights.sum())
    counts = np.bincount(draws, minlength=len(keys))
    witness_counts = {}
    hedge_count = 0
    for key, count in zip(keys, counts):
        if count == 0:
            continue
        if key >> n:
            hedge_count = int(count)
        else:
            witness_counts[index_assignment(key, n)] = int(count)
    return {
        "hedge_count": hedge_count,
        "witness_counts": witness_counts,
        "flag_probability": outcome.flag_probability,
    }
