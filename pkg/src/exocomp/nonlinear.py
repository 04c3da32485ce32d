"""Nonlinear single-qubit maps and the SAT / counting / QBF procedures built on them.

The model: write the conditional state of one qubit, for each fixed setting
of the other qubits, as ``cos(a)|0> + e^{i phi} sin(a)|1>`` with
``a in [0, pi/2]``. A nonlinear gate rewrites the angle ``a`` by a fixed
deterministic rule, preserving ``phi`` and each group's weight. Because the
rule acts on the actual amplitudes rather than linearly, a single marked
item hiding in an exponentially small angle can be amplified to visibility
in linearly many applications; the same mechanism magnifies any spurious
epsilon of amplitude, which is why these gates stay in the lab.

Angle rules implemented:

* ``angle_double``: a -> min(2a, pi/2).
* ``affine_angle_remap(a_lo, a_hi)``: treat the angle as encoding a count
  ``s`` via ``tan(a) = s / (total - s)`` and send ``s`` to
  ``clamp((s - a_lo)/(a_hi - a_lo)) * pi/2``.

The two-qubit chain gates ``nonlinear_and`` / ``nonlinear_or`` act on a
(control, flag) pair: grouping basis states by all bits except the control
and the flag, each group must hold exactly one flag value per control
branch; both flags are rewritten to their AND (resp. OR) and the group's
weight is split evenly between the two surviving basis states. On the
states prepared by ``eval_qbf_nonlinear`` this computes one quantifier per
gate, innermost first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .instances import (
    EXISTS,
    CnfFormula,
    QbfFormula,
    quantifier,
    satisfying_mask,
)
from .rng import spawn

ROUNDS = 64
VOTE_SAMPLES = 64
_OCCUPANCY_TOL = 1e-12

ANGLE_DOUBLE = "angle_double"
NONLINEAR_AND = "nonlinear_and"
NONLINEAR_OR = "nonlinear_or"
AFFINE_ANGLE_REMAP = "affine_angle_remap"
GATE_KINDS = (ANGLE_DOUBLE, NONLINEAR_AND, NONLINEAR_OR, AFFINE_ANGLE_REMAP)


class MalformedChainStateError(ValueError):
    """A chain gate met a group that is not a two-branch chain state."""


@dataclass(frozen=True)
class NonlinearGateSpec:
    """Descriptor for one nonlinear gate; ``a``/``b`` only for the remap."""

    kind: str
    a: int | None = None
    b: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown nonlinear gate kind {self.kind!r}")
        if self.kind == AFFINE_ANGLE_REMAP:
            if self.a is None or self.b is None:
                raise ValueError("affine_angle_remap requires parameters a and b")
            if not 0 <= self.a < self.b:
                raise ValueError(f"remap needs 0 <= a < b, got a={self.a}, b={self.b}")
        elif self.a is not None or self.b is not None:
            raise ValueError(f"gate kind {self.kind!r} takes no parameters")


def apply_nonlinear(
    state: qsim.PureState,
    spec: NonlinearGateSpec,
    qubit: int,
    flag: int | None = None,
) -> qsim.PureState:
    """Dispatch a :class:`NonlinearGateSpec`.

    For the chain gates ``qubit`` is the control and ``flag`` the flag
    qubit. For the remap, the count scale is inferred from the state: the
    flag is one qubit riding on an n-qubit register, so total = 2^(n_qubits-1).
    """
    if spec.kind == ANGLE_DOUBLE:
        return angle_double(state, qubit)
    if spec.kind == AFFINE_ANGLE_REMAP:
        assert spec.a is not None and spec.b is not None
        return affine_angle_remap(state, qubit, spec.a, spec.b, 2 ** (state.num_qubits - 1))
    if flag is None:
        raise ValueError(f"{spec.kind} requires a flag qubit")
    if spec.kind == NONLINEAR_AND:
        return nonlinear_and(state, qubit, flag)
    return nonlinear_or(state, qubit, flag)


# ---------------------------------------------------------------------------
# Single-qubit angle rewrites


def _split_target_last(state: qsim.PureState, qubit: int) -> np.ndarray:
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n}-qubit state")
    psi = state.amplitudes.reshape((2,) * n)
    return np.moveaxis(psi, qubit, n - 1).reshape(-1, 2).copy()


def _reassemble(groups: np.ndarray, num_qubits: int, qubit: int) -> qsim.PureState:
    n = num_qubits
    psi = groups.reshape((2,) * (n - 1) + (2,))
    psi = np.moveaxis(psi, n - 1, qubit).reshape(2**n)
    norm = np.linalg.norm(psi)
    return qsim.PureState(n, psi / norm)


def _rewrite_angles(state: qsim.PureState, qubit: int, rule) -> qsim.PureState:
    """Apply ``new_alpha = rule(alpha)`` per other-qubit group, preserving phases."""
    groups = _split_target_last(state, qubit)
    c0, c1 = groups[:, 0], groups[:, 1]
    m0, m1 = np.abs(c0), np.abs(c1)
    weight = np.hypot(m0, m1)
    alpha = np.arctan2(m1, m0)
    new_alpha = rule(alpha)
    unit0 = np.where(m0 > 0, c0 / np.where(m0 > 0, m0, 1.0), 1.0)
    unit1 = np.where(m1 > 0, c1 / np.where(m1 > 0, m1, 1.0), 1.0)
    groups[:, 0] = weight * np.cos(new_alpha) * unit0
    groups[:, 1] = weight * np.sin(new_alpha) * unit1
    return _reassemble(groups, state.num_qubits, qubit)


def angle_double(state: qsim.PureState, qubit: int) -> qsim.PureState:
    """Per group: alpha -> min(2 alpha, pi/2), relative phase untouched."""
    return _rewrite_angles(state, qubit, lambda a: np.minimum(2.0 * a, np.pi / 2))


def affine_angle_remap(
    state: qsim.PureState, qubit: int, a: int, b: int, total: int
) -> qsim.PureState:
    """Per group: decode count s from the angle, send s to clamp((s-a)/(b-a))*pi/2.

    The decode inverts tan(alpha) = s/(total - s) as
    s = total*sin(alpha)/(sin(alpha)+cos(alpha)), which is smooth on
    [0, pi/2] and hits s = total exactly at alpha = pi/2.
    """
    if not 0 <= a < b <= total:
        raise ValueError(f"remap needs 0 <= a < b <= total, got a={a}, b={b}, total={total}")

    def rule(alpha: np.ndarray) -> np.ndarray:
        s = total * np.sin(alpha) / (np.sin(alpha) + np.cos(alpha))
        frac = np.clip((s - a) / (b - a), 0.0, 1.0)
        return frac * (np.pi / 2)

    return _rewrite_angles(state, qubit, rule)


# ---------------------------------------------------------------------------
# Two-qubit chain gates


def _chain_rewrite(
    state: qsim.PureState, control: int, flag: int, combine
) -> qsim.PureState:
    n = state.num_qubits
    if control == flag:
        raise ValueError("control and flag qubits must differ")
    for q in (control, flag):
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    if n < 2:
        raise ValueError("chain gates need at least two qubits")
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, (control, flag), (n - 2, n - 1))
    blocks = psi.reshape(-1, 2, 2).copy()

    occupied = np.abs(blocks) > _OCCUPANCY_TOL
    branch_occupied = occupied.any(axis=2)
    nonempty = branch_occupied.any(axis=1)
    flag_superposed = occupied.all(axis=2).any(axis=1)
    if (flag_superposed & nonempty).any():
        g = int(np.nonzero(flag_superposed & nonempty)[0][0])
        raise MalformedChainStateError(
            f"group {g}: flag is in superposition within a single control branch"
        )
    single_branch = nonempty & (branch_occupied[:, 0] ^ branch_occupied[:, 1])
    if single_branch.any():
        g = int(np.nonzero(single_branch)[0][0])
        raise MalformedChainStateError(
            f"group {g}: only one control branch is occupied; chain states need both"
        )

    valid = nonempty
    f0 = occupied[:, 0, 1].astype(int)
    f1 = occupied[:, 1, 1].astype(int)
    out = combine(f0, f1)
    rows = np.arange(blocks.shape[0])
    amp0 = blocks[rows, 0, f0]
    amp1 = blocks[rows, 1, f1]
    unit0 = np.where(valid, amp0 / np.where(valid, np.abs(amp0), 1.0), 0.0)
    unit1 = np.where(valid, amp1 / np.where(valid, np.abs(amp1), 1.0), 0.0)
    weight = np.sqrt((np.abs(blocks) ** 2).sum(axis=(1, 2)))

    blocks[:] = 0.0
    half = weight / np.sqrt(2.0)
    blocks[rows, 0, out] = half * unit0
    blocks[rows, 1, out] = half * unit1

    psi = blocks.reshape((2,) * n)
    psi = np.moveaxis(psi, (n - 2, n - 1), (control, flag)).reshape(2**n)
    return qsim.PureState(n, psi / np.linalg.norm(psi))


def nonlinear_and(state: qsim.PureState, control: int, flag: int) -> qsim.PureState:
    """Rewrite both branch flags to f0 AND f1 within each chain group."""
    return _chain_rewrite(state, control, flag, lambda f0, f1: f0 & f1)


def nonlinear_or(state: qsim.PureState, control: int, flag: int) -> qsim.PureState:
    """Rewrite both branch flags to f0 OR f1 within each chain group."""
    return _chain_rewrite(state, control, flag, lambda f0, f1: f0 | f1)


# ---------------------------------------------------------------------------
# Satisfiability detection


def _post_oracle_state(formula: CnfFormula) -> qsim.PureState:
    """Uniform superposition |x>|0>, then one oracle query writing f(x) to the flag."""
    n = formula.num_vars
    amps = np.zeros(2 ** (n + 1), dtype=np.complex128)
    amps[0::2] = 2 ** (-n / 2)
    flagged = np.arange(2**n) * 2 + satisfying_mask(formula).astype(np.int64)
    out = np.zeros_like(amps)
    out[flagged] = amps[0::2]
    return qsim.PureState(n + 1, out)


def _hadamard_first_register(state: qsim.PureState, n: int) -> qsim.PureState:
    for q in range(n):
        state = qsim.apply_gate(state, qsim.H, [q])
    return state


def _prepare_flag_state(
    formula: CnfFormula, rng: np.random.Generator, max_tries: int = 10000
) -> qsim.PureState:
    """Run the circuit and condition on the all-zeros first register.

    Each try measures the first register; the all-zeros branch lands with
    probability ((2^n - s)^2 + s^2) / 4^n >= 1/4, so the loop is short. The
    returned state is |0...0> on the first register with the flag qubit at
    angle arctan(s / (2^n - s)).
    """
    n = formula.num_vars
    for _ in range(max_tries):
        state = _post_oracle_state(formula)
        state = _hadamard_first_register(state, n)
        outcome, collapsed, _ = qsim.measure(state, range(n), rng)
        if not any(outcome):
            return collapsed
    raise RuntimeError("all-zeros branch never observed; this should be unreachable")


def zero_branch_probability(formula: CnfFormula) -> float:
    """Exact Born probability of the all-zeros first register (always >= 1/4)."""
    n = formula.num_vars
    state = _hadamard_first_register(_post_oracle_state(formula), n)
    return qsim.outcome_probability(state, range(n), [0] * n)


def detect_satisfiable(formula: CnfFormula, rng: np.random.Generator) -> bool:
    """Decide satisfiability with the angle-doubling flag amplification.

    Each round: prepare, condition on the all-zeros branch, double the flag
    angle n+1 times (enough to cap any s >= 1 at pi/2), measure the flag.
    Returns True iff any of the 64 rounds observes a 1. An unsatisfiable
    formula has flag angle exactly 0, which every rule fixes, so false
    positives are impossible and the agreement probability exceeds
    1 - 2^-20.
    """
    n = formula.num_vars
    doublings = n + 1
    for _ in range(ROUNDS):
        state = _prepare_flag_state(formula, rng)
        for _ in range(doublings):
            state = angle_double(state, n)
        outcome, _, _ = qsim.measure(state, [n], rng)
        if outcome[0] == 1:
            return True
    return False


def count_solutions(formula: CnfFormula, rng: np.random.Generator | None = None) -> int:
    """Exact model count via binary search on the flag angle.

    Each step asks "is s >= m+1?" by remapping the adjacent count window
    [m, m+1] onto [0, pi/2]: the clamp sends every s <= m to angle 0 and
    every s >= m+1 to pi/2, so the 64 measured samples are unanimous and
    the majority vote is deterministic. Omitting ``rng`` uses a fixed
    internal stream, keeping repeat calls reproducible.
    """
    if rng is None:
        rng = spawn(0, "count_solutions")
    n = formula.num_vars
    total = 2**n
    lo, hi = 0, total
    while lo < hi:
        mid = (lo + hi) // 2
        ones = zeros = 0
        while max(ones, zeros) <= VOTE_SAMPLES // 2:
            state = _prepare_flag_state(formula, rng)
            state = affine_angle_remap(state, n, mid, mid + 1, total)
            outcome, _, _ = qsim.measure(state, [n], rng)
            if outcome[0] == 1:
                ones += 1
            else:
                zeros += 1
        if ones > zeros:
            lo = mid + 1
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# QBF evaluation by an AND/OR chain


def eval_qbf_nonlinear(qbf: QbfFormula) -> bool:
    """Evaluate an alternating QBF with one chain gate per variable.

    Prepares sum_x |x>|f(x)>/2^(n/2), then applies the gate matching each
    variable's quantifier (OR for exists, AND for forall), innermost
    variable first, moving the control leftward. Afterwards every basis
    state carries the QBF's truth value on the flag qubit, which is read
    off as a deterministic marginal.
    """
    n = qbf.num_vars
    table = qbf.truth_table()
    amps = np.zeros(2 ** (n + 1), dtype=np.complex128)
    amps[np.arange(2**n) * 2 + table.astype(np.int64)] = 2 ** (-n / 2)
    state = qsim.PureState(n + 1, amps)
    for var in range(n, 0, -1):
        if quantifier(var) == EXISTS:
            state = nonlinear_or(state, var - 1, n)
        else:
            state = nonlinear_and(state, var - 1, n)
    prob_one = qsim.outcome_probability(state, [n], [1])
    if min(prob_one, 1.0 - prob_one) > 1e-9:
        raise RuntimeError(f"flag qubit not deterministic after chain: Pr[1]={prob_one!r}")
    return prob_one > 0.5


# ---------------------------------------------------------------------------
# Error amplification demo


def error_amplification(epsilon: float, steps: int) -> list[float]:
    """Trajectory of Pr[1] under repeated angle doubling from arcsin(sqrt(eps)).

    Returns steps+1 probabilities starting at epsilon itself. A spurious
    epsilon > 0 exceeds 1/2 within ceil(log2(pi / (4 arcsin sqrt(eps)))) + 1
    doublings; epsilon = 0 is a fixed point and stays identically zero.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if steps < 0:
        raise ValueError(f"steps must be nonnegative, got {steps}")
    alpha = float(np.arcsin(np.sqrt(epsilon)))
    state = qsim.PureState(1, np.array([np.cos(alpha), np.sin(alpha)], dtype=complex))
    trajectory = [float(state.probabilities()[1])]
    for _ in range(steps):
        state = angle_double(state, 0)
        trajectory.append(float(state.probabilities()[1]))
    return trajectory
