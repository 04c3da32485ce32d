"""Adiabatic evolution from a transverse-field mixer to a clause-violation cost.

H0 = sum_i (I - X_i)/2 has the uniform superposition as its unique ground
state and spectral gap exactly 1. H1 is diagonal, counting violated
clauses, so its ground space is the satisfying set whenever the formula is
satisfiable. The interpolation is linear, H(s) = (1-s) H0 + s H1, and the
Schroedinger equation is integrated by exactly exponentiating the
Hamiltonian frozen at each step's midpoint. Success probability against
total time T shows the adiabatic tradeoff; the minimum gap along the path
controls how large T must be.

``hidden_corner_hamiltonians`` is a qualitative example family with a wide
false basin at the all-zeros corner and the true optimum hidden at
all-ones; it is a hook for small-gap experiments, with no optimality
claims attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import qsim
from .instances import CnfFormula, satisfying_mask

MAX_QUBITS = 10


class ConvergenceError(RuntimeError):
    """The requested step count is too coarse for the requested tolerance."""


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator (checked at 1e-9) on ``num_qubits`` qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        dim = 2**self.num_qubits
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix has shape {mat.shape}, expected {(dim, dim)}")
        if not np.allclose(mat, mat.conj().T, atol=1e-9):
            raise ValueError("Hamiltonian is not Hermitian within 1e-9")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class Schedule:
    """Linear schedule s(t) = t / total_time discretized into equal steps."""

    total_time: float
    steps: int

    def __post_init__(self) -> None:
        if not self.total_time > 0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @classmethod
    def default(cls, total_time: float, steps_per_unit_time: float = 100.0) -> "Schedule":
        return cls(total_time, max(1, ceil(steps_per_unit_time * total_time)))

    def s(self, t: float) -> float:
        if not 0.0 <= t <= self.total_time + 1e-12:
            raise ValueError(f"t={t} outside [0, {self.total_time}]")
        return min(1.0, t / self.total_time)


def transverse_field(num_qubits: int) -> Hamiltonian:
    """H0 = sum_i (I - X_i)/2; ground state |+...+> at energy 0, gap exactly 1."""
    dim = 2**num_qubits
    mat = np.zeros((dim, dim), dtype=np.complex128)
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    for i in range(num_qubits):
        op = np.kron(np.kron(np.eye(2**i), x), np.eye(2 ** (num_qubits - 1 - i)))
        mat += (np.eye(dim) - op) / 2.0
    return Hamiltonian(num_qubits, mat)


def violation_counts(formula: CnfFormula) -> np.ndarray:
    """Number of violated clauses per assignment index."""
    n = formula.num_vars
    idx = np.arange(2**n, dtype=np.uint32)
    counts = np.zeros(2**n, dtype=np.int64)
    for clause in formula.clauses:
        clause_sat = np.zeros(2**n, dtype=bool)
        for lit in clause:
            bit = (idx >> (n - abs(lit))) & 1
            clause_sat |= bit == (1 if lit > 0 else 0)
        counts += ~clause_sat
    return counts


def build_hamiltonians(formula: CnfFormula) -> tuple[Hamiltonian, Hamiltonian]:
    """(H0, H1) for a formula: transverse-field mixer and diagonal clause cost."""
    n = formula.num_vars
    h1 = Hamiltonian(n, np.diag(violation_counts(formula).astype(np.complex128)))
    return transverse_field(n), h1


def interpolate(h0: Hamiltonian, h1: Hamiltonian, s: float) -> np.ndarray:
    if h0.num_qubits != h1.num_qubits:
        raise ValueError("H0 and H1 act on different qubit counts")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    return (1.0 - s) * h0.matrix + s * h1.matrix


def spectral_gap(h0: Hamiltonian, h1: Hamiltonian, s: float) -> float:
    """Difference of the two lowest eigenvalues of H(s); 0 when degenerate."""
    eigs = np.linalg.eigvalsh(interpolate(h0, h1, s))
    return float(eigs[1] - eigs[0])


def evolve(
    h0: Hamiltonian,
    h1: Hamiltonian,
    schedule: Schedule,
    initial: qsim.PureState,
    tolerance: float | None = None,
) -> qsim.PureState:
    """Integrate i dpsi/dt = H(s(t)) psi by per-step exact exponentiation.

    The Hamiltonian is frozen at each step's midpoint and exponentiated via
    eigendecomposition, so each step is exactly unitary and the norm is
    preserved to 1e-8 overall. With ``tolerance`` given, the evolution is
    repeated at twice the step count; if the two final states differ by
    more than the tolerance a :class:`ConvergenceError` is raised, and
    otherwise the finer result is returned.
    """
    if initial.num_qubits != h0.num_qubits:
        raise ValueError("initial state size does not match the Hamiltonians")

    def run(steps: int) -> np.ndarray:
        psi = initial.amplitudes.copy()
        dt = schedule.total_time / steps
        for j in range(steps):
            s_mid = schedule.s(min((j + 0.5) * dt, schedule.total_time))
            w, v = np.linalg.eigh(interpolate(h0, h1, s_mid))
            psi = v @ (np.exp(-1j * w * dt) * (v.conj().T @ psi))
        return psi

    psi = run(schedule.steps)
    if tolerance is not None:
        finer = run(2 * schedule.steps)
        gap = float(np.linalg.norm(finer - psi))
        if gap > tolerance:
            raise ConvergenceError(
                f"doubling {schedule.steps} steps moved the final state by {gap:.3e} "
                f"> tolerance {tolerance:.3e}; increase the step count"
            )
        psi = finer
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-8:
        raise RuntimeError(f"norm drifted to {norm!r} during evolution")
    return qsim.PureState(h0.num_qubits, psi / norm)


def ground_space_overlap(h1: Hamiltonian, state: qsim.PureState) -> float:
    """Probability mass of the state on H1's ground space (H1 must be diagonal)."""
    diag = np.real(np.diag(h1.matrix))
    if not np.allclose(h1.matrix, np.diag(diag), atol=1e-12):
        raise ValueError("ground_space_overlap expects a diagonal cost Hamiltonian")
    ground = np.isclose(diag, diag.min(), atol=1e-12)
    return float(state.probabilities()[ground].sum())


def minimum_gap(h0: Hamiltonian, h1: Hamiltonian, grid_points: int = 101) -> float:
    grid = np.linspace(0.0, 1.0, grid_points)
    return min(spectral_gap(h0, h1, float(s)) for s in grid)


def success_vs_T(
    formula: CnfFormula,
    total_times: list[float],
    steps_per_unit_time: float = 100.0,
    gap_grid_points: int = 101,
) -> dict:
    """Sweep T and report (T, ground-space overlap, minimum gap) rows.

    T = 0 is allowed and means no evolution: the overlap is that of the
    uniform superposition, i.e. (number of ground states) / 2^n.
    """
    if formula.num_vars > 8:
        raise ValueError("success_vs_T sweeps are limited to 8 variables")
    h0, h1 = build_hamiltonians(formula)
    uniform = qsim.PureState.uniform(formula.num_vars)
    min_gap = minimum_gap(h0, h1, gap_grid_points)
    rows = []
    for total_time in total_times:
        if total_time < 0:
            raise ValueError(f"total time {total_time} is negative")
        if total_time == 0:
            final = uniform
        else:
            schedule = Schedule.default(total_time, steps_per_unit_time)
            final = evolve(h0, h1, schedule, uniform)
        rows.append((float(total_time), ground_space_overlap(h1, final), min_gap))
    return {"rows": rows, "min_gap": min_gap}


def hidden_corner_hamiltonians(
    num_qubits: int, basin_height: float = 2.0
) -> tuple[Hamiltonian, Hamiltonian]:
    """Example family with a tunable false-minimum basin.

    Cost is Hamming weight plus ``basin_height`` everywhere except the
    all-ones corner, whose cost is 0: greedy descent funnels to the
    all-zeros local minimum while the global optimum sits isolated at
    maximal weight. Only the qualitative small-gap behavior matters here.
    """
    if basin_height <= 0:
        raise ValueError("basin_height must be positive")
    n = num_qubits
    idx = np.arange(2**n, dtype=np.uint32)
    weights = np.zeros(2**n, dtype=np.float64)
    for i in range(n):
        weights += (idx >> i) & 1
    costs = weights + basin_height
    costs[2**n - 1] = 0.0
    return transverse_field(n), Hamiltonian(n, np.diag(costs.astype(np.complex128)))
