"""Computation with closed timelike curves: causal consistency as a resource.

A classical circuit C run inside a closed timelike curve must output the
same probability distribution it receives, so Nature is forced to hand
back a stationary distribution of C's functional graph. Stationary
distributions are exactly convex mixtures of uniform-on-cycle
distributions, and choosing C well makes every cycle a useful answer:
fixed points that are satisfying assignments (NP), or a single loop that
threads a space-bounded machine's entire history and carries its verdict
on a tag-along bit (PSPACE).

Quantum mechanically, Deutsch's consistency condition asks for a density
matrix with Tr_A[U(|0..0><0..0| x rho)U^dagger] = rho. Such a fixed point
always exists; where several do, we return the maximum-entropy one, which
is the canonical deterministic stand-in for Nature's unspecified choice.
The grandfather paradox (a NOT gate on the loop) resolves to the maximally
mixed qubit.

Bacon's two-bit gate gives a CTC story with distributions only: feeding a
bit of bias p through the loop and XORing yields p' = 2p(1-p), a logistic
map that amplifies exponentially small biases to detectable ones while
pinning p = 0 in place.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import qsim
from .instances import (
    CnfFormula,
    FormatError,
    SpaceBoundedMachine,
    index_assignment,
    run_machine,
    satisfying_mask,
)

MAX_TABLE_BITS = 20
MAX_NP_VARS = 16
MAX_MACHINE_CONFIGS = 2**18
UNSATISFIABLE = "unsatisfiable"

_MAGIC = b"CTCFT"
_NULL_SPACE_TOL = 1e-9


@dataclass(frozen=True)
class FunctionTable:
    """Explicit map {0,1}^n -> {0,1}^n stored as an entry array."""

    num_bits: int
    table: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_bits <= MAX_TABLE_BITS:
            raise ValueError(f"num_bits must be in [1, {MAX_TABLE_BITS}], got {self.num_bits}")
        tab = np.asarray(self.table, dtype=np.uint32)
        size = 2**self.num_bits
        if tab.shape != (size,):
            raise ValueError(f"table has shape {tab.shape}, expected ({size},)")
        if tab.max(initial=0) >= size:
            bad = int(np.argmax(tab >= size))
            raise ValueError(f"entry {bad} maps to {int(tab[bad])}, beyond {size - 1}")
        tab = tab.copy()
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def to_bytes(self) -> bytes:
        return _MAGIC + struct.pack("<I", self.num_bits) + self.table.astype("<u4").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "FunctionTable":
        if data[: len(_MAGIC)] != _MAGIC:
            raise FormatError(f"bad magic {data[:5]!r}, expected {_MAGIC!r}")
        if len(data) < len(_MAGIC) + 4:
            raise FormatError("truncated header: no bit-count field")
        (num_bits,) = struct.unpack_from("<I", data, len(_MAGIC))
        if not 1 <= num_bits <= MAX_TABLE_BITS:
            raise FormatError(f"bit count {num_bits} outside [1, {MAX_TABLE_BITS}]")
        body = data[len(_MAGIC) + 4 :]
        expected = 4 * 2**num_bits
        if len(body) != expected:
            raise FormatError(f"body holds {len(body)} bytes, expected {expected}")
        return cls(num_bits, np.frombuffer(body, dtype="<u4"))


@dataclass(frozen=True)
class CycleDecomposition:
    """Cycles of a functional graph plus the size of each cycle's basin."""

    num_bits: int
    cycles: tuple[tuple[int, ...], ...]
    basin_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.cycles) != len(self.basin_sizes):
            raise ValueError("one basin size per cycle required")
        seen: set[int] = set()
        for cyc in self.cycles:
            if not cyc:
                raise ValueError("empty cycle")
            if seen.intersection(cyc):
                raise ValueError("cycles are not disjoint")
            seen.update(cyc)
        if sum(self.basin_sizes) != 2**self.num_bits:
            raise ValueError(
                f"basins cover {sum(self.basin_sizes)} vertices, expected {2**self.num_bits}"
            )


def cycle_decompose(table: FunctionTable) -> CycleDecomposition:
    """Every vertex of x -> table[x] drains into exactly one cycle; find them all."""
    size = 2**table.num_bits
    tab = table.table
    cycle_of = np.full(size, -1, dtype=np.int64)
    on_path = np.full(size, -1, dtype=np.int64)  # position within the current walk
    cycles: list[tuple[int, ...]] = []
    basin_counts: list[int] = []
    for start in range(size):
        if cycle_of[start] >= 0:
            continue
        path: list[int] = []
        x = start
        while cycle_of[x] < 0 and on_path[x] < 0:
            on_path[x] = len(path)
            path.append(x)
            x = int(tab[x])
        if cycle_of[x] >= 0:
            cid = int(cycle_of[x])  # walk drained into an already-classified vertex
        else:
            cid = len(cycles)
            cyc = tuple(path[on_path[x] :])
            cycles.append(cyc)
            basin_counts.append(0)
        for v in path:
            cycle_of[v] = cid
            on_path[v] = -1
        basin_counts[cid] += len(path)
    return CycleDecomposition(table.num_bits, tuple(cycles), tuple(basin_counts))


def stationary_distribution(
    decomposition: CycleDecomposition, cycle_weights: list[Fraction] | None = None
) -> dict[int, Fraction]:
    """Exact stationary distribution: a convex mixture of uniform-on-cycle terms.

    Default weights are uniform over cycles. Weights must be nonnegative
    rationals summing to 1.
    """
    cycles = decomposition.cycles
    if cycle_weights is None:
        cycle_weights = [Fraction(1, len(cycles))] * len(cycles)
    if len(cycle_weights) != len(cycles):
        raise ValueError("one weight per cycle required")
    if any(w < 0 for w in cycle_weights) or sum(cycle_weights) != 1:
        raise ValueError("weights must be nonnegative and sum to exactly 1")
    dist: dict[int, Fraction] = {}
    for cyc, weight in zip(cycles, cycle_weights):
        if weight == 0:
            continue
        share = weight / len(cyc)
        for v in cyc:
            dist[v] = share
    return dist


def push_forward(table: FunctionTable, dist: dict[int, Fraction]) -> dict[int, Fraction]:
    """Image distribution of ``dist`` under the table, in exact arithmetic."""
    out: dict[int, Fraction] = {}
    for x, p in dist.items():
        if p == 0:
            continue
        y = table(x)
        out[y] = out.get(y, Fraction(0)) + p
    return out


# ---------------------------------------------------------------------------
# The NP circuit: fixed points are satisfying assignments


def build_np_table(formula: CnfFormula) -> FunctionTable:
    """C(x) = x if x satisfies the formula, else x+1 mod 2^n."""
    if formula.num_vars > MAX_NP_VARS:
        raise ValueError(f"at most {MAX_NP_VARS} variables supported")
    n = formula.num_vars
    size = 2**n
    idx = np.arange(size, dtype=np.uint32)
    sat = satisfying_mask(formula)
    return FunctionTable(n, np.where(sat, idx, (idx + 1) % size))


def _sample_cycle_vertex(
    decomposition: CycleDecomposition,
    rng: np.random.Generator,
    adversarial: bool,
    prefers: Callable[[tuple[int, ...]], bool],
) -> int:
    """Pick a cycle (uniformly, or the worst per ``prefers``), then a uniform vertex."""
    cycles = decomposition.cycles
    if adversarial:
        bad = [c for c in cycles if prefers(c)]
        cycle = bad[0] if bad else cycles[-1]
    else:
        cycle = cycles[int(rng.integers(len(cycles)))]
    return cycle[int(rng.integers(len(cycle)))]


def solve_np_ctc(
    formula: CnfFormula, rng: np.random.Generator, adversarial: bool = False
) -> tuple[int, ...] | str:
    """Read a satisfying assignment out of the CTC's stationary distribution.

    If the formula is satisfiable every cycle is a satisfying fixed point,
    so whichever cycle Nature picks, the sampled vertex is a witness; if
    not, the single 2^n-cycle yields a non-satisfying sample and we answer
    :data:`UNSATISFIABLE`. ``adversarial`` lets the cycle choice be made by
    an adversary who prefers cycles containing non-satisfying vertices,
    which demonstrates that the choice does not matter.
    """
    n = formula.num_vars
    decomposition = cycle_decompose(build_np_table(formula))
    vertex = _sample_cycle_vertex(
        decomposition,
        rng,
        adversarial,
        lambda cyc: any(not formula.evaluate(index_assignment(v, n)) for v in cyc),
    )
    assignment = index_assignment(vertex, n)
    return assignment if formula.evaluate(assignment) else UNSATISFIABLE


# ---------------------------------------------------------------------------
# The PSPACE circuit: one long cycle carrying the verdict bit


def build_pspace_table(machine: SpaceBoundedMachine) -> FunctionTable:
    """Thread the machine's history into a single cycle tagged with its verdict.

    State (M_t, i) is packed as index (t << 1) | i over the machine's run
    path M_1..M_T. Steps map (M_t, i) -> (M_{t+1}, i); the halting state
    wraps to (M_1, 1) when accepting and (M_1, 0) when rejecting, so the
    unique cycle consists of the T path states carrying the verdict bit.
    Padding indices past 2T feed into (M_1, their own low bit).
    """
    path = run_machine(machine)
    accepted = machine.classify(path[-1]) == "accept"
    t_steps = len(path)
    if t_steps > MAX_MACHINE_CONFIGS:
        raise ValueError(f"machine path has {t_steps} configurations, beyond {MAX_MACHINE_CONFIGS}")
    num_bits = max(2, (2 * t_steps - 1).bit_length())
    size = 2**num_bits
    table = np.arange(size, dtype=np.uint32) & 1  # padding drains to (M_1, low bit)
    for t in range(t_steps - 1):
        for i in (0, 1):
            table[(t << 1) | i] = ((t + 1) << 1) | i
    verdict = 1 if accepted else 0
    for i in (0, 1):
        table[((t_steps - 1) << 1) | i] = verdict
    return FunctionTable(num_bits, table)


def solve_pspace_ctc(machine: SpaceBoundedMachine, rng: np.random.Generator) -> bool:
    """The verdict bit read off a uniform sample of the unique cycle."""
    decomposition = cycle_decompose(build_pspace_table(machine))
    if len(decomposition.cycles) != 1:
        raise RuntimeError(f"expected a single cycle, found {len(decomposition.cycles)}")
    cycle = decomposition.cycles[0]
    bits = {v & 1 for v in cycle}
    if len(bits) != 1:
        raise RuntimeError("cycle does not carry a consistent verdict bit")
    vertex = cycle[int(rng.integers(len(cycle)))]
    return bool(vertex & 1)


# ---------------------------------------------------------------------------
# Deutsch's quantum fixed point


@dataclass(frozen=True)
class CtcFixedPoint:
    """A causally consistent density matrix and its self-consistency residual."""

    rho: qsim.DensityMatrix
    residual: float

    def __post_init__(self) -> None:
        if not self.residual <= 1e-8:
            raise ValueError(f"residual {self.residual:.3e} exceeds 1e-8")


def _fixed_space_bases(superop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right and left singular-null bases of (S - I), columns orthonormal."""
    dim_sq = superop.shape[0]
    delta = superop - np.eye(dim_sq)
    _, sing, vh = np.linalg.svd(delta)
    right = vh[sing <= _NULL_SPACE_TOL].conj().T
    _, sing_l, vh_l = np.linalg.svd(delta.conj().T)
    left = vh_l[sing_l <= _NULL_SPACE_TOL].conj().T
    return right, left


def _hermitian_traceless_directions(right: np.ndarray, dim: int) -> list[np.ndarray]:
    """Orthonormal Hermitian traceless basis of the fixed matrix space.

    The fixed space of a channel is closed under the adjoint, so its
    Hermitian part has real dimension equal to the complex null dimension.
    Tracelessness is imposed as a linear constraint inside that space (the
    identity itself need not be fixed for a non-unital channel, so naive
    trace subtraction would leave the space).
    """
    hermitian: list[np.ndarray] = []
    for k in range(right.shape[1]):
        v = qsim.unvec(right[:, k], dim)
        for cand in ((v + v.conj().T) / 2, (v - v.conj().T) / 2j):
            for b in hermitian:
                cand = cand - np.vdot(b, cand).real * b
            norm = np.linalg.norm(cand)
            if norm > 1e-8:
                hermitian.append(cand / norm)
    traces = np.array([np.trace(h).real for h in hermitian])
    if len(hermitian) <= 1:
        return []
    t_norm = np.linalg.norm(traces)
    if t_norm < 1e-9:
        raise RuntimeError("fixed space contains no unit-trace element; solver bug")
    unit = traces / t_norm
    directions: list[np.ndarray] = []
    coeff_basis = np.eye(len(hermitian)) - np.outer(unit, unit)
    for col in range(len(hermitian)):
        coeffs = coeff_basis[:, col]
        cand = sum(c * h for c, h in zip(coeffs, hermitian))
        for b in directions:
            cand = cand - np.vdot(b, cand).real * b
        norm = np.linalg.norm(cand)
        if norm > 1e-8:
            directions.append(cand / norm)
    return directions


def _entropy_gradient_hessian(
    rho: np.ndarray, directions: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, float]:
    """Gradient and Hessian of S(rho + sum c_j G_j) at c = 0, plus min eigenvalue."""
    eigvals, eigvecs = np.linalg.eigh(rho)
    floor = 1e-300
    lam = np.clip(eigvals, floor, None)
    log_lam = np.log(lam)
    m = len(directions)
    grad = np.empty(m)
    rotated = [eigvecs.conj().T @ g @ eigvecs for g in directions]
    for j, g in enumerate(rotated):
        grad[j] = -float(np.sum(np.real(np.diag(g)) * log_lam))
    # Daleckii-Krein divided differences for d(log rho)
    diff = lam[:, None] - lam[None, :]
    same = np.abs(diff) < 1e-12
    kernel = np.where(same, 1.0 / lam[:, None], np.log(lam[:, None] / lam[None, :]) / np.where(same, 1.0, diff))
    hess = np.empty((m, m))
    for j in range(m):
        for k in range(j, m):
            val = -float(np.real(np.sum(rotated[j] * rotated[k].T * kernel)))
            hess[j, k] = val
            hess[k, j] = val
    return grad, hess, float(eigvals.min())


def deutsch_fixed_point(unitary: np.ndarray, num_a: int, num_b: int) -> CtcFixedPoint:
    """Maximum-entropy causally consistent state of the CTC register.

    The induced channel S always has a fixed density matrix. Its fixed
    matrix space is the eigenvalue-1 eigenspace of the superoperator,
    which for a channel is semisimple, so the spectral projector is
    B (C^T B)^{-1} C^T with B, C the right/left null bases of (S - I).
    Projecting the maximally mixed state yields a fixed state of maximal
    support, a strictly interior anchor; Newton ascent on von Neumann
    entropy over the traceless fixed directions then finds the unique
    entropy maximizer.
    """
    if num_b > qsim.MAX_DENSITY_QUBITS:
        raise ValueError(f"CTC register limited to {qsim.MAX_DENSITY_QUBITS} qubits")
    superop = qsim.induced_superoperator(unitary, num_a, num_b)
    mat = superop.matrix
    dim = 2**num_b
    right, left = _fixed_space_bases(mat)
    if right.shape[1] == 0 or left.shape[1] == 0:
        raise RuntimeError("empty fixed-point space; a channel always has a fixed state")
    cross = left.conj().T @ right
    projector = right @ np.linalg.solve(cross, left.conj().T)
    rho = qsim.unvec(projector @ qsim.vec(np.eye(dim) / dim), dim)
    rho = (rho + rho.conj().T) / 2

    directions = _hermitian_traceless_directions(right, dim)
    if directions:
        # Every fixed state lives inside the anchor's support (the anchor
        # dominates them all), so compress to that subspace: it makes the
        # anchor strictly positive and the entropy ascent well conditioned.
        anchor_vals, anchor_vecs = np.linalg.eigh(rho)
        keep = anchor_vals > 1e-12
        isometry = anchor_vecs[:, keep]
        base = isometry.conj().T @ rho @ isometry
        compressed: list[np.ndarray] = []
        for g in directions:
            cand = isometry.conj().T @ g @ isometry
            for b in compressed:
                cand = cand - np.vdot(b, cand).real * b
            norm = np.linalg.norm(cand)
            if norm > 1e-10:
                compressed.append(cand / norm)
        if compressed:
            solution = _max_entropy_ascent(base, compressed)
            rho = isometry @ solution @ isometry.conj().T

    rho = (rho + rho.conj().T) / 2
    eigvals, eigvecs = np.linalg.eigh(rho)
    eigvals = np.clip(eigvals, 0.0, None)
    rho = eigvecs @ np.diag(eigvals / eigvals.sum()) @ eigvecs.conj().T
    residual = float(np.linalg.norm(qsim.unvec(mat @ qsim.vec(rho), dim) - rho))
    return CtcFixedPoint(qsim.DensityMatrix(num_b, rho), residual)


def _entropy(rho: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(rho)
    eigs = eigs[eigs > 1e-300]
    return float(-np.sum(eigs * np.log(eigs)))


def _max_entropy_ascent(base: np.ndarray, directions: list[np.ndarray]) -> np.ndarray:
    """Damped Newton ascent of von Neumann entropy over an affine family.

    ``base`` must be strictly positive definite; entropy is strictly
    concave, so the interior maximizer is unique and Newton converges
    quadratically once the PSD backtracking stops engaging.
    """
    coeffs = np.zeros(len(directions))
    for _ in range(200):
        current = base + sum(c * g for c, g in zip(coeffs, directions))
        grad, hess, _ = _entropy_gradient_hessian(current, directions)
        if np.linalg.norm(grad) <= 1e-11:
            break
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = grad
        scale = 1.0
        improved = False
        ref_entropy = _entropy(current)
        for _ in range(60):
            trial = base + sum((c + scale * s) * g for c, s, g in zip(coeffs, step, directions))
            eigs = np.linalg.eigvalsh(trial)
            if eigs.min() > 1e-14 and _entropy(trial) >= ref_entropy - 1e-15:
                coeffs = coeffs + scale * step
                improved = True
                break
            scale /= 2
        if not improved:
            break
    return base + sum(c * g for c, g in zip(coeffs, directions))


# ---------------------------------------------------------------------------
# Bacon's two-bit gate


def bacon_iterate(p0: float, k: int) -> np.ndarray:
    """Trajectory p_0..p_k of the logistic amplifier p' = 2p(1-p)."""
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    traj = np.empty(k + 1)
    traj[0] = p0
    p = p0
    for i in range(1, k + 1):
        p = 2.0 * p * (1.0 - p)
        traj[i] = p
    return traj


def bacon_iterate_gate(p0: float, k: int) -> np.ndarray:
    """The same trajectory from an explicit two-bit distribution simulation.

    Each step builds the joint distribution of (fresh input bit, CTC bit)
    with the CTC bit's bias pinned to the input bias by causal
    consistency, applies (x, y) -> (x, x xor y), and reads off the output
    marginal. Matches :func:`bacon_iterate` to machine precision.
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0}")
    traj = np.empty(k + 1)
    traj[0] = p0
    p = p0
    for i in range(1, k + 1):
        joint = np.array(
            [
                (1 - p) * (1 - p),  # x=0, y=0 -> output 0
                (1 - p) * p,  # x=0, y=1 -> output 1
                p * (1 - p),  # x=1, y=0 -> output 1
                p * p,  # x=1, y=1 -> output 0
            ]
        )
        p = float(joint[1] + joint[2])
        traj[i] = p
    return traj


def bacon_detect(formula: CnfFormula, rng: np.random.Generator) -> bool:
    """Satisfiability via logistic amplification of the quantum flag bias.

    The flag qubit of sum_x |x>|phi(x)> is 1 with probability s/2^n, which
    is zero exactly when the formula is unsatisfiable. n+1 rounds of
    Bacon's gate push any nonzero bias above 1/3 while leaving zero fixed;
    64 samples of the amplified bit then decide. A single 1 among them
    certifies satisfiability (an unsatisfiable formula can never produce
    one), and all-zeros happens for a satisfiable formula with probability
    below 2^-20. A formula satisfied by every assignment has bias exactly
    1, which the XOR of two certain bits would annihilate, so it is
    answered directly.
    """
    if formula.num_vars > MAX_NP_VARS:
        raise ValueError(f"at most {MAX_NP_VARS} variables supported")
    n = formula.num_vars
    sat = satisfying_mask(formula)
    amps = np.zeros(2 ** (n + 1), dtype=np.complex128)
    amps[np.arange(2**n) * 2 + sat] = 1.0 / np.sqrt(2**n)
    state = qsim.PureState(n + 1, amps)
    p0 = qsim.outcome_probability(state, [n], (1,))
    if p0 == 1.0:
        return True
    amplified = float(bacon_iterate(p0, n + 1)[-1])
    samples = rng.random(64) < amplified
    return bool(samples.any())
