"""Dense and sparse quantum state simulation.

Conventions, fixed once and used by every other module:

* Qubit 0 is the most significant bit of a basis index, so the basis label
  read left to right equals the binary expansion of the index. A register
  of ``n`` qubits therefore stores amplitude ``a[x]`` for the ket
  ``|x_0 x_1 ... x_{n-1}>`` with ``x = sum_i x_i 2^(n-1-i)``.
* States are immutable values. Gates, measurement, and collapse all return
  new states; the input is never mutated (its buffer is marked read-only).
* Density matrices are vectorized by column stacking: ``vec(rho)`` stacks
  the columns of ``rho``, so ``vec(A rho B) = (B^T kron A) vec(rho)`` and a
  superoperator with Kraus operators ``K_k`` has matrix
  ``sum_k conj(K_k) kron K_k``.
* All sampling goes through an explicit ``numpy.random.Generator`` so that
  every run is reproducible from the root seed (see :mod:`exocomp.rng`).

Dense states cap at 20 qubits and density matrices at 6 qubits; the point
of this lab is exactness at desk scale, not throughput.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

ATOL = 1e-9
MAX_QUBITS = 20
MAX_DENSITY_QUBITS = 6


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Pure states


@dataclass(frozen=True)
class PureState:
    """Normalized dense statevector over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected {(2**self.num_qubits,)}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {ATOL}")
        object.__setattr__(self, "amplitudes", _read_only(amps.copy()))

    @classmethod
    def zero(cls, num_qubits: int) -> "PureState":
        return cls.basis(num_qubits, 0)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "PureState":
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def uniform(cls, num_qubits: int) -> "PureState":
        dim = 2**num_qubits
        return cls(num_qubits, np.full(dim, dim**-0.5, dtype=np.complex128))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------------------
# Gates


@dataclass(frozen=True)
class Gate:
    """Unitary gate; the matrix is checked against U U^dag = I at 1e-9."""

    name: str
    matrix: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.complex128)
        dim = mat.shape[0]
        if mat.ndim != 2 or mat.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise ValueError(f"gate matrix must be square with power-of-two size, got {mat.shape}")
        if not np.allclose(mat @ mat.conj().T, np.eye(dim), atol=ATOL):
            raise ValueError(f"gate {self.name!r} is not unitary within {ATOL}")
        object.__setattr__(self, "matrix", _read_only(mat.copy()))
        object.__setattr__(self, "num_qubits", dim.bit_length() - 1)


_SQRT2 = np.sqrt(2.0)

X = Gate("X", np.array([[0, 1], [1, 0]], dtype=complex))
Y = Gate("Y", np.array([[0, -1j], [1j, 0]], dtype=complex))
Z = Gate("Z", np.array([[1, 0], [0, -1]], dtype=complex))
H = Gate("H", np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2)
S = Gate("S", np.array([[1, 0], [0, 1j]], dtype=complex))
CNOT = Gate(
    "CNOT",
    np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
)
CZ = Gate("CZ", np.diag([1, 1, 1, -1]).astype(complex))
SWAP = Gate(
    "SWAP",
    np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
)


def _check_targets(num_qubits: int, targets: Sequence[int], arity: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != arity:
        raise ValueError(f"gate acts on {arity} qubits but {len(targets)} targets given")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"target qubit {t} out of range for {num_qubits}-qubit state")
    return targets


def apply_gate(state: PureState, gate: Gate, targets: Sequence[int]) -> PureState:
    """Apply ``gate`` to the listed target qubits (first target = first gate axis)."""
    n = state.num_qubits
    targets = _check_targets(n, targets, gate.num_qubits)
    k = gate.num_qubits
    psi = state.amplitudes.reshape((2,) * n)
    mat = gate.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(mat, psi, axes=(tuple(range(k, 2 * k)), targets))
    out = np.moveaxis(out, tuple(range(k)), targets)
    return PureState(n, np.ascontiguousarray(out).reshape(2**n))


# ---------------------------------------------------------------------------
# Measurement (collapsing) and peeking (non-collapsing)


def _marginal_probabilities(state: PureState, qubits: tuple[int, ...]) -> np.ndarray:
    n = state.num_qubits
    probs = (np.abs(state.amplitudes) ** 2).reshape((2,) * n)
    rest = tuple(q for q in range(n) if q not in qubits)
    probs = probs.transpose(qubits + rest).reshape(2 ** len(qubits), -1).sum(axis=1)
    total = probs.sum()
    if not np.isclose(total, 1.0, atol=1e-7):
        raise ValueError(f"probabilities sum to {total!r}; state is not normalized")
    return probs / total


def _bits_of(index: int, width: int) -> tuple[int, ...]:
    return tuple((index >> (width - 1 - i)) & 1 for i in range(width))


def outcome_probability(state: PureState, qubits: Sequence[int], outcome: Sequence[int]) -> float:
    """Exact Born probability of observing ``outcome`` on ``qubits``."""
    qubits = _check_targets(state.num_qubits, qubits, len(tuple(qubits)))
    index = 0
    for bit in outcome:
        index = (index << 1) | (int(bit) & 1)
    return float(_marginal_probabilities(state, qubits)[index])


def measure(
    state: PureState, qubits: Sequence[int], rng: np.random.Generator
) -> tuple[tuple[int, ...], PureState, float]:
    """Projectively measure ``qubits``; return (outcome bits, collapsed state, probability).

    The outcome tuple lists one bit per measured qubit, in the order the
    qubits were given. The collapsed state is renormalized.
    """
    n = state.num_qubits
    qubits = _check_targets(n, qubits, len(tuple(qubits)))
    probs = _marginal_probabilities(state, qubits)
    outcome_index = int(rng.choice(len(probs), p=probs))
    prob = float(probs[outcome_index])
    bits = _bits_of(outcome_index, len(qubits))
    sel: list[Any] = [slice(None)] * n
    for q, b in zip(qubits, bits):
        sel[q] = b
    collapsed = np.zeros((2,) * n, dtype=np.complex128)
    psi = state.amplitudes.reshape((2,) * n)
    collapsed[tuple(sel)] = psi[tuple(sel)]
    collapsed = collapsed.reshape(2**n) / np.sqrt(prob)
    return bits, PureState(n, collapsed), prob


# ---------------------------------------------------------------------------
# Sparse states over structured labels


@dataclass(frozen=True)
class SparseState:
    """Normalized superposition over hashable structured labels.

    Labels are tuples of equal length; component ``i`` of every label plays
    the role of register ``i``. The mapping is copied at construction and
    never mutated, which is what makes non-collapsing peeks trivially safe:
    sampling reads the amplitudes and changes nothing.
    """

    amplitudes: Mapping[tuple, complex]

    def __post_init__(self) -> None:
        entries = {tuple(k): complex(v) for k, v in self.amplitudes.items() if abs(v) > 1e-15}
        if not entries:
            raise ValueError("sparse state has no support")
        widths = {len(k) for k in entries}
        if len(widths) != 1:
            raise ValueError(f"labels have inconsistent lengths {sorted(widths)}")
        norm = np.sqrt(sum(abs(v) ** 2 for v in entries.values()))
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"sparse state norm {norm!r} deviates from 1 by more than {ATOL}")
        object.__setattr__(self, "amplitudes", entries)

    @property
    def label_width(self) -> int:
        return len(next(iter(self.amplitudes)))

    def support_size(self) -> int:
        return len(self.amplitudes)

    def register_weights(self, component: int) -> dict[Any, float]:
        """Born weights of each distinct value in label component ``component``."""
        weights: dict[Any, float] = {}
        for label, amp in self.amplitudes.items():
            weights[label[component]] = weights.get(label[component], 0.0) + abs(amp) ** 2
        return weights


def _sample_component(state: SparseState, component: int, rng: np.random.Generator) -> Any:
    weights = state.register_weights(component)
    values = sorted(weights)  # deterministic order for reproducible draws
    probs = np.array([weights[v] for v in values])
    probs = probs / probs.sum()
    return values[int(rng.choice(len(values), p=probs))]


def measure_component(
    state: SparseState, component: int, rng: np.random.Generator
) -> tuple[Any, SparseState, float]:
    """Projectively measure one label component of a sparse state."""
    value = _sample_component(state, component, rng)
    prob = state.register_weights(component)[value]
    kept = {
        label: amp / np.sqrt(prob)
        for label, amp in state.amplitudes.items()
        if label[component] == value
    }
    return value, SparseState(kept), float(prob)


def peek_sample(
    state: PureState | SparseState, where: Sequence[int] | int, rng: np.random.Generator
):
    """Sample a measurement outcome without collapsing the state.

    For a :class:`PureState`, ``where`` is a list of qubit indices and the
    return value is the sampled bit tuple. For a :class:`SparseState`,
    ``where`` is a label component index and the return value is the sampled
    component value. Repeated peeks are independent Born-rule draws from the
    unchanged state.
    """
    if isinstance(state, PureState):
        qubits = _check_targets(state.num_qubits, where, len(tuple(where)))  # type: ignore[arg-type]
        probs = _marginal_probabilities(state, qubits)
        outcome_index = int(rng.choice(len(probs), p=probs))
        return _bits_of(outcome_index, len(qubits))
    if isinstance(state, SparseState):
        return _sample_component(state, int(where), rng)  # type: ignore[arg-type]
    raise TypeError(f"peek_sample expects PureState or SparseState, got {type(state).__name__}")


# ---------------------------------------------------------------------------
# Density matrices and superoperators


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, PSD (within 1e-9) matrix over ``num_qubits`` qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_DENSITY_QUBITS:
            raise ValueError(
                f"num_qubits must be in [1, {MAX_DENSITY_QUBITS}], got {self.num_qubits}"
            )
        dim = 2**self.num_qubits
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise ValueError(f"density matrix has shape {mat.shape}, expected {(dim, dim)}")
        if not np.allclose(mat, mat.conj().T, atol=ATOL):
            raise ValueError("density matrix is not Hermitian within 1e-9")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > ATOL:
            raise ValueError(f"density matrix trace {trace!r} deviates from 1 by more than {ATOL}")
        if float(np.linalg.eigvalsh(mat).min()) < -ATOL:
            raise ValueError("density matrix has an eigenvalue below -1e-9")
        object.__setattr__(self, "matrix", _read_only(mat.copy()))

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        amps = state.amplitudes
        return cls(state.num_qubits, np.outer(amps, amps.conj()))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        dim = 2**num_qubits
        return cls(num_qubits, np.eye(dim, dtype=np.complex128) / dim)

    def von_neumann_entropy(self) -> float:
        """Entropy in nats, with 0 log 0 = 0."""
        eigs = np.linalg.eigvalsh(self.matrix)
        eigs = eigs[eigs > 1e-15]
        return float(-(eigs * np.log(eigs)).sum())


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every qubit not listed in ``keep`` (kept qubits keep their order)."""
    n = rho.num_qubits
    keep = tuple(int(q) for q in keep)
    if len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise ValueError(f"keep list {keep} invalid for {n}-qubit density matrix")
    if sorted(keep) != list(keep):
        raise ValueError(f"keep list {keep} must be sorted ascending")
    if not keep:
        raise ValueError("must keep at least one qubit")
    mat = rho.matrix.reshape((2,) * (2 * n))
    remaining = n
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        mat = np.trace(mat, axis1=q, axis2=remaining + q)
        remaining -= 1
    dim = 2 ** len(keep)
    return DensityMatrix(len(keep), mat.reshape(dim, dim))


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(mat).flatten(order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Linear map on density matrices, stored in the column-stacking convention."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"superoperator matrix has shape {mat.shape}, expected "
                             f"{(self.dim**2, self.dim**2)}")
        object.__setattr__(self, "matrix", _read_only(mat.copy()))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"input has shape {rho.shape}, expected {(self.dim, self.dim)}")
        return unvec(self.matrix @ vec(rho), self.dim)


def induced_superoperator(unitary: np.ndarray, num_a: int, num_b: int) -> Superoperator:
    """Channel ``S(rho) = Tr_A[ U (|0..0><0..0|_A kron rho) U^dag ]``.

    ``unitary`` acts on ``num_a + num_b`` qubits with register A occupying
    the most significant qubits. Register A starts in the all-zeros state
    and is traced out, leaving a completely positive trace-preserving map
    on the ``num_b``-qubit register B.
    """
    if num_a < 0 or num_b < 1:
        raise ValueError(f"need num_a >= 0 and num_b >= 1, got {num_a}, {num_b}")
    da, db = 2**num_a, 2**num_b
    u = np.asarray(unitary, dtype=np.complex128)
    if u.shape != (da * db, da * db):
        raise ValueError(f"unitary has shape {u.shape}, expected {(da * db, da * db)}")
    if not np.allclose(u @ u.conj().T, np.eye(da * db), atol=ATOL):
        raise ValueError("induced_superoperator requires a unitary within 1e-9")
    blocks = u.reshape(da, db, da, db)
    mat = np.zeros((db**2, db**2), dtype=np.complex128)
    for k in range(da):
        kraus = blocks[k, :, 0, :]
        mat += np.kron(kraus.conj(), kraus)
    return Superoperator(db, mat)
