import numpy as np
import pytest
from hypothesis import given, strategies as st

from exocomp import qsim
from exocomp.rng import spawn


def test_basis_state_is_big_endian():
    # qubit 0 is the most significant bit of the basis index
    state = qsim.PureState.basis(3, 0b100)
    state = qsim.apply_gate(state, qsim.X, [2])
    assert state.amplitudes[0b101] == 1.0
    assert qsim.outcome_probability(state, [0], (1,)) == pytest.approx(1.0)
    assert qsim.outcome_probability(state, [1], (0,)) == pytest.approx(1.0)


def test_norm_is_enforced():
    with pytest.raises(ValueError):
        qsim.PureState(1, np.array([1.0, 1.0]))


def test_hadamard_then_measure_collapses():
    rng = spawn(11, "measure")
    state = qsim.apply_gate(qsim.PureState.zero(2), qsim.H, [0])
    bits, collapsed, prob = qsim.measure(state, [0], rng)
    assert prob == pytest.approx(0.5)
    assert bits in ((0,), (1,))
    # collapsed state is again a valid basis-supported state
    assert np.linalg.norm(collapsed.amplitudes) == pytest.approx(1.0)
    assert qsim.outcome_probability(collapsed, [0], bits) == pytest.approx(1.0)


def test_cnot_entangles_and_marginals_match():
    state = qsim.apply_gate(qsim.PureState.zero(2), qsim.H, [0])
    state = qsim.apply_gate(state, qsim.CNOT, [0, 1])
    probs = state.probabilities()
    assert probs[0b00] == pytest.approx(0.5)
    assert probs[0b11] == pytest.approx(0.5)
    assert qsim.outcome_probability(state, [0, 1], (0, 1)) == pytest.approx(0.0)


def test_measurement_statistics_follow_born_rule():
    rng = spawn(12, "born")
    state = qsim.apply_gate(qsim.PureState.zero(1), qsim.H, [0])
    draws = [qsim.measure(state, [0], rng)[0][0] for _ in range(4000)]
    assert abs(np.mean(draws) - 0.5) < 0.03


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_apply_gate_preserves_norm(num_qubits, salt):
    rng = spawn(13, "norm", salt)
    amps = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    amps /= np.linalg.norm(amps)
    state = qsim.PureState(num_qubits, amps)
    target = int(rng.integers(num_qubits))
    for gate in (qsim.H, qsim.S, qsim.Y):
        out = qsim.apply_gate(state, gate, [target])
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_peek_does_not_disturb_the_state():
    rng = spawn(14, "peek")
    state = qsim.apply_gate(qsim.PureState.zero(2), qsim.H, [1])
    before = state.amplitudes.copy()
    for _ in range(20):
        qsim.peek_sample(state, [0, 1], rng)
    assert np.array_equal(state.amplitudes, before)


def test_sparse_state_prunes_and_normalizes():
    state = qsim.SparseState({("a", 0): 1 / np.sqrt(2), ("b", 1): 1 / np.sqrt(2), ("c", 2): 1e-17})
    assert state.support_size() == 2
    weights = state.register_weights(1)
    assert weights == pytest.approx({0: 0.5, 1: 0.5})


def test_sparse_measure_component_collapses_consistently():
    rng = spawn(15, "sparse")
    state = qsim.SparseState(
        {("x", 0): 0.5, ("x", 1): 0.5, ("y", 2): 0.5, ("y", 3): 0.5}
    )
    value, collapsed, prob = qsim.measure_component(state, 0, rng)
    assert value in ("x", "y")
    assert prob == pytest.approx(0.5)
    assert {label[0] for label in collapsed.amplitudes} == {value}
    assert collapsed.support_size() == 2


def test_sparse_peek_order_is_sorted_and_undisturbed():
    rng = spawn(16, "sparse-peek")
    state = qsim.SparseState({(1, "q"): np.sqrt(0.7), (0, "r"): np.sqrt(0.3)})
    seen = {qsim.peek_sample(state, 0, rng) for _ in range(100)}
    assert seen <= {0, 1}
    assert state.support_size() == 2


def test_density_matrix_checks():
    with pytest.raises(ValueError):
        qsim.DensityMatrix(1, np.array([[0.6, 0.0], [0.0, 0.6]]))
    with pytest.raises(ValueError):
        qsim.DensityMatrix(1, np.array([[1.5, 0.0], [0.0, -0.5]]))
    rho = qsim.DensityMatrix.maximally_mixed(2)
    assert rho.von_neumann_entropy() == pytest.approx(2 * np.log(2))


def test_partial_trace_of_bell_state_is_mixed():
    state = qsim.apply_gate(qsim.PureState.zero(2), qsim.H, [0])
    state = qsim.apply_gate(state, qsim.CNOT, [0, 1])
    rho = qsim.DensityMatrix.from_pure(state)
    reduced = qsim.partial_trace(rho, keep=[0])
    assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_vec_unvec_roundtrip_column_stacking():
    mat = np.arange(9, dtype=np.complex128).reshape(3, 3)
    v = qsim.vec(mat)
    assert v[1] == mat[1, 0]  # column-major stacking
    assert np.array_equal(qsim.unvec(v, 3), mat)


def test_induced_superoperator_identity_is_identity_channel():
    sup = qsim.induced_superoperator(np.eye(2, dtype=complex), 0, 1)
    rho = np.array([[0.75, 0.1], [0.1, 0.25]], dtype=complex)
    assert np.allclose(sup.apply(rho), rho, atol=1e-12)


def test_induced_superoperator_traces_out_the_ancilla():
    # CNOT with the ancilla A starting in |0> and being traced out acts as
    # a dephasing channel on B when A is the control... control must be B
    # here: with A as the target, B's off-diagonals are killed.
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    swapped = cnot[[0, 2, 1, 3]][:, [0, 2, 1, 3]]  # control = second qubit
    sup = qsim.induced_superoperator(swapped, 1, 1)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = sup.apply(rho)
    assert np.allclose(out, np.diag([0.5, 0.5]), atol=1e-12)
    # channels preserve trace and hermiticity
    assert np.trace(out) == pytest.approx(1.0)
    assert np.allclose(out, out.conj().T)
