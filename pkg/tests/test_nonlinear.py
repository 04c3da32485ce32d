"""Nonlinear gate semantics and the solvers built on them, against brute force."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exocomp import nonlinear, qsim
from exocomp.instances import (
    CnfFormula,
    QbfFormula,
    brute_force_count,
    brute_force_qbf,
    brute_force_sat,
    random_3sat,
    random_qbf,
)
from exocomp.rng import spawn


def _angle_state(alpha: float) -> qsim.PureState:
    return qsim.PureState(1, np.array([np.cos(alpha), np.sin(alpha)], dtype=complex))


def test_angle_double_basics():
    out = nonlinear.angle_double(_angle_state(np.pi / 8), 0)
    assert out.probabilities()[1] == pytest.approx(0.5, abs=1e-12)
    # zero is a fixed point, pi/2 caps
    assert nonlinear.angle_double(_angle_state(0.0), 0).probabilities()[1] == 0.0
    capped = nonlinear.angle_double(_angle_state(0.4 * np.pi), 0)
    assert capped.probabilities()[1] == pytest.approx(1.0, abs=1e-12)


def test_angle_double_preserves_phases_and_weights():
    # two-qubit state: qubit 1 carries the angle, qubit 0 splits the weight
    a = np.sqrt(0.3) * np.exp(0.7j)
    b = np.sqrt(0.7) * np.exp(-1.1j)
    alpha = np.pi / 6
    amps = np.array(
        [a * np.cos(alpha), a * np.sin(alpha) * np.exp(0.4j),
         b * np.cos(alpha), b * np.sin(alpha) * np.exp(-0.2j)],
        dtype=complex,
    )
    out = nonlinear.angle_double(qsim.PureState(2, amps), 1)
    expect = np.array(
        [a * np.cos(2 * alpha), a * np.sin(2 * alpha) * np.exp(0.4j),
         b * np.cos(2 * alpha), b * np.sin(2 * alpha) * np.exp(-0.2j)],
        dtype=complex,
    )
    assert np.abs(out.amplitudes - expect).max() < 1e-12


def test_affine_remap_window():
    total = 8
    for s in range(total + 1):
        alpha = np.arctan2(s, total - s)
        out = nonlinear.affine_angle_remap(_angle_state(alpha), 0, 3, 4, total)
        p1 = out.probabilities()[1]
        if s <= 3:
            assert p1 == pytest.approx(0.0, abs=1e-12)
        else:
            assert p1 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        nonlinear.affine_angle_remap(_angle_state(0.1), 0, 4, 4, total)
    with pytest.raises(ValueError):
        nonlinear.affine_angle_remap(_angle_state(0.1), 0, 2, 9, total)


@pytest.mark.parametrize("f0,f1", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_chain_gates_truth_table(f0, f1):
    amps = np.zeros(4, dtype=complex)
    amps[0 * 2 + f0] = 1 / np.sqrt(2)
    amps[1 * 2 + f1] = 1 / np.sqrt(2)
    chain = qsim.PureState(2, amps)
    for gate, expect in [
        (nonlinear.nonlinear_and, f0 & f1),
        (nonlinear.nonlinear_or, f0 | f1),
    ]:
        out = gate(chain, 0, 1)
        probs = out.probabilities()
        assert probs[0 * 2 + expect] == pytest.approx(0.5, abs=1e-12)
        assert probs[1 * 2 + expect] == pytest.approx(0.5, abs=1e-12)


def test_chain_gate_rejects_malformed_groups():
    single_branch = qsim.PureState.basis(2, 0)  # only the control-0 branch occupied
    with pytest.raises(nonlinear.MalformedChainStateError):
        nonlinear.nonlinear_or(single_branch, 0, 1)
    superposed_flag = qsim.PureState(
        2, np.array([1, 1, 1, 0], dtype=complex) / np.sqrt(3)
    )
    with pytest.raises(nonlinear.MalformedChainStateError):
        nonlinear.nonlinear_and(superposed_flag, 0, 1)
    with pytest.raises(ValueError):
        nonlinear.nonlinear_and(qsim.PureState.basis(2, 0), 1, 1)


def test_gate_spec_validation_and_dispatch():
    with pytest.raises(ValueError):
        nonlinear.NonlinearGateSpec("angle_triple")
    with pytest.raises(ValueError):
        nonlinear.NonlinearGateSpec(nonlinear.AFFINE_ANGLE_REMAP, a=3, b=None)
    with pytest.raises(ValueError):
        nonlinear.NonlinearGateSpec(nonlinear.AFFINE_ANGLE_REMAP, a=4, b=4)
    with pytest.raises(ValueError):
        nonlinear.NonlinearGateSpec(nonlinear.ANGLE_DOUBLE, a=1)

    spec = nonlinear.NonlinearGateSpec(nonlinear.ANGLE_DOUBLE)
    out = nonlinear.apply_nonlinear(_angle_state(np.pi / 8), spec, 0)
    assert out.probabilities()[1] == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        nonlinear.apply_nonlinear(
            qsim.PureState.basis(2, 0), nonlinear.NonlinearGateSpec(nonlinear.NONLINEAR_AND), 0
        )


@given(st.integers(min_value=3, max_value=7), st.integers(min_value=0, max_value=10**6))
def test_zero_branch_probability_floor(num_vars, salt):
    rng = spawn(31, "branch", num_vars, salt)
    formula = random_3sat(num_vars, int(rng.integers(1, 5 * num_vars)), rng)
    p = nonlinear.zero_branch_probability(formula)
    s = brute_force_count(formula)
    total = 2**num_vars
    assert p == pytest.approx(((total - s) ** 2 + s**2) / total**2, abs=1e-12)
    assert p >= 0.25 - 1e-15


def test_detect_satisfiable_matches_brute_force():
    for i in range(40):
        rng = spawn(32, "detect", i)
        n = 4 + i % 3
        formula = random_3sat(n, int(rng.integers(2 * n, 5 * n)), rng)
        assert nonlinear.detect_satisfiable(formula, rng) == brute_force_sat(formula)


def test_detect_no_false_positives_on_contradiction():
    # x1 and not x1, padded to width three with a dummy variable pair
    formula = CnfFormula(2, ((1, 2), (1, -2), (-1, 2), (-1, -2)))
    assert brute_force_sat(formula) is False
    for i in range(5):
        assert nonlinear.detect_satisfiable(formula, spawn(33, "unsat", i)) is False


def test_count_solutions_exact():
    for i in range(20):
        rng = spawn(34, "count", i)
        n = 4 + i % 2
        formula = random_3sat(n, int(rng.integers(n, 4 * n)), rng)
        assert nonlinear.count_solutions(formula, rng) == brute_force_count(formula)


def test_count_solutions_default_stream_reproducible():
    formula = random_3sat(4, 9, spawn(35, "repeat"))
    assert nonlinear.count_solutions(formula) == nonlinear.count_solutions(formula)
    assert nonlinear.count_solutions(formula) == brute_force_count(formula)


def test_qbf_chain_exhaustive_two_vars():
    for bits in range(16):
        table = np.array([(bits >> k) & 1 for k in range(4)], dtype=bool)
        qbf = QbfFormula(2, table)
        assert nonlinear.eval_qbf_nonlinear(qbf) == brute_force_qbf(qbf)


@settings(max_examples=30)
@given(st.integers(min_value=3, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_qbf_chain_random_tables(num_vars, salt):
    qbf = random_qbf(num_vars, spawn(36, "qbf", num_vars, salt))
    assert nonlinear.eval_qbf_nonlinear(qbf) == brute_force_qbf(qbf)


def test_error_amplification_trajectory():
    flat = nonlinear.error_amplification(0.0, 50)
    assert flat == [0.0] * 51
    eps = 2.0**-20
    traj = nonlinear.error_amplification(eps, 25)
    assert len(traj) == 26
    assert traj[0] == pytest.approx(eps, rel=1e-12)
    crossing = next(k for k, p in enumerate(traj) if p > 0.5)
    bound = int(np.ceil(np.log2(np.pi / (4 * np.arcsin(np.sqrt(eps)))))) + 1
    assert crossing <= bound
    assert all(b >= a - 1e-15 for a, b in zip(traj, traj[1:]))
    with pytest.raises(ValueError):
        nonlinear.error_amplification(1.5, 3)
    with pytest.raises(ValueError):
        nonlinear.error_amplification(0.5, -1)
