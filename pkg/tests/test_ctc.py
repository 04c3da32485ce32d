"""Closed-timelike-curve models: cycle structure, fixed points, amplification."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exocomp import ctc, qsim
from exocomp.instances import (
    CnfFormula,
    FormatError,
    brute_force_qbf,
    brute_force_sat,
    compile_qbf_machine,
    index_assignment,
    random_3sat,
    random_qbf,
    run_machine,
)
from exocomp.rng import spawn


# ---------------------------------------------------------------------------
# Function tables and serialization


def test_function_table_validation():
    with pytest.raises(ValueError):
        ctc.FunctionTable(0, np.array([0]))
    with pytest.raises(ValueError):
        ctc.FunctionTable(2, np.array([0, 1, 2]))  # wrong length
    with pytest.raises(ValueError):
        ctc.FunctionTable(1, np.array([0, 2]))  # entry out of range
    table = ctc.FunctionTable(2, np.array([1, 2, 3, 0]))
    assert table(3) == 0
    with pytest.raises(ValueError):
        table.table[0] = 0  # frozen storage


def test_table_bytes_roundtrip():
    rng = spawn(71, "bytes")
    for bits in (1, 3, 6):
        table = ctc.FunctionTable(bits, rng.integers(2**bits, size=2**bits))
        back = ctc.FunctionTable.from_bytes(table.to_bytes())
        assert back.num_bits == bits
        assert np.array_equal(back.table, table.table)


def test_table_bytes_error_diagnostics():
    good = ctc.FunctionTable(2, np.array([0, 1, 2, 3])).to_bytes()
    with pytest.raises(FormatError, match="magic"):
        ctc.FunctionTable.from_bytes(b"XXXXX" + good[5:])
    with pytest.raises(FormatError, match="truncated"):
        ctc.FunctionTable.from_bytes(good[:7])
    with pytest.raises(FormatError, match="bit count"):
        ctc.FunctionTable.from_bytes(good[:5] + (99).to_bytes(4, "little") + good[9:])
    with pytest.raises(FormatError, match="body"):
        ctc.FunctionTable.from_bytes(good + b"\x00")
    # corrupting a body byte produces an out-of-range entry, caught by the
    # table validator rather than the framing parser
    corrupted = bytearray(good)
    corrupted[-1] = 0xFF
    with pytest.raises(ValueError):
        ctc.FunctionTable.from_bytes(bytes(corrupted))


# ---------------------------------------------------------------------------
# Cycle decomposition and exact stationary distributions


def test_cycle_decompose_identity_and_rotation():
    identity = ctc.FunctionTable(3, np.arange(8))
    dec = ctc.cycle_decompose(identity)
    assert len(dec.cycles) == 8
    assert all(len(c) == 1 for c in dec.cycles)
    assert dec.basin_sizes == (1,) * 8

    rotation = ctc.FunctionTable(3, (np.arange(8) + 1) % 8)
    dec = ctc.cycle_decompose(rotation)
    assert len(dec.cycles) == 1
    assert sorted(dec.cycles[0]) == list(range(8))
    assert dec.basin_sizes == (8,)


def test_cycle_decompose_tree_drains_to_fixed_point():
    # everything maps to its floor half: 0 is the unique fixed point
    table = ctc.FunctionTable(3, np.arange(8) // 2)
    dec = ctc.cycle_decompose(table)
    assert dec.cycles == ((0,),)
    assert dec.basin_sizes == (8,)


@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=10**9))
def test_cycle_decompose_invariants(bits, salt):
    rng = spawn(72, "cycles", bits, salt)
    table = ctc.FunctionTable(bits, rng.integers(2**bits, size=2**bits))
    dec = ctc.cycle_decompose(table)
    seen: set[int] = set()
    for cyc in dec.cycles:
        assert not seen.intersection(cyc)
        seen.update(cyc)
        for i, v in enumerate(cyc):
            assert table(v) == cyc[(i + 1) % len(cyc)]
    assert sum(dec.basin_sizes) == 2**bits
    assert all(b >= len(c) for b, c in zip(dec.basin_sizes, dec.cycles))
    # iterating any vertex 2^bits times must land on some cycle
    x = 0
    for _ in range(2**bits):
        x = table(x)
    assert any(x in cyc for cyc in dec.cycles)


@given(st.integers(min_value=1, max_value=7), st.integers(min_value=0, max_value=10**9))
def test_stationary_distribution_is_exactly_invariant(bits, salt):
    rng = spawn(73, "stationary", bits, salt)
    table = ctc.FunctionTable(bits, rng.integers(2**bits, size=2**bits))
    dist = ctc.stationary_distribution(ctc.cycle_decompose(table))
    assert sum(dist.values()) == Fraction(1)
    assert ctc.push_forward(table, dist) == dist


def test_stationary_custom_weights():
    table = ctc.FunctionTable(2, np.array([0, 1, 3, 2]))  # two fixed, one 2-cycle
    dec = ctc.cycle_decompose(table)
    assert len(dec.cycles) == 3
    weights = [Fraction(1, 2), Fraction(1, 2), Fraction(0)]
    dist = ctc.stationary_distribution(dec, weights)
    assert ctc.push_forward(table, dist) == dist
    assert set(dist) == set(dec.cycles[0]) | set(dec.cycles[1])
    with pytest.raises(ValueError):
        ctc.stationary_distribution(dec, [Fraction(1)])
    with pytest.raises(ValueError):
        ctc.stationary_distribution(dec, [Fraction(1), Fraction(1), Fraction(-1)])
    with pytest.raises(ValueError):
        ctc.stationary_distribution(dec, [Fraction(1, 3), Fraction(1, 3), Fraction(1, 4)])


# ---------------------------------------------------------------------------
# The NP and PSPACE constructions


def test_np_table_structure():
    formula = CnfFormula(3, ((1, 2, 3),))
    table = ctc.build_np_table(formula)
    for x in range(8):
        assignment = index_assignment(x, 3)
        if formula.evaluate(assignment):
            assert table(x) == x
        else:
            assert table(x) == (x + 1) % 8


def test_solve_np_matches_enumeration():
    for i in range(60):
        rng = spawn(74, "np", i)
        n = 4 + i % 6
        formula = random_3sat(n, int(rng.integers(2 * n, 5 * n)), rng)
        out = ctc.solve_np_ctc(formula, rng, adversarial=i % 2 == 0)
        if brute_force_sat(formula):
            assert isinstance(out, tuple)
            assert formula.evaluate(out)
        else:
            assert out == ctc.UNSATISFIABLE


def test_solve_np_unsatisfiable_single_cycle():
    contradiction = CnfFormula(2, ((1, 2), (1, -2), (-1, 2), (-1, -2)))
    dec = ctc.cycle_decompose(ctc.build_np_table(contradiction))
    assert len(dec.cycles) == 1
    assert len(dec.cycles[0]) == 4
    assert ctc.solve_np_ctc(contradiction, spawn(74, "contra")) == ctc.UNSATISFIABLE


def test_pspace_single_cycle_carries_verdict():
    for i in range(40):
        rng = spawn(75, "pspace", i)
        qbf = random_qbf(3 + i % 2, rng)
        machine = compile_qbf_machine(qbf)
        dec = ctc.cycle_decompose(ctc.build_pspace_table(machine))
        assert len(dec.cycles) == 1
        cycle = dec.cycles[0]
        assert len(cycle) == len(run_machine(machine))
        bits = {v & 1 for v in cycle}
        assert len(bits) == 1
        expected = brute_force_qbf(qbf)
        assert ctc.solve_pspace_ctc(machine, rng) == expected
        assert bits == {int(expected)}


# ---------------------------------------------------------------------------
# Deutsch fixed points


def test_identity_channel_maximally_mixed():
    fp = ctc.deutsch_fixed_point(np.eye(4), 0, 2)
    assert np.abs(fp.rho.matrix - np.eye(4) / 4).max() < 1e-9
    assert fp.residual <= 1e-8
    assert fp.rho.von_neumann_entropy() == pytest.approx(2 * np.log(2), abs=1e-9)


def test_not_gate_fixed_point_is_even_mixture():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    fp = ctc.deutsch_fixed_point(x, 0, 1)
    assert np.abs(fp.rho.matrix - np.eye(2) / 2).max() < 1e-9


def test_swap_reset_channel_pure_fixed_point():
    # SWAP with a |0> ancilla resets the CTC qubit: the unique fixed point
    # is |0><0|, entropy zero, despite the channel being non-unital
    swap = np.eye(4)[[0, 2, 1, 3]]
    fp = ctc.deutsch_fixed_point(swap, 1, 1)
    assert np.abs(fp.rho.matrix - np.diag([1.0, 0.0])).max() < 1e-8
    assert fp.residual <= 1e-8


def test_dephasing_channel_picks_uniform_diagonal():
    # CNOT with the CTC qubit as control dephases it; all diagonal states
    # are fixed and the entropy maximizer is I/2
    cnot_lsb_control = np.eye(4)[[0, 3, 2, 1]]
    fp = ctc.deutsch_fixed_point(cnot_lsb_control, 1, 1)
    assert np.abs(fp.rho.matrix - np.eye(2) / 2).max() < 1e-9


def test_haar_random_residuals():
    for i in range(12):
        rng = spawn(76, "haar", i)
        num_a, num_b = [(0, 1), (1, 1), (1, 2), (2, 2)][i % 4]
        dim = 2 ** (num_a + num_b)
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(z)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        fp = ctc.deutsch_fixed_point(u, num_a, num_b)
        assert fp.residual <= 1e-8
        assert fp.rho.von_neumann_entropy() >= -1e-12


def test_fixed_point_validation():
    with pytest.raises(ValueError):
        ctc.deutsch_fixed_point(np.eye(2**8), 1, 7)  # CTC register too large
    with pytest.raises(ValueError):
        ctc.CtcFixedPoint(qsim.DensityMatrix(1, np.eye(2) / 2), residual=1.0)


# ---------------------------------------------------------------------------
# Bacon's probability amplifier


@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=0, max_value=12))
def test_bacon_closed_form(p0, k):
    traj = ctc.bacon_iterate(p0, k)
    assert len(traj) == k + 1
    for step in range(k + 1):
        expected = (1.0 - (1.0 - 2.0 * p0) ** (2**step)) / 2.0
        assert traj[step] == pytest.approx(expected, abs=1e-9)


def test_bacon_gate_matches_scalar_iteration():
    for p0 in np.linspace(0.0, 1.0, 21):
        a = ctc.bacon_iterate(float(p0), 30)
        b = ctc.bacon_iterate_gate(float(p0), 30)
        assert np.abs(a - b).max() < 1e-12


def test_bacon_fixed_points_and_validation():
    assert ctc.bacon_iterate(0.0, 1000)[-1] == 0.0
    assert ctc.bacon_iterate(0.5, 1000)[-1] == 0.5
    assert ctc.bacon_iterate(1.0, 1)[-1] == 0.0  # certain bit XORs to zero
    with pytest.raises(ValueError):
        ctc.bacon_iterate(-0.1, 3)
    with pytest.raises(ValueError):
        ctc.bacon_iterate(0.5, -1)


def test_bacon_amplifies_tiny_bias_quickly():
    traj = ctc.bacon_iterate(2.0**-20, 25)
    hits = np.nonzero(traj >= 1.0 / 3.0)[0]
    assert hits.size > 0
    assert hits[0] <= 25


def test_bacon_detect_matches_enumeration():
    for i in range(60):
        rng = spawn(77, "detect", i)
        n = 4 + i % 5
        formula = random_3sat(n, int(rng.integers(2 * n, 5 * n)), rng)
        assert ctc.bacon_detect(formula, rng) == brute_force_sat(formula)


def test_bacon_detect_tautology_and_contradiction():
    tautology = CnfFormula(2, ())
    assert ctc.bacon_detect(tautology, spawn(77, "taut")) is True
    contradiction = CnfFormula(2, ((1, 2), (1, -2), (-1, 2), (-1, -2)))
    for i in range(5):
        assert ctc.bacon_detect(contradiction, spawn(77, "contra", i)) is False
