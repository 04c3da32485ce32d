"""Grover simulation against its closed form, plus classical baselines."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exocomp import blackbox
from exocomp.instances import OracleFunction
from exocomp.rng import spawn


@given(
    st.integers(min_value=2, max_value=8),
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=0, max_value=40),
)
def test_simulation_matches_closed_form(num_bits, marked_count, iterations):
    marked = list(range(min(marked_count, 2**num_bits)))
    oracle = OracleFunction.from_marked(num_bits, marked)
    result = blackbox.grover(oracle, iterations)
    expected = blackbox.grover_success_probability(num_bits, len(marked), iterations)
    assert result.success_probability == pytest.approx(expected, abs=1e-9)


def test_query_counter_charges_one_per_iteration():
    oracle = OracleFunction.from_marked(5, [11])
    result = blackbox.grover(oracle, 7)
    assert result.queries_used == 7
    assert oracle.queries == 7
    # a second run keeps charging the same counter
    blackbox.grover(oracle, 3)
    assert oracle.queries == 10


def test_grover_finds_single_marked_item():
    oracle = OracleFunction.from_marked(6, [37])
    k = blackbox.quantum_queries_to_threshold(6)
    result = blackbox.grover(oracle, k)
    assert result.found_index == 37
    assert result.success_probability >= 2.0 / 3.0


def test_grover_input_validation():
    with pytest.raises(ValueError):
        blackbox.grover(OracleFunction.from_marked(3, [1]), -1)
    with pytest.raises(ValueError):
        blackbox.grover(OracleFunction.from_marked(3, []), 2)
    with pytest.raises(ValueError):
        blackbox.grover_success_probability(3, 9, 1)


def test_quantum_queries_near_pi_over_four_sqrt():
    for n in range(4, 13):
        k = blackbox.quantum_queries_to_threshold(n)
        # optimal rotation count is about (pi/4) sqrt(N); threshold 2/3 bites earlier
        assert 1 <= k <= int(np.ceil(np.pi / 4 * np.sqrt(2**n)))
        probs = blackbox.grover_success_probability(n, 1, k)
        assert probs >= 2.0 / 3.0
        if k > 0:
            assert blackbox.grover_success_probability(n, 1, k - 1) < 2.0 / 3.0


def test_classical_search_mean_and_exhaustion():
    n = 8
    total = 0
    for i in range(600):
        rng = spawn(41, "classical", i)
        marked = int(rng.integers(2**n))
        oracle = OracleFunction.from_marked(n, [marked])
        result = blackbox.classical_search(oracle, rng)
        assert result.found_index == marked
        total += result.queries_used
    mean = total / 600
    assert mean == pytest.approx((2**n + 1) / 2, rel=0.1)

    empty = OracleFunction.from_marked(4, [])
    result = blackbox.classical_search(empty, spawn(41, "empty"))
    assert result.found_index is None
    assert result.queries_used == 16
    assert result.success_probability == 0.0


def test_scaling_experiment_exponent():
    rng = spawn(42, "scaling")
    out = blackbox.scaling_experiment(range(4, 15), trials=4, rng=rng)
    assert len(out["rows"]) == 11
    assert 0.4 <= out["fitted_exponent"] <= 0.6
    for big_n, k_quantum, mean_classical in out["rows"]:
        assert k_quantum <= mean_classical  # quantum wins at every size here
    with pytest.raises(ValueError):
        blackbox.scaling_experiment([1, 4], trials=2, rng=rng)
    with pytest.raises(ValueError):
        blackbox.scaling_experiment([4, 5], trials=0, rng=rng)


def test_search_result_validation():
    with pytest.raises(ValueError):
        blackbox.SearchResult(found_index=0, queries_used=-1, success_probability=0.5)
    with pytest.raises(ValueError):
        blackbox.SearchResult(found_index=0, queries_used=1, success_probability=1.5)
