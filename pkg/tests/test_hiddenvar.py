"""Permutation-register isomorphism test and its Lehmer-code plumbing."""

import itertools
from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exocomp import hiddenvar, qsim
from exocomp.instances import (
    Graph,
    brute_force_isomorphic,
    permute_graph,
    random_automorphism_free_graph,
    random_graph_pair,
)
from exocomp.rng import spawn


def test_rank_matches_lexicographic_order():
    for n in range(1, 6):
        for rank, perm in enumerate(itertools.permutations(range(n))):
            assert hiddenvar.permutation_rank(perm) == rank
            assert hiddenvar.rank_permutation(rank, n) == perm


@given(st.integers(min_value=1, max_value=7), st.integers(min_value=0, max_value=10**9))
def test_rank_roundtrip(n, salt):
    rank = salt % factorial(n)
    assert hiddenvar.permutation_rank(hiddenvar.rank_permutation(rank, n)) == rank


def test_rank_validation():
    with pytest.raises(ValueError):
        hiddenvar.permutation_rank((0, 0, 1))
    with pytest.raises(ValueError):
        hiddenvar.permutation_rank((1, 2, 3))
    with pytest.raises(ValueError):
        hiddenvar.rank_permutation(6, 3)
    with pytest.raises(ValueError):
        hiddenvar.rank_permutation(-1, 3)


def test_prepared_state_structure():
    rng = spawn(61, "prep")
    g = random_automorphism_free_graph(6, rng)
    sigma = tuple(int(x) for x in rng.permutation(6))
    h = permute_graph(g, sigma)
    state = hiddenvar.prepare_gi_state(g, h)
    amps = state.amplitudes
    assert len(amps) == 2 * factorial(6)
    expected = 1.0 / np.sqrt(2 * factorial(6))
    assert all(abs(a - expected) < 1e-12 for a in amps.values())
    branches = {label[0] for label in amps}
    assert branches == {0, 1}


def test_collapse_support_two_when_isomorphic():
    rng = spawn(62, "collapse-iso")
    g, h = random_graph_pair(6, isomorphic=True, rng=rng)
    for i in range(10):
        inner = spawn(62, "collapse-iso-run", i)
        collapsed = hiddenvar.collapse_third_register(
            hiddenvar.prepare_gi_state(g, h), inner
        )
        assert collapsed.support_size() == 2
        labels = list(collapsed.amplitudes)
        assert {lab[0] for lab in labels} == {0, 1}
        assert labels[0][1] != labels[1][1]  # distinct permutations
        assert labels[0][2] == labels[1][2]  # same measured image


def test_collapse_support_one_when_not_isomorphic():
    rng = spawn(63, "collapse-non")
    g, h = random_graph_pair(6, isomorphic=False, rng=rng)
    for i in range(10):
        inner = spawn(63, "collapse-non-run", i)
        collapsed = hiddenvar.collapse_third_register(
            hiddenvar.prepare_gi_state(g, h), inner
        )
        assert collapsed.support_size() == 1


def test_decide_matches_brute_force():
    for i in range(30):
        rng = spawn(64, "decide", i)
        g, h = random_graph_pair(6, isomorphic=i % 2 == 0, rng=rng)
        expected = brute_force_isomorphic(g, h)
        assert expected == (i % 2 == 0)
        assert hiddenvar.decide_isomorphic(g, h, k=30, rng=rng) == expected


def test_decide_identical_inputs_short_circuit():
    g = random_automorphism_free_graph(6, spawn(65, "same"))
    assert hiddenvar.decide_isomorphic(g, g, rng=spawn(65, "same-rng")) is True


def test_decide_input_validation():
    rng = spawn(66, "reject")
    g = random_automorphism_free_graph(6, rng)
    path = Graph.from_edges(6, [(i, i + 1) for i in range(5)])  # reversal symmetry
    with pytest.raises(ValueError):
        hiddenvar.decide_isomorphic(path, g, rng=rng)
    with pytest.raises(ValueError):
        hiddenvar.decide_isomorphic(g, path, rng=rng)
    with pytest.raises(ValueError):
        hiddenvar.decide_isomorphic(g, g, k=1, rng=rng)
    with pytest.raises(ValueError):
        hiddenvar.decide_isomorphic(g, g, rng=None)
    big = Graph.from_edges(8, [(0, 1)])
    with pytest.raises(ValueError):
        hiddenvar.prepare_gi_state(big, big)
    with pytest.raises(ValueError):
        hiddenvar.prepare_gi_state(g, Graph.from_edges(5, [(0, 1)]))


def test_peek_error_rate_is_one_sided():
    # false negatives need every peek in one branch: probability 2^-(k-1)
    rng = spawn(67, "onesided")
    g, h = random_graph_pair(6, isomorphic=False, rng=rng)
    for i in range(20):
        assert not hiddenvar.decide_isomorphic(g, h, k=2, rng=spawn(67, "run", i))
