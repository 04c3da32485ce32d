import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from exocomp import instances
from exocomp.instances import (
    CnfFormula,
    FormatError,
    Graph,
    OracleFunction,
    QbfFormula,
    brute_force_count,
    brute_force_isomorphic,
    brute_force_qbf,
    brute_force_sat,
    compile_qbf_machine,
    emit_dimacs,
    emit_graph,
    emit_qdimacs,
    index_assignment,
    parse_dimacs,
    parse_graph,
    parse_qdimacs,
    permute_graph,
    random_3sat,
    run_machine,
    satisfying_mask,
)
from exocomp.rng import spawn


def test_index_assignment_is_msb_first():
    # variable 1 owns the most significant bit of the index
    assert index_assignment(0b100, 3) == (1, 0, 0)
    assert index_assignment(0b001, 3) == (0, 0, 1)
    assert instances.assignment_index((1, 0, 1)) == 0b101


def test_satisfying_mask_matches_evaluate():
    formula = CnfFormula(3, ((1, -2, 3), (-1, 2, -3)))
    mask = satisfying_mask(formula)
    for idx in range(8):
        assert mask[idx] == formula.evaluate(index_assignment(idx, 3))
    assert brute_force_count(formula) == int(mask.sum())
    assert brute_force_sat(formula) == bool(mask.any())


def test_clause_validation():
    CnfFormula(3, ((1, -2),))  # general CNF widths are fine
    with pytest.raises(ValueError):
        CnfFormula(3, ((1, 1, 2),))  # repeated variable
    with pytest.raises(ValueError):
        CnfFormula(3, ((1, 2, 4),))  # out of range
    with pytest.raises(ValueError):
        CnfFormula(3, ((1, 0, 2),))  # zero is not a literal


@given(st.integers(min_value=3, max_value=8), st.integers(min_value=0, max_value=10**6))
def test_dimacs_roundtrip(num_vars, salt):
    rng = spawn(21, "dimacs", num_vars, salt)
    formula = random_3sat(num_vars, int(rng.integers(1, 4 * num_vars)), rng)
    assert parse_dimacs(emit_dimacs(formula)) == formula


@pytest.mark.parametrize(
    "text",
    [
        "",
        "p cnf 3\n1 2 3 0\n",
        "p cnf 3 2\n1 2 3 0\n",
        "p cnf 3 1\n1 2 9 0\n",
        "garbage\n1 2 3 0\n",
    ],
)
def test_dimacs_errors(text):
    with pytest.raises(FormatError):
        parse_dimacs(text)


def test_qbf_quantifiers_alternate_from_exists():
    assert instances.quantifier(1) == instances.EXISTS
    assert instances.quantifier(2) == instances.FORALL
    # exists x1 forall x2: x1 == x2 is false; exists x1 exists x2 would be true
    table = np.array([True, False, False, True])
    assert brute_force_qbf(QbfFormula(2, table)) is False
    # exists x1 forall x2: table true everywhere except 00
    assert brute_force_qbf(QbfFormula(2, np.array([False, True, True, True]))) is True


def test_qdimacs_roundtrip_and_errors():
    formula = CnfFormula(3, ((1, -2, 3),))
    qbf = QbfFormula(3, formula)
    assert parse_qdimacs(emit_qdimacs(qbf)) == qbf
    with pytest.raises(FormatError):
        parse_qdimacs("p cnf 2 1\n1 -2 0\n")  # missing quantifier prefix


def test_graph_and_permutation():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    sigma = (3, 2, 1, 0)
    h = permute_graph(g, sigma)
    assert brute_force_isomorphic(g, h)
    assert g.degree_sequence() == tuple(reversed(h.degree_sequence()))
    back = parse_graph(emit_graph(g))
    assert back.num_vertices == g.num_vertices
    assert np.array_equal(back.adjacency, g.adjacency)


def test_non_isomorphic_same_degrees():
    # triangle plus isolated edge vs path of five vertices and one pendant:
    # build two 6-vertex graphs with equal degree sequences, different structure
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    h = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
    assert sorted(g.degree_sequence()) == sorted(h.degree_sequence())
    assert not brute_force_isomorphic(g, h)
    assert instances.find_isomorphism(g, h) is None


def test_automorphism_free_detection():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])  # swap endpoints
    assert not instances.automorphism_free(path)
    rng = spawn(22, "rigid")
    g = instances.random_automorphism_free_graph(6, rng)
    assert instances.automorphism_free(g)


def test_oracle_counts_queries():
    oracle = OracleFunction.from_marked(4, [7])
    assert oracle.queries == 0
    assert oracle.query(7) is True
    assert oracle.query(3) is False
    assert oracle.queries == 2
    with pytest.raises(ValueError):
        oracle.query(16)


def test_machine_runs_to_halt_and_classifies():
    qbf = QbfFormula(2, np.array([False, True, True, True]))
    machine = compile_qbf_machine(qbf)
    path = run_machine(machine)
    verdict = machine.classify(path[-1])
    assert verdict in ("accept", "reject")
    assert (verdict == "accept") == brute_force_qbf(qbf)


@given(st.integers(min_value=0, max_value=255))
def test_compiled_machine_agrees_with_table_fold(bits):
    table = np.array([(bits >> i) & 1 == 1 for i in range(8)])
    qbf = QbfFormula(3, table)
    machine = compile_qbf_machine(qbf)
    path = run_machine(machine)
    assert (machine.classify(path[-1]) == "accept") == brute_force_qbf(qbf)
