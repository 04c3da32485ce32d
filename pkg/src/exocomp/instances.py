"""Problem instances, file formats, generators, and brute-force oracles.

Assignment convention (shared with :mod:`exocomp.qsim`): variable ``i``
(1-indexed) lives on qubit ``i - 1``, i.e. it is bit ``n - i`` of the
assignment index, so the index's binary expansion read left to right is
``x_1 x_2 ... x_n``. Every brute-force oracle here is the authority the
fancier simulations are tested against, so these stay deliberately dumb:
full enumeration, no shortcuts beyond vectorization.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

MAX_SAT_VARS = 20
MAX_QBF_VARS = 10
MAX_GRAPH_VERTICES = 8

EXISTS = "exists"
FORALL = "forall"


class FormatError(ValueError):
    """A problem file failed to parse; the message says where and why."""


# ---------------------------------------------------------------------------
# CNF formulas


@dataclass(frozen=True)
class CnfFormula:
    """CNF over variables 1..num_vars; a literal is +v or -v, never 0."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not 1 <= self.num_vars <= MAX_SAT_VARS:
            raise ValueError(f"num_vars must be in [1, {MAX_SAT_VARS}], got {self.num_vars}")
        clauses = tuple(tuple(int(lit) for lit in clause) for clause in self.clauses)
        for clause in clauses:
            seen = set()
            for lit in clause:
                v = abs(lit)
                if lit == 0 or v > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
                if v in seen:
                    raise ValueError(f"variable {v} repeated within clause {clause}")
                seen.add(v)
        object.__setattr__(self, "clauses", clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def evaluate(self, assignment: Sequence[int]) -> bool:
        """Evaluate under ``assignment[i]`` = value of variable i+1 (0/1)."""
        if len(assignment) != self.num_vars:
            raise ValueError(f"assignment has {len(assignment)} values, expected {self.num_vars}")
        for clause in self.clauses:
            if not any(
                bool(assignment[abs(lit) - 1]) == (lit > 0) for lit in clause
            ):
                return False
        return True


def assignment_index(assignment: Sequence[int]) -> int:
    """Pack an assignment (variable 1 first) into its basis index."""
    index = 0
    for value in assignment:
        index = (index << 1) | (int(value) & 1)
    return index


def index_assignment(index: int, num_vars: int) -> tuple[int, ...]:
    """Unpack a basis index into an assignment tuple (variable 1 first)."""
    return tuple((index >> (num_vars - i)) & 1 for i in range(1, num_vars + 1))


def satisfying_mask(formula: CnfFormula) -> np.ndarray:
    """Boolean vector over all 2^n assignment indices: True where satisfied."""
    n = formula.num_vars
    idx = np.arange(2**n, dtype=np.uint32)
    mask = np.ones(2**n, dtype=bool)
    for clause in formula.clauses:
        clause_sat = np.zeros(2**n, dtype=bool)
        for lit in clause:
            bit = (idx >> (n - abs(lit))) & 1
            clause_sat |= bit == (1 if lit > 0 else 0)
        mask &= clause_sat
    return mask


def brute_force_count(formula: CnfFormula) -> int:
    """Exact number of satisfying assignments, by full enumeration."""
    return int(satisfying_mask(formula).sum())


def brute_force_sat(formula: CnfFormula) -> bool:
    return bool(satisfying_mask(formula).any())


# ---------------------------------------------------------------------------
# Quantified Boolean formulas (alternating quantifiers, innermost last)


QbfMatrix = Union[CnfFormula, np.ndarray]


def quantifier(var: int) -> str:
    """Quantifier on variable ``var``: exists on odd positions, forall on even."""
    return EXISTS if var % 2 == 1 else FORALL


@dataclass(frozen=True)
class QbfFormula:
    """Prenex QBF: exists x1 forall x2 exists x3 ... over a Boolean matrix.

    The matrix is either a :class:`CnfFormula` or an explicit truth table
    (bool array of length 2^num_vars, indexed by assignment index).
    """

    num_vars: int
    matrix: QbfMatrix

    def __post_init__(self) -> None:
        if not 1 <= self.num_vars <= MAX_QBF_VARS:
            raise ValueError(f"num_vars must be in [1, {MAX_QBF_VARS}], got {self.num_vars}")
        if isinstance(self.matrix, CnfFormula):
            if self.matrix.num_vars != self.num_vars:
                raise ValueError(
                    f"matrix has {self.matrix.num_vars} variables, expected {self.num_vars}"
                )
        else:
            table = np.asarray(self.matrix, dtype=bool)
            if table.shape != (2**self.num_vars,):
                raise ValueError(
                    f"truth table has shape {table.shape}, expected {(2**self.num_vars,)}"
                )
            table = table.copy()
            table.setflags(write=False)
            object.__setattr__(self, "matrix", table)

    def truth_table(self) -> np.ndarray:
        if isinstance(self.matrix, CnfFormula):
            return satisfying_mask(self.matrix)
        return self.matrix


def brute_force_qbf(qbf: QbfFormula) -> bool:
    """Evaluate the QBF by folding the truth table from the innermost variable."""
    table = qbf.truth_table().copy()
    for var in range(qbf.num_vars, 0, -1):
        zeros, ones = table[0::2], table[1::2]
        table = (zeros | ones) if quantifier(var) == EXISTS else (zeros & ones)
    return bool(table[0])


# ---------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph given by a symmetric adjacency matrix."""

    num_vertices: int
    adjacency: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_vertices <= MAX_GRAPH_VERTICES:
            raise ValueError(
                f"num_vertices must be in [1, {MAX_GRAPH_VERTICES}], got {self.num_vertices}"
            )
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.num_vertices, self.num_vertices):
            raise ValueError(f"adjacency has shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency matrix is not symmetric")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, num_vertices: int, edges: Sequence[tuple[int, int]]) -> "Graph":
        adj = np.zeros((num_vertices, num_vertices), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u, v] = adj[v, u] = True
        return cls(num_vertices, adj)

    def edges(self) -> tuple[tuple[int, int], ...]:
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return tuple(zip(rows.tolist(), cols.tolist()))

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.adjacency.sum(axis=0))


def permute_graph(graph: Graph, sigma: Sequence[int]) -> Graph:
    """Image of the graph under vertex relabeling ``u -> sigma[u]``."""
    perm = np.asarray(sigma, dtype=int)
    n = graph.num_vertices
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError(f"{tuple(sigma)} is not a permutation of 0..{n - 1}")
    adj = np.zeros_like(graph.adjacency)
    adj[np.ix_(perm, perm)] = graph.adjacency
    return Graph(n, adj)


def _degree_respecting_permutations(g: Graph, h: Graph):
    """Yield candidate vertex bijections mapping g onto h's degree classes."""
    if sorted(g.degree_sequence()) != sorted(h.degree_sequence()):
        return
    by_degree_h: dict[int, list[int]] = {}
    for v, d in enumerate(h.degree_sequence()):
        by_degree_h.setdefault(d, []).append(v)
    by_degree_g: dict[int, list[int]] = {}
    for v, d in enumerate(g.degree_sequence()):
        by_degree_g.setdefault(d, []).append(v)
    degrees = sorted(by_degree_g)
    pools = [itertools.permutations(by_degree_h[d]) for d in degrees]
    g_order = [v for d in degrees for v in by_degree_g[d]]
    for choice in itertools.product(*pools):
        images = [v for block in choice for v in block]
        sigma = [0] * g.num_vertices
        for src, dst in zip(g_order, images):
            sigma[src] = dst
        yield tuple(sigma)


def brute_force_isomorphic(g: Graph, h: Graph) -> bool:
    """Exact isomorphism test by enumerating degree-respecting bijections."""
    if g.num_vertices != h.num_vertices:
        return False
    target = h.adjacency
    for sigma in _degree_respecting_permutations(g, h):
        if np.array_equal(permute_graph(g, sigma).adjacency, target):
            return True
    return False


def find_isomorphism(g: Graph, h: Graph) -> tuple[int, ...] | None:
    if g.num_vertices != h.num_vertices:
        return None
    for sigma in _degree_respecting_permutations(g, h):
        if np.array_equal(permute_graph(g, sigma).adjacency, h.adjacency):
            return sigma
    return None


def automorphism_free(graph: Graph) -> bool:
    """True when the identity is the graph's only automorphism."""
    identity = tuple(range(graph.num_vertices))
    for sigma in _degree_respecting_permutations(graph, graph):
        if sigma == identity:
            continue
        if np.array_equal(permute_graph(graph, sigma).adjacency, graph.adjacency):
            return False
    return True


# ---------------------------------------------------------------------------
# Black-box oracle functions with an exact query counter


@dataclass
class OracleFunction:
    """Boolean function on n-bit inputs behind a query counter.

    The counter increments by exactly one per query, whether the query is
    classical (:meth:`query`) or a single application of the quantum oracle
    (:meth:`phase_flip` / :meth:`xor_into`). Everything else about the
    function is off limits to algorithms under test; only oracles and tests
    may look at :attr:`table` directly.
    """

    num_bits: int
    table: np.ndarray
    queries: int = field(default=0)

    def __post_init__(self) -> None:
        if not 1 <= self.num_bits <= MAX_SAT_VARS:
            raise ValueError(f"num_bits must be in [1, {MAX_SAT_VARS}], got {self.num_bits}")
        table = np.asarray(self.table, dtype=bool)
        if table.shape != (2**self.num_bits,):
            raise ValueError(f"table has shape {table.shape}, expected {(2**self.num_bits,)}")
        table = table.copy()
        table.setflags(write=False)
        self.table = table

    @classmethod
    def from_marked(cls, num_bits: int, marked: Sequence[int]) -> "OracleFunction":
        table = np.zeros(2**num_bits, dtype=bool)
        table[list(marked)] = True
        return cls(num_bits, table)

    @classmethod
    def from_formula(cls, formula: CnfFormula) -> "OracleFunction":
        return cls(formula.num_vars, satisfying_mask(formula))

    @property
    def marked_count(self) -> int:
        return int(self.table.sum())

    def query(self, x: int) -> bool:
        if not 0 <= x < 2**self.num_bits:
            raise ValueError(f"query {x} out of range")
        self.queries += 1
        return bool(self.table[x])

    def phase_flip(self, state):
        """One quantum query: negate the amplitude of every marked index."""
        from . import qsim

        if state.num_qubits != self.num_bits:
            raise ValueError("state size does not match oracle arity")
        self.queries += 1
        amps = state.amplitudes.copy()
        amps[self.table] *= -1
        return qsim.PureState(state.num_qubits, amps)

    def xor_into(self, state, flag_qubit: int):
        """One quantum query: |x>|b> -> |x>|b xor f(x)> with x on the other qubits."""
        from . import qsim

        n = state.num_qubits
        if n != self.num_bits + 1:
            raise ValueError("state must have one flag qubit beyond the oracle arity")
        if not 0 <= flag_qubit < n:
            raise ValueError(f"flag qubit {flag_qubit} out of range")
        self.queries += 1
        perm = np.arange(2**n)
        x_of = _drop_bit(perm, n, flag_qubit)
        flip = self.table[x_of]
        flag_bit_mask = 1 << (n - 1 - flag_qubit)
        perm = np.where(flip, perm ^ flag_bit_mask, perm)
        amps = np.empty_like(state.amplitudes)
        amps[perm] = state.amplitudes
        return qsim.PureState(n, amps)


def _drop_bit(indices: np.ndarray, width: int, qubit: int) -> np.ndarray:
    """Remove one qubit's bit from big-endian indices, keeping the others' order."""
    shift = width - 1 - qubit
    high = indices >> (shift + 1)
    low = indices & ((1 << shift) - 1)
    return (high << shift) | low


# ---------------------------------------------------------------------------
# Space-bounded machines (deterministic, explicitly enumerable)


@dataclass(frozen=True)
class SpaceBoundedMachine:
    """Deterministic machine over a finite configuration set.

    ``next_config`` must be a pure function; halting configurations (those
    classified accept/reject) are fixed points of it. ``bound`` is the
    promised halting horizon from ``start``.
    """

    configurations: tuple
    start: Any
    next_config: Callable[[Any], Any]
    classify: Callable[[Any], str]
    bound: int

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if self.start not in set(self.configurations):
            raise ValueError("start configuration is not in the configuration set")


def run_machine(machine: SpaceBoundedMachine) -> list:
    """Run from start to the halting configuration (inclusive).

    Raises if the machine exceeds its bound or revisits a configuration
    before halting.
    """
    path = [machine.start]
    seen = {machine.start}
    config = machine.start
    while machine.classify(config) == "running":
        if len(path) > machine.bound:
            raise RuntimeError(f"machine exceeded its step bound {machine.bound}")
        config = machine.next_config(config)
        if machine.classify(config) == "running" and config in seen:
            raise RuntimeError(f"machine revisited configuration {config!r} before halting")
        seen.add(config)
        path.append(config)
    return path


def compile_qbf_machine(qbf: QbfFormula) -> SpaceBoundedMachine:
    """Deterministic QBF evaluator as a space-bounded machine.

    Configurations are ("run", assignment counter, quantifier-evaluation
    stack) plus the two halting configurations ("accept",) and ("reject",).
    The stack holds (level, value) pairs; a leaf enters at level n and two
    entries at the same level merge under that level's quantifier. The run
    from start is a simple path: the counter only increases, so no
    configuration repeats, and it halts within 2^(n+2) steps.
    """
    n = qbf.num_vars
    table = qbf.truth_table()
    total = 2**n

    def next_config(config):
        if config[0] != "run":
            return config
        _, x, stack = config
        if x < total:
            stack = stack + ((n, bool(table[x])),)
            while len(stack) >= 2 and stack[-1][0] == stack[-2][0]:
                level, right = stack[-1]
                _, left = stack[-2]
                if quantifier(level) == EXISTS:
                    value = left or right
                else:
                    value = left and right
                stack = stack[:-2] + ((level - 1, value),)
            return ("run", x + 1, stack)
        return ("accept",) if stack[0][1] else ("reject",)

    def classify(config):
        if config == ("accept",):
            return "accept"
        if config == ("reject",):
            return "reject"
        return "running"

    start = ("run", 0, ())
    config = start
    path = [config]
    while classify(config) == "running":
        config = next_config(config)
        path.append(config)
    return SpaceBoundedMachine(
        configurations=tuple(path),
        start=start,
        next_config=next_config,
        classify=classify,
        bound=2 ** (n + 2),
    )


# ---------------------------------------------------------------------------
# DIMACS / QDIMACS / edge-list parsing and emission


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF: "p cnf <vars> <clauses>" then 0-terminated clauses."""
    num_vars = None
    declared_clauses = None
    literals: list[int] = []
    clauses: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise FormatError(f"line {lineno}: duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(f"line {lineno}: malformed problem line {line!r}")
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: non-integer counts in {line!r}") from exc
            continue
        if num_vars is None:
            raise FormatError(f"line {lineno}: clause data before the problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad literal {tok!r}") from exc
            if lit == 0:
                clauses.append(tuple(literals))
                literals = []
            else:
                literals.append(lit)
    if num_vars is None:
        raise FormatError("missing problem line 'p cnf <vars> <clauses>'")
    if literals:
        raise FormatError("final clause is not terminated by 0")
    if declared_clauses != len(clauses):
        raise FormatError(
            f"problem line declares {declared_clauses} clauses but {len(clauses)} present"
        )
    try:
        return CnfFormula(num_vars, tuple(clauses))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def emit_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def parse_qdimacs(text: str) -> QbfFormula:
    """Parse QDIMACS with one variable per quantifier line, alternating e/a."""
    quant_vars: list[tuple[str, int]] = []
    clause_lines: list[str] = []
    header_line = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            header_line = line
            continue
        if line[0] in "ea":
            parts = line.split()
            if parts[-1] != "0" or len(parts) != 3:
                raise FormatError(f"quantifier line {line!r} must be '<e|a> <var> 0'")
            quant_vars.append((parts[0], int(parts[1])))
            continue
        clause_lines.append(line)
    if header_line is None:
        raise FormatError("missing problem line 'p cnf <vars> <clauses>'")
    matrix = parse_dimacs(header_line + "\n" + "\n".join(clause_lines) + "\n")
    if [v for _, v in quant_vars] != list(range(1, matrix.num_vars + 1)):
        raise FormatError("quantifier lines must cover variables 1..n in order")
    for kind, var in quant_vars:
        expected = "e" if quantifier(var) == EXISTS else "a"
        if kind != expected:
            raise FormatError(
                f"variable {var} is quantified '{kind}' but this format requires "
                f"alternation starting with 'e'"
            )
    return QbfFormula(matrix.num_vars, matrix)


def emit_qdimacs(qbf: QbfFormula) -> str:
    if not isinstance(qbf.matrix, CnfFormula):
        raise ValueError("only CNF-matrix QBFs can be written as QDIMACS")
    lines = [f"p cnf {qbf.num_vars} {qbf.matrix.num_clauses}"]
    for var in range(1, qbf.num_vars + 1):
        kind = "e" if quantifier(var) == EXISTS else "a"
        lines.append(f"{kind} {var} 0")
    for clause in qbf.matrix.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse an edge list: header "n <count>", then one "u v" pair per line."""
    num_vertices = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if num_vertices is not None:
                raise FormatError(f"line {lineno}: duplicate header")
            if len(parts) != 2:
                raise FormatError(f"line {lineno}: header must be 'n <count>'")
            num_vertices = int(parts[1])
            continue
        if num_vertices is None:
            raise FormatError(f"line {lineno}: edge before 'n <count>' header")
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: non-integer vertex in {line!r}") from exc
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise FormatError(f"line {lineno}: vertex out of range in {line!r}")
        if u == v:
            raise FormatError(f"line {lineno}: self-loop at {u}")
        edges.append((u, v))
    if num_vertices is None:
        raise FormatError("missing 'n <count>' header")
    try:
        return Graph.from_edges(num_vertices, edges)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def emit_graph(graph: Graph) -> str:
    lines = [f"n {graph.num_vertices}"]
    for u, v in graph.edges():
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Seeded generators


def random_3sat(num_vars: int, num_clauses: int, rng: np.random.Generator) -> CnfFormula:
    """Random 3SAT: per clause, 3 distinct variables and independent signs."""
    if num_vars < 3:
        raise ValueError("random_3sat needs at least 3 variables")
    clauses = []
    for _ in range(num_clauses):
        variables = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3)
        clauses.append(tuple(int(v) if s else -int(v) for v, s in zip(variables, signs)))
    return CnfFormula(num_vars, tuple(clauses))


def random_qbf(num_vars: int, rng: np.random.Generator, form: str = "table") -> QbfFormula:
    """Random QBF, either as an explicit truth table or a random 3-CNF matrix."""
    if form == "table":
        table = rng.integers(0, 2, size=2**num_vars).astype(bool)
        return QbfFormula(num_vars, table)
    if form == "cnf":
        matrix = random_3sat(num_vars, max(1, int(round(2.5 * num_vars))), rng)
        return QbfFormula(num_vars, matrix)
    raise ValueError(f"unknown QBF form {form!r}")


def random_graph(num_vertices: int, rng: np.random.Generator) -> Graph:
    upper = rng.random((num_vertices, num_vertices)) < 0.5
    adj = np.triu(upper, k=1)
    return Graph(num_vertices, adj | adj.T)


def random_automorphism_free_graph(
    num_vertices: int, rng: np.random.Generator, max_tries: int = 10000
) -> Graph:
    """Rejection-sample a rigid graph. Needs >= 6 vertices (none exist below)."""
    if num_vertices < 6:
        raise ValueError("automorphism-free graphs need at least 6 vertices")
    for _ in range(max_tries):
        g = random_graph(num_vertices, rng)
        if automorphism_free(g):
            return g
    raise RuntimeError("failed to sample an automorphism-free graph")


def random_graph_pair(
    num_vertices: int, isomorphic: bool, rng: np.random.Generator
) -> tuple[Graph, Graph]:
    """Automorphism-free pair, isomorphic or certified non-isomorphic."""
    g = random_automorphism_free_graph(num_vertices, rng)
    if isomorphic:
        sigma = tuple(int(v) for v in rng.permutation(num_vertices))
        return g, permute_graph(g, sigma)
    while True:
        h = random_automorphism_free_graph(num_vertices, rng)
        if not brute_force_isomorphic(g, h):
            return g, h
