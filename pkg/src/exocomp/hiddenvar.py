"""Graph isomorphism by non-collapsing measurement of a permutation register.

An observer who could repeatedly sample a measurement outcome without
collapsing the state gets graph isomorphism almost for free. Prepare

    (1/sqrt(2 n!)) sum_sigma ( |0>|sigma>|sigma(G)> + |1>|sigma>|sigma(H)> ),

collapse the graph-image register once, and look at what is left. If the
graphs are not isomorphic the residual support is a single branch; if they
are isomorphic (and automorphism-free, so relabelings are unique) exactly
two branches survive, carrying different permutations. Ordinary quantum
mechanics would let us sample the permutation register once; peeking at it
k times without collapse distinguishes one branch from two with error
probability 2^-(k-1).

Permutations ride in the labels as lexicographic ranks (Lehmer encoding),
which keeps labels small, hashable, and totally ordered.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from . import qsim
from .instances import Graph, automorphism_free, permute_graph
from .qsim import SparseState

MAX_VERTICES = 7


def permutation_rank(perm: tuple[int, ...]) -> int:
    """Lexicographic rank of a permutation of 0..n-1 (Lehmer code value)."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm!r} is not a permutation of 0..{n - 1}")
    rank = 0
    for i, p in enumerate(perm):
        smaller = sum(1 for q in perm[i + 1 :] if q < p)
        rank = rank * (n - i) + smaller
    return rank


def rank_permutation(rank: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`permutation_rank`: the rank-th permutation of 0..n-1."""
    if not 0 <= rank < factorial(n):
        raise ValueError(f"rank {rank} out of range for n={n}")
    digits = []
    for base in range(1, n + 1):
        digits.append(rank % base)
        rank //= base
    digits.reverse()
    available = list(range(n))
    return tuple(available.pop(d) for d in digits)


def prepare_gi_state(g: Graph, h: Graph) -> SparseState:
    """Uniform superposition over both graphs under every relabeling.

    Labels are (branch bit, permutation rank, relabeled edge set); there
    are exactly 2 * n! of them, each with amplitude 1/sqrt(2 n!).
    """
    if g.num_vertices != h.num_vertices:
        raise ValueError(
            f"vertex counts differ: {g.num_vertices} vs {h.num_vertices}"
        )
    n = g.num_vertices
    if n > MAX_VERTICES:
        raise ValueError(f"at most {MAX_VERTICES} vertices supported, got {n}")
    amp = 1.0 / np.sqrt(2 * factorial(n))
    entries: dict[tuple, complex] = {}
    for rank in range(factorial(n)):
        sigma = rank_permutation(rank, n)
        entries[(0, rank, permute_graph(g, sigma).edges())] = amp
        entries[(1, rank, permute_graph(h, sigma).edges())] = amp
    return SparseState(entries)


def collapse_third_register(state: SparseState, rng: np.random.Generator) -> SparseState:
    """Projectively measure the graph-image register, returning the residue."""
    _, collapsed, _ = qsim.measure_component(state, 2, rng)
    return collapsed


def decide_isomorphic(
    g: Graph, h: Graph, k: int = 30, rng: np.random.Generator | None = None
) -> bool:
    """Isomorphism verdict from k non-collapsing peeks at the permutations.

    Both graphs must be automorphism-free; the two-branch argument needs
    relabelings to be unique, so inputs with nontrivial automorphisms are
    rejected outright. The verdict is one-sided: a non-isomorphic pair can
    never produce two distinct permutations, while an isomorphic pair fails
    to do so with probability 2^-(k-1) (all peeks landing in one branch).
    Identically labeled inputs are isomorphic by the identity map and are
    answered directly, since their two branches share one permutation.
    """
    if k < 2:
        raise ValueError(f"need at least 2 peeks, got {k}")
    if rng is None:
        raise ValueError("decide_isomorphic needs an explicit rng")
    if not automorphism_free(g):
        raise ValueError("first graph has a nontrivial automorphism")
    if not automorphism_free(h):
        raise ValueError("second graph has a nontrivial automorphism")
    if np.array_equal(g.adjacency, h.adjacency):
        return True
    collapsed = collapse_third_register(prepare_gi_state(g, h), rng)
    seen: set[int] = set()
    for _ in range(k):
        seen.add(qsim.peek_sample(collapsed, 1, rng))
        if len(seen) >= 2:
            return True
    return False
