"""Euclidean Steiner minimal trees and a soap-film style relaxation.

The exact solver enumerates every full Steiner topology (there are
(2n-5)!! of them for n terminals), positions each topology's n-2 Steiner
points by repeatedly re-solving every point as the Fermat point of its
three neighbors until positions are stationary to 1e-10, and takes the
global minimum. Degenerate optima, where a Steiner point collapses onto a
neighbor, cover the topologies with fewer Steiner points, so the minimum
over full topologies is the true minimum; zero-length edges are contracted
out of the winning tree.

The relaxation is the computational caricature of dunking a wire frame in
soap solution: gradient descent on total edge length with pinned
terminals, Armijo backtracking, and an energy-guarded merge rule for
vertices that collide. It happily converges to whatever local optimum the
initial topology suggests, which is the point: a physical system settling
into a minimal configuration is doing local search, not magic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .instances import FormatError

MAX_TERMINALS = 7
MERGE_EPS = 1e-4
STATIONARITY_TOL = 1e-10
ANGLE_TOL_DEGREES = 0.5

FIVE_POINT_DEMO = ((0.7, 0.96), (0.88, 0.46), (0.88, 0.16), (0.19, 0.26), (0.19, 0.06))


@dataclass(frozen=True)
class SteinerInstance:
    """Between 2 and 7 distinct terminals in the unit square."""

    terminals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(x), float(y)) for x, y in self.terminals)
        if not 2 <= len(pts) <= MAX_TERMINALS:
            raise ValueError(f"need 2..{MAX_TERMINALS} terminals, got {len(pts)}")
        for x, y in pts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"terminal ({x}, {y}) outside the unit square")
        if len(set(pts)) != len(pts):
            raise ValueError("terminals must be distinct")
        object.__setattr__(self, "terminals", pts)

    def coords(self) -> np.ndarray:
        return np.array(self.terminals, dtype=np.float64)


@dataclass(frozen=True)
class SteinerTree:
    """A tree over terminals plus Steiner points; geometry checked by validate_tree."""

    terminals: tuple[tuple[float, float], ...]
    steiner_points: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    total_length: float

    def __post_init__(self) -> None:
        count = len(self.terminals) + len(self.steiner_points)
        for u, v in self.edges:
            if not (0 <= u < count and 0 <= v < count) or u == v:
                raise ValueError(f"edge ({u}, {v}) out of range for {count} vertices")

    def vertex_array(self) -> np.ndarray:
        return np.array(list(self.terminals) + list(self.steiner_points), dtype=np.float64)


def _edge_lengths(points: np.ndarray, edges) -> np.ndarray:
    e = np.asarray(edges)
    return np.linalg.norm(points[e[:, 0]] - points[e[:, 1]], axis=-1)


def mst_length(instance: SteinerInstance) -> float:
    """Minimum spanning tree length over the terminals alone (Prim)."""
    pts = instance.coords()
    n = len(pts)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    in_tree[0] = True
    best = np.linalg.norm(pts - pts[0], axis=1)
    best[0] = np.inf
    total = 0.0
    for _ in range(n - 1):
        j = int(np.argmin(np.where(in_tree, np.inf, best)))
        total += float(best[j])
        in_tree[j] = True
        dist = np.linalg.norm(pts - pts[j], axis=1)
        best = np.minimum(best, dist)
        best[in_tree] = np.inf
    return total


# ---------------------------------------------------------------------------
# Full topology enumeration and the batched Fermat-point solver


def full_topologies(num_terminals: int) -> list[tuple[tuple[int, int], ...]]:
    """All full Steiner topologies: terminals degree 1, Steiner points degree 3.

    Terminals are vertices 0..n-1 and Steiner points n..2n-3. Built by the
    standard edge-insertion recursion, which yields each of the (2n-5)!!
    topologies exactly once in a deterministic order.
    """
    n = num_terminals
    if n == 2:
        return [((0, 1),)]
    topologies = [((0, 1),)]
    for k in range(2, n):
        new_steiner = n + (k - 2)
        grown = []
        for edges in topologies:
            for i, (u, v) in enumerate(edges):
                replaced = edges[:i] + edges[i + 1 :]
                grown.append(replaced + ((u, new_steiner), (v, new_steiner), (k, new_steiner)))
        topologies = grown
    return topologies


def _fermat_points(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Batched Fermat point of triangles (a, b, c), each array (..., 2).

    A vertex whose angle reaches 120 degrees is the minimizer itself;
    otherwise the interior isogonic point is found in closed form as the
    intersection of two Simpson lines (vertex to the apex of the
    equilateral triangle erected outward on the opposite side).
    """

    def cos_angle(at, p, q):
        u = p - at
        v = q - at
        nu = np.linalg.norm(u, axis=-1)
        nv = np.linalg.norm(v, axis=-1)
        denom = np.maximum(nu * nv, 1e-300)
        return np.sum(u * v, axis=-1) / denom

    def apex(p, q, opposite):
        mid = (p + q) / 2
        d = q - p
        perp = np.stack([-d[..., 1], d[..., 0]], axis=-1) * (np.sqrt(3) / 2)
        side = np.sum(perp * (opposite - mid), axis=-1, keepdims=True)
        return mid - np.sign(np.where(side == 0, 1.0, side)) * perp

    cos_a = cos_angle(a, b, c)
    cos_b = cos_angle(b, a, c)
    cos_c = cos_angle(c, a, b)

    apex_a = apex(b, c, a)  # equilateral apex opposite vertex a
    apex_b = apex(a, c, b)
    # Intersection of line a->apex_a with line b->apex_b.
    da = apex_a - a
    db = apex_b - b
    denom = da[..., 0] * db[..., 1] - da[..., 1] * db[..., 0]
    rhs = b - a
    t = (rhs[..., 0] * db[..., 1] - rhs[..., 1] * db[..., 0]) / np.where(denom == 0, 1.0, denom)
    interior = a + t[..., None] * da

    out = np.where((cos_a <= -0.5)[..., None], a, interior)
    out = np.where((cos_b <= -0.5)[..., None], b, out)
    out = np.where((cos_c <= -0.5)[..., None], c, out)
    degenerate = (denom == 0)[..., None] & (cos_a > -0.5)[..., None] & (cos_b > -0.5)[..., None] & (cos_c > -0.5)[..., None]
    centroid = (a + b + c) / 3
    return np.where(degenerate, centroid, out)


def _topology_neighbors(num_terminals: int, topologies) -> np.ndarray:
    """Per-topology neighbor triples of each Steiner point, shape (T, k, 3)."""
    n = num_terminals
    k = n - 2
    neighbors = np.empty((len(topologies), k, 3), dtype=np.int64)
    for ti, edges in enumerate(topologies):
        slots = [[] for _ in range(k)]
        for u, v in edges:
            if u >= n:
                slots[u - n].append(v)
            if v >= n:
                slots[v - n].append(u)
        for s, nbrs in enumerate(slots):
            neighbors[ti, s] = nbrs
    return neighbors


def _fermat_sweeps(
    terminals: np.ndarray, neighbors: np.ndarray, steiner: np.ndarray, max_sweeps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi Fermat-point sweeps until each topology moves at most 1e-10.

    Returns final positions and a boolean stationarity flag per topology.
    Topologies are frozen as they converge so the working batch shrinks.
    """
    t_count, k, _ = neighbors.shape
    n = len(terminals)
    done = np.zeros(t_count, dtype=bool)
    active = np.arange(t_count)
    nbr = neighbors
    st = steiner
    for _ in range(max_sweeps):
        term_tile = np.broadcast_to(terminals, (len(active), n, 2))
        allpos = np.concatenate([term_tile, st], axis=1)
        nb = allpos[np.arange(len(active))[:, None, None], nbr]
        new = _fermat_points(nb[:, :, 0], nb[:, :, 1], nb[:, :, 2])
        moved = np.abs(new - st).max(axis=(1, 2))
        st = new
        settled = moved <= STATIONARITY_TOL
        if settled.any():
            steiner[active] = st
            done[active[settled]] = True
            keep = ~settled
            active = active[keep]
            st = st[keep]
            nbr = nbr[keep]
            if len(active) == 0:
                break
    if len(active):
        steiner[active] = st
    return steiner, done


def _solve_full_topologies(
    terminals: np.ndarray,
    topologies: list[tuple[tuple[int, int], ...]],
    batch_sweeps: int = 2000,
    winner_sweeps: int = 50000,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Steiner positions, lengths, and the argmin topology index.

    Edge lengths converge quadratically in the position error, so a capped
    batch pass pins down every topology's length (and the argmin) even for
    degenerate topologies whose positions crawl; only the winning topology
    is then iterated all the way to 1e-10 stationarity.
    """
    n = len(terminals)
    k = n - 2
    t_count = len(topologies)
    if k == 0:
        lengths = np.array(
            [float(_edge_lengths(terminals, topo).sum()) for topo in topologies]
        )
        return np.zeros((t_count, 0, 2)), lengths, int(np.argmin(lengths))

    neighbors = _topology_neighbors(n, topologies)
    centroid = terminals.mean(axis=0)
    offsets = (np.arange(k)[:, None] + 1) * np.array([1.7e-3, 2.3e-3])
    steiner = np.ascontiguousarray(np.broadcast_to(centroid, (t_count, k, 2)) + offsets)

    steiner, done = _fermat_sweeps(terminals, neighbors, steiner, batch_sweeps)
    lengths = np.empty(t_count)
    for ti, edges in enumerate(topologies):
        allpos = np.concatenate([terminals, steiner[ti]], axis=0)
        lengths[ti] = _edge_lengths(allpos, edges).sum()
    winner = int(np.argmin(lengths))
    if not done[winner]:
        refined = steiner[winner : winner + 1].copy()
        refined, _ = _fermat_sweeps(terminals, neighbors[winner : winner + 1], refined, winner_sweeps)
        steiner[winner] = refined[0]
        allpos = np.concatenate([terminals, steiner[winner]], axis=0)
        lengths[winner] = _edge_lengths(allpos, topologies[winner]).sum()
    return steiner, lengths, winner


def exact_steiner(instance: SteinerInstance) -> SteinerTree:
    """Global Steiner minimal tree by exhaustive full-topology relaxation.

    Ties are broken by enumeration order, which is deterministic. Edges
    contracted below 1e-7 remove degenerate Steiner points from the
    winning tree before it is returned.
    """
    terminals = instance.coords()
    n = len(terminals)
    topologies = full_topologies(n)
    steiner, _, winner = _solve_full_topologies(terminals, topologies)
    edges = topologies[winner]
    positions = np.concatenate([terminals, steiner[winner]], axis=0)
    return _contract_tree(n, positions, edges)


def _contract_tree(num_terminals: int, positions: np.ndarray, edges, tol: float = 1e-7) -> SteinerTree:
    """Collapse near-zero edges, dropping degenerate Steiner points."""
    parent = list(range(len(positions)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        if np.linalg.norm(positions[u] - positions[v]) < tol:
            ru, rv = find(u), find(v)
            if ru != rv:
                # keep the terminal (low index) as the representative
                parent[max(ru, rv)] = min(ru, rv)

    kept_edges = []
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            kept_edges.append((ru, rv))

    used = sorted({w for e in kept_edges for w in e} | set(range(num_terminals)))
    remap = {old: new for new, old in enumerate(used)}
    new_edges = tuple(sorted((min(remap[u], remap[v]), max(remap[u], remap[v])) for u, v in kept_edges))
    new_points = positions[used]
    total = float(_edge_lengths(new_points, new_edges).sum()) if new_edges else 0.0
    terminals = tuple(map(tuple, new_points[:num_terminals]))
    steiner_pts = tuple(map(tuple, new_points[num_terminals:]))
    return SteinerTree(terminals, steiner_pts, new_edges, total)


def validate_tree(tree: SteinerTree) -> list[str]:
    """All geometric and structural violations; an empty list means valid."""
    violations: list[str] = []
    points = tree.vertex_array()
    count = len(points)
    n_term = len(tree.terminals)
    adjacency: dict[int, list[int]] = {i: [] for i in range(count)}
    for u, v in tree.edges:
        adjacency[u].append(v)
        adjacency[v].append(u)

    if len(tree.edges) != count - 1:
        violations.append(f"{len(tree.edges)} edges for {count} vertices (tree needs {count - 1})")
    seen = {0}
    stack = [0]
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != count:
        violations.append(f"graph is disconnected ({len(seen)} of {count} vertices reachable)")

    for s in range(n_term, count):
        degree = len(adjacency[s])
        if degree != 3:
            violations.append(f"steiner vertex {s} has degree {degree}, expected 3")
            continue
        a, b, c = (points[w] for w in adjacency[s])
        here = points[s]
        angles = []
        for p, q in ((a, b), (b, c), (a, c)):
            u = p - here
            v = q - here
            denom = max(np.linalg.norm(u) * np.linalg.norm(v), 1e-300)
            cosang = np.clip(np.dot(u, v) / denom, -1.0, 1.0)
            angles.append(np.degrees(np.arccos(cosang)))
        for ang in angles:
            if abs(ang - 120.0) > ANGLE_TOL_DEGREES:
                violations.append(
                    f"steiner vertex {s} has a {ang:.3f} degree angle (need 120 +- {ANGLE_TOL_DEGREES})"
                )
                break

    if tree.edges:
        actual = float(_edge_lengths(points, tree.edges).sum())
        if abs(actual - tree.total_length) > 1e-9:
            violations.append(
                f"recorded length {tree.total_length!r} differs from edge sum {actual!r}"
            )
    return violations


# ---------------------------------------------------------------------------
# Soap-film relaxation


@dataclass(frozen=True)
class FilmTopology:
    """Initial wire-frame guess: movable vertex positions plus an edge set.

    Vertices 0..n-1 are the pinned terminals; n.. are movable. Edges may
    connect any pair.
    """

    movable: np.ndarray
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RelaxParams:
    max_iters: int = 5000
    initial_step: float = 0.05
    grad_tol: float = 1e-8
    merge_eps: float = MERGE_EPS
    armijo_c: float = 1e-4


@dataclass(frozen=True)
class FilmConfiguration:
    """Converged (or max-iteration) relaxation state."""

    terminals: tuple[tuple[float, float], ...]
    movable: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    energy: float
    history: tuple[float, ...]
    converged: bool


def random_film_topology(instance: SteinerInstance, rng: np.random.Generator) -> FilmTopology:
    """A uniformly random full topology with interior points thrown at random."""
    n = len(instance.terminals)
    if n == 2:
        return FilmTopology(np.zeros((0, 2)), ((0, 1),))
    edges = [(0, 1)]
    for k in range(2, n):
        new_steiner = n + (k - 2)
        u, v = edges.pop(int(rng.integers(len(edges))))
        edges.extend([(u, new_steiner), (v, new_steiner), (k, new_steiner)])
    positions = rng.random((n - 2, 2))
    return FilmTopology(positions, tuple(edges))


def film_from_tree(tree: SteinerTree) -> FilmTopology:
    return FilmTopology(np.array(tree.steiner_points, dtype=np.float64).reshape(-1, 2), tree.edges)


def _film_energy(terminals: np.ndarray, movable: np.ndarray, edges) -> float:
    points = np.concatenate([terminals, movable], axis=0)
    return float(_edge_lengths(points, edges).sum()) if edges else 0.0


def _film_gradient(terminals: np.ndarray, movable: np.ndarray, edges) -> np.ndarray:
    n = len(terminals)
    points = np.concatenate([terminals, movable], axis=0)
    grad = np.zeros_like(movable)
    for u, v in edges:
        diff = points[u] - points[v]
        dist = max(float(np.linalg.norm(diff)), 1e-12)
        unit = diff / dist
        if u >= n:
            grad[u - n] += unit
        if v >= n:
            grad[v - n] -= unit
    return grad


def _merge_pass(
    terminals: np.ndarray, movable: np.ndarray, edges: list[tuple[int, int]], eps: float
) -> tuple[np.ndarray, list[tuple[int, int]], bool]:
    """Merge one adjacent vertex pair closer than eps, if it does not raise energy."""
    n = len(terminals)
    points = np.concatenate([terminals, movable], axis=0)
    before = _film_energy(terminals, movable, edges)
    for u, v in edges:
        if np.linalg.norm(points[u] - points[v]) >= eps:
            continue
        if u < n and v < n:
            continue  # two pinned terminals never merge
        absorb, gone = (u, v) if (u < n or (v >= n and u <= v)) else (v, u)
        if gone < n:
            absorb, gone = gone, absorb
        new_edges = []
        for a, b in edges:
            a2 = absorb if a == gone else a
            b2 = absorb if b == gone else b
            if a2 != b2:
                new_edges.append((min(a2, b2), max(a2, b2)))
        new_edges = sorted(set(new_edges))
        keep = [i for i in range(len(movable)) if i != gone - n]
        new_movable = movable[keep]
        shift = {old + n: idx + n for idx, old in enumerate(keep)}
        shift.update({t: t for t in range(n)})
        new_edges = [(min(shift[a], shift[b]), max(shift[a], shift[b])) for a, b in new_edges]
        new_edges = sorted(set(new_edges))
        after = _film_energy(terminals, new_movable, new_edges)
        if after <= before + 1e-15:
            return new_movable, new_edges, True
    return movable, edges, False


def relax_film(
    instance: SteinerInstance,
    topology: FilmTopology | None = None,
    params: RelaxParams | None = None,
    rng: np.random.Generator | None = None,
) -> FilmConfiguration:
    """Gradient descent on total length with pinned terminals.

    The energy history is monotone nonincreasing by construction: descent
    steps pass an Armijo test and merges are only accepted when they do
    not raise the energy. Termination is by gradient norm or iteration
    budget.
    """
    params = params or RelaxParams()
    if topology is None:
        if rng is None:
            raise ValueError("either a topology or an rng for a random one is required")
        topology = random_film_topology(instance, rng)
    terminals = instance.coords()
    n = len(terminals)
    movable = np.array(topology.movable, dtype=np.float64).reshape(-1, 2).copy()
    edges = [tuple(int(w) for w in e) for e in topology.edges]
    vertex_count = n + len(movable)
    for u, v in edges:
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise ValueError(f"edge ({u}, {v}) out of range")

    reachable = {0}
    stack = [0]
    adjacency: dict[int, list[int]] = {i: [] for i in range(vertex_count)}
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in reachable:
                reachable.add(w)
                stack.append(w)
    if not set(range(n)) <= reachable:
        raise ValueError("initial topology does not connect all terminals")

    energy = _film_energy(terminals, movable, edges)
    history = [energy]
    step = params.initial_step
    converged = False
    for _ in range(params.max_iters):
        movable, edges, merged = _merge_pass(terminals, movable, edges, params.merge_eps)
        if merged:
            energy = _film_energy(terminals, movable, edges)
            history.append(energy)
            continue
        if len(movable) == 0:
            converged = True
            break
        grad = _film_gradient(terminals, movable, edges)
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= params.grad_tol:
            converged = True
            break
        accepted = False
        trial_step = step
        for _ in range(60):
            candidate = movable - trial_step * grad
            cand_energy = _film_energy(terminals, candidate, edges)
            if cand_energy <= energy - params.armijo_c * trial_step * gnorm**2:
                movable = candidate
                energy = cand_energy
                history.append(energy)
                step = min(trial_step * 1.5, 0.25)
                accepted = True
                break
            trial_step /= 2
        if not accepted:
            converged = gnorm <= 1e-6  # flat to machine precision around a kink
            break
    return FilmConfiguration(
        tuple(map(tuple, terminals)),
        tuple(map(tuple, movable)),
        tuple(edges),
        energy,
        tuple(history),
        converged,
    )


# ---------------------------------------------------------------------------
# Instance I/O


def parse_orlib(text: str) -> SteinerInstance:
    """Point-count header then one "x y" line per terminal, coordinates in [0,1]."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty instance text")
    try:
        count = int(lines[0])
    except ValueError as exc:
        raise FormatError(f"bad point count line {lines[0]!r}") from exc
    if len(lines) - 1 != count:
        raise FormatError(f"header promises {count} points, found {len(lines) - 1}")
    points = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"bad coordinate line {ln!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise FormatError(f"bad coordinate line {ln!r}") from exc
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise FormatError(f"coordinate ({x}, {y}) outside [0,1]")
        points.append((x, y))
    try:
        return SteinerInstance(tuple(points))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def demo_instance() -> SteinerInstance:
    """The packaged five-terminal demo instance."""
    text = resources.files("exocomp").joinpath("data/five_points.txt").read_text()
    return parse_orlib(text)


def tree_to_json(tree: SteinerTree) -> str:
    return json.dumps(
        {
            "terminals": [list(p) for p in tree.terminals],
            "steiner_points": [list(p) for p in tree.steiner_points],
            "edges": [list(e) for e in tree.edges],
            "total_length": tree.total_length,
        },
        indent=2,
        sort_keys=True,
    )


def tree_to_svg(tree: SteinerTree, size: int = 400) -> str:
    """Minimal standalone SVG rendering (unit square scaled to ``size``)."""
    points = tree.vertex_array()
    n_term = len(tree.terminals)

    def sx(x: float) -> float:
        return 20 + x * (size - 40)

    def sy(y: float) -> float:
        return size - 20 - y * (size - 40)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    for u, v in tree.edges:
        parts.append(
            f'<line x1="{sx(points[u][0]):.2f}" y1="{sy(points[u][1]):.2f}" '
            f'x2="{sx(points[v][0]):.2f}" y2="{sy(points[v][1]):.2f}" '
            'stroke="black" stroke-width="2"/>'
        )
    for i, (x, y) in enumerate(points):
        color = "crimson" if i < n_term else "steelblue"
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="5" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts)
