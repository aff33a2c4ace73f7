"""External equitable partitions (EEPs) and their quotient dynamics.

A partition is externally equitable when every node of cell ``i`` has the
same total edge weight into each *other* cell ``j``.  The quotient Laplacian
``L_pi = C^+ L C`` then satisfies ``L C = C L_pi`` and ``C^+ L = L_pi C^+``,
so consensus on the full graph can be reduced to ``k`` cell variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import Trajectory, check_times, simulate_consensus
from .errors import InputError, NotEEPError
from .graph import (
    Graph,
    Partition,
    cell_averaging,
    combinatorial_laplacian,
    indicator_matrix,
)

__all__ = [
    "EepReport",
    "QuotientGraph",
    "check_eep",
    "quotient_laplacian",
    "coarsest_eep",
    "quotient_consensus",
    "eep_input_invariance",
    "within_cell_spread",
    "random_eep_graph",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class EepReport:
    is_eep: bool
    max_violation: float
    witness: tuple[str, int] | None = None  # (node id, other cell) of the worst deviation

    def to_dict(self):
        return {
            "is_eep": self.is_eep,
            "max_violation": self.max_violation,
            "witness": None if self.witness is None
            else {"node": self.witness[0], "cell": self.witness[1]},
        }


@dataclass(frozen=True)
class QuotientGraph:
    L_pi: np.ndarray
    cells: Partition
    parent_n: int

    @property
    def k(self) -> int:
        return self.cells.k

    def edges(self):
        """Directed quotient edges ``(i, j, w)``: each node of cell ``i`` has weight ``w`` into cell ``j``."""
        L = self.L_pi
        return [(i, j, -L[i, j]) for i in range(self.k) for j in range(self.k)
                if i != j and L[i, j] != 0.0]


def _external_degrees(g: Graph, p: Partition) -> np.ndarray:
    """n x k matrix of each node's weight into every cell, own cell zeroed."""
    D = g.adjacency @ indicator_matrix(p, g.n)
    D[np.arange(g.n), p.labels] = 0.0
    return D


def check_eep(g: Graph, p: Partition, tol: float = DEFAULT_TOL) -> EepReport:
    """Measure how far ``p`` is from being externally equitable.

    ``max_violation`` is the largest spread (max - min) of a cell's
    out-weights into another cell.  With integer weights the sums are exact,
    so any ``tol < 1`` amounts to exact comparison.
    """
    if p.n != g.n:
        raise InputError(f"partition covers {p.n} nodes, graph has {g.n}", module="eep")
    D = _external_degrees(g, p)
    worst, witness = 0.0, None
    for members in p.cells():
        block = D[members]
        spread = block.max(axis=0) - block.min(axis=0)
        j = int(np.argmax(spread))
        if spread[j] > worst:
            worst = float(spread[j])
            col = block[:, j]
            far = int(np.argmax(np.abs(col - col[0])))
            witness = (g.nodes[members[far]], j)
    return EepReport(worst <= tol, worst, witness)


def quotient_laplacian(g: Graph, p: Partition, tol: float = DEFAULT_TOL) -> QuotientGraph:
    """``L_pi = C^+ L C`` for an EEP (raises :class:`NotEEPError` otherwise)."""
    report = check_eep(g, p, tol)
    if not report.is_eep:
        raise NotEEPError(report)
    L = combinatorial_laplacian(g)
    Lpi = cell_averaging(p, g.n) @ L @ indicator_matrix(p, g.n)
    return QuotientGraph(Lpi, p, g.n)


def _integer_weights(g: Graph) -> bool:
    return all(float(w).is_integer() for _, _, w in g.edges)


def coarsest_eep(g: Graph, seed: Partition | None = None, tol: float = DEFAULT_TOL) -> Partition:
    """Coarsest EEP refining ``seed`` (default: all nodes in one cell).

    Every round splits each cell by its nodes' vectors of weight into the
    *other* current cells, until no cell splits.  Any EEP refining the seed
    also refines every intermediate partition, so the fixed point is the
    unique coarsest one.  Note the all-in-one partition is itself an EEP:
    a non-trivial answer needs a non-trivial seed.
    """
    p = Partition.whole(g.n) if seed is None else seed.canonical()
    if p.n != g.n:
        raise InputError(f"seed covers {p.n} nodes, graph has {g.n}", module="eep")
    exact = _integer_weights(g)
    while True:
        D = _external_degrees(g, p)
        Q = np.rint(D).astype(np.int64) if exact else np.rint(D / tol).astype(np.int64)
        keys = [(c,) + tuple(row) for c, row in zip(p.cell_of, Q.tolist())]
        order = {key: r for r, key in enumerate(sorted(set(keys)))}
        nxt = Partition.from_labels(order[key] for key in keys)
        if nxt.k == p.k:
            return p
        p = nxt


def quotient_consensus(q: QuotientGraph, y0, times) -> Trajectory:
    """``dy/dt = -L_pi y`` with the (asymmetric) matrix exponential."""
    times = check_times(times)
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (q.k,) or not np.all(np.isfinite(y0)):
        raise InputError(f"y0 must be a finite vector of length {q.k}", module="eep")
    states = np.array([scipy.linalg.expm(-t * q.L_pi) @ y0 for t in times])
    return Trajectory(times, states, "consensus", tuple(f"cell{c}" for c in range(q.k)))


def within_cell_spread(tr: Trajectory, p: Partition) -> np.ndarray:
    """Per-sample maximum over cells of (max - min) of the node states."""
    out = np.zeros(tr.times.size)
    for members in p.cells():
        block = tr.states[:, members]
        out = np.maximum(out, block.max(axis=1) - block.min(axis=1))
    return out


def eep_input_invariance(g: Graph, p: Partition, v, x0, times, tol: float = DEFAULT_TOL,
                         require_eep: bool = True) -> Trajectory:
    """Consensus with the cell-consistent input ``u = C v`` from ``x0``.

    From a cell-synchronised ``x0 = C y0`` the states within each cell stay
    identical when ``p`` is an EEP; see :func:`within_cell_spread`.
    ``require_eep=False`` skips the check (used for negative controls).
    """
    if require_eep:
        report = check_eep(g, p, tol)
        if not report.is_eep:
            raise NotEEPError(report)
    v = np.asarray(v, dtype=float)
    if v.shape != (p.k,):
        raise InputError(f"cell input v must have length {p.k}", module="eep")
    u = indicator_matrix(p, g.n) @ v
    return simulate_consensus(g, x0, times, u=u)


def random_eep_graph(sizes, seed: int, p_internal: float = 0.4, p_link: float = 0.6,
                     weighted: bool = False, max_tries: int = 1000) -> tuple[Graph, Partition]:
    """Random connected graph with a planted EEP, nodes shuffled.

    Between cells ``i < j`` a biregular bipartite block is wired with stubs
    (each node of ``i`` gets ``a`` neighbours in ``j``, ``a * |i| / |j|`` the
    other way); inside cells edges are arbitrary.  Consecutive cells left
    unlinked are chained, and disconnected draws are redrawn.
    """
    rng = np.random.default_rng(seed)
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise InputError("cell sizes must be positive", module="eep")
    for _ in range(max_tries):
        g, p = _draw_eep_graph(sizes, rng, p_internal, p_link, weighted)
        if g.is_connected:
            return g, p
    raise InputError(f"no connected draw in {max_tries} tries; raise p_internal or p_link",
                     module="eep")


def _draw_eep_graph(sizes, rng, p_internal, p_link, weighted):
    n = sum(sizes)
    k = len(sizes)
    perm = rng.permutation(n)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    members = [perm[offsets[c]:offsets[c + 1]] for c in range(k)]
    A = np.zeros((n, n))

    def weight():
        return rng.uniform(0.5, 2.0) if weighted else 1.0

    def biregular(ci, cj, a, w):
        si, sj = sizes[ci], sizes[cj]
        mi, mj = rng.permutation(members[ci]), rng.permutation(members[cj])
        for e in range(si * a):
            u, v = mi[e // a], mj[e % sj]
            A[u, v] = A[v, u] = w

    for mem in members:
        for a in range(len(mem)):
            for b in range(a + 1, len(mem)):
                if rng.random() < p_internal:
                    w = weight()
                    A[mem[a], mem[b]] = A[mem[b], mem[a]] = w
    linked = set()
    for ci in range(k):
        for cj in range(ci + 1, k):
            if rng.random() > p_link:
                continue
            unit = sizes[cj] // np.gcd(sizes[ci], sizes[cj])  # smallest a with |i| a divisible by |j|
            biregular(ci, cj, int(rng.choice(np.arange(unit, sizes[cj] + 1, unit))), weight())
            linked.add((ci, cj))
    for ci in range(k - 1):
        if (ci, ci + 1) not in linked:
            unit = sizes[ci + 1] // np.gcd(sizes[ci], sizes[ci + 1])
            biregular(ci, ci + 1, unit, weight())
    labels = np.empty(n, dtype=int)
    for c, mem in enumerate(members):
        labels[mem] = c
    return Graph.from_adjacency(A), Partition.from_labels(labels)
