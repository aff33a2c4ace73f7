"""Graphs, partitions and the Laplacian family.

Everything here is dense numpy.  Graphs are undirected, may carry negative
(signed) weights, and have no self-loops.  Node identifiers are strings; the
position of a node in ``Graph.nodes`` is its matrix index.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "Graph",
    "Partition",
    "load_graph",
    "read_edge_list",
    "read_json_graph",
    "write_edge_list",
    "read_partition_csv",
    "write_partition_csv",
    "karate_factions",
    "combinatorial_laplacian",
    "normalized_laplacian",
    "random_walk_laplacian",
    "signed_laplacian",
    "incidence_decomposition",
    "indicator_matrix",
    "cell_averaging",
    "generate_planted_partition",
    "planted_blocks",
    "stationary_distribution",
    "DATASETS",
    "DATASET_ALIASES",
]

DATASETS = ("karate",)
DATASET_ALIASES = {"karate": {"instructor": "0", "president": "33"}}


def _err(msg):
    return InputError(msg, module="graph")


def _frozen(a):
    a.setflags(write=False)
    return a


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph with stable string node ids.

    ``edges`` holds ``(i, j, w)`` with ``i < j``; construct through
    :meth:`from_edges` to get validation and canonical ordering.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    name: str = ""
    n_components: int = field(init=False, repr=False, compare=False)
    component_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise _err("node identifiers must be unique")
        n = len(self.nodes)
        uf = _UnionFind(n)
        for i, j, w in self.edges:
            if not (0 <= i < j < n):
                raise _err(f"edge ({i}, {j}) is not canonical (need 0 <= i < j < n)")
            if not math.isfinite(w):
                raise _err(f"edge ({self.nodes[i]}, {self.nodes[j]}) has non-finite weight")
            uf.union(i, j)
        roots = [uf.find(i) for i in range(n)]
        comp = Partition.from_labels(roots).cell_of if n else ()
        object.__setattr__(self, "component_of", comp)
        object.__setattr__(self, "n_components", len(set(roots)))

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple], name: str = "") -> "Graph":
        """Build a graph from node ids and ``(u, v[, w])`` triples.

        ``u`` and ``v`` may be node ids or integer indices.  Self-loops and
        duplicate undirected edges raise :class:`InputError`.
        """
        nodes = tuple(str(v) for v in nodes)
        index = {v: i for i, v in enumerate(nodes)}
        seen = {}
        for e in edges:
            u, v = e[0], e[1]
            w = float(e[2]) if len(e) > 2 else 1.0
            i = u if isinstance(u, (int, np.integer)) else index.get(str(u))
            j = v if isinstance(v, (int, np.integer)) else index.get(str(v))
            if i is None or j is None:
                raise _err(f"edge ({u}, {v}) references an unknown node")
            i, j = int(i), int(j)
            if i == j:
                raise _err(f"self-loop on node {nodes[i]}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise _err(f"duplicate edge {nodes[key[0]]} - {nodes[key[1]]}")
            seen[key] = w
        canon = tuple((i, j, w) for (i, j), w in sorted(seen.items()))
        return cls(nodes=nodes, edges=canon, name=name)

    @classmethod
    def from_adjacency(cls, A, nodes: Sequence[str] | None = None, name: str = "") -> "Graph":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise _err("adjacency matrix must be square")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12):
            raise _err("adjacency matrix is not symmetric (directed graphs are not supported)")
        if np.any(np.diag(A) != 0):
            raise _err("adjacency matrix has self-loops")
        n = A.shape[0]
        if nodes is None:
            nodes = [str(i) for i in range(n)]
        iu, ju = np.nonzero(np.triu(A, 1))
        return cls.from_edges(nodes, [(int(i), int(j), float(A[i, j])) for i, j in zip(iu, ju)], name)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_signed(self) -> bool:
        return any(w < 0 for _, _, w in self.edges)

    @property
    def is_connected(self) -> bool:
        return self.n_components == 1

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return _frozen(A)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degrees ``d = A 1``."""
        return _frozen(self.adjacency.sum(axis=1))

    @cached_property
    def abs_degrees(self) -> np.ndarray:
        """Absolute degrees ``|A| 1`` used by the signed Laplacian."""
        return _frozen(np.abs(self.adjacency).sum(axis=1))

    @property
    def total_weight(self) -> float:
        """``w = 1^T d / 2``."""
        return float(self.degrees.sum() / 2)

    def require_connected(self, module="graph"):
        if not self.is_connected:
            raise InputError(f"graph has {self.n_components} connected components; "
                             "a connected graph is required", module=module)

    def require_unsigned(self, module="graph"):
        if self.is_signed:
            raise InputError("graph has negative edge weights; use the signed Laplacian", module=module)


@dataclass(frozen=True)
class Partition:
    """Hard partition of ``n`` nodes into ``k`` non-empty cells ``0..k-1``."""

    cell_of: tuple[int, ...]
    k: int = field(init=False)

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cell_of)
        object.__setattr__(self, "cell_of", cells)
        k = max(cells) + 1 if cells else 0
        if min(cells, default=0) < 0 or len(set(cells)) != k:
            raise _err("partition cells must be labelled 0..k-1 with no empty cell")
        object.__setattr__(self, "k", k)

    @classmethod
    def from_labels(cls, labels: Iterable) -> "Partition":
        """Relabel arbitrary hashable labels to 0..k-1 in order of first appearance."""
        remap = {}
        return cls(tuple(remap.setdefault(lab, len(remap)) for lab in labels))

    @classmethod
    def from_cells(cls, cells: Iterable[Iterable[int]], n: int) -> "Partition":
        labels = [-1] * n
        for c, members in enumerate(cells):
            for i in members:
                if labels[i] != -1:
                    raise _err(f"node index {i} assigned to two cells")
                labels[i] = c
        if -1 in labels:
            raise _err("cells do not cover every node")
        return cls.from_labels(labels)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self.cell_of)

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self.cell_of, dtype=int)

    def cells(self) -> list[list[int]]:
        out = [[] for _ in range(self.k)]
        for i, c in enumerate(self.cell_of):
            out[c].append(i)
        return out

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def canonical(self) -> "Partition":
        """Same partition with cells renumbered by first appearance."""
        return Partition.from_labels(self.cell_of)

    def same_as(self, other: "Partition") -> bool:
        return self.canonical().cell_of == other.canonical().cell_of

    def refines(self, other: "Partition") -> bool:
        """True if every cell of ``self`` lies inside a cell of ``other``."""
        if self.n != other.n:
            return False
        image = {}
        for a, b in zip(self.cell_of, other.cell_of):
            if image.setdefault(a, b) != b:
                return False
        return True


# ---------------------------------------------------------------------------
# I/O

_SPLIT = re.compile(r"[,\s]+")


def read_edge_list(path, name: str = "") -> Graph:
    """Parse a ``src dst [weight]`` edge list.

    A line holding a single token declares a node without adding an edge,
    which also fixes node order and allows isolated nodes.
    """
    text = Path(path).read_text(encoding="utf-8")
    return _parse_edge_list(text.splitlines(), name or Path(path).stem)


def _parse_edge_list(lines, name=""):
    nodes, index, edges = [], {}, []

    def node(tok):
        if tok not in index:
            index[tok] = len(nodes)
            nodes.append(tok)
        return index[tok]

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = [t for t in _SPLIT.split(line) if t]
        if len(toks) == 1:
            node(toks[0])
            continue
        if len(toks) > 3:
            raise _err(f"line {lineno}: expected 'src dst [weight]', got {raw!r}")
        try:
            w = float(toks[2].replace("\u2212", "-")) if len(toks) == 3 else 1.0
        except ValueError:
            raise _err(f"line {lineno}: weight {toks[2]!r} is not a number") from None
        if not math.isfinite(w):
            raise _err(f"line {lineno}: weight must be finite")
        if w == 0.0:
            raise _err(f"line {lineno}: zero-weight edge")
        edges.append((node(toks[0]), node(toks[1]), w))
    return Graph.from_edges(nodes, edges, name=name)


def read_json_graph(path, name: str = "") -> Graph:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        nodes = [str(v) for v in data["nodes"]]
        edges = [(str(e["source"]), str(e["target"]), float(e.get("weight", 1.0)))
                 for e in data["edges"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _err(f"malformed JSON graph {path}: {exc}") from None
    for _, _, w in edges:
        if not math.isfinite(w):
            raise _err("edge weights must be finite")
    return Graph.from_edges(nodes, edges, name=name or Path(path).stem)


def load_graph(source) -> Graph:
    """Load a bundled dataset by name, a ``.json`` graph, or an edge list."""
    if isinstance(source, str) and source in DATASETS:
        lines = resources.files("netdyn.data").joinpath(f"{source}.txt").read_text("utf-8")
        return _parse_edge_list(lines.splitlines(), name=source)
    path = Path(source)
    if not path.is_file():
        raise _err(f"cannot read graph {source!r}: no such file or dataset")
    if path.suffix.lower() == ".json":
        return read_json_graph(path)
    return read_edge_list(path)


def write_edge_list(g: Graph, fh, weights: bool = True):
    for v in g.nodes:
        fh.write(f"{v}\n")
    for i, j, w in g.edges:
        if weights:
            fh.write(f"{g.nodes[i]} {g.nodes[j]} {w:.17g}\n")
        else:
            fh.write(f"{g.nodes[i]} {g.nodes[j]}\n")


def read_partition_csv(path_or_lines, g: Graph) -> Partition:
    """Read a ``node,cell`` CSV; cells are numbered by first appearance in node order."""
    if isinstance(path_or_lines, (str, Path)):
        lines = Path(path_or_lines).read_text(encoding="utf-8").splitlines()
    else:
        lines = list(path_or_lines)
    rows = csv.reader(l for l in lines if l.strip() and not l.startswith("#"))
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ["node", "cell"]:
        raise _err("partition CSV must start with header 'node,cell'")
    label = {}
    for row in rows:
        if len(row) != 2:
            raise _err(f"partition CSV row {row!r} must have two fields")
        v, c = row[0].strip(), row[1].strip()
        if v not in g.index:
            raise _err(f"partition references unknown node {v!r}")
        if v in label:
            raise _err(f"node {v!r} listed twice in partition")
        label[v] = c
    missing = [v for v in g.nodes if v not in label]
    if missing:
        raise _err(f"partition does not cover {len(missing)} node(s), e.g. {missing[0]!r}")
    return Partition.from_labels(label[v] for v in g.nodes)


def write_partition_csv(g: Graph, p: Partition, fh):
    fh.write("node,cell\n")
    for v, c in zip(g.nodes, p.cell_of):
        fh.write(f"{v},{c}\n")


def karate_factions(g: Graph | None = None) -> Partition:
    """Zachary's two factions: cell 0 follows the instructor (node ``0``),
    cell 1 the president (node ``33``)."""
    g = g if g is not None else load_graph("karate")
    lines = resources.files("netdyn.data").joinpath("karate_factions.csv").read_text("utf-8")
    return read_partition_csv(lines.splitlines(), g)


# ---------------------------------------------------------------------------
# Laplacians


def _require_positive_degrees(g: Graph):
    d = g.degrees
    if np.any(d <= 0):
        bad = g.nodes[int(np.argmax(d <= 0))]
        raise _err(f"node {bad!r} has non-positive degree; normalised Laplacians need d > 0")
    return d


def combinatorial_laplacian(g: Graph) -> np.ndarray:
    """``L = D - A`` for an unsigned graph."""
    g.require_unsigned()
    return np.diag(g.degrees) - g.adjacency


def normalized_laplacian(g: Graph) -> np.ndarray:
    """``L_N = D^{-1/2} L D^{-1/2}``."""
    g.require_unsigned()
    d = _require_positive_degrees(g)
    s = 1.0 / np.sqrt(d)
    LN = np.eye(g.n) - s[:, None] * g.adjacency * s[None, :]
    return (LN + LN.T) / 2


def random_walk_laplacian(g: Graph) -> np.ndarray:
    """``L_RW = D^{-1} L`` (asymmetric in general)."""
    g.require_unsigned()
    d = _require_positive_degrees(g)
    return np.eye(g.n) - g.adjacency / d[:, None]


def signed_laplacian(g: Graph) -> np.ndarray:
    """``L_S = D_S - A`` with absolute degrees; equals ``L`` on unsigned graphs."""
    return np.diag(g.abs_degrees) - g.adjacency


def incidence_decomposition(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Signed incidence ``B`` (n x m) and ``W_abs`` (m x m) with ``B W_abs B^T = L_S``.

    Edge ``e = (i, j)``, ``i < j``, has tail ``i`` (+1) and head ``j`` with
    entry ``-sign(w_e)``.
    """
    B = np.zeros((g.n, g.m))
    wabs = np.empty(g.m)
    for e, (i, j, w) in enumerate(g.edges):
        B[i, e] = 1.0
        B[j, e] = -np.sign(w)
        wabs[e] = abs(w)
    return B, np.diag(wabs)


# ---------------------------------------------------------------------------
# Partitions as matrices


def _check_size(p: Partition, n: int):
    if p.n != n:
        raise _err(f"partition covers {p.n} nodes but {n} were expected")


def indicator_matrix(p: Partition, n: int) -> np.ndarray:
    """n x k matrix ``C`` with ``C[i, c] = 1`` iff node ``i`` is in cell ``c``."""
    _check_size(p, n)
    C = np.zeros((n, p.k))
    C[np.arange(n), p.labels] = 1.0
    return C


def cell_averaging(p: Partition, n: int) -> np.ndarray:
    """``C^+ = (C^T C)^{-1} C^T``: row ``c`` averages the states of cell ``c``."""
    C = indicator_matrix(p, n)
    return C.T / p.sizes()[:, None]


# ---------------------------------------------------------------------------
# Generators and derived vectors


def planted_blocks(sizes: Sequence[int]) -> Partition:
    return Partition(tuple(b for b, s in enumerate(sizes) for _ in range(s)))


def generate_planted_partition(sizes: Sequence[int], p_in: float, p_out: float, seed: int) -> Graph:
    """Unweighted planted-partition graph: Bernoulli(``p_in``) edges inside blocks,
    Bernoulli(``p_out``) between blocks.  Nodes are ``"0".."n-1"`` in block order."""
    if not (0.0 <= p_out < p_in <= 1.0):
        raise _err(f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if not sizes or any(int(s) < 1 for s in sizes):
        raise _err("block sizes must be positive")
    blocks = planted_blocks([int(s) for s in sizes]).labels
    n = len(blocks)
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(blocks[iu] == blocks[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    edges = [(int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep])]
    name = f"planted_{'x'.join(str(int(s)) for s in sizes)}_seed{seed}"
    return Graph(nodes=tuple(str(i) for i in range(n)), edges=tuple(edges), name=name)


def stationary_distribution(g: Graph) -> np.ndarray:
    """``pi = d / 2w`` of the random walk on a connected unsigned graph."""
    g.require_unsigned()
    g.require_connected()
    d = g.degrees
    return d / d.sum()
