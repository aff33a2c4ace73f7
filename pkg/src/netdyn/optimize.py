"""Greedy maximisation of stability scores and Markov-time sweeps.

The search is Louvain-like.  Nodes are moved one at a time to the cell
(possibly a fresh one) with the largest score gain until no move helps.
Cells are then collapsed into super-nodes and the same local search runs
one level up.  For the additive variants the gain of moving node ``i`` from
cell ``a`` to ``b`` is exact and cheap,

    gain = 2 (K[i, b] - K[i, a] + M[i, i]),   K = M C,

where ``M`` is the (symmetric) node-level autocovariance.  The ``min``
variant tracks per-cell diagonal sums and masses instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .graph import Partition
from .stability import VARIANTS, StabilityScore, TransitionFamily, autocovariance, score, _bernoulli_scale

__all__ = [
    "SweepEntry",
    "SweepResult",
    "Objective",
    "objective_matrix",
    "optimize_partition",
    "stability_sweep",
    "is_single_move_optimal",
    "partition_score",
]

DEFAULT_RESTARTS = 10


def _err(msg):
    return InputError(msg, module="optimize")


class Objective(NamedTuple):
    M: np.ndarray     # symmetric node-level matrix; cell scores come from C^T M C
    mass: np.ndarray  # stationary mass per node (used by the min variant)
    tol: float        # gains at or below this are rounding noise


def objective_matrix(f: TransitionFamily, t, variant: str) -> Objective:
    if variant not in VARIANTS:
        raise _err(f"variant must be one of {VARIANTS}, got {variant!r}")
    pi = f.pi
    M = autocovariance(f, t)
    # M = Pi P(t) - pi pi^T loses digits relative to the pi pi^T term
    noise = np.outer(pi, pi) + np.abs(M)
    if variant == "corr":
        s = _bernoulli_scale(pi)
        M = s[:, None] * M * s[None, :]
        noise = s[:, None] * noise * s[None, :]
    return Objective(M, pi.copy(), 1e-12 * float(noise.max()))


def partition_score(M, mass, labels, variant) -> float:
    labels = np.asarray(labels)
    k = labels.max() + 1
    C = np.zeros((labels.size, k))
    C[np.arange(labels.size), labels] = 1.0
    R = C.T @ M @ C
    if variant == "min":
        return float(np.min(np.diag(R) / (mass @ C)))
    return float(np.trace(R))


def _local_moves(M, mass, variant, order, labels, tol):
    """Best-improvement single-node moves until none has positive gain.

    Returns ``(labels, moved)`` with labels compressed to ``0..k-1``.
    """
    n = M.shape[0]
    labels = np.array(labels, dtype=int)
    cap = n + 1
    C = np.zeros((n, cap))
    C[np.arange(n), labels] = 1.0
    K = M @ C
    Rd = np.einsum("vc,vc->c", C, K)
    cmass = mass @ C
    size = np.bincount(labels, minlength=cap)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            a = labels[i]
            live = np.flatnonzero(size)
            # compact view: live cells then one empty slot
            empty = np.flatnonzero(size == 0)[0]
            idx = np.append(live, empty)
            if variant != "min":
                gains = 2.0 * (K[i, idx] - K[i, a] + M[i, i])
                gains[-1] = 2.0 * (-K[i, a] + M[i, i])
            else:
                vals = Rd[live] / cmass[live]
                old = vals.min()
                pos_a = np.searchsorted(live, a)
                Ra = Rd[a] - 2 * K[i, a] + M[i, i]
                ma = cmass[a] - mass[i]
                va = Ra / ma if size[a] > 1 else np.inf
                vb = np.append((Rd[live] + 2 * K[i, live] + M[i, i]) / (cmass[live] + mass[i]),
                               M[i, i] / mass[i])
                # minimum over untouched cells, excluding a and the target
                sm = np.argsort(vals, kind="stable")[:3]
                rest = np.full(idx.size, np.inf)
                for pos in range(idx.size):
                    for c in sm:
                        if c != pos_a and c != pos:
                            rest[pos] = vals[c]
                            break
                gains = np.minimum(np.minimum(rest, va), vb) - old
            same = idx == a
            gains[same] = 0.0
            if size[a] == 1:
                gains[-1] = 0.0  # moving a singleton to a new cell changes nothing
            best = int(np.argmax(gains))  # first max = lowest cell index, fresh cell last
            if gains[best] <= tol:
                continue
            b = int(idx[best])
            col = M[:, i]
            if variant == "min":
                Rd[a] += -2 * K[i, a] + M[i, i]
                Rd[b] += 2 * K[i, b] + M[i, i]
            K[:, a] -= col
            K[:, b] += col
            cmass[a] -= mass[i]
            cmass[b] += mass[i]
            size[a] -= 1
            size[b] += 1
            labels[i] = b
            improved = moved_any = True
    return Partition.from_labels(labels).labels, moved_any


def _aggregate(M, mass, labels):
    k = labels.max() + 1
    C = np.zeros((labels.size, k))
    C[np.arange(labels.size), labels] = 1.0
    return C.T @ M @ C, mass @ C


def _multilevel(M, mass, variant, rng, labels, tol):
    labels, _ = _local_moves(M, mass, variant, rng.permutation(M.shape[0]), labels, tol)
    k = labels.max() + 1
    if k == M.shape[0] or k == 1:
        return labels
    M2, mass2 = _aggregate(M, mass, labels)
    sup = _multilevel(M2, mass2, variant, rng, np.arange(k), tol)
    return sup[labels]


def _merge_weakest(M, mass, labels, tol):
    """Merge the weakest cell into whichever partner raises the minimum most."""
    while labels.max() > 0:
        R, m = _aggregate(M, mass, labels)
        vals = np.diag(R) / m
        w = int(np.argmin(vals))
        base = vals[w]
        best, best_val = -1, base
        for c in range(vals.size):
            if c == w:
                continue
            merged = (R[w, w] + R[c, c] + 2 * R[w, c]) / (m[w] + m[c])
            rest = np.delete(vals, [w, c])
            val = min(merged, rest.min(initial=np.inf))
            if val > best_val + tol:
                best, best_val = c, val
        if best < 0:
            break
        i, j = min(w, best), max(w, best)
        labels = labels.copy()
        labels[labels == j] = i
        labels[labels > j] -= 1
    return labels


def _louvain_min(M, mass, rng, tol, max_rounds=100):
    # single moves rarely lift the minimum out of the all-singletons start,
    # so begin from the trace optimum and refine
    labels = _louvain(M, mass, "trace", rng, tol, max_rounds)
    for _ in range(max_rounds):
        before = labels
        labels, _ = _local_moves(M, mass, "min", rng.permutation(M.shape[0]), labels, tol)
        labels = _merge_weakest(M, mass, labels, tol)
        if np.array_equal(labels, before):
            break
    return Partition.from_labels(labels).labels


def _louvain(M, mass, variant, rng, tol, max_rounds=100):
    if variant == "min":
        return _louvain_min(M, mass, rng, tol, max_rounds)
    n = M.shape[0]
    labels = _multilevel(M, mass, variant, rng, np.arange(n), tol)
    for _ in range(max_rounds):
        # a node-level pass catches moves hidden by aggregation
        labels, moved = _local_moves(M, mass, variant, rng.permutation(n), labels, tol)
        if not moved:
            break
        labels = _multilevel(M, mass, variant, rng, labels, tol)
    return Partition.from_labels(labels).labels


def _onehot(labels):
    C = np.zeros((labels.size, labels.max() + 1))
    C[np.arange(labels.size), labels] = 1.0
    return C


def _best_move_gain(M, labels):
    """Largest single-node move gain for an additive variant (fresh cell included)."""
    C = _onehot(labels)
    K = M @ C
    n = labels.size
    own = K[np.arange(n), labels]
    d = np.diag(M)
    gains = 2.0 * (K - own[:, None] + d[:, None])
    gains[np.arange(n), labels] = -np.inf
    size = C.sum(axis=0)[labels]
    fresh = np.where(size > 1, 2.0 * (d - own), -np.inf)
    return float(max(gains.max(initial=-np.inf), fresh.max(initial=-np.inf)))


def _coarsen(M, labels, tol):
    """Merge cell pairs while a merge costs no more than rounding noise.

    Among partitions whose scores agree up to ``tol`` this prefers fewer
    cells; without it, nodes whose couplings have decayed below the noise
    floor stay stranded in the singletons the search started from.
    """
    labels = labels.copy()
    while labels.max() > 0:
        C = _onehot(labels)
        G = 2.0 * (C.T @ M @ C)
        np.fill_diagonal(G, -np.inf)
        i, j = np.unravel_index(int(np.argmax(G)), G.shape)
        if G[i, j] < -tol:
            break
        i, j = min(i, j), max(i, j)
        labels[labels == j] = i
        labels[labels > j] -= 1
    return labels


def is_single_move_optimal(M, mass, labels, variant, tol=0.0) -> bool:
    """Scan every (node, target cell) move, including a move to a fresh cell."""
    labels = np.asarray(labels)
    base = partition_score(M, mass, labels, variant)
    k = labels.max() + 1
    for i in range(labels.size):
        for b in range(k + 1):
            if b == labels[i] or (b == k and np.sum(labels == labels[i]) == 1):
                continue
            trial = labels.copy()
            trial[i] = b
            trial = Partition.from_labels(trial).labels
            if partition_score(M, mass, trial, variant) - base > tol:
                return False
    return True


def optimize_partition(f: TransitionFamily, t, variant: str = "trace", seed: int = 0,
                       restarts: int = DEFAULT_RESTARTS) -> tuple[Partition, StabilityScore]:
    """Best partition over ``restarts`` seeded Louvain-style runs.

    Ties in score go to the lexicographically smallest canonical labelling,
    so the result depends only on ``seed``.  For the additive variants,
    cells are then merged while merging costs no more than rounding noise
    (kept only if the result is still single-move optimal).  If no
    partition beats the all-in-one partition (score 0) by more than
    rounding noise, that partition is returned; this is what happens at
    very large ``t``.
    """
    if restarts < 1:
        raise _err("restarts must be >= 1")
    f.check_time(t)
    M, mass, tol = objective_matrix(f, t, variant)
    rng = np.random.default_rng(seed)
    best, best_val = None, -np.inf
    for _ in range(restarts):
        labels = _louvain(M, mass, variant, rng, tol)
        val = partition_score(M, mass, labels, variant)
        if val > best_val + tol or (val >= best_val - tol and tuple(labels) < tuple(best)):
            best, best_val = labels, max(val, best_val)
    if variant != "min":
        merged = Partition.from_labels(_coarsen(M, np.asarray(best), tol)).labels
        if _best_move_gain(M, merged) <= tol:
            best = merged
    if best_val <= tol:
        # indistinguishable from the trivial partition (score 0): report that
        best = np.zeros(f.n, dtype=int)
    p = Partition(tuple(int(c) for c in best))
    return p, score(f, p, t, variant)


@dataclass(frozen=True)
class SweepEntry:
    t: float
    partition: Partition
    r: float
    k: int
    restarts: int


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepEntry, ...]
    variant: str

    def table(self):
        return [(e.t, e.k, e.r) for e in self.entries]

    def plateaus(self):
        """Maximal runs of consecutive times with the same number of cells,
        as ``(first index, last index, k)``."""
        runs, start = [], 0
        ks = [e.k for e in self.entries]
        for i in range(1, len(ks) + 1):
            if i == len(ks) or ks[i] != ks[start]:
                runs.append((start, i - 1, ks[start]))
                start = i
        return runs

    def plateau_at(self, t):
        """The plateau whose time span ``[t_first, t_last]`` contains ``t``, or None."""
        for a, b, k in self.plateaus():
            if self.entries[a].t <= t <= self.entries[b].t:
                return a, b, k
        return None


def stability_sweep(f: TransitionFamily, times, variant: str = "trace", seed: int = 0,
                    restarts: int = DEFAULT_RESTARTS) -> SweepResult:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise _err("empty time grid")
    if np.any(np.diff(times) <= 0):
        raise _err("times must be strictly increasing")
    entries = []
    for t in times:
        p, sc = optimize_partition(f, t, variant, seed, restarts)
        entries.append(SweepEntry(float(t), p, sc.r, p.k, restarts))
    return SweepResult(tuple(entries), variant)
