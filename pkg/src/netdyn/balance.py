"""Structural balance on signed graphs.

A connected signed graph is balanced when every cycle has a positive sign
product, equivalently when nodes split into two camps with all negative
edges running between camps.  Balance is detected by 2-colouring a BFS
tree; the eigenvalue test on ``L_S`` is kept as a cross-check.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnbalancedGraphError
from .graph import Graph, signed_laplacian

__all__ = [
    "BalanceResult",
    "TraagResult",
    "check_balance",
    "switch",
    "signed_consensus_limit",
    "simulate_traag",
    "random_signed_graph",
    "switched_laplacian",
]


@dataclass(frozen=True)
class BalanceResult:
    balanced: bool
    sigma: np.ndarray                   # +-1 per node, sigma[0] = +1
    frustrated_edges: tuple[tuple[str, str], ...]

    def to_dict(self, g: Graph):
        return {
            "balanced": self.balanced,
            "sigma": {v: int(s) for v, s in zip(g.nodes, self.sigma)},
            "frustrated_edges": [list(e) for e in self.frustrated_edges],
        }


def check_balance(g: Graph) -> BalanceResult:
    """2-colour a BFS tree from node 0 and report edges that break the colouring.

    Crossing a positive edge keeps the polarisation, a negative one flips it.
    """
    g.require_connected(module="balance")
    nbrs = [[] for _ in range(g.n)]
    for i, j, w in g.edges:
        s = 1 if w > 0 else -1
        nbrs[i].append((j, s))
        nbrs[j].append((i, s))
    sigma = np.zeros(g.n, dtype=int)
    if g.n:
        sigma[0] = 1
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j, s in nbrs[i]:
                if sigma[j] == 0:
                    sigma[j] = sigma[i] * s
                    queue.append(j)
    frustrated = tuple((g.nodes[i], g.nodes[j]) for i, j, w in g.edges
                       if sigma[i] * sigma[j] * (1 if w > 0 else -1) < 0)
    sigma.setflags(write=False)
    return BalanceResult(not frustrated, sigma, frustrated)


def switch(g: Graph, sigma) -> Graph:
    """Gauge transformation ``A'_ij = sigma_i A_ij sigma_j``."""
    sigma = np.asarray(sigma)
    if sigma.shape != (g.n,) or not np.all(np.abs(sigma) == 1):
        raise InputError(f"sigma must be a vector of {g.n} entries in {{-1, +1}}", module="balance")
    edges = tuple((i, j, float(sigma[i] * sigma[j]) * w) for i, j, w in g.edges)
    return Graph(nodes=g.nodes, edges=edges, name=g.name)


def switched_laplacian(g: Graph, sigma) -> np.ndarray:
    """``Sigma L_S Sigma``; all off-diagonals are <= 0 exactly when ``sigma`` balances ``g``."""
    s = np.asarray(sigma, dtype=float)
    return s[:, None] * signed_laplacian(g) * s[None, :]


def signed_consensus_limit(g: Graph, x0) -> np.ndarray:
    """Polarised limit ``(sigma^T x0 / n) sigma`` of signed consensus on a balanced graph.

    Raises :class:`UnbalancedGraphError` on unbalanced graphs, where the state
    decays to zero instead.
    """
    res = check_balance(g)
    if not res.balanced:
        raise UnbalancedGraphError(res)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (g.n,):
        raise InputError(f"x0 must have length {g.n}", module="balance")
    s = res.sigma.astype(float)
    return (s @ x0 / g.n) * s


def random_signed_graph(n: int, seed: int, balanced: bool = True, p: float = 0.35,
                        weighted: bool = False) -> Graph:
    """Connected signed test graph.

    Balanced graphs are random unsigned graphs switched by a random ``sigma``.
    Unbalanced ones additionally get one flipped edge on a triangle, which
    plants a cycle with negative sign product.
    """
    if n < 3:
        raise InputError("need n >= 3", module="balance")
    rng = np.random.default_rng(seed)
    A = np.zeros((n, n))
    order = rng.permutation(n)
    for a in range(1, n):  # random tree keeps it connected
        b = rng.integers(0, a)
        A[order[a], order[b]] = A[order[b], order[a]] = 1
    iu, ju = np.triu_indices(n, 1)
    extra = rng.random(iu.size) < p
    A[iu[extra], ju[extra]] = A[ju[extra], iu[extra]] = 1
    i, j, k = rng.choice(n, 3, replace=False)
    A[i, j] = A[j, i] = A[j, k] = A[k, j] = A[i, k] = A[k, i] = 1
    if weighted:
        W = np.triu(rng.uniform(0.5, 2.0, (n, n)), 1)
        A *= W + W.T
    sigma = rng.choice([-1.0, 1.0], n)
    A = sigma[:, None] * A * sigma[None, :]
    if not balanced:
        A[i, j] = -A[i, j]
        A[j, i] = -A[j, i]
    return Graph.from_adjacency(A, name=f"signed_n{n}_seed{seed}_{'bal' if balanced else 'frus'}")


# ---------------------------------------------------------------------------
# Traag et al. opinion dynamics dX/dt = X X^T


@dataclass(frozen=True)
class TraagResult:
    times: np.ndarray
    norm_history: np.ndarray
    final_normalized: np.ndarray
    sign_pattern: np.ndarray
    stopped_reason: str  # "converged" | "blow_up" | "max_time"

    def sign_graph(self, nodes=None) -> Graph:
        """Signed graph whose off-diagonal weights are the final sign pattern."""
        S = self.sign_pattern.astype(float).copy()
        np.fill_diagonal(S, 0.0)
        return Graph.from_adjacency(S, nodes)


def simulate_traag(X0, dt: float | None = None, t_max: float = 1e3, norm_cap: float = 1e12,
                   growth_limit: float = 0.10, converge_tol: float = 1e-10) -> TraagResult:
    """RK4 integration of ``dX/dt = X X^T`` from a symmetric ``X0``.

    A step is rejected and halved whenever it would grow ``||X||_F`` by more
    than ``growth_limit``.  Integration stops on blow-up (``||X||_F >=
    norm_cap``), when ``X/||X||_F`` moves less than ``converge_tol`` over a
    step, or at ``t_max``.
    """
    X = np.array(X0, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InputError("X0 must be square", module="balance")
    if not np.all(np.isfinite(X)):
        raise InputError("X0 has non-finite entries", module="balance")
    if np.max(np.abs(X - X.T), initial=0.0) > 1e-12 * max(1.0, np.abs(X).max(initial=0.0)):
        raise InputError("X0 must be symmetric", module="balance")
    norm = np.linalg.norm(X)
    if norm == 0:
        raise InputError("X0 is zero", module="balance")
    h_max = dt if dt is not None else 1e-3 / norm
    if h_max <= 0:
        raise InputError("dt must be positive", module="balance")

    def f(Y):
        return Y @ Y.T

    t, h = 0.0, h_max
    times, norms = [0.0], [norm]
    reason = "max_time"
    while t < t_max:
        step = min(h, t_max - t)
        k1 = f(X)
        k2 = f(X + 0.5 * step * k1)
        k3 = f(X + 0.5 * step * k2)
        k4 = f(X + step * k3)
        Xn = X + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        nn = np.linalg.norm(Xn)
        if not np.isfinite(nn) or nn > (1 + growth_limit) * norm:
            h = step / 2
            if h < 1e-300:
                reason = "blow_up"
                break
            continue
        Xn = (Xn + Xn.T) / 2
        change = np.linalg.norm(Xn / nn - X / norm)
        X, norm, t = Xn, nn, t + step
        times.append(t)
        norms.append(norm)
        if norm >= norm_cap:
            reason = "blow_up"
            break
        if change < converge_tol:
            reason = "converged"
            break
        if h < h_max and nn < (1 + growth_limit / 4) * norms[-2]:
            h = min(2 * h, h_max)
    final = X / norm
    return TraagResult(np.array(times), np.array(norms), final,
                       np.where(final >= 0, 1, -1), reason)
