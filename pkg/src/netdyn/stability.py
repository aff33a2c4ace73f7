"""Markov Stability and its variants.

All scores are built from the clustered autocovariance

    R(t, C) = C^T (Pi P(t) - pi pi^T) C,

of a random walk at stationarity (``pi = d/2w``, ``Pi = diag(pi)``).  The
trace gives Markov Stability; rescaling by Bernoulli variances gives the
correlation variant; normalising by cell mass and taking the smallest
diagonal entry gives ``r_min``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import Graph, Partition, indicator_matrix, normalized_laplacian
from .spectral import Spectrum, decompose

__all__ = [
    "TransitionFamily",
    "StabilityScore",
    "AlphaCheck",
    "VARIANTS",
    "transition_matrix",
    "autocovariance",
    "clustered_autocovariance",
    "markov_stability",
    "correlation_stability",
    "r_min",
    "score",
    "lumped_markov",
    "alpha_check",
    "S_FLOOR",
]

VARIANTS = ("trace", "corr", "min")
MODES = ("continuous", "discrete")
S_FLOOR = 1e-15


def _err(msg):
    return InputError(msg, module="stability")


@dataclass(frozen=True)
class TransitionFamily:
    """Random-walk transition matrices ``P(t)`` on an undirected graph.

    ``continuous``: ``P(t) = exp(-t L_RW)`` through one decomposition of ``L_N``.
    ``discrete``: ``P(t) = (D^{-1} A)^t`` for integer ``t``.
    Disconnected graphs are allowed (the walk is then block-stochastic) as
    long as no node is isolated; ``pi = d/2w`` throughout.
    """

    graph: Graph
    mode: str = "continuous"
    spectrum: Spectrum | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise _err(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.graph.is_signed:
            raise _err("Markov Stability needs an unsigned graph")
        if np.any(self.graph.degrees <= 0):
            raise _err("every node needs positive degree")
        if self.mode == "continuous" and self.spectrum is None:
            object.__setattr__(self, "spectrum", decompose(normalized_laplacian(self.graph)))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def pi(self) -> np.ndarray:
        d = self.graph.degrees
        return d / d.sum()

    def _stationary_block(self) -> np.ndarray:
        """``Pi P(inf)``: per component ``pi_c pi_c^T / pi(c)``."""
        pi = self.pi
        comp = np.asarray(self.graph.component_of)
        out = np.zeros((self.n, self.n))
        for c in range(self.graph.n_components):
            v = np.where(comp == c, pi, 0.0)
            out += np.outer(v, v) / v.sum()
        return out

    @property
    def step_matrix(self) -> np.ndarray:
        """One-step transition matrix ``D^{-1} A``."""
        return self.graph.adjacency / self.graph.degrees[:, None]

    def check_time(self, t):
        if not np.isfinite(t) or t < 0:
            raise _err(f"Markov time must be finite and >= 0, got {t}")
        if self.mode == "discrete" and float(t) != int(t):
            raise _err(f"discrete-time walks need integer t, got {t}")

    def lambda_2(self) -> float:
        """Smallest nonzero eigenvalue of ``L_RW`` (the slowest relaxation rate)."""
        s = self.spectrum if self.spectrum is not None else decompose(normalized_laplacian(self.graph))
        lam = s.eigenvalues
        return float(lam[lam > s.zero_tol()][0])


def transition_matrix(f: TransitionFamily, t) -> np.ndarray:
    f.check_time(t)
    if f.mode == "discrete":
        return np.linalg.matrix_power(f.step_matrix, int(t))
    sq = np.sqrt(f.graph.degrees)
    E = f.spectrum.apply(lambda lam: np.exp(-lam * t))
    return E * (sq[None, :] / sq[:, None])


def autocovariance(f: TransitionFamily, t) -> np.ndarray:
    """Symmetric ``Pi P(t) - pi pi^T``."""
    pi = f.pi
    if f.mode == "discrete":
        M = pi[:, None] * transition_matrix(f, t)
        M = (M + M.T) / 2
        return M - np.outer(pi, pi)
    f.check_time(t)
    # The kernel of L_N (one sqrt(pi)-shaped vector per component) is replaced
    # by its exact contribution; on a connected graph that cancels pi pi^T and
    # nothing is lost to cancellation at large t.
    s = f.spectrum
    live = np.abs(s.eigenvalues) > s.zero_tol()
    W = np.sqrt(pi)[:, None] * s.eigenvectors[:, live]
    M = (W * np.exp(-s.eigenvalues[live] * t)) @ W.T
    M = (M + M.T) / 2
    if f.graph.n_components > 1:
        M += f._stationary_block() - np.outer(pi, pi)
    return M


def _check_partition(f, p):
    if p.n != f.n:
        raise _err(f"partition covers {p.n} nodes, graph has {f.n}")


def clustered_autocovariance(f: TransitionFamily, p: Partition, t) -> np.ndarray:
    _check_partition(f, p)
    C = indicator_matrix(p, f.n)
    return C.T @ autocovariance(f, t) @ C


@dataclass(frozen=True)
class StabilityScore:
    t: float
    r: float
    R: np.ndarray
    variant: str


def markov_stability(f: TransitionFamily, p: Partition, t) -> StabilityScore:
    R = clustered_autocovariance(f, p, t)
    return StabilityScore(float(t), float(np.trace(R)), R, "trace")


def _bernoulli_scale(pi):
    return 1.0 / np.sqrt(np.maximum(pi * (1.0 - pi), S_FLOOR))


def correlation_stability(f: TransitionFamily, p: Partition, t) -> StabilityScore:
    """Trace of ``C^T S^{-1/2} (Pi P(t) - pi pi^T) S^{-1/2} C`` with ``S = Pi (I - Pi)``."""
    _check_partition(f, p)
    s = _bernoulli_scale(f.pi)
    C = indicator_matrix(p, f.n)
    R = C.T @ (s[:, None] * autocovariance(f, t) * s[None, :]) @ C
    return StabilityScore(float(t), float(np.trace(R)), R, "corr")


def r_min(f: TransitionFamily, p: Partition, t) -> StabilityScore:
    """Weakest cell of the mass-normalised autocovariance ``(C^T Pi C)^{-1} R``.

    ``R`` in the returned score is the normalised matrix.
    """
    R = clustered_autocovariance(f, p, t)
    mass = f.pi @ indicator_matrix(p, f.n)
    if np.any(mass <= 0):
        raise _err("partition has a cell with zero stationary mass")
    Rn = R / mass[:, None]
    return StabilityScore(float(t), float(np.min(np.diag(Rn))), Rn, "min")


def score(f: TransitionFamily, p: Partition, t, variant: str = "trace") -> StabilityScore:
    if variant == "trace":
        return markov_stability(f, p, t)
    if variant == "corr":
        return correlation_stability(f, p, t)
    if variant == "min":
        return r_min(f, p, t)
    raise _err(f"variant must be one of {VARIANTS}, got {variant!r}")


def lumped_markov(f: TransitionFamily, p: Partition) -> np.ndarray:
    """Lumped chain ``U = diag(pi C)^{-1} C^T Pi D^{-1} A C`` (discrete mode only)."""
    if f.mode != "discrete":
        raise _err("the lumped chain is defined for the discrete-time walk only")
    _check_partition(f, p)
    C = indicator_matrix(p, f.n)
    pi = f.pi
    mass = pi @ C
    flow = C.T @ (pi[:, None] * f.step_matrix) @ C
    return flow / mass[:, None]


@dataclass(frozen=True)
class AlphaCheck:
    passes: bool            # min_i U_ii >= alpha
    U_diag: np.ndarray
    beta1: float            # r_min(1, C)
    gamma: np.ndarray       # beta1 + pi_l (guaranteed lower bound on U_ii)
    implication_holds: bool


def alpha_check(f: TransitionFamily, p: Partition, alpha: float, slack: float = 1e-12) -> AlphaCheck:
    """Is ``p`` an alpha-partition (every cell keeps at least ``alpha`` of its flow)?

    Also checks the bound ``U_ii >= r_min(1, C) + pi_l,i``; ``slack`` absorbs
    rounding in the cell that attains the minimum, where the bound is tight.
    """
    if not (0.0 <= alpha <= 1.0):
        raise _err(f"alpha must lie in [0, 1], got {alpha}")
    U = lumped_markov(f, p)
    Ud = np.diag(U).copy()
    beta1 = r_min(f, p, 1).r
    gamma = beta1 + f.pi @ indicator_matrix(p, f.n)
    return AlphaCheck(bool(Ud.min() >= alpha), Ud, beta1, gamma,
                      bool(np.all(Ud >= gamma - slack)))
