"""Linear dynamics on a fixed network: consensus (with constant input),
random walks and signed consensus.

Propagators are evaluated through a symmetric eigendecomposition, so any
time can be sampled directly without stepping.  ``integrate_reference`` is a
plain RK4 integrator kept as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import (
    Graph,
    combinatorial_laplacian,
    normalized_laplacian,
    random_walk_laplacian,
    signed_laplacian,
)
from .spectral import Spectrum, decompose

__all__ = [
    "Trajectory",
    "phi",
    "check_times",
    "log_times",
    "default_times",
    "parse_times",
    "simulate_consensus",
    "simulate_random_walk",
    "simulate_signed_consensus",
    "integrate_reference",
    "write_trajectory_csv",
]

KINDS = ("consensus", "walk", "signed")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, n)
    kind: str
    nodes: tuple[str, ...] = ()

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _err(msg):
    return InputError(msg, module="dynamics")


def check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise _err("time grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(t)) or t[0] < 0:
        raise _err("times must be finite and non-negative")
    if np.any(np.diff(t) <= 0):
        raise _err("time grid must be strictly increasing")
    return t


def log_times(lo: float, hi: float, per_decade: int = 64) -> np.ndarray:
    """Log-spaced grid over ``[lo, hi]`` with ``per_decade`` points per decade."""
    if not (0 < lo < hi):
        raise _err("log grid needs 0 < lo < hi")
    n = max(2, int(np.ceil(np.log10(hi / lo) * per_decade)) + 1)
    return np.logspace(np.log10(lo), np.log10(hi), n)


def default_times(s: Spectrum, per_decade: int = 64) -> np.ndarray:
    """Grid over ``[1e-2/lambda_max, 10/lambda_2]`` for a connected-graph spectrum."""
    lam = s.eigenvalues
    nz = lam[lam > s.zero_tol()]
    if nz.size == 0:
        raise _err("spectrum has no positive eigenvalue")
    return log_times(1e-2 / nz[-1], 10.0 / nz[0], per_decade)


def parse_times(spec: str) -> np.ndarray:
    """Parse ``log:a:b:n`` (``n`` points over ``10**a .. 10**b``) or ``list:t1,t2,...``.

    A bare number or comma-separated list is accepted as shorthand for ``list:``.
    """
    try:
        if spec.startswith("log:"):
            a, b, n = spec[4:].split(":")
            return check_times(np.logspace(float(a), float(b), int(n)))
        body = spec[5:] if spec.startswith("list:") else spec
        return check_times([float(x) for x in body.split(",") if x.strip()])
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise _err(f"bad time specification {spec!r}: expected log:a:b:n or list:t1,t2,...") from None


def phi(lam, t):
    """``(1 - exp(-lam t)) / lam`` with the limit ``t`` at ``lam = 0``."""
    lam = np.asarray(lam, dtype=float)
    z = lam * t
    small = np.abs(z) < 1e-6
    safe = np.where(small, 1.0, lam)
    series = t * (1.0 - z / 2.0 + z * z / 6.0)
    return np.where(small, series, -np.expm1(-z) / safe)


def _vector(x, n, what):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise _err(f"{what} must have length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise _err(f"{what} has non-finite entries")
    return x


def _propagate(s: Spectrum, x0, times, u=None):
    V, lam = s.eigenvectors, s.eigenvalues
    a0 = V.T @ x0
    b = None if u is None else V.T @ u
    out = np.empty((times.size, x0.size))
    for r, t in enumerate(times):
        coef = a0 * np.exp(-lam * t)
        if b is not None:
            coef = coef + b * phi(lam, t)
        out[r] = V @ coef
    return out


def simulate_consensus(g: Graph, x0, times, u=None, spectrum: Spectrum | None = None) -> Trajectory:
    """Solve ``dx/dt = -L x + u`` for constant ``u`` (zero if omitted)."""
    g.require_unsigned(module="dynamics")
    g.require_connected(module="dynamics")
    times = check_times(times)
    x0 = _vector(x0, g.n, "x0")
    u = None if u is None else _vector(u, g.n, "input u")
    s = spectrum if spectrum is not None else decompose(combinatorial_laplacian(g))
    return Trajectory(times, _propagate(s, x0, times, u), "consensus", g.nodes)


def simulate_random_walk(g: Graph, p0, times, spectrum: Spectrum | None = None) -> Trajectory:
    """Continuous-time walk ``dp^T/dt = -p^T L_RW`` via the symmetric ``L_N``.

    ``spectrum`` if given must be the decomposition of ``normalized_laplacian(g)``.
    """
    g.require_unsigned(module="dynamics")
    g.require_connected(module="dynamics")
    times = check_times(times)
    p0 = _vector(p0, g.n, "p0")
    if np.any(p0 < 0) or abs(p0.sum() - 1.0) > 1e-9:
        raise _err("p0 must be a probability vector (non-negative, summing to 1)")
    s = spectrum if spectrum is not None else decompose(normalized_laplacian(g))
    sq = np.sqrt(g.degrees)
    # p(t) = D^{1/2} exp(-t L_N) D^{-1/2} p0
    states = _propagate(s, p0 / sq, times) * sq[None, :]
    return Trajectory(times, states, "walk", g.nodes)


def simulate_signed_consensus(g: Graph, x0, times, spectrum: Spectrum | None = None) -> Trajectory:
    """Solve ``dx/dt = -L_S x`` on a connected, possibly signed graph."""
    g.require_connected(module="dynamics")
    times = check_times(times)
    x0 = _vector(x0, g.n, "x0")
    s = spectrum if spectrum is not None else decompose(signed_laplacian(g))
    return Trajectory(times, _propagate(s, x0, times), "signed", g.nodes)


def integrate_reference(g: Graph, x0, times, u=None, kind: str = "consensus",
                        step: float | None = None) -> Trajectory:
    """Fixed-step RK4 for the same dynamics; a test oracle, not a production path.

    The step defaults to (and may not exceed) ``0.1 / bound`` where ``bound``
    is the Gershgorin bound on the generator's spectral radius.
    """
    if kind not in KINDS:
        raise _err(f"unknown dynamics kind {kind!r}")
    times = check_times(times)
    x = _vector(x0, g.n, "x0").copy()
    if kind == "consensus":
        M = -combinatorial_laplacian(g)
        bound = 2 * g.degrees.max(initial=0.0)
    elif kind == "signed":
        M = -signed_laplacian(g)
        bound = 2 * g.abs_degrees.max(initial=0.0)
    else:
        M = -random_walk_laplacian(g).T  # column form of dp^T/dt = -p^T L_RW
        bound = 2.0
    bound = max(bound, 1e-300)
    hmax = 0.1 / bound
    if step is None:
        step = hmax
    elif step > hmax * (1 + 1e-12):
        raise _err(f"RK4 step {step:g} exceeds the stability limit 0.1/lambda_max = {hmax:g}")
    c = np.zeros(g.n) if u is None else _vector(u, g.n, "input u")

    def f(y):
        return M @ y + c

    out = np.empty((times.size, g.n))
    t = 0.0
    for r, target in enumerate(times):
        span = target - t
        if span > 0:
            nsteps = int(np.ceil(span / step - 1e-12))
            h = span / nsteps
            for _ in range(nsteps):
                k1 = f(x)
                k2 = f(x + 0.5 * h * k1)
                k3 = f(x + 0.5 * h * k2)
                k4 = f(x + h * k3)
                x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = target
        out[r] = x
    return Trajectory(times, out, kind, g.nodes)


def write_trajectory_csv(tr: Trajectory, fh):
    fh.write("t," + ",".join(tr.nodes) + "\n")
    for t, row in zip(tr.times, tr.states):
        fh.write(f"{t:.17g}," + ",".join(f"{x:.17g}" for x in row) + "\n")
