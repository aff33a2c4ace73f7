"""Symmetric eigendecomposition, time scales and partition/eigenspace alignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .graph import Partition, indicator_matrix

__all__ = [
    "Spectrum",
    "TimescaleReport",
    "decompose",
    "timescale_report",
    "subspace_alignment",
    "zero_threshold",
    "write_spectrum_csv",
    "write_eigenvectors_csv",
]

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors (column ``i`` <-> ``eigenvalues[i]``)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    scale: float = 1.0  # max |entry| of the decomposed matrix

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def zero_tol(self) -> float:
        return zero_threshold(self.n, self.scale)

    def n_zero(self) -> int:
        """Multiplicity of the (numerically) zero eigenvalue."""
        return int(np.sum(np.abs(self.eigenvalues) <= self.zero_tol()))

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T

    def apply(self, f, x=None) -> np.ndarray:
        """``V f(Lambda) V^T`` (or its action on ``x``)."""
        V = self.eigenvectors
        fl = f(self.eigenvalues)
        if x is None:
            return (V * fl) @ V.T
        return V @ (fl[:, None] * (V.T @ x)) if np.ndim(x) == 2 else V @ (fl * (V.T @ x))


def zero_threshold(n: int, scale: float) -> float:
    return 1e-12 * n * max(scale, 1e-300)


def decompose(m) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix.

    Each eigenvector is oriented so its first entry that is not negligible is
    positive, which makes the output reproducible across runs.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("matrix must be square", module="spectral")
    if not np.all(np.isfinite(m)):
        # graph weights are finite, so this is overflow while forming the operator
        raise NumericalError("matrix has non-finite entries", module="spectral")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * max(1.0, scale):
        raise InputError("matrix is not symmetric", module="spectral")
    lam, V = np.linalg.eigh((m + m.T) / 2)
    V = np.array(V)
    for c in range(V.shape[1]):
        col = V[:, c]
        lead = np.flatnonzero(np.abs(col) > 1e-8 * np.max(np.abs(col)))[0]
        if col[lead] < 0:
            V[:, c] = -col
    lam.setflags(write=False)
    V.setflags(write=False)
    return Spectrum(lam, V, scale)


@dataclass(frozen=True)
class TimescaleReport:
    timescales: np.ndarray  # 1/lambda_i, inf where lambda_i is zero
    gap_index: int          # 1-based: the gap sits between lambda_k and lambda_{k+1}
    gap_ratio: float        # lambda_{k+1}/lambda_k (inf if lambda_k is zero)
    ratios: np.ndarray      # ratios[i-2] = lambda_{i+1}/lambda_i for i = 2..k_max (nan if skipped)


def timescale_report(s: Spectrum, k_max: int | None = None) -> TimescaleReport:
    """Characteristic time scales ``1/lambda_i`` and the largest relative spectral gap.

    The gap is searched over ``i = 2..k_max``.  When ``lambda_i`` is zero and
    ``lambda_{i+1}`` is not, the ratio is infinite; when both are zero the
    index is skipped.  Ties (equal up to a relative 1e-9) go to the smaller ``i``.
    """
    lam = np.asarray(s.eigenvalues, dtype=float)
    n = lam.size
    tol = s.zero_tol()
    if n < 2 or np.all(np.abs(lam) <= tol):
        raise InputError("spectrum has no nonzero eigenvalue", module="spectral")
    k_max = n - 1 if k_max is None else min(int(k_max), n - 1)
    zero = np.abs(lam) <= tol
    with np.errstate(divide="ignore"):
        tau = np.where(zero, np.inf, 1.0 / np.where(zero, 1.0, lam))

    ratios = np.full(max(k_max - 1, 0), np.nan)
    for i in range(2, k_max + 1):  # 1-based i; lam[i-1] is lambda_i
        lo, hi = lam[i - 1], lam[i]
        if zero[i - 1]:
            ratios[i - 2] = np.nan if zero[i] else np.inf
        else:
            ratios[i - 2] = hi / lo

    if k_max < 2 or np.all(np.isnan(ratios)):
        # only lambda_1/lambda_2 is available (n == 2 or k_max == 1)
        return TimescaleReport(tau, 1, np.inf if zero[0] else lam[1] / lam[0], ratios)
    top = np.nanmax(ratios)
    # ratios within rounding of the maximum count as ties; the smallest i wins
    best = int(np.flatnonzero(ratios >= top * (1 - 1e-9))[0]) if np.isfinite(top) \
        else int(np.flatnonzero(np.isinf(ratios))[0])
    return TimescaleReport(tau, best + 2, float(ratios[best]), ratios)


def subspace_alignment(s: Spectrum, p: Partition, k: int) -> float:
    """Largest principal angle between span(C) and the ``k`` slowest eigenvectors."""
    if k != p.k:
        raise InputError(f"k={k} does not match the partition's {p.k} cells", module="spectral")
    C = indicator_matrix(p, s.n)
    Q = C / np.sqrt(p.sizes())[None, :]  # indicator columns are already orthogonal
    Vk = s.eigenvectors[:, :k]
    proj = Vk.T @ Q
    cos_min = np.linalg.svd(proj, compute_uv=False).min()
    # sine from the residual keeps small angles accurate (arccos near 1 is not)
    sin_max = np.linalg.svd(Q - Vk @ proj, compute_uv=False).max()
    return float(np.arctan2(sin_max, cos_min))


def write_spectrum_csv(s: Spectrum, fh):
    fh.write("index,eigenvalue\n")
    for i, lam in enumerate(s.eigenvalues, 1):
        fh.write(f"{i},{lam:.17g}\n")


def write_eigenvectors_csv(s: Spectrum, nodes, fh):
    fh.write("node," + ",".join(f"v{i}" for i in range(1, s.n + 1)) + "\n")
    for v, row in zip(nodes, s.eigenvectors):
        fh.write(v + "," + ",".join(f"{x:.17g}" for x in row) + "\n")
