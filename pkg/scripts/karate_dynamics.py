"""Consensus, zealots and random walks on the karate club graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from _config import parse
from netdyn.dynamics import log_times, simulate_consensus, simulate_random_walk, write_trajectory_csv
from netdyn.graph import (
    combinatorial_laplacian,
    karate_factions,
    load_graph,
    normalized_laplacian,
    stationary_distribution,
)
from netdyn.spectral import decompose, timescale_report


@dataclass(frozen=True)
class Config:
    seed: int = 0
    out: str = "runs/karate"
    per_decade: int = 32


def agreement(side, factions):
    a = int(np.sum(side == (factions.labels == factions.cell_of[0])))
    return max(a, side.size - a)


def main(cfg: Config):
    g = load_graph("karate")
    fac = karate_factions(g)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    s = decompose(combinatorial_laplacian(g))
    rep = timescale_report(s, k_max=6)
    print(f"lambda_2..4(L) = {np.round(s.eigenvalues[1:4], 4)}; largest gap after k={rep.gap_index}")

    times = log_times(1e-2 / s.eigenvalues[-1], 20 / s.eigenvalues[1], cfg.per_decade)
    x0 = np.random.default_rng(cfg.seed).random(g.n)
    tr = simulate_consensus(g, x0, times, spectrum=s)
    with open(out / "consensus.csv", "w") as fh:
        write_trajectory_csv(tr, fh)
    mid = simulate_consensus(g, x0, [5 / s.eigenvalues[1]], spectrum=s).final
    print(f"consensus: spread at t=5/lambda2 {np.ptp(mid):.2e}, "
          f"sign split agrees with factions on {agreement(mid > mid.mean(), fac)}/34")

    u = np.zeros(g.n)
    u[g.index["0"]], u[g.index["33"]] = 1.0, -1.0
    x = simulate_consensus(g, np.zeros(g.n), [200 / s.eigenvalues[1]], u=u, spectrum=s).final
    print(f"zealots: median split agrees with factions on {agreement(x > np.median(x), fac)}/34")

    sn = decompose(normalized_laplacian(g))
    p0 = np.zeros(g.n)
    p0[g.index["0"]] = 1.0
    walk = simulate_random_walk(g, p0, log_times(1e-2, 50 / sn.eigenvalues[1], cfg.per_decade), spectrum=sn)
    with open(out / "walk.csv", "w") as fh:
        write_trajectory_csv(walk, fh)
    err = np.abs(walk.final - stationary_distribution(g)).sum()
    print(f"walk from the instructor: L1 distance to pi at the end {err:.1e}")
    print(f"wrote {out}/consensus.csv and {out}/walk.csv")


if __name__ == "__main__":
    main(parse(Config, __doc__))
