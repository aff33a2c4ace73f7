"""Traag opinion dynamics from random symmetric starts: does the sign pattern end balanced?"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from _config import parse
from netdyn.balance import check_balance, simulate_traag


@dataclass(frozen=True)
class Config:
    n: int = 10
    runs: int = 20
    seed: int = 0


def main(cfg: Config):
    balanced = 0
    for i in range(cfg.runs):
        X = np.random.default_rng(cfg.seed + i).standard_normal((cfg.n, cfg.n))
        res = simulate_traag((X + X.T) / 2)
        F = res.final_normalized
        sv = np.linalg.svd(F, compute_uv=False)
        ok = check_balance(res.sign_graph()).balanced
        balanced += ok
        sides = np.bincount((res.sign_pattern[0] > 0).astype(int), minlength=2)
        print(f"run {i:2d}: stop={res.stopped_reason:9s} t={res.times[-1]:8.3f} "
              f"rank-1 residual={np.sqrt(max(0.0, 1 - sv[0] ** 2)):.1e} "
              f"factions={sorted(sides.tolist())} balanced={ok}")
    print(f"{balanced}/{cfg.runs} runs end structurally balanced")


if __name__ == "__main__":
    main(parse(Config, __doc__))
