"""``netdyn`` command-line interface.

Every file written starts with a header recording the package version, the
full run configuration and the seed (``#`` comment lines for CSV and edge
lists, a ``"meta"`` object for JSON).  Exit codes: 0 success, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .balance import check_balance, simulate_traag, switch
from .dynamics import (
    default_times,
    parse_times,
    simulate_consensus,
    simulate_random_walk,
    simulate_signed_consensus,
    write_trajectory_csv,
)
from .eep import check_eep, coarsest_eep, quotient_laplacian
from .errors import InputError, NetdynError, NumericalError
from .graph import (
    DATASET_ALIASES,
    Graph,
    Partition,
    combinatorial_laplacian,
    generate_planted_partition,
    load_graph,
    normalized_laplacian,
    planted_blocks,
    read_partition_csv,
    signed_laplacian,
    write_edge_list,
    write_partition_csv,
)
from .optimize import stability_sweep
from .spectral import decompose, timescale_report, write_eigenvectors_csv, write_spectrum_csv
from .stability import TransitionFamily, score

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    action: str | None = None
    graph: str | None = None
    partition: str | None = None
    times: str | None = None
    seed: int = 0
    out: str = "."
    tol: float = 1e-9
    variant: str = "trace"
    mode: str = "continuous"
    extra: dict = field(default_factory=dict)

    def header_lines(self):
        cfg = json.dumps(asdict(self), sort_keys=True)
        return [f"netdyn {__version__}", f"config: {cfg}", f"seed: {self.seed}"]


class Writer:
    """Writes output files into the run's output directory, headers first."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.dir = Path(cfg.out)
        self.written = []

    def _open(self, name):
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        self.written.append(str(path))
        return open(path, "w", encoding="utf-8", newline="\n")

    def text(self, name, body_fn):
        with self._open(name) as fh:
            for line in self.cfg.header_lines():
                fh.write(f"# {line}\n")
            body_fn(fh)

    def json(self, name, payload):
        meta = {"version": __version__, "config": asdict(self.cfg), "seed": self.cfg.seed}
        with self._open(name) as fh:
            json.dump({"meta": meta, **payload}, fh, indent=2, sort_keys=False)
            fh.write("\n")


# ---------------------------------------------------------------------------
# helpers


def _graph(cfg) -> Graph:
    if not cfg.graph:
        raise InputError("--graph is required", module="cli")
    return load_graph(cfg.graph)


def _partition(cfg, g) -> Partition | None:
    return read_partition_csv(cfg.partition, g) if cfg.partition else None


def _node(g: Graph, name: str) -> int:
    alias = DATASET_ALIASES.get(g.name, {})
    key = alias.get(name, name)
    if key not in g.index:
        raise InputError(f"unknown node {name!r}", module="cli")
    return g.index[key]


def _node_values(g: Graph, spec: str) -> np.ndarray:
    """``node=value,node=value`` -> dense vector (zeros elsewhere)."""
    v = np.zeros(g.n)
    for item in filter(None, (s.strip() for s in spec.split(","))):
        if "=" not in item:
            raise InputError(f"expected node=value, got {item!r}", module="cli")
        name, val = item.split("=", 1)
        try:
            v[_node(g, name.strip())] = float(val)
        except ValueError:
            raise InputError(f"bad value in {item!r}", module="cli") from None
    return v


def _times(cfg, spectrum=None):
    if cfg.times:
        return parse_times(cfg.times)
    if spectrum is None:
        raise InputError("--times is required", module="cli")
    return default_times(spectrum)


def _initial_state(cfg, g):
    if cfg.extra.get("x0"):
        return _node_values(g, cfg.extra["x0"])
    return np.random.default_rng(cfg.seed).random(g.n)


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg, w):
    g = _graph(cfg)
    op = cfg.extra.get("operator", "L")
    builders = {"L": combinatorial_laplacian, "LN": normalized_laplacian, "LS": signed_laplacian}
    if op not in builders:
        raise InputError(f"operator must be one of {sorted(builders)}", module="cli")
    s = decompose(builders[op](g))
    w.text("spectrum.csv", lambda fh: write_spectrum_csv(s, fh))
    if cfg.extra.get("vectors"):
        w.text("eigenvectors.csv", lambda fh: write_eigenvectors_csv(s, g.nodes, fh))
    rep = timescale_report(s)
    w.json("timescales.json", {
        "operator": op,
        "gap_index": rep.gap_index,
        "gap_ratio": None if not np.isfinite(rep.gap_ratio) else rep.gap_ratio,
        "timescales": [None if not np.isfinite(x) else x for x in rep.timescales.tolist()],
    })


def cmd_consensus(cfg, w):
    g = _graph(cfg)
    s = decompose(combinatorial_laplacian(g))
    u = _node_values(g, cfg.extra["input"]) if cfg.extra.get("input") else None
    tr = simulate_consensus(g, _initial_state(cfg, g), _times(cfg, s), u=u, spectrum=s)
    w.text("trajectory.csv", lambda fh: write_trajectory_csv(tr, fh))


def cmd_walk(cfg, w):
    g = _graph(cfg)
    s = decompose(normalized_laplacian(g))
    start = cfg.extra.get("start")
    if start:
        p0 = np.zeros(g.n)
        p0[_node(g, start)] = 1.0
    else:
        p0 = np.full(g.n, 1.0 / g.n)
    tr = simulate_random_walk(g, p0, _times(cfg, s), spectrum=s)
    w.text("trajectory.csv", lambda fh: write_trajectory_csv(tr, fh))


def cmd_signed(cfg, w):
    g = _graph(cfg)
    s = decompose(signed_laplacian(g))
    tr = simulate_signed_consensus(g, _initial_state(cfg, g), _times(cfg, s), spectrum=s)
    w.text("trajectory.csv", lambda fh: write_trajectory_csv(tr, fh))


def cmd_eep(cfg, w):
    g = _graph(cfg)
    p = _partition(cfg, g)
    if cfg.action == "check":
        if p is None:
            p = coarsest_eep(g, tol=cfg.tol)
            w.text("partition.csv", lambda fh: write_partition_csv(g, p, fh))
        w.json("eep_report.json", check_eep(g, p, cfg.tol).to_dict() | {"k": p.k})
        return
    p = coarsest_eep(g, seed=p, tol=cfg.tol)
    q = quotient_laplacian(g, p, cfg.tol)
    w.json("eep_report.json", check_eep(g, p, cfg.tol).to_dict() | {"k": p.k})
    w.text("partition.csv", lambda fh: write_partition_csv(g, p, fh))

    def quotient(fh):
        fh.write("# directed: each node of cell <src> has total weight <w> into cell <dst>\n")
        for i, j, wt in q.edges():
            fh.write(f"{i} {j} {wt:.17g}\n")

    w.text("quotient_edges.txt", quotient)


def _traag_x0(cfg):
    if cfg.graph:
        return np.array(_graph(cfg).adjacency)
    n = int(cfg.extra.get("n") or 10)
    M = np.random.default_rng(cfg.seed).standard_normal((n, n))
    return (M + M.T) / 2


def cmd_traag(cfg, w):
    res = simulate_traag(_traag_x0(cfg), t_max=float(cfg.extra.get("t_max") or 1e3))

    def norms(fh):
        fh.write("t,norm\n")
        for t, nv in zip(res.times, res.norm_history):
            fh.write(f"{t:.17g},{nv:.17g}\n")

    w.text("traag_norms.csv", norms)
    sg = res.sign_graph()
    w.json("traag.json", {
        "stopped_reason": res.stopped_reason,
        "t_stop": float(res.times[-1]),
        "sign_pattern_balanced": bool(check_balance(sg).balanced) if sg.is_connected else None,
        "sign_pattern": res.sign_pattern.tolist(),
    })


def cmd_balance(cfg, w):
    if cfg.action == "traag":
        return cmd_traag(cfg, w)
    g = _graph(cfg)
    res = check_balance(g)
    if cfg.action == "check":
        w.json("balance.json", res.to_dict(g))
        return
    sigma = _node_values(g, cfg.extra["sigma"]) if cfg.extra.get("sigma") else res.sigma
    if cfg.extra.get("sigma"):
        sigma = np.where(sigma < 0, -1, 1)
    sw = switch(g, sigma)
    w.text("switched.txt", lambda fh: write_edge_list(sw, fh))


def cmd_stability(cfg, w):
    g = _graph(cfg)
    p = _partition(cfg, g)
    if p is None:
        raise InputError("--partition is required", module="cli")
    f = TransitionFamily(g, cfg.mode)
    times = _times(cfg)

    def body(fh):
        fh.write("t,r,k\n")
        for t in times:
            fh.write(f"{t:.17g},{score(f, p, t, cfg.variant).r:.17g},{p.k}\n")

    w.text("stability.csv", body)


def cmd_communities(cfg, w):
    g = _graph(cfg)
    f = TransitionFamily(g, cfg.mode)
    restarts = int(cfg.extra.get("restarts") or 10)
    res = stability_sweep(f, _times(cfg), cfg.variant, cfg.seed, restarts)
    for i, e in enumerate(res.entries):
        w.text(f"partition_{i:03d}.csv", lambda fh, e=e: write_partition_csv(g, e.partition, fh))

    def summary(fh):
        fh.write("t,k,r,restarts\n")
        for e in res.entries:
            fh.write(f"{e.t:.17g},{e.k},{e.r:.17g},{e.restarts}\n")

    w.text("sweep.csv", summary)


def cmd_generate(cfg, w):
    x = cfg.extra
    try:
        sizes = [int(s) for s in str(x["sizes"]).split(",")]
    except ValueError:
        raise InputError("--sizes must be a comma-separated list of integers", module="cli") from None
    g = generate_planted_partition(sizes, float(x["pin"]), float(x["pout"]), cfg.seed)
    w.text("planted.txt", lambda fh: write_edge_list(g, fh, weights=False))
    w.text("planted_partition.csv", lambda fh: write_partition_csv(g, planted_blocks(sizes), fh))


COMMANDS = {
    "spectrum": cmd_spectrum,
    "consensus": cmd_consensus,
    "walk": cmd_walk,
    "signed": cmd_signed,
    "eep": cmd_eep,
    "balance": cmd_balance,
    "traag": cmd_traag,
    "stability": cmd_stability,
    "communities": cmd_communities,
    "generate": cmd_generate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="edge list / JSON path or bundled dataset name (karate)")
    common.add_argument("--partition", help="partition CSV (node,cell)")
    common.add_argument("--times", "--t", dest="times", help="log:a:b:n | list:t1,t2,... | t")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--variant", choices=["trace", "corr", "min"], default="trace")
    common.add_argument("--mode", choices=["continuous", "discrete"], default="continuous")

    parser = argparse.ArgumentParser(prog="netdyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netdyn {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues and time scales")
    sp.add_argument("--operator", choices=["L", "LN", "LS"], default="L")
    sp.add_argument("--vectors", action="store_true", help="also write eigenvectors.csv")

    for name, helptext in [("consensus", "consensus dynamics"), ("signed", "signed consensus")]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--x0", help="initial state node=value,... (default: seeded uniform [0,1))")
        if name == "consensus":
            sp.add_argument("--input", help="constant input node=value,...")

    sp = sub.add_parser("walk", parents=[common], help="continuous-time random walk")
    sp.add_argument("--start", help="start node (default: uniform)")

    sp = sub.add_parser("eep", parents=[common], help="external equitable partitions")
    sp.add_argument("action", choices=["check", "reduce"])

    sp = sub.add_parser("balance", parents=[common], help="structural balance")
    sp.add_argument("action", choices=["check", "switch", "traag"])
    sp.add_argument("--sigma", help="switching signs node=+1|-1,... (default: from check)")
    sp.add_argument("--n", help="traag: size of the random X0 when no --graph is given")
    sp.add_argument("--t-max", dest="t_max")

    sp = sub.add_parser("traag", parents=[common], help="Traag et al. opinion dynamics")
    sp.add_argument("--n", help="size of the random symmetric X0 when no --graph is given")
    sp.add_argument("--t-max", dest="t_max")

    sp = sub.add_parser("stability", parents=[common], help="score a given partition")
    sp.add_argument("action", choices=["score"])

    sp = sub.add_parser("communities", parents=[common], help="optimise stability over a time grid")
    sp.add_argument("--restarts", type=int, default=10)

    sp = sub.add_parser("generate", parents=[common], help="random graph generators")
    sp.add_argument("model", choices=["planted"])
    sp.add_argument("--sizes", required=True)
    sp.add_argument("--pin", type=float, required=True)
    sp.add_argument("--pout", type=float, required=True)
    return parser


_BASE = {"subcommand", "graph", "partition", "times", "seed", "out", "tol", "variant", "mode"}


def config_from_args(ns) -> RunConfig:
    d = vars(ns)
    action = d.get("action") or d.get("model")
    extra = {k: v for k, v in sorted(d.items())
             if k not in _BASE | {"action", "model"} and v is not None and v is not False}
    return RunConfig(action=action, extra=extra, **{k: d[k] for k in _BASE})


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = config_from_args(ns)
    writer = Writer(cfg)
    try:
        COMMANDS[cfg.subcommand](cfg, writer)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NetdynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for path in writer.written:
        print(path)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
