import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netdyn.balance import random_signed_graph
from netdyn.errors import InputError
from netdyn.graph import (
    Graph,
    combinatorial_laplacian,
    normalized_laplacian,
    random_walk_laplacian,
    signed_laplacian,
    stationary_distribution,
    _parse_edge_list,
)
from netdyn.dynamics import (
    check_times,
    default_times,
    integrate_reference,
    log_times,
    parse_times,
    phi,
    simulate_consensus,
    simulate_random_walk,
    simulate_signed_consensus,
    write_trajectory_csv,
)
from netdyn.spectral import decompose

import oracles

K2 = Graph.from_edges("ab", [("a", "b")])


# --- time grids and phi ----------------------------------------------------

def test_parse_times():
    assert np.allclose(parse_times("log:-2:2:5"), [0.01, 0.1, 1, 10, 100])
    assert np.array_equal(parse_times("list:0,0.5,2"), [0, 0.5, 2])
    assert np.array_equal(parse_times("3"), [3.0])
    for bad in ("log:1:2", "list:2,1", "list:-1", "abc", "list:"):
        with pytest.raises(InputError):
            parse_times(bad)


def test_log_and_default_grids(karate):
    g = log_times(0.01, 100, per_decade=64)
    assert g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(100)
    assert g.size == 4 * 64 + 1
    s = decompose(combinatorial_laplacian(karate))
    d = default_times(s)
    assert d[0] == pytest.approx(1e-2 / s.eigenvalues[-1])
    assert d[-1] == pytest.approx(10 / s.eigenvalues[1])


def test_check_times_rejects_non_increasing():
    with pytest.raises(InputError):
        check_times([1.0, 1.0])
    with pytest.raises(InputError):
        check_times([])


def test_phi_branches():
    lam = np.array([0.0, 1e-12, 1e-7, 0.5, 3.0])
    t = 2.0
    ref = np.array([t] + [float(-np.expm1(-l * t) / l) for l in lam[1:]])
    assert np.allclose(phi(lam, t), ref, rtol=1e-13, atol=0)


# --- consensus -------------------------------------------------------------

def test_k2_average():
    tr = simulate_consensus(K2, [1, 0], [50.0])
    assert np.allclose(tr.final, [0.5, 0.5], atol=1e-12)


def test_k2_matches_rk4():
    times = np.linspace(0, 3, 7)
    a = simulate_consensus(K2, [1, 0], times)
    b = integrate_reference(K2, [1, 0], times)
    assert np.max(np.abs(a.states - b.states)) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_karate_two_groups_before_merging(karate, factions, seed):
    x0 = np.random.default_rng(seed).random(34)
    tr = simulate_consensus(karate, x0, [5 / 0.47])
    dev = tr.final - tr.final.mean()
    assert np.ptp(dev) > 1e-5  # not yet merged
    agree = np.sum((dev > 0) == (factions.labels == 0))
    assert max(agree, 34 - agree) >= 33


def test_zealots(karate, factions):
    u = np.zeros(34)
    u[karate.index["0"]], u[karate.index["33"]] = 1.0, -1.0
    x = simulate_consensus(karate, np.zeros(34), [1e3], u=u).final
    side = x > np.median(x)
    agree = np.sum(side == (factions.labels == factions.cell_of[0]))
    assert agree >= 33


def test_consensus_with_input_matches_rk4(karate):
    rng = np.random.default_rng(1)
    x0, u = rng.random(34), rng.normal(size=34)
    times = np.linspace(0, 10, 11)
    a = simulate_consensus(karate, x0, times, u=u)
    b = integrate_reference(karate, x0, times, u=u)
    assert np.max(np.abs(a.states - b.states)) < 1e-5


def test_karate_consensus_rk4(karate):
    x0 = np.random.default_rng(2).random(34)
    times = np.linspace(0, 10, 21)
    a = simulate_consensus(karate, x0, times)
    b = integrate_reference(karate, x0, times)
    assert np.max(np.abs(a.states - b.states)) < 1e-5


def test_consensus_errors(karate):
    with pytest.raises(InputError):
        simulate_consensus(_parse_edge_list(["a b", "c d"]), [0, 0, 0, 0], [1])
    with pytest.raises(InputError):
        simulate_consensus(_parse_edge_list(["a b -1"]), [0, 0], [1])
    with pytest.raises(InputError):
        simulate_consensus(karate, np.zeros(34), [2, 1])
    with pytest.raises(InputError):
        simulate_consensus(karate, np.zeros(3), [1])


def test_rk4_step_guard(karate):
    with pytest.raises(InputError, match="stability limit"):
        integrate_reference(karate, np.zeros(34), [1.0], step=1.0)


# --- random walk -----------------------------------------------------------

def test_walk_reaches_stationarity(karate):
    pi = stationary_distribution(karate)
    lam2 = decompose(normalized_laplacian(karate)).eigenvalues[1]
    for i in range(34):
        p0 = np.zeros(34)
        p0[i] = 1
        tr = simulate_random_walk(karate, p0, [50 / lam2])
        assert np.max(np.abs(tr.final - pi)) < 1e-6


def test_walk_regular_uniform():
    n = 6
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = A[(i + 1) % n, i] = 1
    g = Graph.from_adjacency(A)
    tr = simulate_random_walk(g, np.full(n, 1 / n), [0.1, 1, 10])
    assert np.allclose(tr.states, 1 / n, atol=1e-14)


def test_walk_spreads_within_faction(karate, factions):
    p0 = np.zeros(34)
    p0[karate.index["0"]] = 1
    own = factions.labels == factions.cell_of[karate.index["0"]]
    for t in (0.5, 1.0, 2.0):
        p = simulate_random_walk(karate, p0, [t]).final
        assert p[own].sum() > p[~own].sum()


def test_walk_against_taylor_and_rk4(planted):
    sub = Graph.from_adjacency(planted.adjacency[:60, :60])
    if not sub.is_connected:
        pytest.skip("subgraph disconnected")
    p0 = np.zeros(60)
    p0[0] = 1
    times = np.array([0.5, 2.0, 5.0])
    spec = simulate_random_walk(sub, p0, times)
    rk = integrate_reference(sub, p0, times, kind="walk")
    assert np.max(np.abs(spec.states - rk.states)) < 1e-5
    P = oracles.walk_transition(sub.adjacency, 2.0)
    assert np.max(np.abs(spec.states[1] - p0 @ P)) < 1e-10


def test_walk_planted_full_rk4(planted):
    p0 = np.zeros(300)
    p0[5] = 1
    times = np.array([0.2, 1.0])
    a = simulate_random_walk(planted, p0, times)
    b = integrate_reference(planted, p0, times, kind="walk")
    assert np.max(np.abs(a.states - b.states)) < 1e-5


def test_walk_rejects_bad_p0(karate):
    with pytest.raises(InputError, match="probability"):
        simulate_random_walk(karate, np.full(34, 0.5), [1])
    bad = np.zeros(34)
    bad[0], bad[1] = 1.5, -0.5
    with pytest.raises(InputError, match="probability"):
        simulate_random_walk(karate, bad, [1])


def test_walk_consensus_duality(karate):
    # constant states of dx/dt = -D^{-1} L x are preserved by p(t)^T x
    p0 = np.random.default_rng(4).dirichlet(np.ones(34))
    tr = simulate_random_walk(karate, p0, np.logspace(-2, 2, 9))
    c = 2.5 * np.ones(34)
    assert np.max(np.abs(random_walk_laplacian(karate) @ c)) < 1e-14
    assert np.allclose(tr.states @ c, p0 @ c, atol=1e-12)


# --- signed consensus ------------------------------------------------------

def test_signed_equals_consensus_on_unsigned(karate):
    x0 = np.random.default_rng(5).random(34)
    times = np.logspace(-1, 1, 5)
    a = simulate_signed_consensus(karate, x0, times)
    b = simulate_consensus(karate, x0, times)
    assert np.max(np.abs(a.states - b.states)) < 1e-10


def test_unbalanced_triangle_decays():
    tri = _parse_edge_list(["a b 1", "b c 1", "a c -1"])
    tr = simulate_signed_consensus(tri, [0.3, -2.0, 1.0], [100.0])
    assert np.max(np.abs(tr.final)) < 1e-10


def test_balanced_polarises():
    g = random_signed_graph(10, seed=1, balanced=True)
    from netdyn.balance import signed_consensus_limit
    x0 = np.random.default_rng(0).random(10)
    lam = decompose(signed_laplacian(g)).eigenvalues
    t = 50 / lam[lam > 1e-9][0]
    tr = simulate_signed_consensus(g, x0, [t])
    assert np.max(np.abs(tr.final - signed_consensus_limit(g, x0))) < 1e-6


def test_signed_matches_rk4():
    g = random_signed_graph(12, seed=3, balanced=False, weighted=True)
    x0 = np.random.default_rng(1).normal(size=12)
    times = np.linspace(0, 4, 5)
    a = simulate_signed_consensus(g, x0, times)
    b = integrate_reference(g, x0, times, kind="signed")
    assert np.max(np.abs(a.states - b.states)) < 1e-5


def test_trajectory_csv(karate):
    tr = simulate_consensus(karate, np.zeros(34), [0, 1])
    buf = io.StringIO()
    write_trajectory_csv(tr, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t," + ",".join(karate.nodes)
    assert len(lines) == 3


# --- properties ------------------------------------------------------------

@st.composite
def connected(draw, weighted=True):
    n = draw(st.integers(2, 10))
    seed = draw(st.integers(0, 10**6))
    A = oracles.random_adjacency(n, 0.4, np.random.default_rng(seed), weighted=weighted)
    x0 = np.random.default_rng(seed + 1).normal(size=n)
    return Graph.from_adjacency(A), x0


GRID = np.logspace(-2, 2, 30)


@given(connected())
def test_conservation_and_contraction(gx):
    g, x0 = gx
    tr = simulate_consensus(g, x0, GRID)
    assert np.max(np.abs(tr.states.sum(axis=1) - x0.sum())) < 1e-9
    assert np.all(np.diff(tr.states.max(axis=1)) <= 1e-9)
    assert np.all(np.diff(tr.states.min(axis=1)) >= -1e-9)


@given(connected())
def test_walk_rows_are_probabilities(gx):
    g, x0 = gx
    p0 = np.abs(x0) / np.abs(x0).sum()
    tr = simulate_random_walk(g, p0, GRID)
    assert tr.states.min() >= -1e-12
    assert np.max(np.abs(tr.states.sum(axis=1) - 1)) < 1e-9


@given(st.integers(3, 10), st.integers(0, 10**6))
def test_signed_balanced_conserves_sigma_mass(n, seed):
    from netdyn.balance import check_balance
    g = random_signed_graph(n, seed=seed, balanced=True, weighted=True)
    sigma = check_balance(g).sigma
    x0 = np.random.default_rng(seed).normal(size=n)
    tr = simulate_signed_consensus(g, x0, GRID)
    assert np.max(np.abs(tr.states @ sigma - sigma @ x0)) < 1e-9


@given(connected())
def test_spectral_matches_rk4(gx):
    g, x0 = gx
    times = np.array([0.0, 0.3, 1.0, 2.0])
    a = simulate_consensus(g, x0, times)
    b = integrate_reference(g, x0, times)
    assert np.max(np.abs(a.states - b.states)) < 1e-5
