import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netdyn.errors import InputError
from netdyn.graph import (
    Graph,
    Partition,
    _parse_edge_list,
    cell_averaging,
    combinatorial_laplacian,
    generate_planted_partition,
    incidence_decomposition,
    indicator_matrix,
    load_graph,
    normalized_laplacian,
    planted_blocks,
    random_walk_laplacian,
    read_partition_csv,
    signed_laplacian,
    stationary_distribution,
    write_edge_list,
    write_partition_csv,
)

import oracles


# --- loading ---------------------------------------------------------------

def test_karate_shape(karate):
    assert (karate.n, karate.m) == (34, 78)
    assert not karate.is_signed and karate.is_connected
    assert all(w == 1.0 for _, _, w in karate.edges)


def test_karate_matches_networkx(karate):
    nx = pytest.importorskip("networkx")
    ref = nx.karate_club_graph()
    ours = {(karate.nodes[i], karate.nodes[j]) for i, j, _ in karate.edges}
    theirs = {(str(min(u, v)), str(max(u, v))) for u, v in ref.edges()}
    assert ours == theirs


def test_single_isolated_node():
    g = _parse_edge_list(["# just a node", "x"])
    assert g.n == 1 and g.m == 0 and g.nodes == ("x",)


def test_signed_triangle_from_text():
    g = _parse_edge_list(["a b 1", "b c 2", "a c −1"])
    assert g.is_signed
    assert g.nodes == ("a", "b", "c")
    assert np.array_equal(g.adjacency, [[0, 1, -1], [1, 0, 2], [-1, 2, 0]])


def test_comma_separated_and_comments():
    g = _parse_edge_list(["# header", "a,b", "b, c ,0.5", ""])
    assert g.m == 2 and g.adjacency[1, 2] == 0.5


@pytest.mark.parametrize("lines, msg", [
    (["a b", "b a"], "duplicate"),
    (["a a"], "self-loop"),
    (["a b c d"], "expected"),
    (["a b x"], "not a number"),
    (["a b nan"], "finite"),
    (["a b 0"], "zero-weight"),
])
def test_parse_errors(lines, msg):
    with pytest.raises(InputError, match=msg):
        _parse_edge_list(lines)


def test_unknown_source():
    with pytest.raises(InputError, match="no such file"):
        load_graph("/nonexistent/graph.txt")


def test_json_roundtrip(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({
        "nodes": ["x", "y", "z"],
        "edges": [{"source": "x", "target": "y", "weight": 2},
                  {"source": "y", "target": "z", "weight": -1}],
    }))
    g = load_graph(str(path))
    assert g.nodes == ("x", "y", "z") and g.is_signed
    assert g.adjacency[0, 1] == 2 and g.adjacency[1, 2] == -1
    path.write_text("{not json")
    with pytest.raises(InputError, match="malformed"):
        load_graph(str(path))


def test_edge_list_roundtrip(tmp_path, karate):
    buf = io.StringIO()
    write_edge_list(karate, buf)
    path = tmp_path / "k.txt"
    path.write_text(buf.getvalue())
    g = load_graph(str(path))
    assert g.nodes == karate.nodes and g.edges == karate.edges


def test_from_adjacency_rejects_directed():
    with pytest.raises(InputError, match="symmetric"):
        Graph.from_adjacency([[0, 1], [0, 0]])


# --- partitions ------------------------------------------------------------

def test_partition_validation():
    with pytest.raises(InputError):
        Partition((0, 2))  # cell 1 empty
    p = Partition.from_labels(["x", "y", "x"])
    assert p.cell_of == (0, 1, 0) and p.k == 2
    assert Partition.from_cells([[2], [0, 1]], 3).same_as(Partition((0, 0, 1)))
    assert Partition.singletons(3).refines(Partition.whole(3))
    assert not Partition.whole(3).refines(Partition.singletons(3))


def test_partition_csv(tmp_path, karate, factions):
    buf = io.StringIO()
    write_partition_csv(karate, factions, buf)
    assert read_partition_csv(buf.getvalue().splitlines(), karate) == factions
    with pytest.raises(InputError, match="cover"):
        read_partition_csv(["node,cell", "0,a"], karate)
    with pytest.raises(InputError, match="header"):
        read_partition_csv(["a,b"], karate)


def test_karate_factions(karate, factions):
    assert factions.k == 2
    assert sorted(factions.sizes().tolist()) == [16, 18]
    # instructor and president lead different factions
    assert factions.cell_of[0] != factions.cell_of[33]


def test_karate_factions_close_to_networkx(karate, factions):
    nx = pytest.importorskip("networkx")
    club = nx.get_node_attributes(nx.karate_club_graph(), "club")
    ref = [club[int(v)] == "Mr. Hi" for v in karate.nodes]
    ours = [c == factions.cell_of[0] for c in factions.cell_of]
    assert sum(a != b for a, b in zip(ref, ours)) == 1  # member 9 sits with the president


# --- Laplacians ------------------------------------------------------------

K2 = Graph.from_edges("ab", [("a", "b")])


def test_k2_laplacians():
    assert np.array_equal(combinatorial_laplacian(K2), [[1, -1], [-1, 1]])
    assert np.allclose(normalized_laplacian(K2), [[1, -1], [-1, 1]])


def test_weighted_triangle_laplacian():
    g = Graph.from_edges("abc", [("a", "b", 1), ("b", "c", 2), ("a", "c", 3)])
    L = combinatorial_laplacian(g)
    assert np.array_equal(np.diag(L), [4, 3, 5])
    assert np.array_equal(L - np.diag(np.diag(L)), -g.adjacency)


def test_combinatorial_rejects_signed():
    with pytest.raises(InputError, match="signed"):
        combinatorial_laplacian(_parse_edge_list(["a b -1"]))


def test_karate_lambda2(karate):
    lam = oracles.bisection_eigenvalues(combinatorial_laplacian(karate))
    assert abs(lam[1] - 0.47) <= 0.01
    assert np.allclose(combinatorial_laplacian(karate) @ np.ones(34), 0)


def test_karate_normalized_isospectral(karate):
    a = np.sort(np.linalg.eigvals(random_walk_laplacian(karate)).real)
    b = oracles.bisection_eigenvalues(normalized_laplacian(karate))
    assert np.max(np.abs(a - b)) < 1e-10
    assert abs(b[1] - 0.13) <= 0.01


def test_star_normalized_spectrum(star3):
    lam = oracles.bisection_eigenvalues(normalized_laplacian(star3))
    assert np.allclose(lam, [0, 1, 1, 2], atol=1e-10)


def test_regular_graph_random_walk():
    n = 7
    A = np.zeros((n, n))
    for i in range(n):
        for s in (1, 2):
            A[i, (i + s) % n] = A[(i + s) % n, i] = 1
    g = Graph.from_adjacency(A)
    assert np.allclose(random_walk_laplacian(g), combinatorial_laplacian(g) / 4)
    assert np.allclose(stationary_distribution(g), 1 / n)


def test_path_random_walk():
    g = Graph.from_edges("abc", [("a", "b"), ("b", "c")])
    assert np.allclose(random_walk_laplacian(g), [[1, -1, 0], [-0.5, 1, -0.5], [0, -1, 1]])


def test_zero_degree_rejected():
    g = _parse_edge_list(["a b", "c"])
    with pytest.raises(InputError, match="degree"):
        normalized_laplacian(g)
    with pytest.raises(InputError, match="degree"):
        random_walk_laplacian(g)


def test_signed_laplacian_examples(karate):
    assert np.array_equal(signed_laplacian(karate), combinatorial_laplacian(karate))
    neg = _parse_edge_list(["a b -1"])
    assert np.array_equal(signed_laplacian(neg), [[1, 1], [1, 1]])
    assert np.allclose(oracles.bisection_eigenvalues(signed_laplacian(neg)), [0, 2], atol=1e-12)
    tri = _parse_edge_list(["a b 1", "b c 1", "a c -1"])
    assert oracles.bisection_eigenvalues(signed_laplacian(tri))[0] > 1e-3


def test_incidence_examples():
    B, W = incidence_decomposition(K2)
    assert np.array_equal(B, [[1], [-1]])
    assert np.array_equal(B @ W @ B.T, [[1, -1], [-1, 1]])
    B, W = incidence_decomposition(_parse_edge_list(["a b -1"]))
    assert np.array_equal(B, [[1], [1]])
    assert np.array_equal(B @ W @ B.T, [[1, 1], [1, 1]])


def test_incidence_random_signed():
    from netdyn.balance import random_signed_graph
    g = random_signed_graph(8, seed=7, balanced=False, weighted=True)
    B, W = incidence_decomposition(g)
    assert set(np.unique(B)) <= {-1.0, 0.0, 1.0}
    assert np.max(np.abs(B @ W @ B.T - signed_laplacian(g))) < 1e-12


# --- partition matrices ----------------------------------------------------

def test_indicator_examples(karate, factions):
    assert np.array_equal(indicator_matrix(Partition.singletons(4), 4), np.eye(4))
    assert np.array_equal(indicator_matrix(Partition.whole(4), 4), np.ones((4, 1)))
    C = indicator_matrix(factions, 34)
    assert C.shape == (34, 2) and sorted(C.sum(axis=0)) == [16, 18]
    with pytest.raises(InputError):
        indicator_matrix(factions, 33)


def test_cell_averaging_examples():
    assert np.allclose(cell_averaging(Partition.whole(4), 4), [[0.25] * 4])
    assert np.array_equal(cell_averaging(Partition.singletons(3), 3), np.eye(3))
    assert np.allclose(cell_averaging(Partition((0, 0, 1)), 3), [[0.5, 0.5, 0], [0, 0, 1]])


# --- generators ------------------------------------------------------------

def test_planted_reproducible():
    a = generate_planted_partition([20, 30], 0.4, 0.1, seed=5)
    b = generate_planted_partition([20, 30], 0.4, 0.1, seed=5)
    c = generate_planted_partition([20, 30], 0.4, 0.1, seed=6)
    assert a.edges == b.edges and a.edges != c.edges


def test_planted_disconnected_blocks():
    g = generate_planted_partition([10, 12, 8], 1.0, 0.0, seed=0)
    lam = oracles.bisection_eigenvalues(combinatorial_laplacian(g))
    assert g.n_components == 3
    assert np.sum(np.abs(lam) < 1e-9) == 3


def test_planted_edge_count_within_3_sigma():
    g = generate_planted_partition([20, 20], 0.5, 0.05, seed=1)
    block = planted_blocks([20, 20]).cell_of
    within = sum(1 for i, j, _ in g.edges if block[i] == block[j])
    trials = 2 * 190
    mean, sd = 0.5 * trials, np.sqrt(trials * 0.25)
    assert abs(within - mean) <= 3 * sd


@pytest.mark.parametrize("pin, pout", [(0.1, 0.2), (1.5, 0.1), (0.5, -0.1), (0.3, 0.3)])
def test_planted_bad_probabilities(pin, pout):
    with pytest.raises(InputError):
        generate_planted_partition([5, 5], pin, pout, seed=0)


def test_stationary_examples(karate):
    pi = stationary_distribution(karate)
    top2 = set(np.argsort(pi)[-2:].tolist())
    assert top2 == {karate.index["0"], karate.index["33"]}
    star = Graph.from_edges("cabde", [("c", x) for x in "abde"])
    assert np.allclose(stationary_distribution(star), [4 / 8] + [1 / 8] * 4)
    with pytest.raises(InputError):
        stationary_distribution(_parse_edge_list(["a b -1", "b c 1"]))
    with pytest.raises(InputError):
        stationary_distribution(_parse_edge_list(["a b", "c d"]))


# --- properties ------------------------------------------------------------

@st.composite
def graphs(draw, signed=False, connected=True, n_max=9):
    n = draw(st.integers(2, n_max))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    A = oracles.random_adjacency(n, 0.5, rng, connected=connected, weighted=True)
    if signed:
        U = np.triu(A * rng.choice([-1.0, 1.0], (n, n)), 1)
        A = U + U.T
    return Graph.from_adjacency(A)


@given(graphs())
def test_laplacian_properties(g):
    L = combinatorial_laplacian(g)
    assert np.allclose(L, L.T)
    assert np.max(np.abs(L @ np.ones(g.n))) < 1e-12
    lam = oracles.bisection_eigenvalues(L)
    assert lam[0] > -1e-10
    assert np.sum(np.abs(lam) < 1e-9) == 1


@given(graphs(signed=True))
def test_signed_laplacian_psd_and_incidence(g):
    L = signed_laplacian(g)
    assert oracles.bisection_eigenvalues(L)[0] > -1e-10
    B, W = incidence_decomposition(g)
    assert np.max(np.abs(B @ W @ B.T - L)) < 1e-10


@given(st.lists(st.integers(0, 4), min_size=1, max_size=12))
def test_indicator_algebra(raw):
    p = Partition.from_labels(raw)
    C = indicator_matrix(p, p.n)
    sizes = p.sizes()
    assert np.array_equal(C.T @ C, np.diag(sizes))
    # C+ C = I exactly in rational arithmetic; the float matrix agrees to rounding
    Cp_exact = [[Fraction(int(C[v, i]), int(sizes[i])) for v in range(p.n)] for i in range(p.k)]
    prod = [[sum(Cp_exact[i][v] * int(C[v, j]) for v in range(p.n)) for j in range(p.k)]
            for i in range(p.k)]
    assert prod == [[int(i == j) for j in range(p.k)] for i in range(p.k)]
    Cp = cell_averaging(p, p.n)
    assert np.array_equal(Cp, C.T / sizes[:, None])
    assert np.max(np.abs(Cp @ C - np.eye(p.k))) < 1e-15


@given(graphs())
def test_stationary_properties(g):
    pi = stationary_distribution(g)
    assert abs(pi.sum() - 1) < 1e-12
    assert np.max(np.abs(pi @ random_walk_laplacian(g))) < 1e-12
