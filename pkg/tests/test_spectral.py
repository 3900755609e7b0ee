import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import spectrum
from mevcost import cost as cm
from mevcost import payoff as pf
from mevcost import permgroup as pg
from mevcost import spectral as sp


def nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.num_vertices))
    if g.kind == "complete":
        G = nx.complete_graph(g.num_vertices)
    else:
        G.add_edges_from(map(tuple, g.edges))
    return G


# -- graphs -------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 6))
def test_transposition_graph_structure(n):
    g = sp.build_graph(n, "transposition")
    N = math.factorial(n)
    assert g.num_edges == N * math.comb(n, 2) // 2
    assert np.all(g.degrees == math.comb(n, 2))
    assert g.diameter == n - 1
    G = nx_graph(g)
    if N > 1:
        assert nx.diameter(G) == n - 1
        assert nx.is_bipartite(G)
    parity = [pg.parity(p) for p in pg.enumerate_group(n)]
    assert all(parity[i] != parity[j] for i, j in g.edges)


def test_transposition_edges_match_adjacency_predicate():
    perms = pg.enumerate_group(4)
    g = sp.build_graph(4, "transposition")
    expected = {(i, j) for i in range(24) for j in range(i + 1, 24)
                if pg.transposition_adjacent(perms[i], perms[j])}
    assert {tuple(e) for e in g.edges.tolist()} == expected


@pytest.mark.parametrize("kind", ["complete", "transposition"])
def test_bfs_against_networkx(kind):
    g = sp.build_graph(4, kind)
    G = nx_graph(g)
    for s in (0, 5, 23):
        ref = nx.single_source_shortest_path_length(G, s)
        assert g.bfs_distances(s).tolist() == [ref[v] for v in range(24)]


def test_laplacian_dense_matches_matvec():
    for kind in ("complete", "transposition"):
        g = sp.build_graph(4, kind)
        L = sp.laplacian(g)
        M = np.random.default_rng(0).normal(size=(24, 3))
        assert np.allclose(L @ M, g.laplacian_matvec(M))
        assert np.allclose(L, nx.laplacian_matrix(nx_graph(g), nodelist=range(24)).toarray())


def test_custom_graph(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# a path on S_3\n0 1\n1 2\n2 3\n3 4\n4 5\n")
    g = sp.build_graph(3, "custom", sp.read_edge_file(path))
    assert g.diameter == 5
    assert g.edge_list_text().splitlines()[0] == "0 1"
    with pytest.raises(sp.DisconnectedGraph):
        sp.build_graph(3, "custom", [(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        sp.build_graph(3, "custom", [(0, 6)])
    with pytest.raises(ValueError):
        sp.build_graph(3, "hypercube")


def test_spectral_cap():
    with pytest.raises(pg.DegreeOutOfRange):
        sp.build_graph(8, "transposition")
    with pytest.raises(pg.DegreeOutOfRange):
        sp.build_graph(0, "complete")


# -- spectra ----------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("kind", ["complete", "transposition"])
def test_spectrum_invariants(n, kind):
    s = spectrum(n, kind)
    N = math.factorial(n)
    U = s.eigenvectors
    assert np.abs(U.T @ U - np.eye(N)).max() < 1e-10
    assert abs(s.eigenvalues[0]) < 1e-8
    assert np.allclose(U[:, 0], 1 / math.sqrt(N))
    if N > 1:
        assert s.lambda_2 > 1e-8
        assert s.lambda_2 >= 4 / (s.graph.diameter * N) - 1e-12
    first = np.argmax(np.abs(U) > 1e-10, axis=0)
    assert np.all(U[first, np.arange(N)] > 0)
    lo, hi = sp.coherence_bounds(n)
    assert lo - 1e-12 <= sp.coherence(s) <= hi + 1e-12


@pytest.mark.parametrize("n", range(2, 6))
def test_complete_spectrum_and_saturation(n):
    s = spectrum(n, "complete")
    N = math.factorial(n)
    assert np.allclose(s.eigenvalues[1:], N)
    assert s.multiplicities == (1, N - 1)
    assert sp.coherence(s) == pytest.approx(math.sqrt(1 - 1 / N), abs=1e-12)


@pytest.mark.parametrize("n", range(2, 6))
def test_transposition_top_eigenvector_is_parity(n):
    s = spectrum(n, "transposition")
    N = math.factorial(n)
    v = sp.parity_eigenvector(n)
    assert s.lambda_max == pytest.approx(n * (n - 1), abs=1e-8)
    assert abs(np.dot(s.eigenvectors[:, -1], v / math.sqrt(N))) > 1 - 1e-6
    assert np.abs(s.graph.laplacian_matvec(v) - n * (n - 1) * v).max() < 1e-12


def test_decompose_is_reproducible():
    g = sp.build_graph(4, "transposition")
    a, b = sp.decompose(g), sp.decompose(g)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_ordered_basis_fallback_spans_rank_deficient_leading_rows():
    # the leading 2x2 block is singular, so the QR shortcut cannot be used
    Q = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    C = sp._ordered_basis(Q)
    assert np.allclose(C.T @ C, np.eye(2))


def test_spectrum_export():
    d = spectrum(3, "transposition").to_dict()
    assert d["n"] == 3 and len(d["eigenvalues"]) == 6 and len(d["vector_inf_norms"]) == 6
    assert d["coherence"] == pytest.approx(max(d["vector_inf_norms"]))


def test_table_one_small_rows():
    assert sp.coherence(spectrum(1, "transposition")) == 1.0
    for kind in ("complete", "transposition"):
        assert sp.coherence(spectrum(2, kind)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


# -- Fourier machinery -----------------------------------------------------------------

signals = st.integers(2, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.floats(-10, 10), min_size=math.factorial(n),
                                             max_size=math.factorial(n))))


@given(signals, st.sampled_from(["complete", "transposition"]))
def test_parseval_and_roundtrip(ns, kind):
    n, f = ns
    f = np.array(f)
    s = spectrum(n, kind)
    fh = sp.fourier(f, s)
    assert abs(np.dot(fh, fh) - np.dot(f, f)) <= 1e-10 * max(1.0, np.dot(f, f))
    assert np.abs(sp.inverse_fourier(fh, s) - f).max() < 1e-8


@given(signals, st.sampled_from(["complete", "transposition"]))
def test_cg_is_quadratic_form(ns, kind):
    n, f = ns
    f = np.array(f)
    s = spectrum(n, kind)
    fh = sp.fourier(f, s)
    assert sp.smoothness_CG(f, s.graph) == pytest.approx(float(np.dot(s.eigenvalues, fh ** 2)),
                                                         rel=1e-9, abs=1e-8)
    assert sp.smoothness_CG(f, s.graph) == pytest.approx(float(f @ sp.laplacian(s.graph) @ f), rel=1e-9, abs=1e-8)


def test_fourier_shape_errors():
    s = spectrum(3, "complete")
    with pytest.raises(ValueError):
        sp.fourier(np.zeros(5), s)
    with pytest.raises(ValueError):
        sp.fourier(np.zeros((6, 1)), s)


def test_perfectly_fair_signal_has_only_dc_component():
    for kind in ("complete", "transposition"):
        fh = sp.fourier(np.full(24, 3.0), spectrum(4, kind))
        assert np.abs(fh[1:]).max() < 1e-8


# -- cost and bounds ----------------------------------------------------------------------

def test_cost_from_signal_examples():
    assert sp.cost_from_signal(np.full(24, 2.0)) == 0.0
    e1 = np.zeros(24)
    e1[0] = 1
    assert sp.cost_from_signal(e1) == pytest.approx(1 - 1 / 24, abs=1e-15)
    # standing assumption violated: translation keeps the cost
    assert sp.cost_from_signal(-e1) == pytest.approx(1 / 24, abs=1e-15)


@given(st.lists(st.floats(-5, 5), min_size=24, max_size=24))
def test_cost_from_signal_matches_cost_module(vals):
    f = pf.table_payoff(vals, (0, 1, 2, 3))
    assert abs(cm.cost(f, (0, 1, 2, 3)).cost - sp.cost_from_signal(vals)) < 1e-10


def test_cg_zero_iff_cost_zero():
    for kind in ("complete", "transposition"):
        g = spectrum(4, kind).graph
        assert sp.smoothness_CG(np.full(24, 1.5), g) == 0.0
        f = np.full(24, 1.5)
        f[7] = 2.0
        assert sp.smoothness_CG(f, g) > 0 and sp.cost_from_signal(f) > 0


@given(signals, st.sampled_from(["complete", "transposition"]))
def test_all_signal_bounds_hold(ns, kind):
    n, f = ns
    s = spectrum(n, kind)
    certs = [*sp.fourier_bounds(f, s), *sp.path_bound(f, s.graph), *sp.cg_sandwich(f, s)]
    bad = [c for c in certs if not c.satisfied]
    assert not bad, bad


def test_constant_signal_bounds_are_equalities():
    s = spectrum(4, "transposition")
    lo, hi = sp.fourier_bounds(np.full(24, 2.0), s)
    assert lo.lhs == pytest.approx(0, abs=1e-12) and lo.rhs == 0
    assert hi.rhs >= -1e-12
    for c in sp.cg_sandwich(np.full(24, 2.0), s):
        assert c.satisfied


def test_parity_chain_on_transposition_graph():
    s = spectrum(4, "transposition")
    v = sp.parity_eigenvector(4)
    certs = {c.details.get("side"): c for c in sp.cg_sandwich(v, s)}
    # cost of +-1 parity is 1; C_G = 4 * |E| = 4 * 72
    assert sp.smoothness_CG(v, s.graph) == 288
    assert certs["lower"].lhs == pytest.approx(1.0)  # equality: the parity signal is extremal
    assert all(c.satisfied for c in certs.values())


def test_centred_lower_bound_counterexample():
    """A single negative spike: cost 1/N but sqrt(C_G / (lambda_N N)) is about 1/sqrt(N).

    The lower bound only follows when the mean-centred signal gains at least
    as much as it loses; otherwise the certificate covers max(C(f), C(-f)).
    """
    s = spectrum(4, "complete")
    f = np.zeros(24)
    f[3] = -1.0
    N = 24
    bound = math.sqrt(sp.smoothness_CG(f, s.graph) / (s.lambda_max * N))
    assert sp.cost_from_signal(f) == pytest.approx(1 / N)
    assert bound > 4 * sp.cost_from_signal(f)
    assert not sp.centered_standing_assumption(f)
    lower = next(c for c in sp.cg_sandwich(f, s) if c.details["side"].startswith("lower"))
    assert lower.details["side"] == "lower_symmetric" and lower.satisfied
    assert lower.rhs == pytest.approx(1 - 1 / N)


def test_mohar_bound_and_transposition_constants():
    for n in range(2, 6):
        s = spectrum(n, "transposition")
        assert s.lambda_2 >= 4 / ((n - 1) * math.factorial(n))
        assert s.lambda_2 == pytest.approx(n, abs=1e-8)  # smallest nonzero eigenvalue of the Cayley graph


def test_n8_requires_flag():
    with pytest.raises(pg.DegreeOutOfRange, match="allow_n8"):
        sp.build_graph(8, "complete")
