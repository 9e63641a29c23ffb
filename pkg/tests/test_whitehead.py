from collections import Counter

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from fibtype.presentations import CyclicPresentation, FibTypeParams, make_fib_presentation, parse_word
from fibtype.whitehead import (
    EmbeddingBudgetExceeded,
    KuratowskiWitness,
    LabeledMultigraph,
    Edge,
    WVertex,
    complete_bipartite_graph,
    complete_graph,
    enumerate_spherical_embeddings,
    fib_whitehead_edges,
    from_networkx,
    is_planar,
    is_three_connected,
    minor_reduce,
    to_dot,
    whitehead_graph,
)

V = WVertex


def wg(n, m, k):
    return whitehead_graph(make_fib_presentation(FibTypeParams(n, m, k)))


def h9_script():
    """Delete three primed edges, contract the rest of the cycle structure, drop loops."""
    ops = [("delete_edge", V(i, True), V(i + 1, True)) for i in (0, 3, 6)]
    ops += [("contract_edge", V(i), V((i + 3) % 9)) for i in range(9)]
    ops += [("contract_edge", V(i, True), V((i + 1) % 9, True)) for i in (1, 2, 4, 5, 7, 8)]
    return ops + ["remove_loops"]


@settings(max_examples=60)
@given(st.integers(3, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1), st.integers(1, n - 1))))
def test_closed_form_edges(t):
    n, m, k = t
    g = wg(n, m, k)
    assert g.edge_pairs() == fib_whitehead_edges(n, m, k)
    if m != k:
        assert len(g.vertices) == 2 * n and len(g.edges) == 3 * n
        assert set(g.degrees().values()) == {3}


def test_h94_edges():
    pairs = wg(9, 4, 1).edge_pairs()
    for i in range(9):
        assert pairs[frozenset((V(i), V((i + 3) % 9)))] == 1
        assert pairs[frozenset((V(i, True), V((i + 1) % 9, True)))] == 1
        assert pairs[frozenset((V(i), V((i + 4) % 9, True)))] == 1


def test_h_n0_edges():
    pairs = wg(5, 0, 1).edge_pairs()
    expected = Counter()
    for i in range(5):
        expected[frozenset((V(i), V(i, True)))] += 1
        expected[frozenset((V(i), V((i + 1) % 5)))] += 1
        expected[frozenset((V(i, True), V((i + 1) % 5, True)))] += 1
    assert pairs == expected


def test_single_generator_word():
    # x0 x0 X0: cyclic subwords x0x0, x0X0, X0x0
    g = whitehead_graph(CyclicPresentation(1, parse_word("x0 x0 X0")))
    assert g.edge_pairs() == Counter({frozenset((V(0, True), V(0, False))): 1, frozenset((V(0, True),)): 1, frozenset((V(0),)): 1})


@pytest.mark.parametrize("m", [4, 7])
def test_h9_nonplanar_with_script(m):
    g = wg(9, m, 1)
    planar, w = is_planar(g)
    assert not planar and w.verify(g)
    minor = minor_reduce(g, h9_script())
    assert len(minor.vertices) == 6
    assert nx.is_isomorphic(minor.simple(), nx.complete_bipartite_graph(3, 3))
    assert len(minor.edges) == 9


def test_textbook_planarity():
    assert is_planar(complete_graph(4))[0]
    planar, w = is_planar(complete_bipartite_graph(3, 3))
    assert not planar and w.kind == "K33"
    planar, w = is_planar(complete_graph(5))
    assert not planar and w.kind == "K5" and w.verify(complete_graph(5))
    assert is_planar(wg(6, 0, 1))[0]


def test_witness_rejects_forgery():
    host = complete_bipartite_graph(3, 3)
    _, w = is_planar(host)
    broken = KuratowskiWitness(w.kind, w.branch_vertices, w.paths[:-1])
    assert not broken.verify(host)
    assert not w.verify(complete_graph(4))


def test_minor_basics():
    g = complete_graph(3)
    assert minor_reduce(g, []) == g
    tri = minor_reduce(g, [("contract_edge", 0, 1)])
    assert len(tri.vertices) == 2 and len(tri.edges) == 2
    assert tri.edge_pairs() == Counter({frozenset((0, 2)): 2})
    with pytest.raises(KeyError):
        minor_reduce(g, [("delete_edge", 0, 5)])
    with pytest.raises(ValueError):
        minor_reduce(g, [("squash", 0, 1)])


def test_three_connected():
    assert is_three_connected(complete_graph(4))
    assert not is_three_connected(from_networkx(nx.path_graph(3)))
    g = wg(6, 0, 1)
    # Whitney: 3-connected planar graphs embed uniquely
    if is_three_connected(g):
        assert len(enumerate_spherical_embeddings(g)) == 1


@pytest.mark.parametrize("n", range(3, 9))
def test_h_n0_unique_embedding(n):
    embs = enumerate_spherical_embeddings(wg(n, 0, 1))
    assert len(embs) == 1
    assert embs[0].census_dict() == ({4: n + 2} if n == 4 else {n: 2, 4: n})


def test_cube_embedding():
    embs = enumerate_spherical_embeddings(from_networkx(nx.hypercube_graph(3)))
    assert len(embs) == 1 and embs[0].census_dict() == {4: 6}


@pytest.mark.parametrize("n,m", [(6, 5), (10, 3)])
def test_k_half_census(n, m):
    embs = enumerate_spherical_embeddings(wg(n, m, n // 2))
    assert embs
    h = n // 2
    expected = Counter({h: 2, 2: h, 8: h}) if h != 2 else None
    assert any(Counter(e.census_dict()) == expected for e in embs)


def test_embedding_invariants():
    for t in [(6, 0, 1), (6, 5, 3), (4, 3, 1), (5, 2, 1)]:
        g = wg(*t)
        for e in enumerate_spherical_embeddings(g, labelled=True):
            assert e.euler_characteristic() == 2
            assert sum(len(f) for f in e.faces) == 2 * len(g.edges)
            darts = sorted(d for f in e.faces for d in f)
            assert darts == list(range(2 * len(g.edges)))


def test_labelled_mode_keeps_more():
    g = wg(4, 3, 1)
    plain = enumerate_spherical_embeddings(g)
    lab = enumerate_spherical_embeddings(g, labelled=True)
    assert 1 <= len(plain) <= len(lab)


def test_budget_and_limit():
    g = wg(8, 0, 1)
    with pytest.raises(EmbeddingBudgetExceeded):
        enumerate_spherical_embeddings(g, budget=10)
    assert len(enumerate_spherical_embeddings(wg(6, 5, 3), limit=1)) == 1


def test_planarity_iff_embeddings_small():
    # covers all 2-generator-plus graphs with n <= 8
    for n in range(1, 9):
        for m in range(n):
            for k in range(n):
                g = wg(n, m, k)
                planar, _ = is_planar(g)
                assert planar == bool(enumerate_spherical_embeddings(g, limit=1)), (n, m, k)


def test_dot_output():
    g = wg(3, 0, 1)
    emb = enumerate_spherical_embeddings(g)[0]
    dot = to_dot(g, emb, name="H30")
    assert dot.startswith("graph H30 {") and dot.rstrip().endswith("}")
    assert dot.count(" -- ") == 9
    assert dot.count("// face") == len(emb.faces)
    assert to_dot(g) == to_dot(g)


def test_graph_validation():
    with pytest.raises(ValueError):
        LabeledMultigraph((0, 0), ())
    with pytest.raises(ValueError):
        LabeledMultigraph((0,), (Edge(0, 1),))
