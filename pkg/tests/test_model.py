from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from homoscope.corpus import random_constraint_graph, random_host, random_weights
from homoscope.model import (
    BipartiteHostGraph,
    ConstraintGraph,
    ModelFileError,
    RetriesExhausted,
    WeightSystem,
    complete_bipartite,
    disjoint_union,
    even_cycle,
    load_model,
    make_rng,
    percolate,
    preset_model,
    random_regular_bipartite,
    save_model,
)


def test_hard_core_preset():
    H, lam = preset_model("hard_core", lam=1)
    assert H.q == 2
    assert H.has_loop(0) and not H.has_loop(1)
    assert H.has_edge(0, 1)
    assert tuple(lam) == (1, 1)


def test_complete_and_multistate_presets():
    H, lam = preset_model("complete", q=2)
    assert set(H.edges()) == {(0, 1)}
    assert tuple(lam) == (1, 1)
    H, lam = preset_model("multistate", k=2, lam=Fraction(1, 2))
    assert set(H.edges()) == {(0, 0), (0, 1), (0, 2), (1, 1)}
    assert tuple(lam) == (1, Fraction(1, 2), Fraction(1, 4))


@pytest.mark.parametrize("name,kw", [
    ("hard_core", {"lam": 0}),
    ("multistate", {"k": 0}),
    ("complete", {"q": 1}),
    ("bogus", {}),
])
def test_preset_errors(name, kw):
    with pytest.raises(ValueError):
        preset_model(name, **kw)


def test_constraint_graph_validation():
    with pytest.raises(ValueError):
        ConstraintGraph(2, (0b10, 0b00))  # asymmetric
    with pytest.raises(ValueError):
        ConstraintGraph(2, (0, 0))  # no edge
    with pytest.raises(ValueError):
        ConstraintGraph.from_edges(21, [(0, 1)])


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        WeightSystem((Fraction(1), Fraction(0)))


def test_complete_bipartite_shapes():
    g = complete_bipartite(1, 1)
    assert g.edges == ((0, 0),)
    g = complete_bipartite(3, 2)
    assert len(g.edges) == 6 and g.simple
    assert g.degrees() == [2, 2, 2, 3, 3]
    with pytest.raises(ValueError):
        complete_bipartite(0, 2)


@pytest.mark.parametrize("L", [4, 6, 8])
def test_even_cycle(L):
    g = even_cycle(L)
    assert (g.n_E, g.n_O) == (L // 2, L // 2)
    assert len(g.edges) == L
    assert g.regular_degree() == 2
    assert len(g.components()) == 1


@pytest.mark.parametrize("L", [3, 2, 7])
def test_even_cycle_errors(L):
    with pytest.raises(ValueError):
        even_cycle(L)


def test_c4_is_k22():
    assert set(even_cycle(4).edges) == set(complete_bipartite(2, 2).edges)


def test_disjoint_union():
    c4 = even_cycle(4)
    assert disjoint_union([c4]) == c4
    u = disjoint_union([complete_bipartite(2, 2)] * 2)
    assert u.N == 8 and len(u.edges) == 8 and len(u.components()) == 2
    u = disjoint_union([complete_bipartite(3, 3)] * 4)
    assert (u.n_E, u.n_O) == (12, 12) and u.regular_degree() == 3
    with pytest.raises(ValueError):
        disjoint_union([])


def test_random_regular_examples():
    assert set(random_regular_bipartite(3, 3, 0).edges) == set(complete_bipartite(3, 3).edges)
    g = random_regular_bipartite(4, 2, 7)
    assert all(x == 2 for x in g.degrees())
    g = random_regular_bipartite(2, 1, 3)
    assert sorted(i for i, _ in g.edges) == [0, 1] and sorted(j for _, j in g.edges) == [0, 1]


def test_random_regular_degrees_over_many_seeds():
    for seed in range(100):
        g = random_regular_bipartite(10, 4, seed, require_simple=False)
        assert all(x == 4 for x in g.degrees())


def test_random_regular_deterministic():
    assert random_regular_bipartite(20, 3, 11) == random_regular_bipartite(20, 3, 11)
    assert random_regular_bipartite(20, 3, 11) != random_regular_bipartite(20, 3, 12)


def test_random_regular_retries_exhausted():
    with pytest.raises(RetriesExhausted):
        random_regular_bipartite(30, 29, 0, max_retries=2)
    with pytest.raises(ValueError):
        random_regular_bipartite(2, 3, 0)


def test_percolate_extremes_and_determinism():
    g = complete_bipartite(3, 3)
    assert percolate(g, 1, 5) == g
    assert percolate(g, 0, 5).edges == ()
    assert percolate(g, 0.5, 1) == percolate(g, 0.5, 1)
    with pytest.raises(ValueError):
        percolate(g, 1.5, 0)


@given(st.integers(0, 2**32), st.floats(0, 1))
@settings(max_examples=50, deadline=None)
def test_percolate_only_removes(seed, p):
    g = random_regular_bipartite(6, 3, seed % 1000, require_simple=False)
    h = percolate(g, p, seed)
    assert (h.n_E, h.n_O) == (g.n_E, g.n_O)
    assert set(h.edges) <= set(g.edges)


def test_make_rng_keys():
    a = make_rng(3, 0).random(4)
    assert (a == make_rng(3, 0).random(4)).all()
    assert not (a == make_rng(3, 1).random(4)).all()


def test_model_round_trip(tmp_path):
    H, lam = preset_model("hard_core", lam=1)
    G = even_cycle(4)
    path = save_model(tmp_path / "m.json", H, lam, G)
    assert load_model(path) == (H, lam, G)


@given(seed=st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_model_round_trip_random(tmp_path_factory, seed):
    rng = make_rng(seed)
    q = int(rng.integers(1, 6))
    H = random_constraint_graph(rng, q)
    lam = random_weights(rng, q, low=0)
    G = random_host(rng)
    path = save_model(tmp_path_factory.mktemp("m") / "m.json", H, lam, G)
    assert load_model(path) == (H, lam, G)


def _write(tmp_path, doc) -> str:
    p = tmp_path / "m.json"
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_load_rejects_asymmetric_adjacency(tmp_path):
    doc = {"H": {"q": 2, "adjacency": [[1, 1], [0, 0]]}, "lambda": ["1", "1"]}
    with pytest.raises(ModelFileError):
        load_model(_write(tmp_path, doc))


def test_load_rejects_zero_weight(tmp_path):
    doc = {"H": {"q": 2, "edges": [[0, 0], [0, 1]]}, "lambda": ["1", "0/1"]}
    with pytest.raises(ModelFileError, match="lambda"):
        load_model(_write(tmp_path, doc))


def test_load_reports_json_position(tmp_path):
    with pytest.raises(ModelFileError, match="line 2"):
        load_model(_write(tmp_path, '{\n  "H": ,\n}'))


def test_load_reports_missing_field(tmp_path):
    with pytest.raises(ModelFileError, match="lambda"):
        load_model(_write(tmp_path, {"H": {"q": 2, "edges": [[0, 1]]}}))


def test_load_rejects_bad_host_edge(tmp_path):
    doc = {"H": {"q": 2, "edges": [[0, 1]]}, "lambda": ["1", "1"], "G": {"E": 1, "O": 1, "edges": [[0, 3]]}}
    with pytest.raises(ModelFileError, match="G"):
        load_model(_write(tmp_path, doc))


def test_host_orientation_helpers():
    g = BipartiteHostGraph(3, 1, ((0, 0), (1, 0), (2, 0), (2, 0)))
    assert not g.simple
    assert g.simplified().simple and len(g.simplified().edges) == 3
    o = g.oriented()
    assert (o.n_E, o.n_O) == (1, 3)
