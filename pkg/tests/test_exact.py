from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from _oracle import brute_occupancy, brute_z, homomorphisms
from homoscope.corpus import random_blowup_instance, random_constraint_graph, random_host, random_weights
from homoscope.exact import (
    BudgetExceeded,
    Colouring,
    InvalidColouring,
    ExactSampler,
    blow_up,
    class_threshold,
    classify_colouring,
    convolve_distributions,
    count_homomorphisms,
    exact_sample,
    kab_occupancy_distribution,
    kdd_occupancy_distribution,
    kdd_partition_function,
    occupancy_distribution,
    partition_function,
)
from homoscope.extremal import tilt
from homoscope.model import (
    BipartiteHostGraph,
    WeightSystem,
    complete_bipartite,
    disjoint_union,
    edgeless,
    even_cycle,
    make_rng,
    preset_model,
)

HC = preset_model("hard_core", lam=1)


def test_single_vertex():
    H, lam = preset_model("multistate", k=2, lam=Fraction(1, 3))
    g = edgeless(1)
    assert partition_function(g, H, lam).value == lam.total
    d = occupancy_distribution(g, H, lam, 1)
    assert d.mass == {0: 1 - lam[1] / lam.total, 1: lam[1] / lam.total}


def test_small_partition_functions():
    assert partition_function(even_cycle(4), *HC).value == 7
    for q in (2, 3, 5):
        H, lam = preset_model("complete", q=q)
        assert partition_function(complete_bipartite(1, 1), H, lam).value == q * (q - 1)


def test_c4_and_c6_occupancy():
    d = occupancy_distribution(even_cycle(4), *HC, 1)
    assert d.mass == {0: Fraction(1, 7), 1: Fraction(4, 7), 2: Fraction(2, 7)}
    assert d.mean_fraction == Fraction(2, 7)
    assert occupancy_distribution(even_cycle(6), *HC, 1).mean_fraction == Fraction(5, 18)


@given(seed=st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_engine_matches_brute_force(seed):
    rng = make_rng(seed)
    G = random_host(rng, max_vertices=7)
    q = int(rng.integers(1, 4))
    H = random_constraint_graph(rng, q)
    lam = random_weights(rng, q, low=0)
    z = brute_z(G, H, lam)
    assert partition_function(G, H, lam).value == z
    for k in range(q):
        d = occupancy_distribution(G, H, lam, k)
        assert d.mass == brute_occupancy(G, H, lam, k)
        assert sum(d.mass.values()) == 1
        assert sum(d.weighted_counts.values()) == z
    assert sum(occupancy_distribution(G, H, lam, k).mean_fraction for k in range(q)) == 1


def test_parallel_edges_do_not_matter():
    g = BipartiteHostGraph(2, 2, ((0, 0), (0, 0), (1, 1), (0, 1), (1, 0)))
    assert partition_function(g, *HC).value == partition_function(g.simplified(), *HC).value


def test_count_homomorphisms_and_budget():
    H, _ = preset_model("complete", q=3)
    assert count_homomorphisms(even_cycle(6), H) == 66  # chromatic poly of C6 at 3
    with pytest.raises(BudgetExceeded):
        partition_function(complete_bipartite(10, 10), H, WeightSystem((1, 1, 1)), budget=1000)


@pytest.mark.parametrize("preset", [("hard_core", {"lam": 2}), ("multistate", {"k": 2, "lam": Fraction(1, 2)}),
                                    ("complete", {"q": 4})])
def test_kab_engines_match_brute_force(preset):
    H, lam = preset_model(preset[0], **preset[1])
    for a in range(1, 4):
        for b in range(1, 4):
            G = complete_bipartite(a, b)
            assert kdd_partition_function(a, b, H, lam).value == brute_z(G, H, lam)
            for k in range(H.q):
                assert kab_occupancy_distribution(a, b, H, lam, k).mass == brute_occupancy(G, H, lam, k)


def test_kdd_examples():
    H, lam = preset_model("complete", q=3)
    assert kdd_partition_function(1, 1, H, lam).value == 6
    assert kdd_partition_function(2, 2, *HC).value == 7
    assert kdd_partition_function(3, 3, *HC).value == 15
    d = kdd_occupancy_distribution(2, *HC, 1)
    assert d.mass == occupancy_distribution(even_cycle(4), *HC, 1).mass
    H, lam = preset_model("complete", q=2)
    assert kdd_occupancy_distribution(1, H, lam, 0).mass == {1: 1}


def test_kdd_k4_concentrates():
    H, lam = preset_model("complete", q=4)
    lo, hi = Fraction(1, 4) - Fraction(3, 20), Fraction(1, 4) + Fraction(3, 20)
    out4 = kdd_occupancy_distribution(4, H, lam, 0).mass_outside(lo, hi)
    out8 = kdd_occupancy_distribution(8, H, lam, 0).mass_outside(lo, hi)
    assert out8 < out4


def test_kab_zero_side():
    H, lam = HC
    assert kdd_partition_function(0, 3, H, lam).value == lam.total**3


def test_blow_up_examples():
    H, _ = preset_model("hard_core")
    B = blow_up(H, WeightSystem((1, 2)), 1)
    assert B.q == 3
    assert B.has_loop(0) and not B.has_loop(1) and not B.has_edge(1, 2)
    assert B.has_edge(0, 1) and B.has_edge(0, 2)
    H3, lam3 = preset_model("complete", q=3)
    assert blow_up(H3, lam3, 1).adjacency == H3.adjacency
    B = blow_up(H, WeightSystem((1, 1)), 2)
    assert B.q == 4
    assert Fraction(count_homomorphisms(complete_bipartite(1, 1), B), 2**2) == 3
    with pytest.raises(ValueError):
        blow_up(H, WeightSystem((1, Fraction(1, 3))), 2)


@given(seed=st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_blow_up_identity(seed):
    G, H, lam, C = random_blowup_instance(make_rng(seed), max_vertices=6)
    assert partition_function(G, H, lam).value == Fraction(count_homomorphisms(G, blow_up(H, lam, C)), C**G.N)


@given(seed=st.integers(0, 2**32), delta=st.fractions(min_value=Fraction(1, 10), max_value=2))
@settings(max_examples=40, deadline=None)
def test_tilting_decomposition(seed, delta):
    rng = make_rng(seed)
    G = random_host(rng, max_vertices=7)
    q = int(rng.integers(1, 4))
    H = random_constraint_graph(rng, q)
    lam = random_weights(rng, q, low=0)
    k = int(rng.integers(q))
    dist = occupancy_distribution(G, H, lam, k)
    zt = partition_function(G, H, tilt(lam, k, delta).result).value
    assert sum(c * (1 + delta) ** j for j, c in dist.weighted_counts.items()) == zt
    for j, p in dist.mass.items():
        assert dist.weighted_counts[j] == p * dist.partition


@given(seed=st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_convolution_of_components(seed):
    rng = make_rng(seed)
    parts = [random_host(rng, max_vertices=5) for _ in range(int(rng.integers(1, 4)))]
    H, lam = preset_model("multistate", k=2, lam=Fraction(int(rng.integers(1, 5)), 2))
    k = int(rng.integers(3))
    union = occupancy_distribution(disjoint_union(parts), H, lam, k)
    conv = convolve_distributions([occupancy_distribution(p, H, lam, k) for p in parts])
    assert union.mass == conv.mass
    assert union.partition == conv.partition


def test_convolution_rejects_mixed_colours():
    a = occupancy_distribution(even_cycle(4), *HC, 0)
    b = occupancy_distribution(even_cycle(4), *HC, 1)
    with pytest.raises(ValueError):
        convolve_distributions([a, b])


def test_exact_sample_is_valid_and_seeded():
    G = even_cycle(6)
    f = exact_sample(G, *HC, seed=3)
    assert f.is_valid(G, HC[0])
    assert f == exact_sample(G, *HC, seed=3)


def test_exact_sample_k2():
    H, lam = preset_model("complete", q=2)
    G = complete_bipartite(1, 1)
    seen = Counter(exact_sample(G, H, lam, s).assignment for s in range(2000))
    assert set(seen) == {(0, 1), (1, 0)}
    assert abs(seen[(0, 1)] - 1000) < 4 * math.sqrt(500)


def test_exact_sample_chi_square_c4():
    G = even_cycle(4)
    sampler = ExactSampler(G, *HC)
    rng = make_rng(99)
    n = 100_000
    seen = Counter(sampler.draw(rng).assignment for _ in range(n))
    homs = list(homomorphisms(G, HC[0]))
    assert set(seen) == set(homs) and len(homs) == 7
    chi2 = sum((seen[f] - n / 7) ** 2 / (n / 7) for f in homs)
    assert chi2 < 22.46  # 0.999 quantile, 6 degrees of freedom


def test_bipartite_hosts_always_colourable():
    # an edge ab of H gives the colouring E -> a, O -> b
    rng = make_rng(5)
    for _ in range(50):
        G = random_host(rng, max_vertices=6)
        H = random_constraint_graph(rng, int(rng.integers(1, 4)))
        assert count_homomorphisms(G, H) > 0


def test_colouring_check():
    H, _ = HC
    with pytest.raises(InvalidColouring):
        Colouring((1, 0, 1, 0)).check(even_cycle(4), H)


def test_classify_examples():
    H, _ = HC
    G = complete_bipartite(4, 4)
    f = Colouring((0, 0, 0, 0, 0, 1, 0, 1))
    c = classify_colouring(G, H, f, 2)
    assert (c.colours_E, c.colours_O) == ((0,), (0, 1))
    c = classify_colouring(G, H, f, 1)
    assert c.colours_E == (0,)
    c = classify_colouring(G, H, f, 9)
    assert c.colours_E == () and c.colours_O == ()
    with pytest.raises(InvalidColouring):
        classify_colouring(G, H, Colouring((1, 0, 0, 0, 1, 0, 0, 0)), 1)


def test_class_threshold():
    assert class_threshold(100, 1) == 1
    assert class_threshold(100, 10) == math.ceil(300 * math.log(10) / 10)
