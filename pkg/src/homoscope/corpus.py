"""Seeded random small instances for corpus-style checks."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import BipartiteHostGraph, ConstraintGraph, WeightSystem


def random_host(rng: np.random.Generator, max_vertices: int = 8, edge_prob: float = 0.5) -> BipartiteHostGraph:
    N = int(rng.integers(2, max_vertices + 1))
    n_E = int(rng.integers(1, N))
    n_O = N - n_E
    edges = [(i, j) for i in range(n_E) for j in range(n_O) if rng.random() < edge_prob]
    return BipartiteHostGraph(n_E, n_O, tuple(edges))


def random_constraint_graph(rng: np.random.Generator, q: int, edge_prob: float = 0.5) -> ConstraintGraph:
    while True:
        edges = [(i, j) for i in range(q) for j in range(i, q) if rng.random() < edge_prob]
        if edges:
            return ConstraintGraph.from_edges(q, edges)


def random_weights(rng: np.random.Generator, q: int, low: int = 1, high: int = 4,
                   max_den: int = 6) -> WeightSystem:
    """Rationals in ``(low, high]`` with denominators up to ``max_den``."""
    ws = []
    for _ in range(q):
        den = int(rng.integers(1, max_den + 1))
        num = int(rng.integers(low * den + 1, high * den + 1))
        ws.append(Fraction(num, den))
    return WeightSystem(tuple(ws))


def random_instance(rng: np.random.Generator, max_vertices: int = 8, max_q: int = 4):
    """``(G, H, lam, d)`` with activities in ``(1, 4]`` and ``1 <= d <= 4``."""
    G = random_host(rng, max_vertices)
    q = int(rng.integers(1, max_q + 1))
    H = random_constraint_graph(rng, q)
    lam = random_weights(rng, q)
    d = int(rng.integers(1, 5))
    return G, H, lam, d


def random_blowup_instance(rng: np.random.Generator, max_vertices: int = 6, max_q: int = 3,
                           max_copies: int = 3):
    """``(G, H, lam, C)`` with ``C * lam_i`` a positive integer ``<= max_copies``."""
    G = random_host(rng, max_vertices)
    q = int(rng.integers(1, max_q + 1))
    H = random_constraint_graph(rng, q)
    C = int(rng.integers(1, max_copies + 1))
    lam = WeightSystem(tuple(Fraction(int(rng.integers(1, max_copies + 1)), C) for _ in range(q)))
    return G, H, lam, C
