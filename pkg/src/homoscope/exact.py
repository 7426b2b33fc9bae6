"""Exact partition functions, occupancy laws and exact sampling.

All counting is done with integer weights ``L*lambda_i`` (``L`` the common
denominator of the activities) and rescaled by ``L**N`` at the end, so every
result is an exact ``Fraction``.

General hosts are handled component by component: each connected component
is enumerated depth-first in BFS order, pruning with H-adjacency, and the
per-component results are multiplied (partition function) or convolved
(occupancy law).  Complete bipartite hosts ``K_{a,b}`` have a dedicated
engine that groups left-class assignments by their common neighbourhood in H
and never enumerates individual colourings.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

import numpy as np

from .model import (
    BipartiteHostGraph,
    ConstraintGraph,
    WeightSystem,
    as_fraction,
    iter_bits,
    make_rng,
)

DEFAULT_BUDGET = 10**8
_MAX_DEPTH = 800


class BudgetExceeded(RuntimeError):
    """The requested computation exceeds the enumeration budget."""


class EmptyHom(ValueError):
    """There is no H-colouring of the host graph."""


class InvalidColouring(ValueError):
    pass


@dataclass(frozen=True)
class Colouring:
    """Colour of every host vertex, indexed by global vertex id."""

    assignment: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, v: int) -> int:
        return self.assignment[v]

    def counts(self, q: int) -> list[int]:
        out = [0] * q
        for c in self.assignment:
            out[c] += 1
        return out

    def is_valid(self, G: BipartiteHostGraph, H: ConstraintGraph) -> bool:
        f = self.assignment
        if len(f) != G.N or any(not 0 <= c < H.q for c in f):
            return False
        return all(H.has_edge(f[i], f[G.n_E + j]) for i, j in G.edges)

    def check(self, G: BipartiteHostGraph, H: ConstraintGraph) -> None:
        if not self.is_valid(G, H):
            raise InvalidColouring("assignment is not an H-colouring of G")


@dataclass(frozen=True)
class PartitionValue:
    value: Fraction

    @property
    def log2(self) -> float:
        if self.value == 0:
            return float("-inf")
        return math.log2(self.value.numerator) - math.log2(self.value.denominator)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class OccupancyDistribution:
    """Exact law of the number of vertices receiving ``colour``.

    ``weighted_counts[j]`` is the total weight of colourings with exactly
    ``j`` vertices of that colour; ``mass[j]`` is that weight over ``Z``.
    """

    colour: int
    host_size: int
    mass: dict[int, Fraction]
    weighted_counts: dict[int, Fraction]
    partition: Fraction

    @property
    def mean_count(self) -> Fraction:
        return sum((j * p for j, p in self.mass.items()), Fraction(0))

    @property
    def mean_fraction(self) -> Fraction:
        return self.mean_count / self.host_size

    def mass_outside(self, lo, hi) -> Fraction:
        """Probability that ``count / N`` falls outside the closed interval ``[lo, hi]``."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        N = self.host_size
        return sum((p for j, p in self.mass.items() if not lo <= Fraction(j, N) <= hi), Fraction(0))


@dataclass(frozen=True)
class ColouringClass:
    """Colours meeting ``threshold`` on E (``E_set``) and on O (``O_set``), as bitmasks."""

    E_set: int
    O_set: int
    threshold: int

    @property
    def colours_E(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.E_set))

    @property
    def colours_O(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.O_set))


# ---------------------------------------------------------------------------
# component enumeration
# ---------------------------------------------------------------------------

def _mask_weight(mask: int, ints) -> int:
    return sum(ints[c] for c in iter_bits(mask))


def _component_plan(G: BipartiteHostGraph, order: list[int]) -> tuple[tuple[int, ...], ...]:
    """For each position in ``order``, the positions of earlier neighbours."""
    pos = {v: n for n, v in enumerate(order)}
    nb = G.neighbours
    return tuple(tuple(sorted(pos[u] for u in nb[v] if pos[u] < pos[v])) for v in order)


def _check_budget(q: int, size: int, budget: int) -> None:
    if size > _MAX_DEPTH or q**size > budget:
        raise BudgetExceeded(
            f"component of {size} vertices needs up to {q}^{size} assignments "
            f"(budget {budget}); use the K_ab engine or MCMC"
        )


def _component_poly(plan, H: ConstraintGraph, ints, k: int | None) -> list[int]:
    """Integer-weighted counts of the component's colourings by number of ``k``-vertices.

    With ``k=None`` the result is ``[Z_int]``.
    """
    n = len(plan)
    adj = H.adjacency
    full = H.full_mask
    poly = [0] * (n + 1)
    colours = [0] * n
    mw: dict[int, int] = {}
    kbit = -1 if k is None else k
    lam_k = 0 if k is None else ints[k]

    def rec(pos: int, weight: int, kc: int) -> None:
        allowed = full
        for u in plan[pos]:
            allowed &= adj[colours[u]]
        if not allowed:
            return
        if pos == n - 1:
            w = mw.get(allowed)
            if w is None:
                w = mw[allowed] = _mask_weight(allowed, ints)
            if kbit >= 0 and allowed >> kbit & 1:
                poly[kc + 1] += weight * lam_k
                poly[kc] += weight * (w - lam_k)
            else:
                poly[kc] += weight * w
            return
        m = allowed
        while m:
            low = m & -m
            c = low.bit_length() - 1
            m ^= low
            colours[pos] = c
            rec(pos + 1, weight * ints[c], kc + (c == kbit))

    rec(0, 1, 0)
    if k is None:
        return [sum(poly)]
    return poly


def _convolve(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _host_polys(G, H, lam, k, budget):
    lam.check(H)
    G = G.simplified()
    ints, L = lam.scaled
    cache: dict[tuple, list[int]] = {}
    polys = []
    for comp in G.components():
        _check_budget(H.q, len(comp), budget)
        plan = _component_plan(G, comp)
        if plan not in cache:
            cache[plan] = _component_poly(plan, H, ints, k)
        polys.append(cache[plan])
    return polys, L, G.N


def partition_function(
    G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, budget: int = DEFAULT_BUDGET
) -> PartitionValue:
    polys, L, N = _host_polys(G, H, lam, None, budget)
    z = 1
    for p in polys:
        z *= p[0]
    return PartitionValue(Fraction(z, L**N))


def count_homomorphisms(G: BipartiteHostGraph, H: ConstraintGraph, budget: int = DEFAULT_BUDGET) -> int:
    lam = WeightSystem((1,) * H.q)
    return int(partition_function(G, H, lam, budget).value)


def _distribution(k, N, poly: list[int], scale: int) -> OccupancyDistribution:
    z = sum(poly)
    if z == 0:
        raise EmptyHom("no H-colouring exists, occupancy law undefined")
    mass = {j: Fraction(c, z) for j, c in enumerate(poly) if c}
    counts = {j: Fraction(c, scale) for j, c in enumerate(poly) if c}
    return OccupancyDistribution(k, N, mass, counts, Fraction(z, scale))


def occupancy_distribution(
    G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, k: int, budget: int = DEFAULT_BUDGET
) -> OccupancyDistribution:
    if not 0 <= k < H.q:
        raise ValueError(f"colour {k} outside 0..{H.q - 1}")
    polys, L, N = _host_polys(G, H, lam, k, budget)
    total = [1]
    for p in polys:
        while len(p) > 1 and p[-1] == 0:
            p = p[:-1]
        total = _convolve(total, p)
    total += [0] * (N + 1 - len(total))
    return _distribution(k, N, total, L**N)


def convolve_distributions(parts: list[OccupancyDistribution]) -> OccupancyDistribution:
    """Occupancy law of a disjoint union, given the laws of its parts (same colour)."""
    if not parts:
        raise ValueError("nothing to convolve")
    if len({p.colour for p in parts}) != 1:
        raise ValueError("all parts must describe the same colour")
    counts = {0: Fraction(1)}
    for p in parts:
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for i, x in counts.items():
            for j, y in p.weighted_counts.items():
                nxt[i + j] += x * y
        counts = dict(nxt)
    z = sum(counts.values(), Fraction(0))
    N = sum(p.host_size for p in parts)
    mass = {j: c / z for j, c in sorted(counts.items())}
    return OccupancyDistribution(parts[0].colour, N, mass, dict(sorted(counts.items())), z)


# ---------------------------------------------------------------------------
# complete bipartite hosts
# ---------------------------------------------------------------------------

def _left_classes(a: int, H: ConstraintGraph, ints, k: int | None = None) -> dict:
    """Weight of left-class assignments grouped by (common neighbourhood[, #k]).

    Keys are the neighbourhood mask when ``k`` is None, else ``(mask, count)``.
    """
    adj = H.adjacency
    if k is None:
        states: dict = {H.full_mask: 1}
        for _ in range(a):
            nxt: dict = defaultdict(int)
            for T, w in states.items():
                for c in range(H.q):
                    nxt[T & adj[c]] += w * ints[c]
            states = nxt
        return dict(states)
    states = {(H.full_mask, 0): 1}
    for _ in range(a):
        nxt = defaultdict(int)
        for (T, kc), w in states.items():
            for c in range(H.q):
                nxt[T & adj[c], kc + (c == k)] += w * ints[c]
        states = nxt
    return dict(states)


def _check_kab(a: int, b: int) -> None:
    if a < 0 or b < 0 or a + b == 0:
        raise ValueError("K_ab needs non-negative sides and at least one vertex")


def kdd_partition_function(a: int, b: int, H: ConstraintGraph, lam: WeightSystem) -> PartitionValue:
    """Exact ``Z(K_{a,b})``: sum over neighbourhood classes ``T`` of ``W_a(T) * w(T)**b``."""
    _check_kab(a, b)
    lam.check(H)
    ints, L = lam.scaled
    z = sum(w * _mask_weight(T, ints) ** b for T, w in _left_classes(a, H, ints).items())
    return PartitionValue(Fraction(z, L ** (a + b)))


def kab_occupancy_distribution(
    a: int, b: int, H: ConstraintGraph, lam: WeightSystem, k: int, budget: int = DEFAULT_BUDGET
) -> OccupancyDistribution:
    _check_kab(a, b)
    lam.check(H)
    if not 0 <= k < H.q:
        raise ValueError(f"colour {k} outside 0..{H.q - 1}")
    if (1 << H.q) * (a + 1) * (b + 1) > budget:
        raise BudgetExceeded(f"K_{{{a},{b}}} with q={H.q} exceeds budget {budget}")
    ints, L = lam.scaled
    lk = ints[k]
    poly = [0] * (a + b + 1)
    right: dict[int, list[int]] = {}
    for (T, kc), w in _left_classes(a, H, ints, k).items():
        r = right.get(T)
        if r is None:
            wT = _mask_weight(T, ints)
            if T >> k & 1:
                # each right vertex contributes (w(T) - lam_k) + lam_k * x
                r = [math.comb(b, j) * lk**j * (wT - lk) ** (b - j) for j in range(b + 1)]
            else:
                r = [wT**b]
            right[T] = r
        for j, c in enumerate(r):
            poly[kc + j] += w * c
    return _distribution(k, a + b, poly, L ** (a + b))


def kdd_occupancy_distribution(
    d: int, H: ConstraintGraph, lam: WeightSystem, k: int, budget: int = DEFAULT_BUDGET
) -> OccupancyDistribution:
    return kab_occupancy_distribution(d, d, H, lam, k, budget)


# ---------------------------------------------------------------------------
# blow-up
# ---------------------------------------------------------------------------

def blow_up(H: ConstraintGraph, lam: WeightSystem, C: int) -> ConstraintGraph:
    """Unweighted graph replacing colour ``i`` by ``C*lambda_i`` interchangeable copies.

    Copies of adjacent colours are completely joined; copies of a looped
    colour form a complete looped graph.
    """
    lam.check(H)
    if C < 1:
        raise ValueError("C must be a positive integer")
    sizes = []
    for i, w in enumerate(lam):
        s = C * w
        if s.denominator != 1:
            raise ValueError(f"C*lambda_{i} = {s} is not an integer")
        sizes.append(int(s))
    offsets = [0, *accumulate(sizes)]
    blocks = [((1 << sizes[i]) - 1) << offsets[i] for i in range(H.q)]
    adj = []
    labels = []
    for i in range(H.q):
        mask = 0
        for j in iter_bits(H.adjacency[i]):
            mask |= blocks[j]
        adj.extend([mask] * sizes[i])
        labels.extend(f"{i}.{t}" for t in range(sizes[i]))
    return ConstraintGraph(offsets[-1], tuple(adj), tuple(labels))


# ---------------------------------------------------------------------------
# exact sampling
# ---------------------------------------------------------------------------

def _component_homs(plan, H: ConstraintGraph, ints):
    """All colourings of a component (positions in plan order) with integer weights."""
    n = len(plan)
    adj = H.adjacency
    full = H.full_mask
    colours = [0] * n
    homs: list[tuple[int, ...]] = []
    weights: list[int] = []

    def rec(pos: int, weight: int) -> None:
        if pos == n:
            homs.append(tuple(colours))
            weights.append(weight)
            return
        allowed = full
        for u in plan[pos]:
            allowed &= adj[colours[u]]
        for c in iter_bits(allowed):
            colours[pos] = c
            rec(pos + 1, weight * ints[c])

    rec(0, 1)
    return homs, weights


def _randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in ``[0, n)`` for arbitrarily large ``n``."""
    bits = n.bit_length()
    nbytes = (bits + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bits)
        if x < n:
            return x


class ExactSampler:
    """Draws colourings exactly from the Gibbs distribution.

    Each component's colourings are listed once, in the deterministic
    enumeration order; a draw inverts the cumulative integer weights of every
    component independently.
    """

    def __init__(self, G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem,
                 budget: int = DEFAULT_BUDGET):
        lam.check(H)
        self.G, self.H, self.lam = G, H, lam
        simple = G.simplified()
        ints, _ = lam.scaled
        self._parts = []
        cache: dict = {}
        for comp in simple.components():
            _check_budget(H.q, len(comp), budget)
            plan = _component_plan(simple, comp)
            if plan not in cache:
                homs, weights = _component_homs(plan, H, ints)
                if not homs:
                    raise EmptyHom("a component of G has no H-colouring")
                cache[plan] = (homs, list(accumulate(weights)))
            self._parts.append((comp, *cache[plan]))

    def draw(self, rng: np.random.Generator) -> Colouring:
        out = [0] * self.G.N
        for comp, homs, cum in self._parts:
            x = _randbelow(rng, cum[-1])
            hom = homs[bisect_right(cum, x)]
            for v, c in zip(comp, hom):
                out[v] = c
        return Colouring(tuple(out))


def exact_sample(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, seed: int,
                 budget: int = DEFAULT_BUDGET) -> Colouring:
    return ExactSampler(G, H, lam, budget).draw(make_rng(seed))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify_colouring(G: BipartiteHostGraph, H: ConstraintGraph, f: Colouring, threshold: int) -> ColouringClass:
    if threshold < 1:
        raise ValueError("threshold must be a positive integer")
    f.check(G, H)
    cE = [0] * H.q
    cO = [0] * H.q
    for v, c in enumerate(f.assignment):
        if v < G.n_E:
            cE[c] += 1
        else:
            cO[c] += 1
    E_set = sum(1 << c for c in range(H.q) if cE[c] >= threshold)
    O_set = sum(1 << c for c in range(H.q) if cO[c] >= threshold)
    return ColouringClass(E_set, O_set, threshold)


def class_threshold(N: int, d: int) -> int:
    """Desk-scale occupancy threshold ``ceil(3 N ln d / d)``; 1 when ``d == 1``."""
    if d < 1:
        raise ValueError("d must be positive")
    if d == 1:
        return 1
    return max(1, math.ceil(3 * N * math.log(d) / d))
