"""Single-site heat-bath (Glauber) dynamics for weighted H-colourings.

One step picks a uniform host vertex ``v``, forms the set ``S`` of colours
adjacent in H to every colour currently on the neighbours of ``v``, and
redraws the colour of ``v`` with probability proportional to its weight
restricted to ``S``.  ``S`` always contains the current colour, so the chain
never leaves the set of valid colourings.

The chain is reversible for the Gibbs distribution but need not be
irreducible: proper colourings with few colours can freeze, and hosts with
strong phase coexistence (two families of pure colourings) mix slowly.  For
such targets run several chains from distinct pure pairs via ``restarts``
and pool them instead of trusting one trajectory.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Sequence, Union

import numpy as np

from .exact import Colouring, ColouringClass, classify_colouring
from .extremal import SubsetPair, fully_adjacent
from .model import BipartiteHostGraph, ConstraintGraph, WeightSystem, iter_bits, make_rng

_BLOCK = 1 << 16

InitSpec = Union[str, SubsetPair, Colouring, Sequence[SubsetPair]]


class NoValidStart(RuntimeError):
    """Random sequential colouring failed; supply a pure pair or a colouring."""


@dataclass(frozen=True)
class ChainConfig:
    steps: int
    burn_in: int = 0
    thinning: int = 1
    seed: int = 0
    init: InitSpec = "random_valid"
    restarts: int = 0
    class_threshold: int | None = None
    check_states: bool = False

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < steps")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")
        if isinstance(self.init, str) and self.init != "random_valid":
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class ChainStats:
    """Pooled output of one or more chains.

    ``histogram[k, j]`` is the empirical probability that ``j`` vertices have
    colour ``k`` (i.e. ``s(k, f) = j / N``).
    """

    host_size: int
    samples_used: int
    histogram: np.ndarray
    pbar_estimate: tuple[float, ...]
    chain_pbar: list[tuple[float, ...]] = field(default_factory=list)
    class_trace: list[ColouringClass] | None = None

    def to_dict(self) -> dict:
        out = {
            "host_size": self.host_size,
            "samples_used": self.samples_used,
            "pbar_estimate": list(self.pbar_estimate),
            "chain_pbar": [list(x) for x in self.chain_pbar],
            "histogram": self.histogram.tolist(),
        }
        if self.class_trace is not None:
            out["class_trace"] = [[list(c.colours_E), list(c.colours_O)] for c in self.class_trace]
        return out


class _Resampler:
    """Weighted draw of a colour from an allowed-colour mask, cached per mask."""

    def __init__(self, lam: WeightSystem):
        self.w = lam.floats
        self.cache: dict[int, tuple[tuple[int, ...], list[float]]] = {}

    def table(self, mask: int):
        t = self.cache.get(mask)
        if t is None:
            cols = tuple(iter_bits(mask))
            cum = list(accumulate(self.w[c] for c in cols))
            total = cum[-1]
            t = self.cache[mask] = (cols, [x / total for x in cum])
        return t

    def draw(self, mask: int, u: float) -> int:
        cols, cum = self.table(mask)
        return cols[min(bisect_right(cum, u), len(cols) - 1)]


def _allowed(nb, colours, adj, full) -> int:
    mask = full
    for u in nb:
        mask &= adj[colours[u]]
    return mask


def init_pure(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, pair: SubsetPair,
              seed: int | np.random.Generator) -> Colouring:
    """E-vertices drawn i.i.d. from ``pair.A``, O-vertices from ``pair.B``, weight-proportionally."""
    if not pair.A or not pair.B:
        raise ValueError("both sides of a pure pair must be non-empty")
    if not fully_adjacent(H, pair.A, pair.B):
        raise ValueError("pair is not fully adjacent in H")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    rs = _Resampler(lam)
    u = rng.random(G.N)
    out = [rs.draw(pair.A if v < G.n_E else pair.B, u[v]) for v in range(G.N)]
    return Colouring(tuple(out))


def random_valid(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem,
                 rng: np.random.Generator, attempts: int = 100) -> Colouring:
    """Sequential weighted colouring in a random vertex order, restarted on dead ends."""
    nb = G.neighbours
    rs = _Resampler(lam)
    for _ in range(attempts):
        order = rng.permutation(G.N)
        u = rng.random(G.N)
        colours = [-1] * G.N
        for n, v in enumerate(order):
            mask = H.full_mask
            for w in nb[v]:
                if colours[w] >= 0:
                    mask &= H.adjacency[colours[w]]
            if not mask:
                break
            colours[v] = rs.draw(mask, u[n])
        else:
            return Colouring(tuple(colours))
    raise NoValidStart(f"no valid colouring found in {attempts} attempts")


def glauber_step(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, f: Colouring,
                 rng: np.random.Generator) -> Colouring:
    f.check(G, H)
    v = int(rng.integers(G.N))
    mask = _allowed(G.neighbours[v], f.assignment, H.adjacency, H.full_mask)
    c = _Resampler(lam).draw(mask, float(rng.random()))
    out = list(f.assignment)
    out[v] = c
    return Colouring(tuple(out))


def single_site_kernel(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem,
                       f: Colouring) -> dict[tuple[int, ...], Fraction]:
    """Exact one-step transition probabilities out of ``f`` (including staying put)."""
    f.check(G, H)
    out: dict[tuple[int, ...], Fraction] = {}
    for v in range(G.N):
        mask = _allowed(G.neighbours[v], f.assignment, H.adjacency, H.full_mask)
        total = sum(lam[c] for c in iter_bits(mask))
        for c in iter_bits(mask):
            g = list(f.assignment)
            g[v] = c
            key = tuple(g)
            out[key] = out.get(key, Fraction(0)) + Fraction(1, G.N) * lam[c] / total
    return out


def _initial(G, H, lam, config: ChainConfig, chain: int, rng) -> Colouring:
    init = config.init
    if isinstance(init, Colouring):
        init.check(G, H)
        return init
    if isinstance(init, SubsetPair):
        return init_pure(G, H, lam, init, rng)
    if isinstance(init, str):
        return random_valid(G, H, lam, rng)
    pairs = list(init)
    return init_pure(G, H, lam, pairs[chain % len(pairs)], rng)


def _run_one(G, H, lam, config: ChainConfig, chain: int):
    rng = make_rng(config.seed, chain)
    colours = list(_initial(G, H, lam, config, chain, rng).assignment)
    N, q = G.N, H.q
    nb = G.neighbours
    adj, full = H.adjacency, H.full_mask
    rs = _Resampler(lam)
    counts = [0] * q
    for c in colours:
        counts[c] += 1
    hist = np.zeros((q, N + 1), dtype=np.int64)
    sums = [0] * q
    trace = [] if config.class_threshold else None
    samples = 0
    next_sample = config.burn_in
    step = 0
    while step < config.steps:
        n = min(_BLOCK, config.steps - step)
        vs = rng.integers(0, N, size=n).tolist()
        us = rng.random(n).tolist()
        for v, u in zip(vs, us):
            mask = full
            for w in nb[v]:
                mask &= adj[colours[w]]
            new = rs.draw(mask, u)
            old = colours[v]
            if new != old:
                colours[v] = new
                counts[old] -= 1
                counts[new] += 1
            if config.check_states:
                assert all(adj[new] >> colours[w] & 1 for w in nb[v])
            if step == next_sample:
                samples += 1
                next_sample += config.thinning
                for k in range(q):
                    hist[k, counts[k]] += 1
                    sums[k] += counts[k]
                if trace is not None:
                    trace.append(classify_colouring(G, H, Colouring(tuple(colours)), config.class_threshold))
            step += 1
    return hist, sums, samples, trace


def run_chain(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, config: ChainConfig) -> ChainStats:
    """Run ``restarts + 1`` chains (chain ``i`` keyed by ``(seed, i)``) and pool their samples."""
    lam.check(H)
    N, q = G.N, H.q
    hist = np.zeros((q, N + 1), dtype=np.int64)
    sums = [0] * q
    samples = 0
    chain_pbar = []
    trace = [] if config.class_threshold else None
    for chain in range(config.restarts + 1):
        h, s, n, t = _run_one(G, H, lam, config, chain)
        hist += h
        sums = [a + b for a, b in zip(sums, s)]
        samples += n
        chain_pbar.append(tuple(x / (n * N) for x in s))
        if trace is not None:
            trace.extend(t)
    return ChainStats(
        host_size=N,
        samples_used=samples,
        histogram=hist / samples,
        pbar_estimate=tuple(x / (samples * N) for x in sums),
        chain_pbar=chain_pbar,
        class_trace=trace,
    )
