"""Constraint graphs, weight systems and bipartite host graphs.

Colours of a constraint graph ``H`` are the integers ``0..q-1``; the
adjacency of colour ``i`` is stored as a bitmask so that subset operations
elsewhere in the package are plain integer arithmetic.

Host graphs keep their two classes in a canonical layout: E-vertices have
global ids ``0..n_E-1`` and O-vertices ``n_E..n_E+n_O-1``.  Edges are stored as
``(i, j)`` pairs of *local* indices (``i`` into E, ``j`` into O), so
bipartiteness is structural and parallel edges are representable.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_COLOURS = 20
SEED_LIMIT = 2**64


class ModelFileError(ValueError):
    """Raised when a model file cannot be parsed or violates an invariant."""


class RetriesExhausted(RuntimeError):
    """The configuration model never produced a simple graph."""


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` and an optional key path.

    Distinct key paths give independent streams, so chain ``i`` of a run can
    be regenerated on its own.
    """
    if not 0 <= int(seed) < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def iter_bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(colours: Iterable[int]) -> int:
    mask = 0
    for c in colours:
        mask |= 1 << c
    return mask


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(str(value)) if isinstance(value, str) else Fraction(value)


# ---------------------------------------------------------------------------
# constraint graph and weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintGraph:
    """Target graph H on colours ``0..q-1``; loops allowed.

    ``adjacency[i]`` is the bitmask of colours adjacent to ``i`` (bit ``i``
    set means colour ``i`` carries a loop).
    """

    colour_count: int
    adjacency: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        q = self.colour_count
        object.__setattr__(self, "adjacency", tuple(int(m) for m in self.adjacency))
        if q < 1:
            raise ValueError("constraint graph needs at least one colour")
        if q > MAX_COLOURS:
            raise ValueError(f"colour_count {q} exceeds the cap of {MAX_COLOURS}")
        if len(self.adjacency) != q:
            raise ValueError("adjacency must have one mask per colour")
        full = (1 << q) - 1
        for i, m in enumerate(self.adjacency):
            if m & ~full:
                raise ValueError(f"colour {i} is adjacent to a colour outside 0..{q - 1}")
            for j in iter_bits(m):
                if not self.adjacency[j] >> i & 1:
                    raise ValueError(f"adjacency is not symmetric: {i}~{j} but not {j}~{i}")
        if not any(self.adjacency):
            raise ValueError("constraint graph has no edges or loops")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
            if len(self.labels) != q:
                raise ValueError("labels must name every colour")

    @classmethod
    def from_edges(cls, q: int, edges: Iterable[Sequence[int]], labels=None) -> ConstraintGraph:
        adj = [0] * q
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < q and 0 <= j < q):
                raise ValueError(f"edge {i}{j} names a colour outside 0..{q - 1}")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(q, tuple(adj), labels)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[bool]], labels=None) -> ConstraintGraph:
        q = len(matrix)
        adj = tuple(mask_of(j for j in range(q) if matrix[i][j]) for i in range(q))
        return cls(q, adj, labels)

    @property
    def q(self) -> int:
        return self.colour_count

    @property
    def full_mask(self) -> int:
        return (1 << self.colour_count) - 1

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def has_loop(self, i: int) -> bool:
        return self.has_edge(i, i)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` with ``i <= j``; loops appear as ``(i, i)``."""
        return [(i, j) for i in range(self.q) for j in range(i, self.q) if self.has_edge(i, j)]

    def matrix(self) -> list[list[bool]]:
        return [[self.has_edge(i, j) for j in range(self.q)] for i in range(self.q)]


@dataclass(frozen=True)
class WeightSystem:
    """Strictly positive rational activities, one per colour."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(as_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise ValueError("weight system is empty")
        for i, w in enumerate(ws):
            if w <= 0:
                raise ValueError(f"weight of colour {i} must be positive, got {w}")

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> Fraction:
        return self.weights[i]

    def __iter__(self):
        return iter(self.weights)

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def floats(self) -> tuple[float, ...]:
        return tuple(float(w) for w in self.weights)

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer weights ``L*lambda_i`` together with the common denominator ``L``."""
        L = math.lcm(*(w.denominator for w in self.weights))
        return tuple(int(w * L) for w in self.weights), L

    def check(self, H: ConstraintGraph) -> None:
        if len(self.weights) != H.colour_count:
            raise ValueError(
                f"weight system has {len(self.weights)} entries but H has {H.colour_count} colours"
            )

    def replace(self, k: int, value) -> WeightSystem:
        ws = list(self.weights)
        ws[k] = as_fraction(value)
        return WeightSystem(tuple(ws))


def uniform_weights(q: int) -> WeightSystem:
    return WeightSystem((Fraction(1),) * q)


def preset_model(name: str, **params) -> tuple[ConstraintGraph, WeightSystem]:
    """Named models: ``hard_core(lam)``, ``multistate(k, lam)``, ``complete(q)``."""
    if name == "hard_core":
        lam = as_fraction(params.get("lam", 1))
        if lam <= 0:
            raise ValueError("hard_core activity must be positive")
        H = ConstraintGraph.from_edges(2, [(0, 0), (0, 1)])
        return H, WeightSystem((Fraction(1), lam))
    if name == "multistate":
        k = int(params.get("k", 1))
        lam = as_fraction(params.get("lam", 1))
        if k < 1 or lam <= 0:
            raise ValueError("multistate needs k >= 1 and a positive activity")
        if k + 1 > MAX_COLOURS:
            raise ValueError(f"multistate k={k} exceeds the colour cap")
        edges = [(i, j) for i in range(k + 1) for j in range(i, k + 1) if i + j <= k]
        H = ConstraintGraph.from_edges(k + 1, edges)
        return H, WeightSystem(tuple(lam**i for i in range(k + 1)))
    if name == "complete":
        q = int(params.get("q", 2))
        if q < 2:
            raise ValueError("complete model needs q >= 2")
        edges = [(i, j) for i in range(q) for j in range(i + 1, q)]
        return ConstraintGraph.from_edges(q, edges), uniform_weights(q)
    raise ValueError(f"unknown preset model {name!r}")


# ---------------------------------------------------------------------------
# host graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteHostGraph:
    """Bipartite (multi)graph with classes E and O.

    ``edges`` holds ``(i, j)`` with ``i`` a local E index and ``j`` a local O
    index; repeated pairs are parallel edges.
    """

    n_E: int
    n_O: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n_E < 0 or self.n_O < 0 or self.n_E + self.n_O == 0:
            raise ValueError("host graph needs at least one vertex")
        for i, j in edges:
            if not (0 <= i < self.n_E and 0 <= j < self.n_O):
                raise ValueError(f"edge ({i}, {j}) does not join E to O")

    @property
    def N(self) -> int:
        return self.n_E + self.n_O

    @property
    def class_E(self) -> tuple[int, ...]:
        return tuple(range(self.n_E))

    @property
    def class_O(self) -> tuple[int, ...]:
        return tuple(range(self.n_E, self.N))

    @property
    def simple(self) -> bool:
        return len(set(self.edges)) == len(self.edges)

    def edge_multiplicities(self) -> Counter:
        return Counter(self.edges)

    @cached_property
    def neighbours(self) -> tuple[tuple[int, ...], ...]:
        """Distinct neighbours of every vertex by global id (parallel edges collapsed)."""
        nb: list[set[int]] = [set() for _ in range(self.N)]
        for i, j in self.edges:
            nb[i].add(self.n_E + j)
            nb[self.n_E + j].add(i)
        return tuple(tuple(sorted(s)) for s in nb)

    def degrees(self) -> list[int]:
        """Degrees counting edge multiplicity."""
        deg = [0] * self.N
        for i, j in self.edges:
            deg[i] += 1
            deg[self.n_E + j] += 1
        return deg

    def regular_degree(self) -> int | None:
        degs = {len(nb) for nb in self.simplified().neighbours}
        return degs.pop() if len(degs) == 1 else None

    def simplified(self) -> BipartiteHostGraph:
        if self.simple:
            return self
        return BipartiteHostGraph(self.n_E, self.n_O, tuple(sorted(set(self.edges))))

    def swapped(self) -> BipartiteHostGraph:
        return BipartiteHostGraph(self.n_O, self.n_E, tuple((j, i) for i, j in self.edges))

    def oriented(self) -> BipartiteHostGraph:
        """Same graph with the larger class as O."""
        return self if self.n_O >= self.n_E else self.swapped()

    def components(self) -> list[list[int]]:
        """Connected components, each listed in BFS order from its smallest vertex."""
        nb = self.neighbours
        seen = [False] * self.N
        comps = []
        for s in range(self.N):
            if seen[s]:
                continue
            seen[s] = True
            order = [s]
            head = 0
            while head < len(order):
                v = order[head]
                head += 1
                for u in nb[v]:
                    if not seen[u]:
                        seen[u] = True
                        order.append(u)
            comps.append(order)
        return comps


def from_edges(n_E: int, n_O: int, edges: Iterable[Sequence[int]]) -> BipartiteHostGraph:
    return BipartiteHostGraph(n_E, n_O, tuple((e[0], e[1]) for e in edges))


def complete_bipartite(a: int, b: int) -> BipartiteHostGraph:
    if a < 1 or b < 1:
        raise ValueError("complete_bipartite needs both sides non-empty")
    return BipartiteHostGraph(a, b, tuple((i, j) for i in range(a) for j in range(b)))


def even_cycle(length: int) -> BipartiteHostGraph:
    if length < 4 or length % 2:
        raise ValueError("even_cycle needs an even length >= 4")
    m = length // 2
    edges = []
    for i in range(m):
        edges.append((i, i))
        edges.append(((i + 1) % m, i))
    return BipartiteHostGraph(m, m, tuple(sorted(edges)))


def edgeless(n_E: int, n_O: int = 0) -> BipartiteHostGraph:
    return BipartiteHostGraph(n_E, n_O, ())


def disjoint_union(parts: Sequence[BipartiteHostGraph]) -> BipartiteHostGraph:
    if not parts:
        raise ValueError("disjoint_union needs at least one part")
    edges = []
    offE = offO = 0
    for g in parts:
        edges.extend((i + offE, j + offO) for i, j in g.edges)
        offE += g.n_E
        offO += g.n_O
    return BipartiteHostGraph(offE, offO, tuple(edges))


def random_regular_bipartite(
    half_size: int,
    d: int,
    seed: int,
    require_simple: bool = True,
    max_retries: int = 1000,
) -> BipartiteHostGraph:
    """d-regular bipartite graph on ``half_size + half_size`` vertices.

    Pairing (configuration) model: the ``half_size*d`` stubs of each side are
    joined by a uniform random perfect matching.  With ``require_simple`` the
    draw is repeated until no parallel edge appears; the accepted graph is
    then uniform over simple d-regular bipartite graphs with these classes.
    """
    if half_size < 1 or d < 1:
        raise ValueError("half_size and d must be positive")
    if d > half_size:
        raise ValueError("d cannot exceed half_size")
    if max_retries < 1:
        raise ValueError("max_retries must be positive")
    rng = make_rng(seed)
    left = np.repeat(np.arange(half_size), d)
    for _ in range(max_retries):
        right = rng.permutation(left)
        edges = tuple(sorted(zip(left.tolist(), right.tolist())))
        g = BipartiteHostGraph(half_size, half_size, edges)
        if not require_simple or g.simple:
            return g
    raise RetriesExhausted(
        f"no simple {d}-regular graph on {half_size}+{half_size} vertices after {max_retries} draws"
    )


def percolate(G: BipartiteHostGraph, p: float, seed: int) -> BipartiteHostGraph:
    """Keep every edge independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    keep = rng.random(len(G.edges)) < p
    return BipartiteHostGraph(G.n_E, G.n_O, tuple(e for e, k in zip(G.edges, keep) if k))


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def model_to_dict(H: ConstraintGraph, lam: WeightSystem, G: BipartiteHostGraph | None) -> dict:
    doc = {
        "H": {"q": H.q, "edges": [list(e) for e in H.edges()]},
        "lambda": [_fraction_str(w) for w in lam],
    }
    if H.labels is not None:
        doc["H"]["labels"] = list(H.labels)
    if G is not None:
        doc["G"] = {"E": G.n_E, "O": G.n_O, "edges": [list(e) for e in G.edges]}
    return doc


def save_model(path, H: ConstraintGraph, lam: WeightSystem, G: BipartiteHostGraph | None = None) -> Path:
    lam.check(H)
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(H, lam, G), indent=2) + "\n")
    return path


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ModelFileError(f"{where}: missing field {key!r}")
    return doc[key]


def _int_field(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFileError(f"{where}: expected an integer, got {value!r}")
    return value


def _pair_list(value, where: str) -> list[tuple[int, int]]:
    if not isinstance(value, list):
        raise ModelFileError(f"{where}: expected a list of pairs")
    out = []
    for n, e in enumerate(value):
        if not (isinstance(e, list) and len(e) == 2):
            raise ModelFileError(f"{where}[{n}]: expected a pair, got {e!r}")
        out.append((_int_field(e[0], f"{where}[{n}][0]"), _int_field(e[1], f"{where}[{n}][1]")))
    return out


def model_from_dict(doc: dict):
    h = _require(doc, "H", "model")
    q = _int_field(_require(h, "q", "H"), "H.q")
    adj = [0] * max(q, 0)
    if "adjacency" in h:
        rows = h["adjacency"]
        if not (isinstance(rows, list) and len(rows) == q and all(isinstance(r, list) and len(r) == q for r in rows)):
            raise ModelFileError(f"H.adjacency: expected a {q}x{q} 0/1 matrix")
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                if x not in (0, 1, False, True):
                    raise ModelFileError(f"H.adjacency[{i}][{j}]: expected 0 or 1, got {x!r}")
                if x:
                    adj[i] |= 1 << j
    else:
        h_edges = _pair_list(_require(h, "edges", "H"), "H.edges")
        for n, (i, j) in enumerate(h_edges):
            if not (0 <= i < q and 0 <= j < q):
                raise ModelFileError(f"H.edges[{n}]: colour outside 0..{q - 1}")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
    try:
        H = ConstraintGraph(q, tuple(adj), h.get("labels"))
    except ValueError as exc:
        raise ModelFileError(f"H: {exc}") from None

    raw = _require(doc, "lambda", "model")
    if not isinstance(raw, list):
        raise ModelFileError("lambda: expected a list of 'num/den' strings")
    ws = []
    for n, s in enumerate(raw):
        try:
            ws.append(as_fraction(s))
        except (ValueError, ZeroDivisionError, TypeError):
            raise ModelFileError(f"lambda[{n}]: cannot parse {s!r} as a rational") from None
        if ws[-1] <= 0:
            raise ModelFileError(f"lambda[{n}]: weight must be positive, got {s!r}")
    lam = WeightSystem(tuple(ws))
    if len(lam) != q:
        raise ModelFileError(f"lambda: {len(lam)} weights for {q} colours")

    G = None
    if "G" in doc:
        g = doc["G"]
        nE = _int_field(_require(g, "E", "G"), "G.E")
        nO = _int_field(_require(g, "O", "G"), "G.O")
        g_edges = _pair_list(_require(g, "edges", "G"), "G.edges")
        try:
            G = BipartiteHostGraph(nE, nO, tuple(g_edges))
        except ValueError as exc:
            raise ModelFileError(f"G: {exc}") from None
    return H, lam, G


def load_model(path) -> tuple[ConstraintGraph, WeightSystem, BipartiteHostGraph | None]:
    """Read a model file; ``G`` is ``None`` when the file has no host graph."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(doc)
