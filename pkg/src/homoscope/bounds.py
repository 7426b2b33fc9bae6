"""Exact checks of partition-function inequalities on concrete instances.

Every verdict is decided in exact rational arithmetic.  Inequalities with a
``1/d``-th power are raised to the ``d``-th power first, so both sides stay
rational; ``BoundCheckResult.power`` records that exponent and ``slack``
reports ``log2(rhs / lhs)`` for the original (un-powered) inequality.

All checks act on the simple graph underlying a host (parallel edges do not
change the set of colourings) with the larger class taken as O.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .exact import (
    DEFAULT_BUDGET,
    kdd_partition_function,
    occupancy_distribution,
    partition_function,
)
from .extremal import extremal_pairs, subset_weight, tilt
from .model import BipartiteHostGraph, ConstraintGraph, WeightSystem, as_fraction, make_rng


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


@dataclass(frozen=True)
class BoundCheckResult:
    name: str
    lhs: Fraction
    rhs: Fraction
    holds: bool | None
    power: int = 1
    applicable: bool = True
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        if not self.applicable or self.lhs <= 0:
            return float("inf")
        return (_log2(self.rhs) - _log2(self.lhs)) / self.power

    @property
    def equality(self) -> bool:
        return self.applicable and self.lhs == self.rhs

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "applicable": self.applicable,
            "holds": self.holds,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "power": self.power,
            "slack_log2": None if not self.applicable else self.slack,
            "note": self.note,
            **{k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.extra.items()},
        }


def _result(name, lhs, rhs, power=1, note="", **extra) -> BoundCheckResult:
    return BoundCheckResult(name, lhs, rhs, lhs <= rhs, power, True, note, extra)


def _not_applicable(name: str, note: str) -> BoundCheckResult:
    return BoundCheckResult(name, Fraction(0), Fraction(0), None, 1, False, note)


@dataclass(frozen=True)
class DeficiencyReport:
    d: Fraction
    N: int
    h: Fraction
    zeta: float
    low_degree_E: int
    imbalance: int
    excess_O: Fraction


def deficiency(G: BipartiteHostGraph, d) -> DeficiencyReport:
    """Distance of ``G`` from a balanced d-regular bipartite graph.

    ``h = 1/d + #{v in E: deg v < d}/N + (|O|-|E|)/N + sum_{v in O, deg v >= d}(deg v - d)/(dN)``
    and ``zeta = max(sqrt(h), sqrt(log2(N)/N))``.
    """
    d = as_fraction(d)
    if d <= 0:
        raise ValueError("d must be positive")
    G = G.simplified().oriented()
    deg = [len(nb) for nb in G.neighbours]
    N = G.N
    low = sum(1 for v in G.class_E if deg[v] < d)
    excess = sum((deg[v] - d for v in G.class_O if deg[v] >= d), Fraction(0))
    imbalance = G.n_O - G.n_E
    h = 1 / d + Fraction(low, N) + Fraction(imbalance, N) + excess / (d * N)
    zeta = max(math.sqrt(h), math.sqrt(math.log2(N) / N))
    return DeficiencyReport(d, N, h, zeta, low, imbalance, excess)


def check_entropy_bound(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, d: int,
                        budget: int = DEFAULT_BUDGET) -> BoundCheckResult:
    """``Z(G) <= w(H)^{#low E} * prod_{v in O} Z(K_{deg v, d})^{1/d}``, for activities above 1.

    Compared as ``Z(G)^d`` against the d-th power of the right-hand side.
    """
    name = "entropy"
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    d = int(d)
    if any(w <= 1 for w in lam):
        return _not_applicable(name, "requires every activity to exceed 1")
    G = G.simplified().oriented()
    deg = [len(nb) for nb in G.neighbours]
    low = sum(1 for v in G.class_E if deg[v] < d)
    z = partition_function(G, H, lam, budget).value
    kab: dict[int, Fraction] = {}
    rhs = lam.total ** (d * low)
    for v in G.class_O:
        if deg[v] not in kab:
            kab[deg[v]] = kdd_partition_function(deg[v], d, H, lam).value
        rhs *= kab[deg[v]]
    return _result(name, z**d, rhs, d, Z=z)


def check_gt_bound(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem,
                   budget: int = DEFAULT_BUDGET) -> BoundCheckResult:
    """``Z(G) <= Z(K_{d,d})^{N/2d}`` for d-regular ``G``, compared as ``Z^{2d}`` vs ``Z(K_dd)^N``."""
    G = G.simplified()
    d = G.regular_degree()
    if not d:
        raise ValueError("host graph is not regular of positive degree")
    z = partition_function(G, H, lam, budget).value
    zk = kdd_partition_function(d, d, H, lam).value
    return _result("gt", z ** (2 * d), zk**G.N, 2 * d, Z=z, Z_Kdd=zk, d=d)


def eta_lower_bound(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem,
                    budget: int = DEFAULT_BUDGET) -> BoundCheckResult:
    """``Z(G) >= max over maximizers (A, B) of w(A)^|E| * w(B)^|O|``."""
    G = G.simplified()
    report = extremal_pairs(H, lam)
    z = partition_function(G, H, lam, budget).value
    lower = max(
        subset_weight(lam, p.A) ** G.n_E * subset_weight(lam, p.B) ** G.n_O for p in report.maximizers
    )
    return _result("lb", lower, z, eta=report.eta)


def kdd_eta_upper_bound(a: int, b: int, H: ConstraintGraph, lam: WeightSystem) -> BoundCheckResult:
    """``Z(K_{a,b}) <= 4^q w(H)^{a-b} eta^b`` for ``a >= b``; ``Z(K_{a,b}) <= 4^q eta^b`` for ``a < b``.

    The second form goes through ``Z(K_{a,b}) <= Z(K_{b,b})``, which needs
    every activity above 1 and ``a >= 1``; otherwise it is reported as not
    applicable.
    """
    name = "kdd-ub"
    eta = extremal_pairs(H, lam).eta
    z = kdd_partition_function(a, b, H, lam).value
    scale = Fraction(4) ** H.q * eta**b
    if a >= b:
        return _result(name, z, scale * lam.total ** (a - b), eta=eta)
    if a < 1 or any(w <= 1 for w in lam):
        return _not_applicable(name, "a < b form needs a >= 1 and every activity above 1")
    return _result(name, z, scale, eta=eta)


def check_tilt_inequality(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, k: int, delta, j: int,
                          budget: int = DEFAULT_BUDGET) -> BoundCheckResult:
    """``(1+delta)^j c_k(j) <= Z_tilted(G)``, plus the identity ``sum_j c_k(j)(1+delta)^j = Z_tilted``.

    ``c_k(j)`` is the total weight of colourings with exactly ``j`` vertices
    of colour ``k``; the identity verdict is in ``extra['identity']``.
    """
    tw = tilt(lam, k, delta)
    dist = occupancy_distribution(G, H, lam, k, budget)
    z_tilt = partition_function(G, H, tw.result, budget).value
    factor = 1 + tw.delta
    c = dist.weighted_counts.get(j, Fraction(0))
    total = sum((cj * factor**jj for jj, cj in dist.weighted_counts.items()), Fraction(0))
    return _result("tilt", factor**j * c, z_tilt, identity=(total == z_tilt), c_k=c, j=j)


def ub_diagnostic(G: BipartiteHostGraph, H: ConstraintGraph, lam: WeightSystem, d,
                  budget: int = DEFAULT_BUDGET) -> float:
    """Measured ``log2(Z / eta^{N/2}) / (N h(G, d))``; no pass/fail, the constant is unknown."""
    G = G.simplified()
    z = partition_function(G, H, lam, budget).value
    eta = extremal_pairs(H, lam).eta
    h = deficiency(G, d).h
    return (_log2(z) - G.N / 2 * _log2(eta)) / (G.N * float(h))


# ---------------------------------------------------------------------------
# expansion of small hosts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionRow:
    side: str
    j: int
    min_neighbours: int
    required: float
    holds: bool
    witness: tuple[int, ...] | None


@dataclass(frozen=True)
class ExpansionReport:
    d: int
    C: float
    max_size: int
    rows: tuple[ExpansionRow, ...]
    pair_holds: bool
    pair_witness: tuple[tuple[int, ...], tuple[int, ...]] | None
    exhaustive: bool

    @property
    def holds(self) -> bool:
        return self.pair_holds and all(r.holds for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "d": self.d, "C": self.C, "max_size": self.max_size, "exhaustive": self.exhaustive,
            "holds": self.holds, "pair_holds": self.pair_holds,
            "pair_witness": None if self.pair_witness is None else [list(x) for x in self.pair_witness],
            "rows": [r.__dict__ for r in self.rows],
        }


EXHAUSTIVE_LIMIT = 20


def check_expansion(G: BipartiteHostGraph, C: float, mode: str = "exhaustive", *, d: int | None = None,
                    max_size: int | None = None, seed: int = 0, trials: int = 1000) -> ExpansionReport:
    """Expansion of a (near) d-regular host at the scale ``s = 3 N ln(d) / d``.

    1. every subset of E or of O of size ``j``, ``1 <= j <= s``, has at least
       ``j d / (C ln d)`` neighbours;
    2. every ``s``-subset of E and ``s``-subset of O span at least one edge.

    ``d`` defaults to the regular degree of ``G``.  The default scale is only
    meaningful for ``d >= 3``; smaller ``d`` require an explicit ``max_size``.
    Witnesses are reported as global vertex ids.
    """
    G = G.simplified()
    if d is None:
        d = G.regular_degree()
        if not d:
            raise ValueError("G is not regular; pass d explicitly")
    if d < 2:
        raise ValueError("expansion bound needs d >= 2 (ln d must be positive)")
    if max_size is None:
        if d < 3:
            raise ValueError("d <= 2 makes the 3N ln d / d scale degenerate; pass max_size")
        max_size = math.floor(3 * G.N * math.log(d) / d)
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and max(G.n_E, G.n_O) > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive mode needs class sizes <= {EXHAUSTIVE_LIMIT}")
    rng = make_rng(seed)
    nbmask = [sum(1 << u for u in nb) for nb in G.neighbours]
    sides = {"E": list(G.class_E), "O": list(G.class_O)}

    def subsets(pool, j):
        if mode == "exhaustive":
            yield from combinations(pool, j)
        else:
            for _ in range(trials):
                yield tuple(sorted(rng.choice(pool, size=j, replace=False).tolist()))

    rows = []
    per_j = math.log(d) * C
    for side, pool in sides.items():
        for j in range(1, min(max_size, len(pool)) + 1):
            need = j * d / per_j
            worst, witness = None, None
            for S in subsets(pool, j):
                m = 0
                for v in S:
                    m |= nbmask[v]
                n = m.bit_count()
                if worst is None or n < worst:
                    worst, witness = n, S
            rows.append(ExpansionRow(side, j, worst, need, worst >= need, None if worst >= need else witness))

    pair_holds, pair_witness = True, None
    s = max_size
    if 1 <= s <= min(G.n_E, G.n_O):
        for A in subsets(sides["E"], s):
            m = 0
            for v in A:
                m |= nbmask[v]
            free = [u for u in sides["O"] if not m >> u & 1]
            if len(free) >= s:
                pair_holds, pair_witness = False, (tuple(A), tuple(free[:s]))
                break
    return ExpansionReport(d, C, max_size, tuple(rows), pair_holds, pair_witness, mode == "exhaustive")
