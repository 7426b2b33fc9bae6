"""Extremal subset pairs of a weighted constraint graph.

For ``A, B`` subsets of colours, ``A ~ B`` means every colour of ``A`` is
adjacent (in H) to every colour of ``B``.  The quantities computed here are

* ``eta``: the largest product ``w(A) * w(B)`` over ``A ~ B``;
* the maximizing ordered pairs;
* per colour ``k``, the max/min over maximizers of the expected fraction of
  colour ``k`` in a colouring that puts one host class inside ``A`` and the
  other inside ``B``.

A maximizing pair always has ``B`` equal to the common neighbourhood of
``A`` (otherwise enlarging ``B`` would increase the product), so the scan
runs over the ``2**q`` choices of ``A`` instead of all ``4**q`` pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import ConstraintGraph, WeightSystem, as_fraction, iter_bits, mask_of


@dataclass(frozen=True)
class SubsetPair:
    """Ordered pair of colour subsets (bitmasks) with their weight product."""

    A: int
    B: int
    product: Fraction

    @property
    def colours_A(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.A))

    @property
    def colours_B(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.B))

    def swapped(self) -> SubsetPair:
        return SubsetPair(self.B, self.A, self.product)

    def __str__(self) -> str:
        return f"({set(self.colours_A) or '{}'}, {set(self.colours_B) or '{}'})"


@dataclass(frozen=True)
class ExtremalReport:
    eta: Fraction
    maximizers: tuple[SubsetPair, ...]
    a_minus: tuple[Fraction, ...]
    a_plus: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "eta": str(self.eta),
            "maximizers": [
                {"A": list(p.colours_A), "B": list(p.colours_B), "product": str(p.product)}
                for p in self.maximizers
            ],
            "a_minus": [str(x) for x in self.a_minus],
            "a_plus": [str(x) for x in self.a_plus],
        }


@dataclass(frozen=True)
class TiltedWeights:
    base: WeightSystem
    colour: int
    delta: Fraction
    result: WeightSystem


@dataclass(frozen=True)
class Segment:
    """Interval of [0, 1] with per-end openness; ``empty`` when it holds no point."""

    lo: Fraction
    hi: Fraction
    closed_lo: bool
    closed_hi: bool

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.closed_lo and self.closed_hi)

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return above and below


@dataclass(frozen=True)
class OccupancyInterval:
    """The region ``[0, a_minus - eps) U (a_plus + eps, 1]`` for one colour."""

    left: Segment
    right: Segment

    def __contains__(self, x) -> bool:
        return x in self.left or x in self.right


def _as_mask(s) -> int:
    return s if isinstance(s, int) else mask_of(s)


def subset_weight(lam: WeightSystem, A) -> Fraction:
    return sum((lam[i] for i in iter_bits(_as_mask(A))), Fraction(0))


def fully_adjacent(H: ConstraintGraph, A, B) -> bool:
    """True iff every colour of ``A`` is adjacent to every colour of ``B``."""
    B = _as_mask(B)
    return all(B & ~H.adjacency[a] == 0 for a in iter_bits(_as_mask(A)))


def common_neighbourhood(H: ConstraintGraph, A) -> int:
    mask = H.full_mask
    for a in iter_bits(_as_mask(A)):
        mask &= H.adjacency[a]
    return mask


def pure_fraction(lam: WeightSystem, pair: SubsetPair, k: int) -> Fraction:
    """Expected fraction of colour ``k`` in a pure colouring for ``pair``."""
    out = Fraction(0)
    if pair.A >> k & 1:
        out += lam[k] / (2 * subset_weight(lam, pair.A))
    if pair.B >> k & 1:
        out += lam[k] / (2 * subset_weight(lam, pair.B))
    return out


def extremal_pairs(H: ConstraintGraph, lam: WeightSystem) -> ExtremalReport:
    lam.check(H)
    q = H.q
    ints, L = lam.scaled
    size = 1 << q
    adj = H.adjacency
    common = [0] * size
    wsum = [0] * size
    common[0] = H.full_mask
    best = -1
    hits: list[int] = []
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        nb = common[rest] & adj[i]
        common[mask] = nb
        wsum[mask] = wsum[rest] + ints[i]
    # wsum of a common neighbourhood is needed for masks in any order, so a second pass
    for mask in range(1, size):
        prod = wsum[mask] * wsum[common[mask]]
        if prod > best:
            best = prod
            hits = [mask]
        elif prod == best:
            hits.append(mask)
    if best <= 0:
        raise ValueError("constraint graph has no edge")
    eta = Fraction(best, L * L)
    maximizers = tuple(SubsetPair(A, common[A], eta) for A in hits)
    fractions = [[pure_fraction(lam, p, k) for p in maximizers] for k in range(q)]
    return ExtremalReport(
        eta=eta,
        maximizers=maximizers,
        a_minus=tuple(min(f) for f in fractions),
        a_plus=tuple(max(f) for f in fractions),
    )


def occupancy_interval(report: ExtremalReport, k: int, eps) -> OccupancyInterval:
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    one = Fraction(1)
    left_hi = min(max(report.a_minus[k] - eps, Fraction(0)), one)
    right_lo = max(min(report.a_plus[k] + eps, one), Fraction(0))
    return OccupancyInterval(
        left=Segment(Fraction(0), left_hi, True, False),
        right=Segment(right_lo, one, False, True),
    )


def tilt(lam: WeightSystem, k: int, delta) -> TiltedWeights:
    """Multiply the weight of colour ``k`` by ``1 + delta``."""
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return TiltedWeights(lam, k, delta, lam.replace(k, lam[k] * (1 + delta)))


def tilt_coefficients(lam: WeightSystem, pair: SubsetPair, k: int) -> tuple[Fraction, Fraction, Fraction]:
    """``(a, b, c)`` with ``w'(A) w'(B) = a + b*delta + c*delta**2`` after tilting colour ``k``."""
    wA = subset_weight(lam, pair.A)
    wB = subset_weight(lam, pair.B)
    inA = bool(pair.A >> k & 1)
    inB = bool(pair.B >> k & 1)
    b = wA * lam[k] * inB + wB * lam[k] * inA
    c = lam[k] ** 2 * (inA and inB)
    return wA * wB, b, c


def dominant_pairs(
    H: ConstraintGraph, lam: WeightSystem, k: int, report: ExtremalReport | None = None
) -> list[SubsetPair]:
    """Maximizers whose product grows fastest when colour ``k`` is tilted.

    Keep the maximizers with the largest linear coefficient ``b``, then among
    those the largest quadratic coefficient ``c``.
    """
    report = report or extremal_pairs(H, lam)
    coeffs = [(p, *tilt_coefficients(lam, p, k)[1:]) for p in report.maximizers]
    top_b = max(b for _, b, _ in coeffs)
    coeffs = [t for t in coeffs if t[1] == top_b]
    top_c = max(c for _, _, c in coeffs)
    return [p for p, _, c in coeffs if c == top_c]
