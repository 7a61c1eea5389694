"""Normalisation constants ``A(Q)`` of the imbalance states.

Three independent routes:

* ``aq_by_operator`` applies the projected sub-lattice hopping generator to
  the Mott state and records squared norms;
* ``aq_by_matching`` sums squared perfect-matching counts over vertex sets,
  ``A(2n) = (n!)^2 sum_R mu_R^2``;
* ``aq_distorted`` is the binomial count for all-to-all hopping.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ..errors import DomainError, SizeError
from .lattice import LatticeGraph

MAX_OPERATOR_SITES = 12
MAX_MATCHING_SITES = 16
CAP = 2


@dataclass(frozen=True)
class NormalizationTable:
    """``A(Q)`` per imbalance, keyed by signed ``Q``."""

    values: dict[int, int | float]
    method: str
    geometry: str
    n_sites: int
    exact: bool = True
    support: dict[int, int] = field(default_factory=dict)

    def __getitem__(self, q: int):
        return self.values[q]


def _exact_sqrt(x: Fraction) -> Fraction | None:
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _hop_amplitude(n_to: int, n_from: int):
    """``<.|P b_to^dag b_from P|.> / sqrt(2)``; exact when it is rational."""
    sq = Fraction((n_to + 1) * n_from, 2)
    root = _exact_sqrt(sq)
    return root if root is not None else math.sqrt(sq)


def _apply_projected(state: dict, pairs, cap: int) -> dict:
    out: dict = {}
    for occ, amp in state.items():
        for to, frm in pairs:
            if occ[frm] == 0 or occ[to] + 1 > cap:
                continue
            new = list(occ)
            new[to] += 1
            new[frm] -= 1
            key = tuple(new)
            out[key] = out.get(key, 0) + amp * _hop_amplitude(occ[to], occ[frm])
    return {k: v for k, v in out.items() if v != 0}


def aq_by_operator(graph: LatticeGraph, q_max: int | None = None,
                   direction: str = "even") -> NormalizationTable:
    """Squared norms of ``(T_e)^(Q/2) |MI>`` with at most double occupation.

    ``direction="odd"`` uses the adjoint generator, which moves particles
    onto the odd sub-lattice and produces the negative-``Q`` entries.
    """
    if graph.n_sites > MAX_OPERATOR_SITES:
        raise SizeError(f"operator construction is capped at {MAX_OPERATOR_SITES} sites")
    if direction not in ("even", "odd"):
        raise DomainError("direction must be 'even' or 'odd'")
    if q_max is None:
        q_max = graph.n_sites
    # (destination, source) pairs of the hopping generator
    if direction == "even":
        pairs = [(i, j) for i, j in graph.edges]
        sign = 1
    else:
        pairs = [(j, i) for i, j in graph.edges]
        sign = -1
    state = {tuple([1] * graph.n_sites): Fraction(1)}
    values: dict[int, int | float] = {}
    support: dict[int, int] = {}
    exact = True
    for n in range(0, q_max // 2 + 1):
        if n:
            state = _apply_projected(state, pairs, CAP)
        norm2 = sum(a * a for a in state.values())
        if isinstance(norm2, Fraction) and norm2.denominator == 1:
            norm2 = int(norm2)
        elif isinstance(norm2, float):
            exact = False
        values[sign * 2 * n] = norm2 if state else 0
        support[sign * 2 * n] = len(state)
    return NormalizationTable(values, "operator-construction", graph.geometry,
                              graph.n_sites, exact, support)


def _perfect_matching_counter(graph: LatticeGraph):
    adj_mask = [0] * graph.n_sites
    for i, j in graph.edges:
        adj_mask[i] |= 1 << j
        adj_mask[j] |= 1 << i

    @lru_cache(maxsize=None)
    def count(mask: int) -> int:
        if mask == 0:
            return 1
        low = mask & -mask
        v = low.bit_length() - 1
        rest = mask ^ low
        cand = adj_mask[v] & rest
        total = 0
        while cand:
            bit = cand & -cand
            total += count(rest ^ bit)
            cand ^= bit
        return total

    return count


def _balanced_masks(graph: LatticeGraph, n: int):
    """Vertex sets with ``n`` even and ``n`` odd sites, as bitmasks."""
    from itertools import combinations

    for ev in combinations(graph.even_sites, n):
        me = sum(1 << i for i in ev)
        for od in combinations(graph.odd_sites, n):
            yield me | sum(1 << j for j in od)


def matching_profile(graph: LatticeGraph, n: int) -> Counter:
    """Histogram of ``mu_R`` over the sets ``R`` covered by ``n`` disjoint bonds."""
    count = _perfect_matching_counter(graph)
    hist: Counter = Counter()
    for mask in _balanced_masks(graph, n):
        mu = count(mask)
        if mu:
            hist[mu] += 1
    return hist


def aq_by_matching(graph: LatticeGraph, q_max: int | None = None) -> NormalizationTable:
    """``A(2n) = (n!)^2 sum_R mu_R^2`` by exhaustive subset enumeration."""
    if graph.n_sites > MAX_MATCHING_SITES:
        raise SizeError(f"matching enumeration is capped at {MAX_MATCHING_SITES} sites")
    if q_max is None:
        q_max = graph.n_sites
    count = _perfect_matching_counter(graph)
    values: dict[int, int | float] = {}
    support: dict[int, int] = {}
    for n in range(0, q_max // 2 + 1):
        total = 0
        n_sets = 0
        for mask in _balanced_masks(graph, n):
            mu = count(mask)
            if mu:
                total += mu * mu
                n_sets += 1
        values[2 * n] = math.factorial(n) ** 2 * total
        support[2 * n] = n_sets
    return NormalizationTable(values, "matching-sum", graph.geometry, graph.n_sites,
                              True, support)


def aq_distorted(k_sites: int, q: int) -> int:
    """Number of basis states ``binom(K/2, Q/2)^2`` under all-to-all hopping."""
    if k_sites % 2 or k_sites < 2:
        raise DomainError(f"k_sites must be even, got {k_sites}")
    if q % 2 or not 0 <= q <= k_sites:
        raise DomainError(f"Q must be even and in [0, K], got {q}")
    return math.comb(k_sites // 2, q // 2) ** 2
