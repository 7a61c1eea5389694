"""Exhaustive minimisation of the on-site repulsion at fixed (N, Theta)."""
from __future__ import annotations

import itertools
from fractions import Fraction

from ..errors import DomainError, SizeError
from ..model import phi


def partitions(n: int, max_parts: int, largest: int | None = None):
    """Integer partitions of ``n`` into at most ``max_parts`` parts, descending."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    if n > max_parts * largest:
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, max_parts - 1, first):
            yield (first,) + rest


def min_pair_count(n_sites: int, n_particles: int) -> int:
    """``min sum_i n_i (n_i - 1)`` over occupations of ``n_sites`` sites.

    The objective does not depend on the order of the sites, so visiting
    every partition visits every configuration up to relabelling.
    """
    if n_particles < 0:
        raise DomainError("negative particle number")
    return min(sum(p * (p - 1) for p in part)
               for part in partitions(n_particles, n_sites))


def min_pair_count_joint(k_sites: int, n_particles: int, imbalance: int) -> int | None:
    """Same minimum by enumerating every Fock state of the whole lattice.

    Sites ``0, 2, 4, ...`` are even.  Returns None when no state has the
    requested imbalance.  Only practical for ``k_sites <= 8``.
    """
    if k_sites > 10:
        raise SizeError("joint enumeration is limited to 10 sites")
    best = None
    for cut in itertools.combinations(range(n_particles + k_sites - 1), k_sites - 1):
        occ = [b - a - 1 for a, b in zip((-1,) + cut, cut + (n_particles + k_sites - 1,))]
        theta = sum(occ[0::2]) - sum(occ[1::2])
        if theta != imbalance:
            continue
        e = sum(n * (n - 1) for n in occ)
        best = e if best is None else min(best, e)
    return best


def landau_table(k_sites: int, rho: Fraction):
    """Rows ``(Theta, brute-force minimum, K * [phi(rho+t) + phi(rho-t)])``.

    Both columns are exact integers; ``phi`` is evaluated with ``U_s = 1``.
    """
    rho = Fraction(rho)
    n = rho * k_sites
    if n.denominator != 1:
        raise DomainError("rho * K must be an integer")
    n = int(n)
    half = k_sites // 2
    rows = []
    for theta in range(-n, n + 1, 2):
        n_e, n_o = (n + theta) // 2, (n - theta) // 2
        brute = min_pair_count(half, n_e) + min_pair_count(half, n_o)
        t = Fraction(theta, k_sites)
        via_phi = k_sites * (phi(rho + t) + phi(rho - t))
        rows.append((theta, brute, via_phi))
    return rows
