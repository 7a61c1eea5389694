"""Small bipartite lattices used by the brute-force oracles."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError


@dataclass(frozen=True)
class LatticeGraph:
    """Bipartite lattice with equal even and odd sub-lattices.

    ``parity[i]`` is 0 for even sites and 1 for odd sites.  Every edge is
    stored as ``(even_site, odd_site)``.
    """

    n_sites: int
    parity: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    geometry: str

    def __post_init__(self):
        if self.n_sites % 2 or self.n_sites < 2:
            raise DomainError(f"need an even number of sites, got {self.n_sites}")
        if len(self.parity) != self.n_sites:
            raise DomainError("parity labels do not match the number of sites")
        if self.parity.count(0) != self.parity.count(1):
            raise DomainError("sub-lattices must have equal size")
        for i, j in self.edges:
            if self.parity[i] != 0 or self.parity[j] != 1:
                raise DomainError(f"edge {(i, j)} does not join an even site to an odd site")

    @property
    def even_sites(self) -> list[int]:
        return [i for i, p in enumerate(self.parity) if p == 0]

    @property
    def odd_sites(self) -> list[int]:
        return [i for i, p in enumerate(self.parity) if p == 1]

    @property
    def coordination(self) -> Fraction:
        """Mean number of neighbours, ``2 |E| / K``."""
        return Fraction(2 * len(self.edges), self.n_sites)

    def neighbours(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_sites)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


def _from_pairs(n_sites, parity, pairs, geometry) -> LatticeGraph:
    edges = set()
    for a, b in pairs:
        if a == b:
            continue
        if parity[a] == parity[b]:
            raise DomainError(f"{geometry}: sites {a} and {b} share a sub-lattice")
        edges.add((a, b) if parity[a] == 0 else (b, a))
    return LatticeGraph(n_sites, tuple(parity), tuple(sorted(edges)), geometry)


def dimer() -> LatticeGraph:
    """One even and one odd site joined by a single bond."""
    return _from_pairs(2, [0, 1], [(0, 1)], "dimer")


def ring(n_sites: int) -> LatticeGraph:
    if n_sites % 2 or n_sites < 2:
        raise DomainError("a bipartite ring needs an even number of sites")
    parity = [i % 2 for i in range(n_sites)]
    pairs = [(i, (i + 1) % n_sites) for i in range(n_sites)]
    return _from_pairs(n_sites, parity, pairs, f"ring{n_sites}")


def rectangle(length: int, width: int, periodic: bool = False) -> LatticeGraph:
    """``length x width`` square lattice; site index ``x * width + y``."""
    n = length * width
    if n % 2:
        raise DomainError("rectangle needs an even number of sites")
    if periodic and (length % 2 or width % 2):
        raise DomainError("periodic boundaries need even side lengths to stay bipartite")
    parity = [(x + y) % 2 for x in range(length) for y in range(width)]
    pairs = []
    for x in range(length):
        for y in range(width):
            s = x * width + y
            if x + 1 < length or (periodic and length > 1):
                pairs.append((s, ((x + 1) % length) * width + y))
            if y + 1 < width or (periodic and width > 1):
                pairs.append((s, x * width + (y + 1) % width))
    bc = "pbc" if periodic else "obc"
    return _from_pairs(n, parity, pairs, f"rect{length}x{width}-{bc}")


def complete_bipartite(n_sites: int) -> LatticeGraph:
    """Every even site bonded to every odd site (the all-to-all distortion)."""
    if n_sites % 2 or n_sites < 2:
        raise DomainError("need an even number of sites")
    parity = [i % 2 for i in range(n_sites)]
    pairs = [(i, j) for i in range(0, n_sites, 2) for j in range(1, n_sites, 2)]
    return _from_pairs(n_sites, parity, pairs, f"kbip{n_sites}")


def from_name(geometry: str, k_sites: int | None = None, width: int | None = None,
              periodic: bool = False) -> LatticeGraph:
    """Factory used by the command line: dimer, ring, rect, kbip."""
    if geometry == "dimer":
        return dimer()
    if geometry == "ring":
        return ring(k_sites)
    if geometry == "kbip":
        return complete_bipartite(k_sites)
    if geometry == "rect":
        if width is None or k_sites is None or k_sites % width:
            raise DomainError("rect needs --width dividing --k")
        return rectangle(k_sites // width, width, periodic)
    raise DomainError(f"unknown geometry {geometry!r}")
