"""Finite lattice graphs for coupled-resonator arrays.

Sites are 0-indexed. Edges are undirected, stored canonically as (i, j)
with i < j, and every edge carries the same hopping amplitude J.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class LatticeGraph:
    """Undirected graph of resonator sites; immutable after construction."""

    num_sites: int
    edges: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValueError(f"num_sites must be >= 1, got {self.num_sites}")
        canon = []
        seen = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError(f"self-loop on site {i}")
            if not (0 <= i < self.num_sites and 0 <= j < self.num_sites):
                raise ValueError(f"edge {e} out of range for {self.num_sites} sites")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            canon.append(pair)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    def connectivity(self, i: int) -> int:
        """Degree of site i (the number of incident edges)."""
        if not 0 <= i < self.num_sites:
            raise IndexError(f"site {i} out of range for {self.num_sites} sites")
        return sum(1 for (a, b) in self.edges if a == i or b == i)

    def neighbors(self, i: int) -> list[int]:
        if not 0 <= i < self.num_sites:
            raise IndexError(f"site {i} out of range for {self.num_sites} sites")
        out = [b if a == i else a for (a, b) in self.edges if i in (a, b)]
        return sorted(out)


def chain(num_sites: int) -> LatticeGraph:
    """Open chain of num_sites resonators: edges (i, i+1)."""
    if num_sites < 1:
        raise ValueError(f"num_sites must be >= 1, got {num_sites}")
    return LatticeGraph(num_sites, tuple((i, i + 1) for i in range(num_sites - 1)))


def coupling_parameter(graph: LatticeGraph, hopping: float) -> float:
    """Global connectivity parameter J * (sum_j nu_j) / L.

    Zero when the hopping vanishes (resonant, Mott-insulating limit);
    J for the two-site chain. The formula is site-independent, so a single
    number is returned for the whole graph.
    """
    if hopping < 0:
        raise ValueError("hopping must be >= 0")
    total = sum(graph.connectivity(i) for i in range(graph.num_sites))
    return hopping * total / graph.num_sites
