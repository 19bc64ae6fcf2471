"""Reduced Hilbert space of lower-branch polaritons.

Basis states are occupation tuples (n_1, ..., n_L) with sum N, each tuple
standing for the product of lower polaritons (x)_i |n_i, ->. Hopping moves
one excitation across an edge; a move (n_i, n_j) -> (n_i - 1, n_j + 1)
carries amplitude -J * t_{n_i}^{--} * t_{n_j+1}^{--}, the photon matrix
element between the dressed states on each side of the bond.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .lattice import LatticeGraph
from .polariton import (JCParams, RwaValidityWarning, hopping_element,
                        mixing_angle, polariton_energy, rwa_report)


@dataclass(frozen=True)
class LowerBranchBasis:
    """All ways to distribute N lower polaritons over L sites."""

    num_sites: int
    total_excitations: int
    tuples: tuple

    @property
    def dim(self) -> int:
        return len(self.tuples)

    def index(self, occupations) -> int:
        return self._lookup[tuple(occupations)]

    def number_diagonal(self, i: int) -> np.ndarray:
        return np.array([t[i] for t in self.tuples], dtype=float)

    def __post_init__(self):
        object.__setattr__(self, "_lookup",
                           {t: k for k, t in enumerate(self.tuples)})


def lower_branch_basis(num_sites: int, total_excitations: int) -> LowerBranchBasis:
    """Enumerate occupation tuples in lexicographic order.

    The dimension is the stars-and-bars count (N + L - 1)! / (N! (L - 1)!).
    """
    if num_sites < 1 or total_excitations < 0:
        raise ValueError("need num_sites >= 1 and total_excitations >= 0")
    L, N = num_sites, total_excitations
    tuples = []
    for bars in combinations(range(N + L - 1), L - 1):
        cuts = (-1,) + bars + (N + L - 1,)
        tuples.append(tuple(cuts[k + 1] - cuts[k] - 1 for k in range(L)))
    tuples.sort()
    assert len(tuples) == math.comb(N + L - 1, L - 1)
    return LowerBranchBasis(L, N, tuple(tuples))


def polariton_hamiltonian(graph: LatticeGraph, p: JCParams, hopping: float,
                          basis: LowerBranchBasis, warn: bool = True) -> np.ndarray:
    """Lower-branch Hamiltonian: diagonal polariton energies plus dressed hopping.

    The restriction neglects branch-interchange processes, which is only
    justified while the gap conditions hold; a warning is emitted otherwise
    and the returned matrix should be treated as advisory.
    """
    if graph.num_sites != basis.num_sites:
        raise ValueError("basis was built for a different number of sites")
    if warn and hopping > 0:
        rwa_report(p, hopping, warn=True)
    D = basis.dim
    H = np.zeros((D, D))
    t_cache = {}

    def t(n):
        if n not in t_cache:
            t_cache[n] = hopping_element(n, "-", "-", p)
        return t_cache[n]

    for k, occ in enumerate(basis.tuples):
        H[k, k] = sum(polariton_energy(n, "-", p) for n in occ if n > 0)
        for (i, j) in graph.edges:
            for src, dst in ((i, j), (j, i)):
                if occ[src] >= 1:
                    moved = list(occ)
                    moved[src] -= 1
                    moved[dst] += 1
                    m = basis.index(moved)
                    H[m, k] += -hopping * t(occ[src]) * t(occ[dst] + 1)
    return H


@dataclass(frozen=True)
class EffectiveDimerHamiltonian:
    """Three-level model of the quenched dimer in the two-excitation sector.

    Basis order: (|1,->|1,->, |2,->|0,->, |0,->|2,->).
    a = 2 E_1^-, c = E_2^-, b = -J t_1^{--} t_2^{--}.
    """

    a: float
    b: float
    c: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b, self.b],
                         [self.b, self.c, 0.0],
                         [self.b, 0.0, self.c]])


def dimer_effective(p: JCParams, hopping: float) -> EffectiveDimerHamiltonian:
    a = 2 * polariton_energy(1, "-", p)
    c = polariton_energy(2, "-", p)
    b = -hopping * hopping_element(1, "-", "-", p) * hopping_element(2, "-", "-", p)
    return EffectiveDimerHamiltonian(a=a, b=b, c=c)


def dimer_hopping_product(p: JCParams) -> float:
    """t_1^{--} t_2^{--} from the explicit half-angle product; cross-check path."""
    th1 = mixing_angle(1, p)
    th2 = mixing_angle(2, p)
    return math.cos(th1 / 2) * (math.sqrt(2) * math.cos(th1 / 2) * math.cos(th2 / 2)
                                + math.sin(th1 / 2) * math.sin(th2 / 2))


def mott_index(basis: LowerBranchBasis) -> int:
    """Index of the unit-filling tuple (1, ..., 1)."""
    if basis.total_excitations != basis.num_sites:
        raise ValueError("unit filling requires N = L")
    return basis.index((1,) * basis.num_sites)
