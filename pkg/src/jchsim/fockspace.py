"""Truncated tensor-product Hilbert space and bare-operator construction.

Per-site local space is TLS (x) Fock, optionally ancilla-TLS (x) TLS (x) Fock.
Local flat index: ((ancilla)*2 + tls)*n_max + n_photon, with the TLS basis
ordered (down, up). Site 0 is the slowest-varying tensor factor, so the
global index of occupations (l_0, ..., l_{L-1}) is sum_k l_k * d^(L-1-k).
All operators are built as scipy CSR matrices.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .lattice import LatticeGraph
from .polariton import JCParams, coefficients


class BasisSizeError(RuntimeError):
    """Total dimension exceeds the configured memory budget."""


class TruncationWarning(UserWarning):
    """Population reached the top Fock level; increase n_max."""


@dataclass(frozen=True)
class SiteSpace:
    """Local Hilbert space of one lattice site."""

    n_max: int
    has_ancilla: bool = False

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be >= 2")

    @property
    def local_dim(self) -> int:
        return (4 if self.has_ancilla else 2) * self.n_max


_TLS_SM = np.array([[0.0, 1.0], [0.0, 0.0]])     # |down><up|
_TLS_SZ = np.diag([-1.0, 1.0])


def _local_matrices(site: SiteSpace) -> dict:
    """Dense local operators on one site, in the flat local index."""
    n_max = site.n_max
    a = np.diag(np.sqrt(np.arange(1, n_max)), 1)
    eye_f = np.eye(n_max)
    eye_t = np.eye(2)
    ops = {
        "annihilate": np.kron(eye_t, a),
        "sigma_minus": np.kron(_TLS_SM, eye_f),
        "sigma_z": np.kron(_TLS_SZ, eye_f),
        "number_photon": np.kron(eye_t, np.diag(np.arange(n_max, dtype=float))),
        "number_tls": np.kron(np.diag([0.0, 1.0]), eye_f),
        "top_fock": np.kron(eye_t, np.diag((np.arange(n_max) == n_max - 1).astype(float))),
    }
    if site.has_ancilla:
        eye_s = np.eye(2 * n_max)
        lifted = {k: np.kron(eye_t, v) for k, v in ops.items()}
        lifted["ancilla_sigma_minus"] = np.kron(_TLS_SM, eye_s)
        lifted["ancilla_sigma_z"] = np.kron(_TLS_SZ, eye_s)
        lifted["ancilla_number"] = np.kron(np.diag([0.0, 1.0]), eye_s)
        ops = lifted
    ops["create"] = ops["annihilate"].conj().T
    ops["sigma_plus"] = ops["sigma_minus"].conj().T
    ops["number_excitation"] = ops["number_photon"] + ops["number_tls"]
    if site.has_ancilla:
        ops["ancilla_sigma_plus"] = ops["ancilla_sigma_minus"].conj().T
    return ops


class ProductBasis:
    """Indexed product basis over L identical sites.

    Carries the flat-index convention and caches the diagonal of each site's
    excitation-number operator, which every observable goes through instead
    of addressing raw indices.
    """

    def __init__(self, num_sites: int, site: SiteSpace, max_dim: int = 2_000_000):
        d = site.local_dim
        dim = d ** num_sites
        if dim > max_dim:
            raise BasisSizeError(
                f"basis dimension {dim} = {d}^{num_sites} exceeds budget {max_dim}")
        self.num_sites = num_sites
        self.site = site
        self.dim = dim
        self._local = _local_matrices(site)
        self._site_number_diag = [
            self.site_operator("number_excitation", i).diagonal().real
            for i in range(num_sites)
        ]

    def lift(self, local: np.ndarray, i: int) -> sp.csr_matrix:
        """Embed a local operator at site i, identity elsewhere."""
        d = self.site.local_dim
        out = sp.identity(d ** i, format="csr", dtype=complex)
        out = sp.kron(out, sp.csr_matrix(local.astype(complex)), format="csr")
        rest = self.num_sites - i - 1
        if rest:
            out = sp.kron(out, sp.identity(d ** rest, format="csr"), format="csr")
        return out

    def site_operator(self, kind: str, i: int) -> sp.csr_matrix:
        if not 0 <= i < self.num_sites:
            raise IndexError(f"site {i} out of range")
        if kind.startswith("ancilla") and not self.site.has_ancilla:
            raise ValueError(f"operator {kind!r} requires an ancilla-enabled site space")
        try:
            local = self._local[kind]
        except KeyError:
            raise ValueError(f"unknown operator kind {kind!r}") from None
        return self.lift(local, i)

    def number_diagonal(self, i: int) -> np.ndarray:
        """Diagonal of n_i = a_i^dag a_i + sigma_i^+ sigma_i^- (real vector)."""
        return self._site_number_diag[i]

    def total_excitation_diagonal(self, include_ancilla: bool = False) -> np.ndarray:
        diag = np.zeros(self.dim)
        for i in range(self.num_sites):
            diag += self._site_number_diag[i]
            if include_ancilla and self.site.has_ancilla:
                diag += self.site_operator("ancilla_number", i).diagonal().real
        return diag

    def top_fock_diagonal(self) -> np.ndarray:
        """Diagonal projector weight onto any site's highest Fock level."""
        diag = np.zeros(self.dim)
        for i in range(self.num_sites):
            diag += self.site_operator("top_fock", i).diagonal().real
        return np.minimum(diag, 1.0)

    def dressed_site_vector(self, p: JCParams, n: int, branch: str,
                            ancilla_up: bool = False) -> np.ndarray:
        """Local state vector for |n, branch>, optionally (x) ancilla level."""
        n_max = self.site.n_max
        if n > n_max - 1:
            raise ValueError(f"photon number {n} exceeds truncation {n_max - 1}")
        co = coefficients(n, p)
        v = np.zeros(2 * n_max)
        gamma = co.gamma_plus if branch == "+" else co.gamma_minus
        rho = co.rho_plus if branch == "+" else co.rho_minus
        v[0 * n_max + n] = gamma                       # |down, n>
        if n >= 1:
            v[1 * n_max + n - 1] = rho                 # |up, n-1>
        if n == 0 and branch == "+":
            raise ValueError("the (n=0, +) state is unphysical")
        if self.site.has_ancilla:
            anc = np.array([0.0, 1.0]) if ancilla_up else np.array([1.0, 0.0])
            v = np.kron(anc, v)
        return v

    def product_state(self, site_vectors) -> np.ndarray:
        psi = np.array([1.0])
        for v in site_vectors:
            psi = np.kron(psi, v)
        return psi


def build_basis(graph: LatticeGraph, n_max: int, with_ancilla: bool = False,
                max_dim: int = 2_000_000) -> ProductBasis:
    """Product basis matching a lattice graph, one SiteSpace per site."""
    return ProductBasis(graph.num_sites, SiteSpace(n_max, with_ancilla), max_dim=max_dim)


def site_operator(basis: ProductBasis, kind: str, i: int) -> sp.csr_matrix:
    return basis.site_operator(kind, i)


def jc_site_hamiltonian(basis: ProductBasis, p: JCParams, i: int) -> sp.csr_matrix:
    adag_a = basis.site_operator("number_photon", i)
    sp_sm = basis.site_operator("number_tls", i)
    a = basis.site_operator("annihilate", i)
    s_p = basis.site_operator("sigma_plus", i)
    return (p.omega * adag_a + p.omega0 * sp_sm
            + p.g * (s_p @ a + (s_p @ a).conj().T)).tocsr()


def jch_hamiltonian(graph: LatticeGraph, p: JCParams, hopping: float,
                    basis: ProductBasis) -> sp.csr_matrix:
    """Full lattice Hamiltonian: on-site JC terms minus photon hopping."""
    if graph.num_sites != basis.num_sites:
        raise ValueError("basis was built for a different number of sites")
    H = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for i in range(graph.num_sites):
        H = H + jc_site_hamiltonian(basis, p, i)
    for (i, j) in graph.edges:
        ai = basis.site_operator("annihilate", i)
        aj = basis.site_operator("annihilate", j)
        hop = ai.conj().T @ aj
        H = H - hopping * (hop + hop.conj().T)
    return H.tocsr()


def total_excitations(basis: ProductBasis, include_ancilla: bool = False) -> sp.csr_matrix:
    """Conserved polariton-number operator (diagonal)."""
    return sp.diags(basis.total_excitation_diagonal(include_ancilla)).tocsr()


def ancilla_site_hamiltonian(p: JCParams, omega_a: float, g_a: float,
                             basis: ProductBasis, i: int = 0) -> sp.csr_matrix:
    """Single-site JC Hamiltonian plus an ancilla TLS coupled to the cavity."""
    if not basis.site.has_ancilla:
        raise ValueError("basis must be ancilla-enabled")
    n_a = basis.site_operator("ancilla_number", i)
    a = basis.site_operator("annihilate", i)
    sa_p = basis.site_operator("ancilla_sigma_plus", i)
    H = jc_site_hamiltonian(basis, p, i) + omega_a * n_a \
        + g_a * (sa_p @ a + (sa_p @ a).conj().T)
    return H.tocsr()


def hermiticity_defect(op) -> float:
    """max |H - H^dag| relative to the largest entry; 0 for empty operators."""
    diff = op - op.conj().T
    num = abs(diff).max() if diff.nnz else 0.0
    den = abs(op).max() if op.nnz else 1.0
    return float(num) / float(den) if den else 0.0


def check_truncation(basis: ProductBasis, populations_top: float,
                     tol: float = 1e-4) -> None:
    """Warn if any trajectory put weight on the highest Fock level."""
    if populations_top > tol:
        warnings.warn(
            f"top Fock level reached population {populations_top:.2e} (> {tol:.0e}); "
            f"increase n_max beyond {basis.site.n_max}",
            TruncationWarning, stacklevel=2)
