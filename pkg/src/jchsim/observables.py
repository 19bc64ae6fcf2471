"""Measurement layer: number expectations, on-site variance, linear entropy,
two-point correlators, labeled dressed-state populations, and trapezoid time
averages over the quench window.

Every function accepts either trajectory flavor (state or density matrix)
produced by the dynamics module; site number operators are diagonal in both
representations, which keeps the series extraction cheap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import effective as eff
from . import fockspace as fs
from .polariton import JCParams


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")

    def time_average(self, tau: float | None = None) -> float:
        """(1/tau) integral over [0, tau] by trapezoid on the sample grid."""
        tau = self.times[-1] if tau is None else tau
        if tau - self.times[-1] > 1e-9 * max(tau, 1.0):
            raise ValueError("trajectory is shorter than the averaging window")
        mask = self.times <= tau * (1 + 1e-12)
        return float(np.trapezoid(self.values[mask], self.times[mask]) / tau)


def polariton_number_series(traj, i: int) -> TimeSeries:
    """<n_i>(t) with n_i = a_i^dag a_i + sigma_i^+ sigma_i^-."""
    return TimeSeries(traj.times, traj.expect_diagonal(traj.basis.number_diagonal(i)))


def variance_series(traj, i: int) -> TimeSeries:
    nd = traj.basis.number_diagonal(i)
    mean = traj.expect_diagonal(nd)
    mean_sq = traj.expect_diagonal(nd ** 2)
    return TimeSeries(traj.times, mean_sq - mean ** 2)


def variance_time_avg_numeric(traj, i: int, tau: float | None = None) -> float:
    """Time-averaged on-site polariton-number variance."""
    return variance_series(traj, i).time_average(tau)


def two_point_series(traj, i: int, j: int) -> TimeSeries:
    if i == j:
        raise ValueError("two-point correlator needs distinct sites")
    ni = traj.basis.number_diagonal(i)
    nj = traj.basis.number_diagonal(j)
    joint = traj.expect_diagonal(ni * nj)
    return TimeSeries(traj.times,
                      joint - traj.expect_diagonal(ni) * traj.expect_diagonal(nj))


def two_point_correlation(traj, i: int, j: int, tau: float | None = None) -> float:
    """Time-averaged connected correlator of n_i and n_j, sign retained.

    Reporting layers take the absolute value; keeping the sign here lets
    callers inspect anticorrelation directly.
    """
    return two_point_series(traj, i, j).time_average(tau)


# ---------------------------------------------------------------------------
# reduced single-site states and entropy
# ---------------------------------------------------------------------------

def _reduced_site_full(state: np.ndarray, basis: fs.ProductBasis, i: int) -> np.ndarray:
    d = basis.site.local_dim
    L = basis.num_sites
    psi = state.reshape((d,) * L)
    psi = np.moveaxis(psi, i, 0).reshape(d, -1)
    return psi @ psi.conj().T


def _reduced_site_effective(state: np.ndarray, basis: eff.LowerBranchBasis,
                            i: int) -> np.ndarray:
    n_levels = basis.total_excitations + 1
    rho = np.zeros((n_levels, n_levels), dtype=complex)
    rest = {}
    for k, occ in enumerate(basis.tuples):
        other = occ[:i] + occ[i + 1:]
        rest.setdefault(other, []).append((occ[i], k))
    for entries in rest.values():
        for n_a, k_a in entries:
            for n_b, k_b in entries:
                rho[n_a, n_b] += state[k_a] * np.conj(state[k_b])
    return rho


def _reduced_site_density(rho_full: np.ndarray, basis: fs.ProductBasis,
                          i: int) -> np.ndarray:
    d = basis.site.local_dim
    L = basis.num_sites
    r = rho_full.reshape((d,) * L * 2)
    r = np.moveaxis(r, (i, L + i), (0, L))
    r = r.reshape(d, d ** (L - 1), d, d ** (L - 1))
    return np.einsum("akbk->ab", r)


def reduced_site_density(traj, i: int, t_index: int) -> np.ndarray:
    """Single-site reduced density matrix at one sampled time."""
    from .dynamics import DensityTrajectory, StateTrajectory

    basis = traj.basis
    if isinstance(traj, StateTrajectory):
        state = traj.states[t_index]
        if isinstance(basis, eff.LowerBranchBasis):
            return _reduced_site_effective(state, basis, i)
        return _reduced_site_full(state, basis, i)
    if isinstance(traj, DensityTrajectory):
        if traj.keep is not None:
            full = np.zeros((basis.dim, basis.dim), dtype=complex)
            idx = np.ix_(traj.keep, traj.keep)
            full[idx] = traj.matrices[t_index]
        else:
            full = traj.matrices[t_index]
        return _reduced_site_density(full, basis, i)
    raise TypeError(f"unsupported trajectory type {type(traj)!r}")


def linear_entropy_series(traj, i: int) -> TimeSeries:
    """S(t) = 1 - Tr(rho_i(t)^2) for the reduced state of site i."""
    from .dynamics import StateTrajectory

    basis = traj.basis
    nt = len(traj.times)
    vals = np.empty(nt)
    if isinstance(traj, StateTrajectory) and isinstance(basis, fs.ProductBasis):
        d = basis.site.local_dim
        L = basis.num_sites
        for k in range(nt):
            psi = traj.states[k].reshape((d,) * L)
            m = np.moveaxis(psi, i, 0).reshape(d, -1)
            r = m @ m.conj().T
            vals[k] = 1.0 - np.real(np.einsum("ab,ba->", r, r))
        return TimeSeries(traj.times, vals)
    for k in range(nt):
        r = reduced_site_density(traj, i, k)
        vals[k] = 1.0 - np.real(np.einsum("ab,ba->", r, r))
    return TimeSeries(traj.times, vals)


def linear_entropy_time_avg(traj, i: int, tau: float | None = None) -> float:
    return linear_entropy_series(traj, i).time_average(tau)


# ---------------------------------------------------------------------------
# labeled dressed-state populations
# ---------------------------------------------------------------------------

def dressed_product_vector(basis, p: JCParams, occupations) -> np.ndarray:
    """Product state (x)_i |n_i, branch_i> mapped into the given basis.

    ``occupations`` is a sequence of (n, branch) pairs, one per site. In the
    lower-branch basis only '-' branches are representable.
    """
    if isinstance(basis, eff.LowerBranchBasis):
        if any(b != "-" for _, b in occupations):
            raise ValueError("upper-branch labels need the full Fock basis")
        vec = np.zeros(basis.dim)
        vec[basis.index(tuple(n for n, _ in occupations))] = 1.0
        return vec
    vecs = [basis.dressed_site_vector(p, n, b) for n, b in occupations]
    return basis.product_state(vecs)


def dimer_labels() -> dict:
    """Two-excitation dimer states: pair, interchange and mixed labels."""
    return {
        "P0": ((1, "-"), (1, "-")),
        "P2m_i": ((2, "-"), (0, "-")),
        "P2m_j": ((0, "-"), (2, "-")),
        "P2p_i": ((2, "+"), (0, "-")),
        "P2p_j": ((0, "-"), (2, "+")),
        "P1p_i": ((1, "+"), (1, "-")),
        "P1p_j": ((1, "-"), (1, "+")),
        "P1p_ij": ((1, "+"), (1, "+")),
    }


def trimer_labels() -> dict:
    """Lower-branch occupation labels of the three-excitation chain."""
    occs = {
        "P0": (1, 1, 1),
        "P3_i": (3, 0, 0), "P3_j": (0, 3, 0), "P3_k": (0, 0, 3),
        "P2i1j": (2, 1, 0), "P1j2k": (0, 1, 2),
        "P1i2j": (1, 2, 0), "P2j1k": (0, 2, 1),
        "P2i1k": (2, 0, 1), "P1i2k": (1, 0, 2),
    }
    return {name: tuple((n, "-") for n in occ) for name, occ in occs.items()}


def labeled_populations(traj, p: JCParams, labels) -> dict:
    """TimeSeries of squared overlaps with named dressed product states.

    ``labels`` maps name -> sequence of (n, branch) per site; unknown names
    in string form are rejected so typos fail loudly.
    """
    if not isinstance(labels, dict):
        raise ValueError("labels must map name -> per-site (n, branch) pairs")
    out = {}
    for name, occ in labels.items():
        vec = dressed_product_vector(traj.basis, p, occ)
        out[name] = TimeSeries(traj.times, traj.populations(vec))
    return out
