"""Closed-form solution of the quenched two-site lattice.

Everything here follows from diagonalizing the symmetric 3x3 model
[[a, b, b], [b, c, 0], [b, 0, c]] started in its first basis state. The
closed forms double as the oracle for every numerical propagator in the
package: the amplitudes, the time-averaged on-site variance and linear
entropy over the window tau = 1/J, and their large-detuning limits
0.5946 and 0.4616.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effective import EffectiveDimerHamiltonian


@dataclass(frozen=True)
class DimerSpectralData:
    """Eigenvalue pair and amplitude coefficients of the 3x3 dimer model."""

    lambda_plus: float
    lambda_minus: float
    alpha_plus: float
    alpha_minus: float
    omega0: float     # sqrt(8 b^2 + (a-c)^2), the single dynamical frequency
    omega1: float     # sqrt(7 b^2 + 2 (a-c)^2)
    omega2: float     # sqrt(2 b^2 + (a-c)^2)

    @classmethod
    def from_hamiltonian(cls, h: EffectiveDimerHamiltonian) -> "DimerSpectralData":
        d = h.a - h.c
        root = np.sqrt(8 * h.b**2 + d**2)
        if h.b != 0.0:
            alpha_p = (d + root) / (2 * h.b)
            alpha_m = (d - root) / (2 * h.b)
        else:
            alpha_p = alpha_m = np.nan   # frozen dynamics, amplitudes bypass these
        return cls(
            lambda_plus=(h.a + h.c + root) / 2,
            lambda_minus=(h.a + h.c - root) / 2,
            alpha_plus=alpha_p,
            alpha_minus=alpha_m,
            omega0=root,
            omega1=np.sqrt(7 * h.b**2 + 2 * d**2),
            omega2=np.sqrt(2 * h.b**2 + d**2),
        )


def amplitudes(t, h: EffectiveDimerHamiltonian):
    """Probability amplitudes (c0, c2) at time(s) t, starting from unit filling.

    c2 is the common amplitude of the two pair states, so normalization reads
    |c0|^2 + 2 |c2|^2 = 1. For b = 0 the initial state is stationary.
    """
    t = np.asarray(t, dtype=float)
    if h.b == 0.0:
        c0 = np.exp(-1j * h.a * t)
        return c0, np.zeros_like(c0)
    s = DimerSpectralData.from_hamiltonian(h)
    ep = np.exp(-1j * s.lambda_plus * t)
    em = np.exp(-1j * s.lambda_minus * t)
    denom = s.alpha_plus - s.alpha_minus
    c0 = (s.alpha_plus * ep - s.alpha_minus * em) / denom
    c2 = (ep - em) / denom
    return c0, c2


def reduced_density_matrix(t: float, h: EffectiveDimerHamiltonian) -> np.ndarray:
    """Diagonal single-site reduced matrix diag(|c2|^2, |c0|^2, |c2|^2)."""
    c0, c2 = amplitudes(t, h)
    p0 = float(np.abs(c0) ** 2)
    p2 = float(np.abs(c2) ** 2)
    return np.diag([p2, p0, p2])


def linear_entropy(t, h: EffectiveDimerHamiltonian):
    """Instantaneous site mixedness 1 - (|c0|^4 + 2 |c2|^4)."""
    c0, c2 = amplitudes(t, h)
    return 1.0 - (np.abs(c0) ** 4 + 2 * np.abs(c2) ** 4)


def variance_instantaneous(t, h: EffectiveDimerHamiltonian):
    """On-site number variance 2 |c2(t)|^2 (the mean stays pinned at 1)."""
    _, c2 = amplitudes(t, h)
    return 2 * np.abs(c2) ** 2


def variance_time_avg(h: EffectiveDimerHamiltonian, hopping: float) -> float:
    """Time-averaged variance over tau = 1/J:  (4b^2/O0^2)(1 - (J/O0) sin(O0/J)).

    Tends to (1/2)(1 - sin(4)/4) = 0.5946 in the dispersive limit where the
    pair states come into resonance and |b| -> sqrt(2) J.
    """
    if h.b == 0.0:
        return 0.0
    s = DimerSpectralData.from_hamiltonian(h)
    x = s.omega0 / hopping
    return 4 * h.b**2 / s.omega0**2 * (1 - np.sin(x) / x)


def entropy_time_avg(h: EffectiveDimerHamiltonian, hopping: float) -> float:
    """Time-averaged linear entropy over tau = 1/J; dispersive limit 0.4616."""
    if h.b == 0.0:
        return 0.0
    s = DimerSpectralData.from_hamiltonian(h)
    x = s.omega0 / hopping
    return (2 * h.b**2 / s.omega0**5) * (
        2 * s.omega0 * s.omega1**2
        - 4 * hopping * s.omega2**2 * np.sin(x)
        - 3 * h.b**2 * hopping * np.sin(2 * x)
    )
