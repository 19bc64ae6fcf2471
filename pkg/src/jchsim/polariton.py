"""Single-site Jaynes-Cummings eigenstructure.

Dressed states |n, +/-> = gamma_{n,b} |down, n> + rho_{n,b} |up, n-1> with
energies E_n^{+/-} = n*omega + delta/2 +/- chi(n). The n = 0 lower state is
the bare ground state |down, 0>; there is no physical |0, +> state and it is
represented by all-zero coefficients, never by a basis slot.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


class RwaValidityWarning(UserWarning):
    """Emitted when an energy-gap ratio falls below the validity threshold."""


@dataclass(frozen=True)
class JCParams:
    """Physical knobs of a single resonator-TLS site (hbar = 1).

    omega and delta are stored; the TLS frequency omega0 = omega + delta is
    derived so the detuning has a single source of truth.
    """

    omega: float
    g: float
    delta: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be > 0")
        if self.g <= 0:
            raise ValueError("g must be > 0")

    @property
    def omega0(self) -> float:
        return self.omega + self.delta

    @classmethod
    def from_delta_over_g(cls, delta_over_g: float, g: float, omega: float = 1.0) -> "JCParams":
        return cls(omega=omega, g=g, delta=delta_over_g * g)


@dataclass(frozen=True)
class PolaritonCoeffs:
    n: int
    gamma_plus: float
    gamma_minus: float
    rho_plus: float
    rho_minus: float


def chi(n: int, p: JCParams) -> float:
    """Half Rabi splitting sqrt(delta^2/4 + g^2 n); defined for n >= 1."""
    if n < 1:
        raise ValueError(f"chi requires n >= 1, got {n}")
    return math.sqrt(p.delta**2 / 4 + p.g**2 * n)


def mixing_angle(n: int, p: JCParams) -> float:
    """theta_n = atan2(2 g sqrt(n), delta), in (0, pi).

    Exactly pi/2 at zero detuning; tends to 0 in the dispersive limit and
    to pi for large negative detuning.
    """
    if n < 1:
        raise ValueError(f"mixing_angle requires n >= 1, got {n}")
    return math.atan2(2 * p.g * math.sqrt(n), p.delta)


def polariton_energy(n: int, branch: str, p: JCParams) -> float:
    """E_n^branch for branch '+' or '-'; E_0^- = 0 and (0, '+') is unphysical."""
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        if branch == "+":
            raise ValueError("the (n=0, +) state is unphysical")
        return 0.0
    sign = 1.0 if branch == "+" else -1.0
    return n * p.omega + p.delta / 2 + sign * chi(n, p)


def coefficients(n: int, p: JCParams) -> PolaritonCoeffs:
    """Dressed-state coefficients; the n = 0 conventions give gamma_0- = 1."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return PolaritonCoeffs(0, gamma_plus=0.0, gamma_minus=1.0, rho_plus=0.0, rho_minus=0.0)
    th = mixing_angle(n, p)
    s, c = math.sin(th / 2), math.cos(th / 2)
    return PolaritonCoeffs(n, gamma_plus=s, gamma_minus=c, rho_plus=c, rho_minus=-s)


def hopping_element(n: int, alpha: str, alpha_prime: str, p: JCParams) -> float:
    """Photon matrix element t_n^{alpha alpha'} = <n-1, alpha| a |n, alpha'>.

    Equals sqrt(n) gamma_{(n-1)alpha} gamma_{n alpha'}
         + sqrt(n-1) rho_{(n-1)alpha} rho_{n alpha'}.
    """
    if n < 1:
        raise ValueError(f"hopping_element requires n >= 1, got {n}")
    lo = coefficients(n - 1, p)
    hi = coefficients(n, p)
    g_lo = lo.gamma_plus if alpha == "+" else lo.gamma_minus
    r_lo = lo.rho_plus if alpha == "+" else lo.rho_minus
    g_hi = hi.gamma_plus if alpha_prime == "+" else hi.gamma_minus
    r_hi = hi.rho_plus if alpha_prime == "+" else hi.rho_minus
    if alpha not in ("+", "-") or alpha_prime not in ("+", "-"):
        raise ValueError("branches must be '+' or '-'")
    return math.sqrt(n) * g_lo * g_hi + math.sqrt(n - 1) * r_lo * r_hi


@dataclass(frozen=True)
class RwaReport:
    """Energy-gap ratios controlling the lower-branch reduction.

    ``gap_ratios`` collects |gap| / J for every branch-interchange process
    that must stay fast, together with the frequency-hierarchy ratios
    g sqrt(n)/(J n) and omega n/(g sqrt(n)). ``ok`` requires all of them to
    clear ``threshold``; these gate the validity of the effective model.

    ``lower_gap_ratio`` = |E_2^- - 2 E_1^-| / J is reported separately: a
    small value marks the intra-branch resonance that drives large pair
    oscillations, not a breakdown of the lower-branch description.
    """

    gap_ratios: dict
    lower_gap_ratio: float
    threshold: float

    @property
    def ok(self) -> bool:
        return all(r >= self.threshold for r in self.gap_ratios.values())

    @property
    def near_lower_branch_resonance(self) -> bool:
        return self.lower_gap_ratio < self.threshold

    def flagged(self) -> list[str]:
        out = [k for k, r in sorted(self.gap_ratios.items()) if r < self.threshold]
        if self.near_lower_branch_resonance:
            out.append("lower_branch_resonance")
        return out


def rwa_report(p: JCParams, hopping: float, n_max: int = 3,
               threshold: float = 10.0, warn: bool = False) -> RwaReport:
    """Check the gap conditions for restricting dynamics to lower polaritons.

    All reported quantities are dimensionless ratios that must be >> 1.
    A zero hopping makes every gap ratio infinite and the report passes.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    E = lambda n, b: polariton_energy(n, b, p)
    gaps = {
        "E2p_minus_2E1m": abs(E(2, "+") - 2 * E(1, "-")),
        "2E1p_minus_E2m": abs(2 * E(1, "+") - E(2, "-")),
        "E1p_plus_E1m_minus_E2m": abs(E(1, "+") + E(1, "-") - E(2, "-")),
        "E1p_minus_E1m": abs(E(1, "+") - E(1, "-")),
        "E3p_minus_E2m_minus_E1m": abs(E(3, "+") - E(2, "-") - E(1, "-")),
        "E2p_minus_E2m": abs(E(2, "+") - E(2, "-")),
        "E2p_plus_E1p_minus_E2m_minus_E1m": abs(E(2, "+") + E(1, "+") - E(2, "-") - E(1, "-")),
    }
    ratios = {}
    for name, gap in gaps.items():
        ratios[name] = gap / hopping if hopping > 0 else math.inf
    for n in range(1, n_max + 1):
        gs = p.g * math.sqrt(n)
        ratios[f"g_scale_over_hopping_n{n}"] = gs / (hopping * n) if hopping > 0 else math.inf
        ratios[f"omega_over_g_scale_n{n}"] = p.omega * n / gs
    lower_gap = abs(E(2, "-") - 2 * E(1, "-"))
    lower_ratio = lower_gap / hopping if hopping > 0 else math.inf
    report = RwaReport(gap_ratios=ratios, lower_gap_ratio=lower_ratio, threshold=threshold)
    if warn and not report.ok:
        warnings.warn(
            f"branch-interchange gaps below {threshold}x hopping: {report.flagged()}",
            RwaValidityWarning, stacklevel=2)
    return report
