import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jchsim.polariton import (JCParams, chi, coefficients, hopping_element,
                              mixing_angle, polariton_energy, rwa_report)


def P(delta_over_g, g=1.0, omega=None):
    omega = omega if omega is not None else max(1.0, 100.0 * g)
    return JCParams(omega=omega, g=g, delta=delta_over_g * g)


class TestChi:
    def test_resonant_values(self):
        p = JCParams(omega=10.0, g=1.0, delta=0.0)
        assert chi(1, p) == pytest.approx(1.0)
        assert chi(2, p) == pytest.approx(math.sqrt(2))

    def test_detuned(self):
        p = JCParams(omega=10.0, g=1.0, delta=2.0)
        assert chi(1, p) == pytest.approx(math.sqrt(2))

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            chi(0, JCParams(omega=1.0, g=0.1))


class TestEnergies:
    def test_vacuum_rabi_splitting(self):
        p = JCParams(omega=1.0, g=0.01, delta=0.0)
        assert polariton_energy(1, "+", p) == pytest.approx(1.01)
        assert polariton_energy(1, "-", p) == pytest.approx(0.99)
        assert polariton_energy(2, "-", p) == pytest.approx(2 - math.sqrt(2) * 0.01)

    def test_dispersive_limit_first_order(self):
        # E_n^- -> n (omega - g^2/delta); residual is O(n^2 g^4 / delta^3)
        g, omega = 0.01, 1.0
        delta = 100 * g
        p = JCParams(omega=omega, g=g, delta=delta)
        for n in (1, 2, 3):
            target = n * (omega - g**2 / delta)
            bound = 2 * n**2 * g**4 / delta**3
            assert abs(polariton_energy(n, "-", p) - target) <= bound

    def test_ground_state_and_unphysical(self):
        p = JCParams(omega=1.0, g=0.01)
        assert polariton_energy(0, "-", p) == 0.0
        with pytest.raises(ValueError):
            polariton_energy(0, "+", p)

    def test_branch_gap_is_twice_chi(self):
        p = JCParams(omega=1.0, g=0.02, delta=0.07)
        for n in (1, 2, 3):
            gap = polariton_energy(n, "+", p) - polariton_energy(n, "-", p)
            assert gap == pytest.approx(2 * chi(n, p))
            assert gap > 0


class TestMixingAngle:
    def test_resonance_gives_half_pi(self):
        p = JCParams(omega=1.0, g=0.01, delta=0.0)
        for n in (1, 2, 5):
            assert mixing_angle(n, p) == pytest.approx(math.pi / 2)

    def test_dispersive_tends_to_zero(self):
        p = P(1e4, g=0.01)
        assert mixing_angle(1, p) < 1e-3

    def test_quarter_pi(self):
        p = JCParams(omega=1.0, g=0.01, delta=0.02)
        assert mixing_angle(1, p) == pytest.approx(math.pi / 4)

    def test_negative_detuning_upper_half(self):
        p = JCParams(omega=1.0, g=0.01, delta=-0.02)
        th = mixing_angle(1, p)
        assert math.pi / 2 < th < math.pi


class TestCoefficients:
    def test_vacuum_identifications(self):
        co = coefficients(0, JCParams(omega=1.0, g=0.01))
        assert co.gamma_minus == 1.0
        assert co.gamma_plus == co.rho_plus == co.rho_minus == 0.0

    def test_resonant_n1(self):
        co = coefficients(1, JCParams(omega=1.0, g=0.01, delta=0.0))
        r = math.cos(math.pi / 4)
        assert co.gamma_minus == pytest.approx(r)
        assert co.rho_plus == pytest.approx(r)
        assert co.rho_minus == pytest.approx(-r)
        assert co.gamma_plus == pytest.approx(r)

    @settings(max_examples=200)
    @given(st.integers(min_value=1, max_value=6),
           st.floats(min_value=-3.0, max_value=4.0),
           st.booleans())
    def test_normalization_and_orthogonality(self, n, log_ratio, negate):
        ratio = 10.0**log_ratio * (-1 if negate else 1)
        p = P(ratio, g=0.01)
        co = coefficients(n, p)
        assert co.gamma_plus**2 + co.rho_plus**2 == pytest.approx(1.0, abs=1e-12)
        assert co.gamma_minus**2 + co.rho_minus**2 == pytest.approx(1.0, abs=1e-12)
        cross = co.gamma_plus * co.gamma_minus + co.rho_plus * co.rho_minus
        assert abs(cross) <= 1e-12


def bare_jc_block(n, p):
    # two-level block spanned by (|down, n>, |up, n-1>); independent oracle
    return np.array([[n * p.omega, p.g * math.sqrt(n)],
                     [p.g * math.sqrt(n), n * p.omega + p.delta]])


def oracle_dressed(n, p):
    """Sign-fixed numeric eigenvectors: columns (minus, plus) as (gamma, rho)."""
    if n == 0:
        return {"-": np.array([1.0, 0.0]), "+": np.array([0.0, 0.0])}
    vals, vecs = np.linalg.eigh(bare_jc_block(n, p))
    out = {}
    for idx, branch in ((0, "-"), (1, "+")):
        v = vecs[:, idx]
        if v[0] < 0:
            v = -v
        out[branch] = v
    return out


class TestHoppingElement:
    def test_resonant_t1(self):
        p = JCParams(omega=1.0, g=0.01, delta=0.0)
        assert hopping_element(1, "-", "-", p) == pytest.approx(math.cos(math.pi / 4))

    def test_resonant_product(self):
        # evaluate the explicit half-angle product as an independent expression
        p = JCParams(omega=1.0, g=0.01, delta=0.0)
        th1, th2 = mixing_angle(1, p), mixing_angle(2, p)
        explicit = math.cos(th1 / 2) * (math.sqrt(2) * math.cos(th1 / 2) * math.cos(th2 / 2)
                                        + math.sin(th1 / 2) * math.sin(th2 / 2))
        product = hopping_element(1, "-", "-", p) * hopping_element(2, "-", "-", p)
        assert product == pytest.approx(explicit, abs=1e-15)
        assert product == pytest.approx(0.8535533905932737, abs=1e-12)

    def test_dispersive_product_reaches_sqrt2(self):
        p = P(1e4, g=0.01)
        product = hopping_element(1, "-", "-", p) * hopping_element(2, "-", "-", p)
        assert product == pytest.approx(math.sqrt(2), abs=1e-3)

    @pytest.mark.parametrize("delta_over_g", [0.0, 0.37, 2.0, 50.0, -3.1])
    def test_against_brute_force_matrix_element(self, delta_over_g):
        p = P(delta_over_g, g=0.01)
        n_big = 5
        a = np.diag(np.sqrt(np.arange(1, n_big + 1)), 1)  # fock ladder, n <= n_big

        def embed(n, branch):
            # dressed |n, b> as a vector over (|down,m>, |up,m-1>) bare states
            vec = np.zeros(2 * (n_big + 1))
            co = oracle_dressed(n, p)[branch]
            vec[n] = co[0]                       # |down, n>
            if n >= 1:
                vec[(n_big + 1) + (n - 1)] = co[1]   # |up, n-1>
            return vec

        A = np.kron(np.eye(2), a)
        for n in (1, 2, 3, 4):
            for al in ("+", "-"):
                for ap in ("+", "-"):
                    bra = embed(n - 1, al)
                    ket = embed(n, ap)
                    oracle = bra @ A @ ket
                    assert hopping_element(n, al, ap, p) == pytest.approx(
                        oracle, abs=1e-12)


class TestRwaReport:
    def test_resonant_passes(self):
        p = JCParams(omega=1.0, g=1e-2, delta=0.0)
        rep = rwa_report(p, 1e-4)
        assert rep.ok
        assert rep.lower_gap_ratio == pytest.approx((2 - math.sqrt(2)) * 1e-2 / 1e-4,
                                                    rel=1e-12)
        assert not rep.near_lower_branch_resonance

    def test_pair_resonance_flagged(self):
        p = P(50.0, g=1e-2)
        rep = rwa_report(p, 1e-4)
        assert rep.ok                      # interchange gaps all large
        assert rep.near_lower_branch_resonance
        assert "lower_branch_resonance" in rep.flagged()

    def test_zero_hopping_all_infinite(self):
        p = JCParams(omega=1.0, g=1e-2, delta=0.0)
        rep = rwa_report(p, 0.0)
        assert rep.ok
        assert math.isinf(rep.lower_gap_ratio)
        for name, ratio in rep.gap_ratios.items():
            if "omega_over_g_scale" in name:
                assert ratio >= rep.threshold    # hierarchy ratio, J-independent
            else:
                assert math.isinf(ratio)
        assert rep.flagged() == []
