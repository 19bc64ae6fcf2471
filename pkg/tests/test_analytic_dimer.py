import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from jchsim.analytic_dimer import (DimerSpectralData, amplitudes, entropy_time_avg,
                                   linear_entropy, reduced_density_matrix,
                                   variance_instantaneous, variance_time_avg)
from jchsim.effective import EffectiveDimerHamiltonian, dimer_effective
from jchsim.polariton import JCParams

G, J = 1e-2, 1e-4


def H(delta_over_g, g=G, j=J):
    return dimer_effective(JCParams.from_delta_over_g(delta_over_g, g), j)


def test_initial_condition():
    c0, c2 = amplitudes(0.0, H(3.0))
    assert c0 == pytest.approx(1.0)
    assert c2 == pytest.approx(0.0)


@settings(max_examples=100)
@given(st.floats(min_value=0.0, max_value=3e4),
       st.floats(min_value=-1.0, max_value=3.0))
def test_normalization(t, log_x):
    c0, c2 = amplitudes(t, H(10.0**log_x))
    assert abs(c0) ** 2 + 2 * abs(c2) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_resonant_limit_pair_oscillation():
    # a = c: |c2|^2 = sin^2(sqrt(2) b t) / 2, period pi / (sqrt(2) |b|)
    h = EffectiveDimerHamiltonian(a=2.0, b=-1.4e-4, c=2.0)
    ts = np.linspace(0.0, 3e4, 600)
    _, c2 = amplitudes(ts, h)
    expected = 0.5 * np.sin(math.sqrt(2) * abs(h.b) * ts) ** 2
    # phase arguments reach 6e4 rad, so roundoff grows to ~1e-11
    assert np.abs(np.abs(c2) ** 2 - expected).max() <= 1e-10


def test_amplitudes_match_matrix_exponential_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = 10.0 ** rng.uniform(-1, 3)
        g = 10.0 ** rng.uniform(-3, -1.5)
        j = g * 10.0 ** rng.uniform(-3, -1.5)
        h = dimer_effective(JCParams.from_delta_over_g(x, g), j)
        times = rng.uniform(0.0, 1.0 / j, size=100)
        c0, c2 = amplitudes(times, h)
        for t, a0, a2 in zip(times[:25], c0[:25], c2[:25]):
            U = expm(-1j * h.matrix * t)
            psi = U[:, 0]
            assert abs(psi[0] - a0) <= 1e-9
            assert abs(psi[1] - a2) <= 1e-9
            assert abs(psi[2] - a2) <= 1e-9


def test_frozen_when_hopping_vanishes():
    h = EffectiveDimerHamiltonian(a=1.98, b=0.0, c=1.99)
    c0, c2 = amplitudes(123.0, h)
    assert abs(c0) == pytest.approx(1.0)
    assert c2 == 0.0
    assert variance_time_avg(h, J) == 0.0
    assert entropy_time_avg(h, J) == 0.0


class TestVariance:
    def test_dispersive_asymptote(self):
        assert variance_time_avg(H(1e6), J) == pytest.approx(
            0.5 * (1 - math.sin(4.0) / 4.0), abs=1e-5)

    def test_asymptote_reached_by_thousand(self):
        assert variance_time_avg(H(1e3), J) == pytest.approx(0.5946, abs=1e-2)

    def test_resonant_value_against_quadrature(self):
        h = H(0.0)
        ts = np.linspace(0.0, 1.0 / J, 10_001)
        quad = np.trapezoid(variance_instantaneous(ts, h), ts) * J
        closed = variance_time_avg(h, J)
        assert closed == pytest.approx(quad, rel=1e-6)
        assert closed == pytest.approx(8.5e-4, rel=0.03)

    def test_quadrature_agreement_across_sweep(self):
        for x in (0.1, 1.0, 2.43, 10.0, 100.0):
            h = H(x)
            ts = np.linspace(0.0, 1.0 / J, 20_001)
            quad = np.trapezoid(variance_instantaneous(ts, h), ts) * J
            assert variance_time_avg(h, J) == pytest.approx(quad, rel=1e-5)


class TestEntropy:
    def test_dispersive_asymptote(self):
        assert entropy_time_avg(H(1e6), J) == pytest.approx(0.4616, abs=1e-3)

    def test_asymptote_reached_by_thousand(self):
        assert entropy_time_avg(H(1e3), J) == pytest.approx(0.4616, abs=1e-2)

    def test_dual_path_evaluation(self):
        for x in (0.0, 1.7, 5.0, 40.0):
            h = H(x)
            ts = np.linspace(0.0, 1.0 / J, 20_001)
            quad = np.trapezoid(linear_entropy(ts, h), ts) * J
            assert entropy_time_avg(h, J) == pytest.approx(quad, rel=1e-5)


def test_reduced_density_matrix():
    h = H(2.0)
    rho = reduced_density_matrix(0.0, h)
    assert np.allclose(rho, np.diag([0.0, 1.0, 0.0]))
    for t in (170.0, 4111.0):
        rho = reduced_density_matrix(t, h)
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
        purity = np.trace(rho @ rho).real
        assert 1.0 - purity == pytest.approx(float(linear_entropy(t, h)), abs=1e-12)


def test_spectral_data_relations():
    h = H(2.5)
    s = DimerSpectralData.from_hamiltonian(h)
    d = h.a - h.c
    assert s.omega0 == pytest.approx(math.sqrt(8 * h.b**2 + d * d), rel=1e-14)
    assert s.lambda_plus - s.lambda_minus == pytest.approx(s.omega0, rel=1e-14)
    assert s.alpha_plus - s.alpha_minus == pytest.approx(s.omega0 / h.b, rel=1e-12)
