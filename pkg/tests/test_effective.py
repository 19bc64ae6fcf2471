import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jchsim.effective import (EffectiveDimerHamiltonian, dimer_effective,
                              dimer_hopping_product, lower_branch_basis,
                              mott_index, polariton_hamiltonian)
from jchsim.fockspace import build_basis, jch_hamiltonian
from jchsim.lattice import chain
from jchsim.polariton import JCParams, hopping_element
from jchsim.dynamics import QuenchConfig, evolve_closed, quench
from jchsim.observables import labeled_populations, dimer_labels


def test_dimension_examples():
    assert lower_branch_basis(3, 3).dim == 10
    b = lower_branch_basis(2, 2)
    assert b.dim == 3
    assert b.tuples == ((0, 2), (1, 1), (2, 0))
    assert lower_branch_basis(4, 4).dim == 35


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=6))
def test_dimension_formula(L, N):
    b = lower_branch_basis(L, N)
    assert b.dim == math.comb(N + L - 1, L - 1)
    assert len(set(b.tuples)) == b.dim
    assert list(b.tuples) == sorted(b.tuples)
    assert all(sum(t) == N for t in b.tuples)


def test_dimer_matrix_matches_general_builder():
    p = JCParams(omega=1.0, g=0.01, delta=0.023)
    J = 1e-4
    basis = lower_branch_basis(2, 2)
    H = polariton_hamiltonian(chain(2), p, J, basis, warn=False)
    h = dimer_effective(p, J)
    # general builder orders tuples lexicographically; the 3x3 model uses
    # (|11>, |20>, |02>)
    perm = [basis.index((1, 1)), basis.index((2, 0)), basis.index((0, 2))]
    assert np.abs(H[np.ix_(perm, perm)] - h.matrix).max() <= 1e-12


def test_zero_hopping_is_diagonal():
    p = JCParams(omega=1.0, g=0.01, delta=0.04)
    basis = lower_branch_basis(3, 3)
    H = polariton_hamiltonian(chain(3), p, 0.0, basis, warn=False)
    assert np.abs(H - np.diag(np.diag(H))).max() == 0.0


def test_trimer_spectrum_against_full_space():
    # compare all 10 effective levels with the full three-excitation sector
    g, J = 1e-2, 1e-4
    p = JCParams.from_delta_over_g(50.0, g)
    basis = lower_branch_basis(3, 3)
    H_eff = polariton_hamiltonian(chain(3), p, J, basis, warn=False)
    vals_eff, vecs_eff = np.linalg.eigh(H_eff)

    fb = build_basis(chain(3), 5)
    Hf = jch_hamiltonian(chain(3), p, J, fb).toarray()
    sector = np.where(np.rint(fb.total_excitation_diagonal()) == 3)[0]
    Hs = Hf[np.ix_(sector, sector)]
    vals_full, vecs_full = np.linalg.eigh(Hs)

    lift = np.zeros((len(sector), basis.dim))
    for k, occ in enumerate(basis.tuples):
        vec = fb.product_state([fb.dressed_site_vector(p, n, "-") for n in occ])
        lift[:, k] = vec[sector]
    for m in range(basis.dim):
        overlaps = np.abs(vecs_full.conj().T @ (lift @ vecs_eff[:, m]))
        best = int(np.argmax(overlaps))
        assert abs(vals_full[best] - vals_eff[m]) <= 10 * J


def test_dimer_effective_values():
    g, J = 1e-2, 1e-4
    p = JCParams(omega=1.0, g=g, delta=0.0)
    h = dimer_effective(p, J)
    # pair state sits above two singles at resonance: c - a = (2 - sqrt(2)) g
    assert h.c - h.a == pytest.approx((2 - math.sqrt(2)) * g, rel=1e-12)
    assert h.b == pytest.approx(-0.8535533905932737 * J, rel=1e-12)
    disp = dimer_effective(JCParams.from_delta_over_g(1e6, g), J)
    assert abs(disp.a - disp.c) <= 1e-8 * g
    assert abs(disp.b) == pytest.approx(math.sqrt(2) * J, rel=1e-6)
    assert dimer_effective(p, 0.0).b == 0.0


def test_hopping_product_cross_check():
    for x in (0.0, 1.3, 7.7, 123.0):
        p = JCParams.from_delta_over_g(x, 0.01)
        via_elements = (hopping_element(1, "-", "-", p)
                        * hopping_element(2, "-", "-", p))
        assert via_elements == pytest.approx(dimer_hopping_product(p), abs=1e-14)


def test_matrix_is_symmetric():
    h = EffectiveDimerHamiltonian(a=2.0, b=-0.3, c=1.9)
    assert np.allclose(h.matrix, h.matrix.T)


def test_mott_index():
    basis = lower_branch_basis(3, 3)
    assert basis.tuples[mott_index(basis)] == (1, 1, 1)
    with pytest.raises(ValueError):
        mott_index(lower_branch_basis(3, 2))


def test_trimer_mirror_symmetry_of_amplitudes():
    # chain reflection keeps |amplitude| equal for mirrored occupation tuples
    p = JCParams.from_delta_over_g(3.0, 1e-2)
    J = 1e-4
    basis = lower_branch_basis(3, 3)
    H = polariton_hamiltonian(chain(3), p, J, basis, warn=False)
    psi0 = np.zeros(basis.dim)
    psi0[mott_index(basis)] = 1.0
    t_grid = np.linspace(0.0, 1.0 / J, 500)
    states = evolve_closed(H, psi0, t_grid)
    for k, occ in enumerate(basis.tuples):
        m = basis.index(occ[::-1])
        assert np.abs(np.abs(states[:, k]) - np.abs(states[:, m])).max() <= 1e-8


def test_upper_branch_leakage_suppressed_when_gaps_pass():
    # full dimer propagation at delta = 5 g: all upper-branch populations stay tiny
    p = JCParams.from_delta_over_g(5.0, 1e-2)
    cfg = QuenchConfig(chain(2), p, 1e-4, n_max=5)
    res = quench(cfg)
    pops = labeled_populations(res.trajectory, p, dimer_labels())
    total = 0.0
    for name in ("P1p_i", "P1p_j", "P1p_ij", "P2p_i", "P2p_j"):
        total += pops[name].time_average()
    assert total < 0.05
