"""jchsim: quench dynamics of finite Jaynes-Cummings-Hubbard lattices."""

__version__ = "0.1.0"

from .lattice import LatticeGraph, chain, coupling_parameter
from .polariton import (JCParams, PolaritonCoeffs, RwaReport, chi, coefficients,
                        hopping_element, mixing_angle, polariton_energy,
                        rwa_report)
from .fockspace import (BasisSizeError, ProductBasis, SiteSpace, build_basis,
                        ancilla_site_hamiltonian, jch_hamiltonian,
                        site_operator, total_excitations)
from .effective import (EffectiveDimerHamiltonian, LowerBranchBasis,
                        dimer_effective, lower_branch_basis,
                        polariton_hamiltonian)
from .analytic_dimer import (DimerSpectralData, amplitudes, entropy_time_avg,
                             linear_entropy, reduced_density_matrix,
                             variance_time_avg)
from .dynamics import (DensityTrajectory, GaussianPulse, InitProtocol,
                       LindbladRates, PropagationError, QuenchConfig,
                       QuenchResult, StateTrajectory, evolve_closed,
                       evolve_lindblad, initialize_with_ancilla,
                       mott_initial_state, quench)
from .observables import (TimeSeries, dimer_labels, labeled_populations,
                          linear_entropy_time_avg, polariton_number_series,
                          trimer_labels, two_point_correlation,
                          variance_time_avg_numeric)
from .driver import (ConfigError, ResonanceReport, SweepConfig, SweepResult,
                     detect_resonances, run_cli, sweep)
