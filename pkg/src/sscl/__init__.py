"""Pathwise entropy solutions of scalar conservation laws with
Brownian-modulated fluxes on the torus, and the analysis around them:
dissipation ledgers, spectral decompositions, decay-rate and regularity
studies."""

from .errors import NumericalFailure
from .flux import (FluxSpec, NonlinearityReport, PolyFlux, burgers,
                   check_growth, custom_poly, diagonal_power, estimate_theta,
                   measure_level_set_deterministic,
                   measure_level_set_stochastic, power_law)
from .fv import (DissipationSample, Field, cell_centers,
                 engquist_osher_flux, exact_riemann_burgers,
                 exact_riemann_burgers_periodic, godunov_flux,
                 strang_split_2d, sweep_1d)
from .kinetic import (KineticLedger, chi, chi_bin_averages, chi_field,
                      energy_balance_defect, make_ledger)
from .montecarlo import (EnsembleTrace, RateFit, fit_rate, regularity_study,
                         run_ensemble)
from .paths import (DrivingPath, dump_path_csv, identity_path, load_path_csv,
                    refine, sample_brownian, segments)
from .pathwise import (RecordOptions, SolveRecord, solve,
                       solve_deterministic, solve_with_source)
from .spectral import (RegularizerSpec, ScalingResult, SpectralField,
                       h_lambda_norm, u0_component, u0_energy_scaling,
                       u1_component, verify_lemma_b, verify_split,
                       w_lambda_1_norm)

__version__ = "0.1.0"
