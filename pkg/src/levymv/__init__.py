"""levymv: particle and spectral solvers for measure-dependent SDEs
driven by alpha-stable Levy noise."""

from .coefficients import (CauchyKernel, Constant, LinearInteraction, SineKernel,
                           SmoothedDensityPower, evaluate, evaluate_on_density,
                           lipschitz_probe)
from .drivers import (IncrementRecord, JumpAtoms, JumpDensity, LevyTripletSpec,
                      StableDriverSpec, cf_constant_from_levy_constant,
                      levy_constant_from_cf_constant, sample_stable_increment,
                      sample_triplet_increment, truncate_increments,
                      truncated_stable_triplet)
from .fokker_planck import (AdjointReport, DensityGrid, FractionalParams, FpResult,
                            StabilityError, adjoint_identity_check, bump,
                            fractional_laplacian, gaussian_grid, solve_fp,
                            solve_linear_exact, stable_heat_kernel_grid, step_fp)
from .measures import (EmpiricalMeasure, GapEstimate, MetricReport,
                       check_empirical_distance_bound, empirical_gap_experiment,
                       metric_report, second_moment, smoothed_density,
                       truncated_wasserstein2_upper, wasserstein2)
from .particles import (ChaosRateTable, CouplingResult, FileLaw, GaussianLaw,
                        MarginalFlow, ParticleState, PicardResult, PointMass,
                        SimulationConfig, SimulationError, UniformLaw,
                        chaos_rate_experiment, picard_flow, simulate,
                        simulate_coupled, step_frozen_flow, step_interacting)
from .perturbation import (H1Report, PerturbationParams, perturbation_profile,
                           perturbation_profile_deriv, verify_h1)
from .rng import substream

__version__ = "0.1.0"
