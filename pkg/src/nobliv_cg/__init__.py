"""Variance-reduced conditional-gradient methods for non-oblivious stochastic objectives."""
from .estimators import (ExactSecondOrder, FiniteDifference, GradientEstimate, HvpMethod,
                         PathBatch, PathSample, anchor_gradient, default_delta, delta_exact,
                         delta_is_small, hessian_estimate, hvp_fd, path_delta,
                         sample_path_batch, update_gradient_estimate, xi_delta)
from .exceptions import (ConfigError, DimensionMismatchError, EmptyBatchError,
                         InfeasibleShrinkError, InvalidParameterError, InvalidProfileError,
                         InvariantViolation, SizeLimitError, UnsupportedOperationError)
from .lmo import (Box, CardinalityPolytope, FeasibleRegion, PartitionMatroidPolytope,
                  ScaledSimplex, contains, diameter, lmo, region_from_dict, shrink)
from .problems import (GaussianFamily, NonObliviousObjective, ObliviousQuadratic,
                       SinusoidFamily, SmoothnessProfile, StochasticSample, check_dr_submodular,
                       gaussian_profile, lbar, make_concave_quadratic, make_gaussian_family,
                       mc_value, quadratic_profile, sinusoid_profile)
from .solvers import (MomentumSCG, RunTrace, SCGPlusPlus, SFWPlusPlus, SMCGPlusPlus,
                      SolverSchedule, VanillaSFW, baseline_scg_momentum, baseline_sfw_vanilla,
                      fw_gap, schedule_from_epsilon, schedule_multilinear, scg_pp, sfw_convex,
                      sfw_nonconvex, smcg_pp)
from .submodular import (Cardinality, DirectedCut, FacilityLocation, Modular, MultilinearObjective,
                         Partition, StochasticSetFunction, WeightedCoverage, as_non_oblivious,
                         brute_force_opt, multilinear_anchor_gradient, multilinear_delta_estimate,
                         multilinear_grad_exact, multilinear_hessian_entry_exact,
                         multilinear_value_exact, round_solution)

__version__ = "0.1.0"
