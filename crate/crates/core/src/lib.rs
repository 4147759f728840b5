//! Desk-scale numerical laboratory for the fast diffusion equation
//! u_t = Laplacian(u^m) near extinction on bounded domains: stationary
//! Lane-Emden profiles, rescaled flows, relative-error convergence,
//! barrier supersolutions, entropy decay rates and the associated
//! spectral and functional inequalities.

pub mod barriers;
pub mod elliptic;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod spectral;

pub use barriers::{
    barrier_admissible, barrier_comparison_check, barrier_search, boundary_gradient_lower,
    cond1abc, f_barrier, global_harnack_envelope, h_eps_delta, ref_phi, rel_error_convergence,
    supersolution_residual, BarrierParams, ComparisonReport, ConvergencePoint, RefPhi,
};
pub use elliptic::{
    continuation_in_p, critical_exponent, critical_m, hardy_constant, lambda_bounds,
    quotient_envelope, scalar_inequality_check, small_set_comparison_check, sobolev_constant,
    solve_lane_emden, stationary_profile, LambdaBounds, LaneEmdenSolution, StationaryProfile,
};
pub use entropy::{
    entropy_and_dissipation, entropy_inequality_check, entropy_trace, f_big, f_nonlinearity,
    f_prime, f_second, fit_decay_rate, gamma0, gwpi_constant_empirical, k_paper,
    mean_minimality_gap, mean_ode_check, norm_decay_check, post_burnin_window, rel_error,
    EntropyTrace, MeanOdeReport, NormDecayReport, PoincareEstimate, RelError, Violation,
};
pub use error::{Error, Result};
pub use evolution::{
    extinction_bounds, rescale_run, rescale_trace, run_original, run_rescaled, separable_solution,
    step_implicit, unrescale_trace, DtPolicy, EvolutionConfig, EvolutionTrace, ExtinctionBounds,
    StepRecord, TimeEstimate,
};
pub use grid::{
    build_interval, build_radial_ball, distance_to_boundary, integrate, norm_lq,
    weighted_dirichlet_form, BoundaryExtension, Domain, DomainKind, Field,
};
pub use spectral::{
    assemble_laplacian, eigenpairs, intrinsic_poincare_residual, pencil_gap, spectral_gap_bounds,
    weighted_mean, DirichletOperator, EigenPair, GapBounds,
};
