//! Numerical laboratory for determining functionals of dissipative
//! evolution equations: spectral Galerkin integrators, determining-mode
//! and nudging experiments, Takens delay embeddings with fitted
//! observation maps, inertial-style mode reduction, rank-one feedback
//! stabilization, and wave-equation separation checks.

pub mod control;
pub mod embedding;
pub mod error;
pub mod fitting;
pub mod functionals;
pub mod lab;
pub mod reduction;
pub mod spectral;
pub mod wave;

pub use control::{
    count_unstable, eigensolve, eigensolve_spectral, place_poles, verify_closed_loop,
    ClosedLoopReport, EigenDecomposition, FeedbackDesign, Potential, SturmSpec,
};
pub use embedding::{
    build_delay_vectors, delay_training_pairs, dimension_bounds, fit_theta,
    injectivity_diagnostic, predict_dde, required_k, theta_from_json, theta_to_json,
    DelayConfig, DelayVector, DimensionBounds, InjectivityReport, ThetaKind, ThetaModel,
};
pub use error::{Error, Result};
pub use fitting::{fit_decay, fit_decay_active, fit_decay_window, DecayFit, Verdict, GAP_FLOOR};
pub use functionals::{
    evaluate, max_gap, mode_threshold, monomial_count, monomial_exponents, node_bound,
    quadratic_oscillator_functional, sample_polynomial, FunctionalSpec,
};
pub use lab::{
    check_nudge_preconditions, linear_blind_orbit, nudge, oscillator_orbit,
    run_pair_experiment, separation_scan, takens_nudge, NudgeConfig, NudgeReport,
    ObservationWindow, PairExperimentReport, SeparationReport, ThetaNSource, R2_THRESHOLD,
};
pub use reduction::{
    reduced_dde_step, solve_phi, solve_phi_path, verify_phi_lipschitz, LowModeHistory,
    PhiResult,
};
pub use spectral::{
    dealias_points, integrate, integrate_scheme, make_operator, phi1, step, step_scheme,
    Basis, NonlinearitySpec, OperatorPreset, PointwiseKind, ProblemSpec, Scheme,
    SpectralField, Trajectory, DEFAULT_CONSTANT_MODE_SHIFT,
};
pub use wave::{
    generic_wave_functional, wave_separation_run, ModeCheck, WaveMode, WaveSeparationReport,
};
