//! Simulation toolkit for the nonlinear macroscopic Bell inequality.
//!
//! The library simulates microscopic classical and quantum measurement
//! strategies, aggregates them into macroscopic count variables, and
//! estimates the covariance Bell parameter
//! `B = (4/N) [cov(A0,B0) + cov(A0,B1) + cov(A1,B0) - cov(A1,B1)]`,
//! together with its analytic classical ceiling `16/7 + 16e + 32 sqrt(e)`
//! and the singlet value `2 sqrt(2) - 16e - 32 sqrt(e)` under
//! bounded-variance noise. Side quests: the photonic SPDC loss model and
//! its gamma ~ 0.828 violation threshold, the multiplayer count-based CHSH
//! game with its Gaussian-tail score bounds, and the two-Posner-molecule
//! binding test.
//!
//! All sampling is driven by a single 64-bit master seed through
//! counter-based stream splitting, so results are reproducible bit-for-bit
//! at any thread count. See the `macrobell` binary for the batch CLI.

pub mod bell;
pub mod config;
pub mod error;
pub mod game;
pub mod posner;
pub mod quad;
pub mod report;
pub mod rng;
pub mod spdc;
pub mod special;
pub mod stats;
pub mod strategies;

pub use bell::{
    bell_parameter, classical_bound, estimate_bell, generate_trials, inject_noise,
    quantum_lower_bound, run_bell_experiment, traditional_bell_parameter, BellEstimate, NoiseMode,
    NoiseSpec, TrialRecord,
};
pub use error::{Error, Result};
pub use game::{
    classical_score_bound, gaussian_tail_probability, maximize_tail_probability, play_game,
    quantum_game_score, score_transcript, GameRound, GameTranscript, GaussianTailQuery,
    ScoreReport, TailMaximum,
};
pub use posner::{
    binding_probability, brute_force_even_parity, even_binding_curve, posner_game_win_probability,
    six_singlets_state, tau_rotation, tau_sector_distribution, BindingParity, Posner,
    PosnerPairState, TauSectorDistribution,
};
pub use spdc::{
    effective_n, estimate_spdc_bell, gamma_threshold, sample_spdc_trial, spdc_classical_bound,
    spdc_quantum_value, SpdcParams,
};
pub use stats::{covariance, CovarianceAccumulator};
pub use strategies::{
    chsh_win_probability, micro_correlator, micro_covariance_combination, sample_macroscopic,
    singlet_even_probability, JointOutcomeDistribution, ResponseTable, StrategySpec, WeightedTable,
};
