//! Experiment configuration: TOML file with one top-level table per
//! subcommand, merged with command-line overrides (flags win over file
//! values, file values win over defaults).

use serde::{Deserialize, Serialize};

use crate::bell::{NoiseMode, NoiseSpec};
use crate::error::{Error, Result};
use crate::strategies::{ResponseTable, StrategySpec};

fn default_seed() -> u64 {
    0x6d61_6372_6f62_656c // "macrobel"
}

/// Full configuration file. Only the table for the invoked subcommand is
/// consulted; unrelated tables may be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every random stream in a run derives from it.
    pub seed: Option<u64>,
    pub bell: Option<BellConfig>,
    pub spdc: Option<SpdcConfig>,
    pub game: Option<GameConfig>,
    pub posner: Option<PosnerConfig>,
    pub tails: Option<TailsConfig>,
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config parse error: {e}")))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(default_seed)
    }
}

/// Named strategy shorthand accepted on the command line; the config file
/// can spell out arbitrary strategies instead.
pub fn strategy_preset(name: &str) -> Result<StrategySpec> {
    match name {
        "quantum" | "chsh" | "quantum-chsh" => Ok(StrategySpec::chsh_singlet()),
        "ones" => Ok(StrategySpec::Deterministic { table: ResponseTable::ALL_ONES }),
        "zeros" => Ok(StrategySpec::Deterministic { table: ResponseTable::ALL_ZEROS }),
        "coin" | "global-coin" => Ok(StrategySpec::GlobalCoin {
            heads: ResponseTable::ALL_ONES,
            tails: ResponseTable::ALL_ZEROS,
        }),
        "mixture" | "ones-zeros-mixture" => Ok(StrategySpec::fair_local_mixture(
            ResponseTable::ALL_ONES,
            ResponseTable::ALL_ZEROS,
        )),
        other => Err(Error::invalid(format!(
            "unknown strategy preset '{other}' (expected quantum|ones|zeros|coin|mixture)"
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellConfig {
    #[serde(default = "StrategySpec::chsh_singlet")]
    pub strategy: StrategySpec,
    #[serde(default = "BellConfig::default_n_pairs")]
    pub n_pairs: u64,
    #[serde(default = "BellConfig::default_trials")]
    pub trials_per_setting: u64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "BellConfig::default_noise_mode")]
    pub noise_mode: NoiseMode,
}

impl BellConfig {
    fn default_n_pairs() -> u64 {
        100
    }
    fn default_trials() -> u64 {
        100_000
    }
    fn default_noise_mode() -> NoiseMode {
        NoiseMode::Independent
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec { epsilon: self.epsilon, mode: self.noise_mode }
    }

    pub fn validate(&self) -> Result<()> {
        self.strategy.validate().map_err(|e| field_err("bell.strategy", e))?;
        if self.n_pairs == 0 {
            return Err(Error::invalid("bell.n_pairs: must be >= 1"));
        }
        if self.trials_per_setting < 2 {
            return Err(Error::invalid("bell.trials_per_setting: must be >= 2"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid(format!(
                "bell.epsilon: must be >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for BellConfig {
    fn default() -> Self {
        BellConfig {
            strategy: StrategySpec::chsh_singlet(),
            n_pairs: Self::default_n_pairs(),
            trials_per_setting: Self::default_trials(),
            epsilon: 0.0,
            noise_mode: Self::default_noise_mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdcConfig {
    #[serde(default = "SpdcConfig::default_m")]
    pub m_incident: u64,
    #[serde(default = "SpdcConfig::default_lambda")]
    pub lambda: f64,
    #[serde(default = "SpdcConfig::default_gamma")]
    pub gamma: f64,
    #[serde(default = "SpdcConfig::default_trials")]
    pub trials_per_setting: u64,
    #[serde(default = "StrategySpec::chsh_singlet")]
    pub strategy: StrategySpec,
}

impl SpdcConfig {
    fn default_m() -> u64 {
        1_000_000
    }
    fn default_lambda() -> f64 {
        1e-3
    }
    fn default_gamma() -> f64 {
        1.0
    }
    fn default_trials() -> u64 {
        20_000
    }

    pub fn params(&self) -> crate::spdc::SpdcParams {
        crate::spdc::SpdcParams {
            m_incident: self.m_incident,
            lambda: self.lambda,
            gamma: self.gamma,
            strategy: self.strategy.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate().map_err(|e| field_err("spdc", e))?;
        if self.trials_per_setting < 100 {
            return Err(Error::invalid(
                "spdc.trials_per_setting: must be >= 100".to_string(),
            ));
        }
        Ok(())
    }
}

impl Default for SpdcConfig {
    fn default() -> Self {
        SpdcConfig {
            m_incident: Self::default_m(),
            lambda: Self::default_lambda(),
            gamma: Self::default_gamma(),
            trials_per_setting: Self::default_trials(),
            strategy: StrategySpec::chsh_singlet(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(default = "GameConfig::default_players")]
    pub n_players: u64,
    #[serde(default = "GameConfig::default_rounds")]
    pub rounds: u64,
    #[serde(default = "StrategySpec::chsh_singlet")]
    pub strategy: StrategySpec,
}

impl GameConfig {
    fn default_players() -> u64 {
        10_000
    }
    fn default_rounds() -> u64 {
        100_000
    }

    pub fn validate(&self) -> Result<()> {
        self.strategy.validate().map_err(|e| field_err("game.strategy", e))?;
        if self.n_players == 0 {
            return Err(Error::invalid("game.n_players: must be >= 1"));
        }
        if self.rounds < 4 {
            return Err(Error::invalid("game.rounds: must be >= 4"));
        }
        Ok(())
    }
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            n_players: Self::default_players(),
            rounds: Self::default_rounds(),
            strategy: StrategySpec::chsh_singlet(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosnerConfig {
    /// Rotation-angle grid for the binding curve (radians).
    #[serde(default = "PosnerConfig::default_start")]
    pub theta_start: f64,
    #[serde(default = "PosnerConfig::default_stop")]
    pub theta_stop: f64,
    #[serde(default = "PosnerConfig::default_steps")]
    pub theta_steps: usize,
}

impl PosnerConfig {
    fn default_start() -> f64 {
        -std::f64::consts::PI
    }
    fn default_stop() -> f64 {
        std::f64::consts::PI
    }
    fn default_steps() -> usize {
        65
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.theta_start, self.theta_stop, self.theta_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_steps == 0 {
            return Err(Error::invalid("posner.theta_steps: must be >= 1"));
        }
        if !self.theta_start.is_finite() || !self.theta_stop.is_finite() {
            return Err(Error::invalid("posner.theta_start/theta_stop: must be finite"));
        }
        Ok(())
    }
}

impl Default for PosnerConfig {
    fn default() -> Self {
        PosnerConfig {
            theta_start: Self::default_start(),
            theta_stop: Self::default_stop(),
            theta_steps: Self::default_steps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsConfig {
    /// Variance cap, in absolute units (the classical game caps are N/4).
    #[serde(default = "TailsConfig::default_var_cap")]
    pub var_cap: f64,
    /// Covariance cap (the classical game cap is N/7).
    #[serde(default = "TailsConfig::default_cov_cap")]
    pub cov_cap: f64,
    /// Threshold scale N; deviations of sqrt(N) are required.
    #[serde(default = "TailsConfig::default_n")]
    pub n: f64,
}

impl TailsConfig {
    fn default_var_cap() -> f64 {
        0.25
    }
    fn default_cov_cap() -> f64 {
        1.0 / 7.0
    }
    fn default_n() -> f64 {
        1.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.var_cap > 0.0) {
            return Err(Error::invalid("tails.var_cap: must be > 0"));
        }
        if !(self.cov_cap > 0.0) {
            return Err(Error::invalid("tails.cov_cap: must be > 0"));
        }
        if !(self.n > 0.0) {
            return Err(Error::invalid("tails.n: must be > 0"));
        }
        Ok(())
    }
}

impl Default for TailsConfig {
    fn default() -> Self {
        TailsConfig {
            var_cap: Self::default_var_cap(),
            cov_cap: Self::default_cov_cap(),
            n: Self::default_n(),
        }
    }
}

/// Which single parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// SPDC survival probability gamma; base parameters from `[spdc]`.
    SpdcGamma,
    /// Noise scale epsilon on the Bell experiment; base from `[bell]`.
    BellEpsilon,
    /// Posner rotation angle theta for the binding curve.
    PosnerTheta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        grid(self.start, self.stop, self.steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("sweep.steps: must be >= 1"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::invalid("sweep.start/stop: must be finite"));
        }
        Ok(())
    }
}

fn grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![start];
    }
    (0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn field_err(field: &str, e: Error) -> Error {
    Error::invalid(format!("{field}: {e}"))
}
