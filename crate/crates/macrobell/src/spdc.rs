//! Spontaneous parametric down-conversion noise model.
//!
//! Each of `M` incident photons down-converts with probability `lambda`,
//! independently; each emitted photon then survives to its detector with
//! probability `gamma`. The number of pairs per trial is therefore random,
//! which acts as global classical noise: the classical ceiling rises to
//! `4 + O(M lambda^2 / N)` while the singlet strategy reaches
//! `2 gamma (4 sin^2(3 pi/8) - 1)` as `lambda -> 0`, crossing the ceiling at
//! `gamma ~ 0.828`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{estimate_from_groups, BellEstimate, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_rng, Domain};
use crate::strategies::{pair_index, StrategySpec, SETTING_PAIRS};

const SIN2_3PI8: f64 = 0.85355339059327376220; // sin^2(3 pi / 8) = 1/2 + sqrt(2)/4

/// Source and loss parameters of one SPDC configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdcParams {
    /// Incident photons per trial (M).
    pub m_incident: u64,
    /// Down-conversion probability per incident photon; expected << 1.
    pub lambda: f64,
    /// Survival probability of each emitted photon on its way to the
    /// detector, identical for both sides and all settings.
    pub gamma: f64,
    /// Microscopic model for the converted pairs that survive.
    pub strategy: StrategySpec,
}

impl SpdcParams {
    pub fn validate(&self) -> Result<()> {
        if self.m_incident == 0 {
            return Err(Error::invalid("m_incident must be >= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid(format!(
                "lambda must lie in [0, 1), got {}",
                self.lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        self.strategy.validate()
    }
}

/// One sampled SPDC trial, with the latent conversion count exposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcTrialSample {
    /// Number of down-conversion events (pairs produced).
    pub conversions: u64,
    pub a_total: f64,
    pub b_total: f64,
}

fn binomial<R: Rng>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p validated").sample(rng)
}

/// Sample one trial: conversion count, per-pair outcomes, then losses.
pub fn sample_spdc_trial_detailed<R: Rng>(
    params: &SpdcParams,
    x: u8,
    y: u8,
    rng: &mut R,
) -> SpdcTrialSample {
    let k = binomial(params.m_incident, params.lambda, rng);
    let [n11, n10, n01, _] = params.strategy.sample_joint_counts(k, x, y, rng);
    // each 1-outcome photon independently survives with probability gamma
    let a_total = binomial(n11 + n10, params.gamma, rng) as f64;
    let b_total = binomial(n11 + n01, params.gamma, rng) as f64;
    SpdcTrialSample { conversions: k, a_total, b_total }
}

/// Aggregate outcomes of one SPDC trial at settings (x, y).
pub fn sample_spdc_trial<R: Rng>(
    params: &SpdcParams,
    x: u8,
    y: u8,
    rng: &mut R,
) -> (f64, f64) {
    let t = sample_spdc_trial_detailed(params, x, y, rng);
    (t.a_total, t.b_total)
}

/// Empirical effective pair number `N = E[A0 + B0]`, estimated from the
/// (0,0) trials. With random conversion counts there is no configured N;
/// this is the normalization the ratio form of the Bell parameter uses.
pub fn effective_n(trials: &[TrialRecord]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0u64;
    for t in trials {
        if t.x == 0 && t.y == 0 {
            sum += t.a_total + t.b_total;
            count += 1;
        }
    }
    if count < 2 {
        return Err(Error::insufficient(format!(
            "effective N needs >= 2 trials at setting pair (x=0, y=0), have {count}"
        )));
    }
    Ok(sum / count as f64)
}

/// Classical SPDC ceiling, reported as the leading constant 4 and the scale
/// of the unspecified correction, `M lambda^2 / N`, separately. The hidden
/// constant in the correction is not asserted anywhere.
pub fn spdc_classical_bound(params: &SpdcParams, n_effective: f64) -> Result<(f64, f64)> {
    if !(n_effective > 0.0) {
        return Err(Error::invalid(format!(
            "n_effective must be positive, got {n_effective}"
        )));
    }
    let correction_scale = params.m_incident as f64 * params.lambda * params.lambda / n_effective;
    Ok((4.0, correction_scale))
}

/// Leading-order quantum value of the SPDC Bell parameter as `lambda -> 0`:
/// `2 gamma (4 sin^2(3 pi/8) - 1)`.
pub fn spdc_quantum_value(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(2.0 * gamma * (4.0 * SIN2_3PI8 - 1.0))
}

/// Survival probability at which the quantum value meets the classical
/// ceiling 4: `2 / (4 sin^2(3 pi/8) - 1) = 2 (sqrt 2 - 1) ~ 0.828`.
pub fn gamma_threshold() -> f64 {
    2.0 / (4.0 * SIN2_3PI8 - 1.0)
}

/// Generate SPDC trials for all four setting pairs; deterministic for a
/// fixed master seed regardless of thread count.
pub fn generate_spdc_trials(
    params: &SpdcParams,
    trials_per_setting: u64,
    master_seed: u64,
) -> Result<Vec<TrialRecord>> {
    params.validate()?;
    if trials_per_setting == 0 {
        return Err(Error::invalid("trials_per_setting must be >= 1"));
    }
    let total = trials_per_setting * 4;
    const CHUNK: u64 = 4096;
    let n_chunks = (total + CHUNK - 1) / CHUNK;
    let chunks: Vec<Vec<TrialRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(total);
            (lo..hi)
                .map(|trial_idx| {
                    let (x, y) = SETTING_PAIRS[(trial_idx / trials_per_setting) as usize];
                    let mut rng = derive_rng(master_seed, Domain::Trials, trial_idx);
                    let (a_total, b_total) = sample_spdc_trial(params, x, y, &mut rng);
                    TrialRecord { x, y, a_total, b_total }
                })
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Run the SPDC experiment and estimate the Bell parameter, normalized by
/// the empirical effective N rather than any configured pair count.
pub fn estimate_spdc_bell(
    params: &SpdcParams,
    trials_per_setting: u64,
    master_seed: u64,
) -> Result<BellEstimate> {
    if trials_per_setting < 100 {
        return Err(Error::invalid(format!(
            "SPDC estimation needs >= 100 trials per setting, got {trials_per_setting}"
        )));
    }
    let trials = generate_spdc_trials(params, trials_per_setting, master_seed)?;
    let n_eff = effective_n(&trials)?;
    if !(n_eff > 0.0) {
        return Err(Error::insufficient(format!(
            "effective N is {n_eff}; the source produced no detected photons"
        )));
    }
    let mut groups: [Vec<(f64, f64)>; 4] = Default::default();
    for t in &trials {
        groups[pair_index(t.x, t.y)].push((t.a_total, t.b_total));
    }
    estimate_from_groups(groups, n_eff, master_seed)
}
