//! The macroscopic Bell parameter: estimation, analytic bounds, and the
//! bounded-variance noise model.
//!
//! The central quantity is
//! `B = (4/N) [cov(A0,B0) + cov(A0,B1) + cov(A1,B0) - cov(A1,B1)]`
//! over aggregate outcomes of N particle pairs. Classically (with
//! independent pairs) `B <= 16/7 + 16 eps + 32 sqrt(eps)` when additive
//! errors have variance at most `eps N`; a product of singlets reaches
//! `2 sqrt(2) - 16 eps - 32 sqrt(eps)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, Domain};
use crate::stats::{mean_and_sample_std, CovarianceAccumulator};
use crate::strategies::{pair_index, sample_macroscopic, StrategySpec, SETTING_PAIRS};

/// One Bell-test trial: which settings were used and the two aggregate
/// outcomes (counts of 1s, possibly shifted by noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub x: u8,
    pub y: u8,
    pub a_total: f64,
    pub b_total: f64,
}

/// How the additive error of a trial is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// r_A and r_B are independent draws.
    Independent,
    /// One draw per trial is shared by every macroscopic variable of that
    /// trial, the mechanism behind classical violations via global
    /// randomness.
    CommonMode,
}

/// Bounded-variance error model: zero-mean Gaussian noise with variance
/// exactly `epsilon * N`, exercising the variance cap at its edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec { epsilon: 0.0, mode: NoiseMode::Independent }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid(format!(
                "noise epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn sigma(&self, n_pairs: u64) -> f64 {
        (self.epsilon * n_pairs as f64).sqrt()
    }
}

/// Add one zero-mean Gaussian error draw of variance `epsilon * N` to an
/// ideal aggregate outcome. Negative results are allowed; the values are
/// abstract detector readings.
pub fn inject_noise<R: Rng>(a_ideal: f64, spec: &NoiseSpec, n_pairs: u64, rng: &mut R) -> f64 {
    let sigma = spec.sigma(n_pairs);
    if sigma == 0.0 {
        return a_ideal;
    }
    let z: f64 = rng.sample(StandardNormal);
    a_ideal + sigma * z
}

/// The estimated macroscopic Bell parameter and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    /// Estimated Bell parameter (4/N times the covariance combination).
    pub b_hat: f64,
    /// Bootstrap standard error of `b_hat`.
    pub std_err: f64,
    /// Normalization constant N. Exact configured pair count for fixed-N
    /// sources; the empirical E[A0 + B0] for SPDC sources.
    pub n_pairs: f64,
    /// Sample covariances in setting order (00, 01, 10, 11).
    pub covariances: [f64; 4],
    /// Trials observed per setting pair, same order.
    pub trials_per_setting: [u64; 4],
}

impl BellEstimate {
    /// Reassemble `b_hat` from the stored covariances and N; the stored
    /// value must equal this exactly.
    pub fn recompute_b_hat(&self) -> f64 {
        bell_combination(self.covariances) * 4.0 / self.n_pairs
    }
}

fn bell_combination(c: [f64; 4]) -> f64 {
    c[0] + c[1] + c[2] - c[3]
}

/// The macroscopic Bell parameter from four covariances:
/// `(4/N) [cov00 + cov01 + cov10 - cov11]`.
pub fn bell_parameter(cov00: f64, cov01: f64, cov10: f64, cov11: f64, n_pairs: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be >= 1"));
    }
    Ok(4.0 / n_pairs as f64 * bell_combination([cov00, cov01, cov10, cov11]))
}

/// The traditional (linear) Bell parameter
/// `E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]`, where the joint means are
/// taken over +-1-valued outcomes (a' = 2(a - 1/2)).
pub fn traditional_bell_parameter(joint_means: [f64; 4]) -> f64 {
    bell_combination(joint_means)
}

/// Classical ceiling under the bounded-variance error model:
/// `16/7 + 16 eps + 32 sqrt(eps)`.
pub fn classical_bound(epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(16.0 / 7.0 + 16.0 * epsilon + 32.0 * epsilon.sqrt())
}

/// Guaranteed singlet-strategy value under the same error model:
/// `2 sqrt(2) - 16 eps - 32 sqrt(eps)`.
pub fn quantum_lower_bound(epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(2.0 * std::f64::consts::SQRT_2 - 16.0 * epsilon - 32.0 * epsilon.sqrt())
}

/// Number of bootstrap resamples used for the standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Estimate the Bell parameter from recorded trials.
///
/// Trials are grouped by setting pair; each group contributes one sample
/// covariance. The standard error comes from a stratified nonparametric
/// bootstrap (resampling trials with replacement within each group,
/// [`BOOTSTRAP_RESAMPLES`] replicates), seeded from `bootstrap_seed`. The
/// result is deterministic given the trial order and the seed.
pub fn estimate_bell(trials: &[TrialRecord], n_pairs: u64, bootstrap_seed: u64) -> Result<BellEstimate> {
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be >= 1"));
    }
    estimate_from_groups(group_trials(trials)?, n_pairs as f64, bootstrap_seed)
}

/// Group (a_total, b_total) observations by setting pair, preserving order.
pub(crate) fn group_trials(trials: &[TrialRecord]) -> Result<[Vec<(f64, f64)>; 4]> {
    let mut groups: [Vec<(f64, f64)>; 4] = Default::default();
    for t in trials {
        groups[pair_index(t.x, t.y)].push((t.a_total, t.b_total));
    }
    for (idx, (x, y)) in SETTING_PAIRS.iter().enumerate() {
        if groups[idx].len() < 2 {
            return Err(Error::insufficient(format!(
                "setting pair (x={x}, y={y}) has {} trials; need at least 2",
                groups[idx].len()
            )));
        }
    }
    Ok(groups)
}

pub(crate) fn estimate_from_groups(
    groups: [Vec<(f64, f64)>; 4],
    n_norm: f64,
    bootstrap_seed: u64,
) -> Result<BellEstimate> {
    let mut covariances = [0.0f64; 4];
    let mut trials_per_setting = [0u64; 4];
    for idx in 0..4 {
        let mut acc = CovarianceAccumulator::new();
        for &(a, b) in &groups[idx] {
            acc.push(a, b);
        }
        covariances[idx] = acc.sample_covariance()?;
        trials_per_setting[idx] = acc.count();
    }
    let b_hat = bell_combination(covariances) * 4.0 / n_norm;

    // stratified bootstrap over trials; one derived stream per replicate
    let replicates: Vec<f64> = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = derive_rng(bootstrap_seed, Domain::Bootstrap, rep);
            let mut combo = 0.0;
            for (idx, group) in groups.iter().enumerate() {
                let mut acc = CovarianceAccumulator::new();
                let m = group.len();
                for _ in 0..m {
                    let (a, b) = group[rng.gen_range(0..m)];
                    acc.push(a, b);
                }
                let c = acc.sample_covariance().expect("resample size >= 2");
                combo += if idx == 3 { -c } else { c };
            }
            combo * 4.0 / n_norm
        })
        .collect();
    let (_, std_err) = mean_and_sample_std(&replicates);

    Ok(BellEstimate { b_hat, std_err, n_pairs: n_norm, covariances, trials_per_setting })
}

/// Fixed chunk size for parallel trial generation. Accumulation happens
/// per chunk and chunks merge in index order, so results do not depend on
/// the worker count.
const TRIAL_CHUNK: u64 = 4096;

/// Run a full Bell experiment: `trials_per_setting` trials for each of the
/// four setting pairs, with optional bounded-variance noise.
///
/// Each trial draws its own random stream from `(master_seed, trial index)`,
/// so the output is reproducible bit-for-bit for a fixed seed regardless of
/// how many threads generate it.
pub fn generate_trials(
    spec: &StrategySpec,
    n_pairs: u64,
    trials_per_setting: u64,
    noise: &NoiseSpec,
    master_seed: u64,
) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    noise.validate()?;
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be >= 1"));
    }
    if trials_per_setting == 0 {
        return Err(Error::invalid("trials_per_setting must be >= 1"));
    }
    let total = trials_per_setting * 4;
    let n_chunks = (total + TRIAL_CHUNK - 1) / TRIAL_CHUNK;
    let chunks: Vec<Vec<TrialRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(total);
            (lo..hi)
                .map(|trial_idx| {
                    let (x, y) = SETTING_PAIRS[(trial_idx / trials_per_setting) as usize];
                    let mut rng = derive_rng(master_seed, Domain::Trials, trial_idx);
                    let (a_ideal, b_ideal) = sample_macroscopic(spec, n_pairs, x, y, &mut rng);
                    let (a_total, b_total) = match noise.mode {
                        NoiseMode::Independent => (
                            inject_noise(a_ideal, noise, n_pairs, &mut rng),
                            inject_noise(b_ideal, noise, n_pairs, &mut rng),
                        ),
                        NoiseMode::CommonMode => {
                            let sigma = noise.sigma(n_pairs);
                            if sigma == 0.0 {
                                (a_ideal, b_ideal)
                            } else {
                                let r: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                                (a_ideal + r, b_ideal + r)
                            }
                        }
                    };
                    TrialRecord { x, y, a_total, b_total }
                })
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Convenience wrapper: generate trials and estimate in one call, using the
/// master seed for both trial generation and the bootstrap.
pub fn run_bell_experiment(
    spec: &StrategySpec,
    n_pairs: u64,
    trials_per_setting: u64,
    noise: &NoiseSpec,
    master_seed: u64,
) -> Result<BellEstimate> {
    let trials = generate_trials(spec, n_pairs, trials_per_setting, noise, master_seed)?;
    estimate_bell(&trials, n_pairs, master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::ResponseTable;

    #[test]
    fn bell_parameter_anchors() {
        // all four covariances at N/(4 sqrt 2), the last entering negated
        let n = 320u64;
        let c = n as f64 / (4.0 * std::f64::consts::SQRT_2);
        let b = bell_parameter(c, c, c, -c, n).unwrap();
        assert!((b - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);

        assert_eq!(bell_parameter(0.0, 0.0, 0.0, 0.0, 5).unwrap(), 0.0);

        // global-coin covariances N^2/4 give exactly 2N
        let n = 100u64;
        let q = (n as f64) * (n as f64) / 4.0;
        let b = bell_parameter(q, q, q, -q, n).unwrap();
        assert!((b - 2.0 * n as f64).abs() < 1e-12);

        assert!(bell_parameter(0.0, 0.0, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn traditional_parameter_anchors() {
        // all-zeros deterministic strategy on the +-1 convention:
        // a' = b' = -1 always, products +1, sum 1 + 1 + 1 - 1 = 2
        assert_eq!(traditional_bell_parameter([1.0, 1.0, 1.0, 1.0]), 2.0);
        assert_eq!(traditional_bell_parameter([0.0; 4]), 0.0);
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let t = traditional_bell_parameter([c, c, c, -c]);
        assert!((t - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bound_anchors() {
        assert!((classical_bound(0.0).unwrap() - 16.0 / 7.0).abs() < 1e-12);
        assert!((classical_bound(0.01).unwrap() - 5.645714285714286).abs() < 1e-9);
        assert!((classical_bound(1.0).unwrap() - 50.285714285714285).abs() < 1e-9);
        assert!((quantum_lower_bound(0.0).unwrap() - 2.8284271247461903).abs() < 1e-12);
        assert!((quantum_lower_bound(0.0001).unwrap() - 2.5068271247461903).abs() < 1e-9);
        assert!(classical_bound(-0.1).is_err());
        assert!(quantum_lower_bound(-1e-9).is_err());
    }

    #[test]
    fn quantum_lower_bound_root_location() {
        // bisection oracle on the closed form
        let f = |eps: f64| quantum_lower_bound(eps).unwrap();
        let (mut lo, mut hi) = (0.001, 0.02);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        // analytic root of the quadratic in sqrt(eps)
        let u = (-32.0 + (1024.0f64 + 128.0 * std::f64::consts::SQRT_2).sqrt()) / 32.0;
        assert!((root - u * u).abs() < 1e-9, "root {root}");
        assert!((0.0070..0.0078).contains(&root), "root {root}");
    }

    #[test]
    fn zero_epsilon_noise_is_identity() {
        let mut rng = derive_rng(0, Domain::Noise, 0);
        let spec = NoiseSpec::none();
        for v in [0.0, 1.5, -3.0, 1e6] {
            assert_eq!(inject_noise(v, &spec, 100, &mut rng), v);
        }
    }

    #[test]
    fn injected_noise_has_requested_variance() {
        let spec = NoiseSpec { epsilon: 0.01, mode: NoiseMode::Independent };
        let n_pairs = 100u64; // eps*N = 1
        let mut rng = derive_rng(11, Domain::Noise, 0);
        let samples: Vec<f64> =
            (0..100_000).map(|_| inject_noise(0.0, &spec, n_pairs, &mut rng)).collect();
        let (mean, std) = mean_and_sample_std(&samples);
        let var = std * std;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
        // empirical variance stays under the 1.05 * eps * N cap
        assert!(var <= 1.05);
    }

    #[test]
    fn constant_trials_give_zero_estimate() {
        let mut trials = Vec::new();
        for (x, y) in SETTING_PAIRS {
            for _ in 0..4 {
                trials.push(TrialRecord { x, y, a_total: 7.0, b_total: 3.0 });
            }
        }
        let est = estimate_bell(&trials, 10, 0).unwrap();
        assert_eq!(est.b_hat, 0.0);
        assert_eq!(est.covariances, [0.0; 4]);
        assert_eq!(est.trials_per_setting, [4; 4]);
        assert_eq!(est.recompute_b_hat(), est.b_hat);
    }

    #[test]
    fn missing_setting_pair_is_reported() {
        let trials = vec![
            TrialRecord { x: 0, y: 0, a_total: 1.0, b_total: 1.0 },
            TrialRecord { x: 0, y: 0, a_total: 2.0, b_total: 0.0 },
            TrialRecord { x: 0, y: 1, a_total: 1.0, b_total: 1.0 },
            TrialRecord { x: 0, y: 1, a_total: 0.0, b_total: 1.0 },
            TrialRecord { x: 1, y: 0, a_total: 1.0, b_total: 0.0 },
            TrialRecord { x: 1, y: 0, a_total: 1.0, b_total: 1.0 },
        ];
        let err = estimate_bell(&trials, 10, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("x=1, y=1"), "error should name the missing pair: {msg}");
    }

    #[test]
    fn generation_is_deterministic_and_thread_independent() {
        let spec = StrategySpec::chsh_singlet();
        let noise = NoiseSpec { epsilon: 0.001, mode: NoiseMode::CommonMode };
        let t1 = generate_trials(&spec, 50, 2000, &noise, 123).unwrap();
        let t2 = generate_trials(&spec, 50, 2000, &noise, 123).unwrap();
        assert_eq!(t1, t2);
        // single-thread pool must produce the identical sequence
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let t3 = pool.install(|| generate_trials(&spec, 50, 2000, &noise, 123).unwrap());
        assert_eq!(t1, t3);
        let est1 = estimate_bell(&t1, 50, 123).unwrap();
        let est3 = pool.install(|| estimate_bell(&t3, 50, 123).unwrap());
        assert_eq!(est1, est3);
    }

    #[test]
    fn global_coin_estimate_reaches_two_n() {
        let spec = StrategySpec::GlobalCoin {
            heads: ResponseTable::ALL_ONES,
            tails: ResponseTable::ALL_ZEROS,
        };
        let est = run_bell_experiment(&spec, 100, 3000, &NoiseSpec::none(), 99).unwrap();
        assert!(
            (est.b_hat - 200.0).abs() < 10.0,
            "global coin b_hat = {} +- {}",
            est.b_hat,
            est.std_err
        );
    }
}
