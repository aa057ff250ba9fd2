//! Microscopic source models for the Bell test.
//!
//! A strategy describes how one Alice/Bob particle pair responds to the
//! settings (x, y) with outcomes (a, b) in {0, 1}. Classical strategies are
//! built from deterministic response tables; the quantum strategy is the
//! analytic singlet family where Alice rotates her half by `R_z(+theta_x)`
//! and Bob rotates his by `R_z(-theta_y)`, so the pair effectively measures
//! the rotated singlet with phase `theta_x + theta_y`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::multinomial4;

/// Deterministic local response table: Alice answers `a[x]`, Bob `b[y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub a: [u8; 2],
    pub b: [u8; 2],
}

impl ResponseTable {
    pub fn new(a0: u8, a1: u8, b0: u8, b1: u8) -> Self {
        ResponseTable { a: [a0, a1], b: [b0, b1] }
    }

    pub const ALL_ONES: ResponseTable = ResponseTable { a: [1, 1], b: [1, 1] };
    pub const ALL_ZEROS: ResponseTable = ResponseTable { a: [0, 0], b: [0, 0] };

    /// Decode 4 bits into a table; `bits` ranges over 0..16.
    pub fn from_bits(bits: u8) -> Self {
        ResponseTable {
            a: [bits & 1, (bits >> 1) & 1],
            b: [(bits >> 2) & 1, (bits >> 3) & 1],
        }
    }

    /// All 16 deterministic local response tables.
    pub fn enumerate() -> impl Iterator<Item = ResponseTable> {
        (0u8..16).map(ResponseTable::from_bits)
    }

    pub fn validate(&self) -> Result<()> {
        for v in self.a.iter().chain(self.b.iter()) {
            if *v > 1 {
                return Err(Error::invalid(format!(
                    "deterministic table entries must be 0 or 1, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn responses(&self, x: u8, y: u8) -> (u8, u8) {
        (self.a[x as usize & 1], self.b[y as usize & 1])
    }
}

/// One component of a local-random mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedTable {
    pub weight: f64,
    pub table: ResponseTable,
}

/// A microscopic source model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Fixed responses per setting; no randomness at all.
    Deterministic { table: ResponseTable },
    /// A weighted mixture of tables, resampled independently for every
    /// particle pair (local classical randomness).
    LocalRandom { mixture: Vec<WeightedTable> },
    /// One fair coin per trial, shared by all pairs, selecting between two
    /// tables (global classical randomness).
    GlobalCoin { heads: ResponseTable, tails: ResponseTable },
    /// Product of singlets measured with the rotate-then-measure-X strategy.
    /// Alice's angle table is `theta_a`, Bob's is `theta_b`; Bob physically
    /// applies the negated angle so phases add.
    QuantumSinglet { theta_a: [f64; 2], theta_b: [f64; 2] },
}

impl StrategySpec {
    /// The CHSH angles: theta_0 = -3pi/8, theta_1 = 9pi/8 on both sides.
    pub fn chsh_singlet() -> Self {
        let t0 = -3.0 * std::f64::consts::PI / 8.0;
        let t1 = 9.0 * std::f64::consts::PI / 8.0;
        StrategySpec::QuantumSinglet { theta_a: [t0, t1], theta_b: [t0, t1] }
    }

    /// The uniform mixture of two tables, resampled per pair.
    pub fn fair_local_mixture(t1: ResponseTable, t2: ResponseTable) -> Self {
        StrategySpec::LocalRandom {
            mixture: vec![
                WeightedTable { weight: 0.5, table: t1 },
                WeightedTable { weight: 0.5, table: t2 },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategySpec::Deterministic { table } => table.validate(),
            StrategySpec::LocalRandom { mixture } => {
                if mixture.is_empty() {
                    return Err(Error::invalid("local_random mixture must be nonempty"));
                }
                let mut total = 0.0;
                for wt in mixture {
                    if !(wt.weight >= 0.0) {
                        return Err(Error::invalid(format!(
                            "mixture weight must be nonnegative, got {}",
                            wt.weight
                        )));
                    }
                    wt.table.validate()?;
                    total += wt.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "mixture weights must sum to 1 within 1e-12, got {total}"
                    )));
                }
                Ok(())
            }
            StrategySpec::GlobalCoin { heads, tails } => {
                heads.validate()?;
                tails.validate()
            }
            StrategySpec::QuantumSinglet { theta_a, theta_b } => {
                for t in theta_a.iter().chain(theta_b.iter()) {
                    if !t.is_finite() {
                        return Err(Error::invalid("singlet angles must be finite"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Joint outcome distribution of a single particle pair at settings
    /// (x, y). For the global coin this is the per-pair marginal law; the
    /// cross-pair correlation induced by the shared coin only appears in
    /// [`sample_macroscopic`].
    pub fn joint_distribution(&self, x: u8, y: u8) -> JointOutcomeDistribution {
        match self {
            StrategySpec::Deterministic { table } => {
                JointOutcomeDistribution::point(table.responses(x, y))
            }
            StrategySpec::LocalRandom { mixture } => {
                let mut d = JointOutcomeDistribution::zero();
                for wt in mixture {
                    d.add_point(wt.table.responses(x, y), wt.weight);
                }
                d
            }
            StrategySpec::GlobalCoin { heads, tails } => {
                let mut d = JointOutcomeDistribution::zero();
                d.add_point(heads.responses(x, y), 0.5);
                d.add_point(tails.responses(x, y), 0.5);
                d
            }
            StrategySpec::QuantumSinglet { theta_a, theta_b } => {
                let phase = theta_a[x as usize & 1] + theta_b[y as usize & 1];
                let p11 = 0.5 * singlet_even_probability(phase);
                JointOutcomeDistribution {
                    p11,
                    p10: 0.5 - p11,
                    p01: 0.5 - p11,
                    p00: p11,
                }
            }
        }
    }

    /// Whether pairs respond independently of one another within a trial.
    pub fn is_pair_local(&self) -> bool {
        !matches!(self, StrategySpec::GlobalCoin { .. })
    }

    /// Joint outcome counts (n11, n10, n01, n00) over `n_pairs` pairs.
    pub fn sample_joint_counts<R: Rng>(
        &self,
        n_pairs: u64,
        x: u8,
        y: u8,
        rng: &mut R,
    ) -> [u64; 4] {
        match self {
            StrategySpec::Deterministic { table } => {
                deterministic_counts(table.responses(x, y), n_pairs)
            }
            StrategySpec::GlobalCoin { heads, tails } => {
                // one coin for the whole trial
                let table = if rng.gen::<bool>() { heads } else { tails };
                deterministic_counts(table.responses(x, y), n_pairs)
            }
            _ => {
                let d = self.joint_distribution(x, y);
                multinomial4(n_pairs, [d.p11, d.p10, d.p01, d.p00], rng)
            }
        }
    }
}

fn deterministic_counts((a, b): (u8, u8), n: u64) -> [u64; 4] {
    match (a, b) {
        (1, 1) => [n, 0, 0, 0],
        (1, 0) => [0, n, 0, 0],
        (0, 1) => [0, 0, n, 0],
        _ => [0, 0, 0, n],
    }
}

/// Outcome distribution of one pair at one setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointOutcomeDistribution {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl JointOutcomeDistribution {
    fn zero() -> Self {
        JointOutcomeDistribution { p11: 0.0, p10: 0.0, p01: 0.0, p00: 0.0 }
    }

    fn point((a, b): (u8, u8)) -> Self {
        let mut d = Self::zero();
        d.add_point((a, b), 1.0);
        d
    }

    fn add_point(&mut self, (a, b): (u8, u8), w: f64) {
        match (a, b) {
            (1, 1) => self.p11 += w,
            (1, 0) => self.p10 += w,
            (0, 1) => self.p01 += w,
            _ => self.p00 += w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.p11, self.p10, self.p01, self.p00];
        for p in probs {
            if !(p >= 0.0) {
                return Err(Error::invalid(format!("negative probability {p}")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    /// P(a = 1).
    pub fn marginal_a(&self) -> f64 {
        self.p11 + self.p10
    }

    /// P(b = 1).
    pub fn marginal_b(&self) -> f64 {
        self.p11 + self.p01
    }

    /// E[a b] for the 0/1-valued outcomes; only the (1,1) cell contributes.
    pub fn mean_product(&self) -> f64 {
        self.p11
    }

    /// E[a' b'] for the +-1 rescaled outcomes a' = 2(a - 1/2).
    pub fn correlator_pm1(&self) -> f64 {
        self.p11 + self.p00 - self.p10 - self.p01
    }

    /// cov(a, b) of the 0/1-valued outcomes.
    pub fn covariance(&self) -> f64 {
        self.p11 - self.marginal_a() * self.marginal_b()
    }

    /// Probability that the pair wins a CHSH round at settings (x, y):
    /// x AND y == a + b (mod 2).
    pub fn win_probability(&self, x: u8, y: u8) -> f64 {
        if x & y == 1 {
            self.p10 + self.p01
        } else {
            self.p11 + self.p00
        }
    }
}

/// Probability that measuring sigma_x (x) sigma_x on the rotated singlet
/// `|Psi^-(theta)>` yields an even-parity string: sin^2(theta/2).
pub fn singlet_even_probability(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s
}

/// The microscopic CHSH combination E[a0 b0] + E[a0 b1] + E[a1 b0] - E[a1 b1]
/// of the 0/1-valued outcomes.
pub fn micro_correlator(spec: &StrategySpec) -> f64 {
    setting_combination(spec, |d| d.mean_product())
}

/// The covariance CHSH combination
/// cov(a0,b0) + cov(a0,b1) + cov(a1,b0) - cov(a1,b1).
/// At most 4/7 for any pair-local classical model; 1/sqrt(2) at the CHSH
/// singlet angles.
pub fn micro_covariance_combination(spec: &StrategySpec) -> f64 {
    setting_combination(spec, |d| d.covariance())
}

/// Win probability of the CHSH game under uniformly random questions.
pub fn chsh_win_probability(spec: &StrategySpec) -> f64 {
    let mut total = 0.0;
    for (x, y) in SETTING_PAIRS {
        total += spec.joint_distribution(x, y).win_probability(x, y);
    }
    total / 4.0
}

/// Aggregate outcomes of one trial: the number of 1s on each side when all
/// `n_pairs` pairs are measured at settings (x, y).
pub fn sample_macroscopic<R: Rng>(
    spec: &StrategySpec,
    n_pairs: u64,
    x: u8,
    y: u8,
    rng: &mut R,
) -> (f64, f64) {
    let [n11, n10, n01, _] = spec.sample_joint_counts(n_pairs, x, y, rng);
    ((n11 + n10) as f64, (n11 + n01) as f64)
}

/// The four setting pairs in canonical (x, y) order.
pub const SETTING_PAIRS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Index of a setting pair in [`SETTING_PAIRS`] order.
pub fn pair_index(x: u8, y: u8) -> usize {
    ((x & 1) * 2 + (y & 1)) as usize
}

fn setting_combination(spec: &StrategySpec, f: impl Fn(&JointOutcomeDistribution) -> f64) -> f64 {
    let mut total = 0.0;
    for (x, y) in SETTING_PAIRS {
        let v = f(&spec.joint_distribution(x, y));
        total += if (x & y) == 1 { -v } else { v };
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SIN2_3PI8: f64 = 0.8535533905932737; // sin^2(3 pi / 8)

    #[test]
    fn singlet_even_probability_anchors() {
        assert_eq!(singlet_even_probability(0.0), 0.0);
        assert!((singlet_even_probability(PI) - 1.0).abs() < 1e-15);
        assert!((singlet_even_probability(3.0 * PI / 4.0) - SIN2_3PI8).abs() < 1e-15);
    }

    #[test]
    fn chsh_joint_distribution_anchors() {
        let spec = StrategySpec::chsh_singlet();
        let d00 = spec.joint_distribution(0, 0);
        assert!((d00.p11 - 0.5 * SIN2_3PI8).abs() < 1e-12, "p11(0,0) = {}", d00.p11);
        let d11 = spec.joint_distribution(1, 1);
        assert!((d11.p11 - (0.5 - 0.5 * SIN2_3PI8)).abs() < 1e-12, "p11(1,1) = {}", d11.p11);
        for (x, y) in SETTING_PAIRS {
            let d = spec.joint_distribution(x, y);
            d.validate().unwrap();
            assert_eq!(d.marginal_a(), 0.5);
            assert_eq!(d.marginal_b(), 0.5);
            assert_eq!(d.p10, d.p01);
        }
    }

    #[test]
    fn deterministic_all_ones_distribution() {
        let spec = StrategySpec::Deterministic { table: ResponseTable::ALL_ONES };
        let d = spec.joint_distribution(0, 1);
        assert_eq!(d.p11, 1.0);
        assert_eq!(d.p10 + d.p01 + d.p00, 0.0);
    }

    #[test]
    fn micro_correlator_anchors() {
        let q = StrategySpec::chsh_singlet();
        assert!((micro_correlator(&q) - (2.0 * SIN2_3PI8 - 0.5)).abs() < 1e-12);
        let zeros = StrategySpec::Deterministic { table: ResponseTable::ALL_ZEROS };
        assert_eq!(micro_correlator(&zeros), 0.0);
        assert!(
            (micro_covariance_combination(&q) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12
        );
    }

    #[test]
    fn independent_coins_have_zero_covariance() {
        // uniform mixture over all 16 tables makes a and b independent fair coins
        let mixture: Vec<WeightedTable> = ResponseTable::enumerate()
            .map(|table| WeightedTable { weight: 1.0 / 16.0, table })
            .collect();
        let spec = StrategySpec::LocalRandom { mixture };
        spec.validate().unwrap();
        assert!(micro_covariance_combination(&spec).abs() < 1e-12);
        assert!(micro_correlator(&spec).abs() < 1e-12);
        // traditional correlator of centered coins also vanishes
        for (x, y) in SETTING_PAIRS {
            assert!(spec.joint_distribution(x, y).correlator_pm1().abs() < 1e-12);
        }
    }

    #[test]
    fn chsh_win_probability_anchors() {
        let best = ResponseTable::enumerate()
            .map(|t| chsh_win_probability(&StrategySpec::Deterministic { table: t }))
            .fold(f64::MIN, f64::max);
        assert_eq!(best, 0.75);

        let q = StrategySpec::chsh_singlet();
        assert!((chsh_win_probability(&q) - SIN2_3PI8).abs() < 1e-12);

        // suboptimal angles from the same family
        let sub = StrategySpec::QuantumSinglet {
            theta_a: [PI / 2.0, 3.0 * PI / 4.0],
            theta_b: [PI / 2.0, 3.0 * PI / 4.0],
        };
        let w = chsh_win_probability(&sub);
        assert!((w - 0.802).abs() < 5e-3, "win probability {w}");
    }

    #[test]
    fn exhaustive_tables_respect_classical_bounds() {
        let mut hit_three_quarters = false;
        for table in ResponseTable::enumerate() {
            let spec = StrategySpec::Deterministic { table };
            assert!(micro_covariance_combination(&spec) <= 4.0 / 7.0 + 1e-12);
            let w = chsh_win_probability(&spec);
            assert!(w <= 0.75 + 1e-12, "table {table:?} wins {w}");
            if (w - 0.75).abs() < 1e-12 {
                hit_three_quarters = true;
            }
        }
        assert!(hit_three_quarters, "no deterministic table reaches 3/4");
    }

    #[test]
    fn deterministic_aggregation() {
        let spec = StrategySpec::Deterministic { table: ResponseTable::ALL_ONES };
        let mut rng = crate::rng::derive_rng(0, crate::rng::Domain::Trials, 0);
        assert_eq!(sample_macroscopic(&spec, 50, 0, 0, &mut rng), (50.0, 50.0));
    }

    #[test]
    fn global_coin_is_bimodal() {
        let spec = StrategySpec::GlobalCoin {
            heads: ResponseTable::ALL_ONES,
            tails: ResponseTable::ALL_ZEROS,
        };
        let mut rng = crate::rng::derive_rng(7, crate::rng::Domain::Trials, 0);
        let mut seen = [false, false];
        for _ in 0..64 {
            let (a, b) = sample_macroscopic(&spec, 50, 1, 0, &mut rng);
            assert_eq!(a, b);
            assert!(a == 50.0 || a == 0.0, "unexpected count {a}");
            seen[(a == 50.0) as usize] = true;
        }
        assert!(seen[0] && seen[1], "coin never landed on one side in 64 flips");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad_weights = StrategySpec::LocalRandom {
            mixture: vec![WeightedTable { weight: 0.7, table: ResponseTable::ALL_ONES }],
        };
        assert!(bad_weights.validate().is_err());
        let bad_entry = StrategySpec::Deterministic { table: ResponseTable::new(2, 0, 0, 0) };
        assert!(bad_entry.validate().is_err());
        let bad_angle = StrategySpec::QuantumSinglet {
            theta_a: [f64::NAN, 0.0],
            theta_b: [0.0, 0.0],
        };
        assert!(bad_angle.validate().is_err());
    }
}
