//! The macroscopic CHSH game.
//!
//! 2N memoryless players (N Alices, N Bobs) answer binary questions over
//! many rounds; the verifier only sees the per-side counts of 1s. A round
//! is won when both counts deviate from their empirical means by at least
//! sqrt(N) with the sign pattern (-1)^(x AND y). The score is the minimum
//! win fraction over the four question pairs. Classical players score at
//! most ~0.0102 (twice a bivariate Gaussian tail bound); singlet-sharing
//! players reach ~0.0150.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{derive_rng, Domain};
use crate::special::{erfc, normal_pdf};
use crate::strategies::{pair_index, sample_macroscopic, StrategySpec, SETTING_PAIRS};

/// One round of the game: the questions and the two reply counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameRound {
    pub x: u8,
    pub y: u8,
    pub a_count: u64,
    pub b_count: u64,
}

/// Everything the verifier records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript {
    /// Players per side (N).
    pub n_players: u64,
    pub rounds: Vec<GameRound>,
}

impl GameTranscript {
    pub fn validate(&self) -> Result<()> {
        if self.n_players == 0 {
            return Err(Error::invalid("n_players must be >= 1"));
        }
        for r in &self.rounds {
            if r.a_count > self.n_players || r.b_count > self.n_players {
                return Err(Error::invalid(format!(
                    "round counts ({}, {}) exceed n_players {}",
                    r.a_count, r.b_count, self.n_players
                )));
            }
        }
        Ok(())
    }
}

/// Verifier output: per-pair win fractions, their minimum, and the
/// empirical averages used for the deviation thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Win fraction per question pair, in (00, 01, 10, 11) order.
    pub per_pair_win_fraction: [f64; 4],
    /// Rounds observed per question pair, same order.
    pub per_pair_round_count: [u64; 4],
    /// Minimum of the four win fractions.
    pub score: f64,
    /// Mean a-count per Alice question x = 0, 1.
    pub avg_a: [f64; 2],
    /// Mean b-count per Bob question y = 0, 1.
    pub avg_b: [f64; 2],
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn round_wins(r: &GameRound, avg_a: &[f64; 2], avg_b: &[f64; 2], sqrt_n: f64) -> bool {
    let da = r.a_count as f64 - avg_a[r.x as usize & 1];
    let db = r.b_count as f64 - avg_b[r.y as usize & 1];
    // ties at exactly sqrt(N) count as wins
    if da.abs() < sqrt_n || db.abs() < sqrt_n {
        return false;
    }
    let target = if r.x & r.y == 1 { -1.0 } else { 1.0 };
    sign(da) * sign(db) == target
}

/// Empirical per-question averages over all rounds containing that setting.
fn transcript_averages(t: &GameTranscript) -> Result<([f64; 2], [f64; 2])> {
    let mut sum_a = [0.0f64; 2];
    let mut cnt_a = [0u64; 2];
    let mut sum_b = [0.0f64; 2];
    let mut cnt_b = [0u64; 2];
    for r in &t.rounds {
        sum_a[r.x as usize & 1] += r.a_count as f64;
        cnt_a[r.x as usize & 1] += 1;
        sum_b[r.y as usize & 1] += r.b_count as f64;
        cnt_b[r.y as usize & 1] += 1;
    }
    for x in 0..2 {
        if cnt_a[x] == 0 {
            return Err(Error::insufficient(format!("no rounds with Alice question x={x}")));
        }
        if cnt_b[x] == 0 {
            return Err(Error::insufficient(format!("no rounds with Bob question y={x}")));
        }
    }
    Ok((
        [sum_a[0] / cnt_a[0] as f64, sum_a[1] / cnt_a[1] as f64],
        [sum_b[0] / cnt_b[0] as f64, sum_b[1] / cnt_b[1] as f64],
    ))
}

/// Score a transcript: averages from the transcript itself, then one pass
/// applying the two win conditions per round.
pub fn score_transcript(t: &GameTranscript) -> Result<ScoreReport> {
    t.validate()?;
    let (avg_a, avg_b) = transcript_averages(t)?;
    let sqrt_n = (t.n_players as f64).sqrt();
    let mut wins = [0u64; 4];
    let mut counts = [0u64; 4];
    for r in &t.rounds {
        let idx = pair_index(r.x, r.y);
        counts[idx] += 1;
        if round_wins(r, &avg_a, &avg_b, sqrt_n) {
            wins[idx] += 1;
        }
    }
    for (idx, (x, y)) in SETTING_PAIRS.iter().enumerate() {
        if counts[idx] == 0 {
            return Err(Error::insufficient(format!(
                "question pair (x={x}, y={y}) never occurs in the transcript"
            )));
        }
    }
    let mut per_pair = [0.0f64; 4];
    for idx in 0..4 {
        per_pair[idx] = wins[idx] as f64 / counts[idx] as f64;
    }
    let score = per_pair.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScoreReport {
        per_pair_win_fraction: per_pair,
        per_pair_round_count: counts,
        score,
        avg_a,
        avg_b,
    })
}

/// Per-round win flags under the report's averages, for transcript export.
pub fn round_win_flags(t: &GameTranscript, report: &ScoreReport) -> Vec<bool> {
    let sqrt_n = (t.n_players as f64).sqrt();
    t.rounds.iter().map(|r| round_wins(r, &report.avg_a, &report.avg_b, sqrt_n)).collect()
}

/// Play the game: questions drawn uniformly per round, counts sampled from
/// the strategy (each Alice paired with exactly one Bob). Deterministic for
/// a fixed master seed.
pub fn play_game(
    strategy: &StrategySpec,
    n_players: u64,
    n_rounds: u64,
    master_seed: u64,
) -> Result<GameTranscript> {
    strategy.validate()?;
    if n_players == 0 {
        return Err(Error::invalid("n_players must be >= 1"));
    }
    if n_rounds < 4 {
        return Err(Error::invalid(format!("need at least 4 rounds, got {n_rounds}")));
    }
    const CHUNK: u64 = 4096;
    let n_chunks = (n_rounds + CHUNK - 1) / CHUNK;
    let chunks: Vec<Vec<GameRound>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(n_rounds);
            (lo..hi)
                .map(|round_idx| {
                    let mut rng = derive_rng(master_seed, Domain::GameRounds, round_idx);
                    let q: u8 = rng.gen_range(0..4);
                    let (x, y) = (q >> 1, q & 1);
                    let (a, b) = sample_macroscopic(strategy, n_players, x, y, &mut rng);
                    GameRound { x, y, a_count: a as u64, b_count: b as u64 }
                })
                .collect()
        })
        .collect();
    Ok(GameTranscript { n_players, rounds: chunks.into_iter().flatten().collect() })
}

/// A bivariate-Gaussian tail question: the variances and covariance of the
/// centered pair and the threshold scale N (both deviations at sqrt(N)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTailQuery {
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
    pub n: f64,
}

impl GaussianTailQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.var_x > 0.0 && self.var_y > 0.0) {
            return Err(Error::invalid(format!(
                "variances must be positive, got ({}, {})",
                self.var_x, self.var_y
            )));
        }
        let cap = (self.var_x * self.var_y).sqrt();
        if !(self.cov.abs() <= cap * (1.0 + 1e-12)) {
            return Err(Error::invalid(format!(
                "|cov| = {} violates Cauchy-Schwarz bound {cap}",
                self.cov.abs()
            )));
        }
        if !(self.n > 0.0) {
            return Err(Error::invalid(format!("threshold scale n must be positive, got {}", self.n)));
        }
        Ok(())
    }
}

/// Absolute tolerance of the tail quadrature.
pub const TAIL_QUAD_TOL: f64 = 1e-7;

/// `P(X >= sqrt(N) and Y >= sqrt(N))` for a centered bivariate Gaussian
/// (`same_side = true`), or `P(X >= sqrt(N) and Y <= -sqrt(N))`
/// (`same_side = false`, equivalent to negating the covariance).
///
/// Evaluated as a 1-D integral over x of the Gaussian density times the
/// conditional tail `erfc` term: given X = x, Y is Gaussian with mean
/// `x cov / var_x` and variance `var_y - cov^2 / var_x`.
pub fn gaussian_tail_probability(q: &GaussianTailQuery, same_side: bool) -> Result<f64> {
    q.validate()?;
    // rescale to unit threshold: variances in units of N, threshold 1
    let vx = q.var_x / q.n;
    let vy = q.var_y / q.n;
    let cov = if same_side { q.cov } else { -q.cov } / q.n;

    let sx = vx.sqrt();
    let cond_var = vy - cov * cov / vx;
    if cond_var <= 1e-15 * vy {
        // degenerate ridge: Y = (cov/vx) X almost surely
        if cov <= 0.0 {
            // Y <= 0 whenever X >= 1 > 0: the joint tail is empty
            return Ok(0.0);
        }
        let x_min = (vx / cov).max(1.0);
        return Ok(0.5 * erfc(x_min / (std::f64::consts::SQRT_2 * sx)));
    }
    let cond_sd = cond_var.sqrt();
    let slope = cov / vx;
    let integrand = move |x: f64| {
        let density = normal_pdf(x / sx) / sx;
        let arg = (1.0 - slope * x) / (std::f64::consts::SQRT_2 * cond_sd);
        density * 0.5 * erfc(arg)
    };
    // the Gaussian factor is below 1e-32 beyond 12 standard deviations
    let upper = 1.0 + 12.0 * sx;
    quad::integrate(integrand, 1.0, upper, TAIL_QUAD_TOL * 0.1)
}

/// Search box and result of the constrained tail maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMaximum {
    pub max_prob: f64,
    pub argmax: GaussianTailQuery,
}

const GRID_POINTS: usize = 33;
const REFINE_TOL: f64 = 1e-6;

/// Maximize the same-side tail probability over
/// `0 < var_x, var_y <= var_cap`, `cov <= cov_cap`, `|cov| <= sqrt(var_x var_y)`.
///
/// Deterministic: a coarse 33^3 grid pass followed by per-coordinate
/// golden-section refinement until the parameter box shrinks below 1e-6 of
/// the cap scale. The tail is monotone in cov and (numerically) in the
/// variances here, so the maximum sits on the cap boundary; the grid pass
/// guarantees the refinement starts in the right basin either way.
pub fn maximize_tail_probability(var_cap: f64, cov_cap: f64, n: f64) -> Result<TailMaximum> {
    if !(var_cap > 0.0 && cov_cap > 0.0) {
        return Err(Error::invalid("caps must be positive"));
    }
    if !(n > 0.0) {
        return Err(Error::invalid("threshold scale n must be positive"));
    }
    let eval = |vx: f64, vy: f64, cov: f64| -> Result<f64> {
        let q = GaussianTailQuery { var_x: vx, var_y: vy, cov, n };
        gaussian_tail_probability(&q, true)
    };

    // coarse grid; variance axes exclude 0
    let mut best = (f64::MIN, var_cap, var_cap, 0.0);
    for i in 1..=GRID_POINTS {
        let vx = var_cap * i as f64 / GRID_POINTS as f64;
        for j in 1..=GRID_POINTS {
            let vy = var_cap * j as f64 / GRID_POINTS as f64;
            let cov_hi = cov_cap.min((vx * vy).sqrt());
            let cov_lo = -(vx * vy).sqrt();
            for k in 0..GRID_POINTS {
                let cov = cov_lo + (cov_hi - cov_lo) * k as f64 / (GRID_POINTS - 1) as f64;
                let p = eval(vx, vy, cov)?;
                if p > best.0 {
                    best = (p, vx, vy, cov);
                }
            }
        }
    }

    // golden-section per coordinate around the best grid point
    let (mut p_best, mut vx, mut vy, mut cov) = best;
    let step = var_cap / GRID_POINTS as f64;
    let coord_tol = REFINE_TOL * (var_cap + cov_cap);
    let golden = move |lo: f64, hi: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<(f64, f64)> {
        const PHI: f64 = 0.618_033_988_749_894_8;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - PHI * (b - a);
        let mut d = a + PHI * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        while (b - a).abs() > coord_tol {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - PHI * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + PHI * (b - a);
                fd = f(d)?;
            }
        }
        let mid = 0.5 * (a + b);
        Ok((mid, f(mid)?))
    };

    for _pass in 0..3 {
        // var_x
        let lo = (vx - 2.0 * step).max(step * 1e-6);
        let hi = (vx + 2.0 * step).min(var_cap);
        let f = |v: f64| eval(v, vy, cov.min((v * vy).sqrt()));
        let (v_new, p_new) = golden(lo, hi, &f)?;
        if p_new > p_best {
            vx = v_new;
            cov = cov.min((vx * vy).sqrt());
            p_best = p_new;
        }
        // var_y
        let lo = (vy - 2.0 * step).max(step * 1e-6);
        let hi = (vy + 2.0 * step).min(var_cap);
        let f = |v: f64| eval(vx, v, cov.min((vx * v).sqrt()));
        let (v_new, p_new) = golden(lo, hi, &f)?;
        if p_new > p_best {
            vy = v_new;
            cov = cov.min((vx * vy).sqrt());
            p_best = p_new;
        }
        // cov
        let cov_hi = cov_cap.min((vx * vy).sqrt());
        let cstep = step.min(cov_hi.abs() + step);
        let lo = (cov - 2.0 * cstep).max(-(vx * vy).sqrt());
        let hi = (cov + 2.0 * cstep).min(cov_hi);
        let f = |c: f64| eval(vx, vy, c);
        let (c_new, p_new) = golden(lo, hi, &f)?;
        if p_new > p_best {
            cov = c_new;
            p_best = p_new;
        }
    }

    // the caps themselves are always candidates
    let cap_point = eval(var_cap, var_cap, cov_cap.min(var_cap))?;
    if cap_point >= p_best {
        p_best = cap_point;
        vx = var_cap;
        vy = var_cap;
        cov = cov_cap.min(var_cap);
    }

    Ok(TailMaximum {
        max_prob: p_best,
        argmax: GaussianTailQuery { var_x: vx, var_y: vy, cov, n },
    })
}

/// Classical score ceiling of the game: twice the maximal same-side tail
/// probability under the variance cap N/4 and covariance cap N/7 that any
/// classical strategy must satisfy on its worst question pair.
pub fn classical_score_bound() -> f64 {
    let m = maximize_tail_probability(0.25, 1.0 / 7.0, 1.0)
        .expect("fixed well-conditioned maximization");
    2.0 * m.max_prob
}

/// Gaussian-limit score of the singlet strategy: both counts beyond
/// sqrt(N) on the same side, under the covariance matrix with entries N/4
/// and N/(4 sqrt 2). Dimensionless, so independent of n.
pub fn quantum_game_score(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::invalid(format!("n must be positive, got {n}")));
    }
    let q = GaussianTailQuery {
        var_x: n / 4.0,
        var_y: n / 4.0,
        cov: n / (4.0 * std::f64::consts::SQRT_2),
        n,
    };
    // both-above and both-below tails are equal by central symmetry
    let above = gaussian_tail_probability(&q, true)?;
    Ok(above + above)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::ResponseTable;

    #[test]
    fn tail_probability_anchors() {
        // variance cap N/4 and covariance cap N/7: slightly below 0.0051
        let q = GaussianTailQuery { var_x: 0.25, var_y: 0.25, cov: 1.0 / 7.0, n: 1.0 };
        let p = gaussian_tail_probability(&q, true).unwrap();
        assert!((p - 0.0050496).abs() < 2e-4, "lemma point {p}");
        assert!((p - 0.005049595636066).abs() < 1e-6, "lemma point tight {p}");

        // independent: product of two one-sided 2-sigma tails
        let q0 = GaussianTailQuery { var_x: 0.25, var_y: 0.25, cov: 0.0, n: 1.0 };
        let p0 = gaussian_tail_probability(&q0, true).unwrap();
        assert!((p0 - 0.0005175685).abs() < 1e-7, "independent {p0}");

        // perfect correlation degenerates to one marginal tail
        let q1 = GaussianTailQuery { var_x: 0.25, var_y: 0.25, cov: 0.25, n: 1.0 };
        let p1 = gaussian_tail_probability(&q1, true).unwrap();
        assert!((p1 - 0.02275013194818).abs() < 1e-9, "degenerate {p1}");
    }

    #[test]
    fn tail_scale_invariance() {
        let base = GaussianTailQuery { var_x: 0.22, var_y: 0.19, cov: 0.11, n: 1.0 };
        let p1 = gaussian_tail_probability(&base, true).unwrap();
        for n in [100.0, 1e4, 1e6] {
            let q = GaussianTailQuery {
                var_x: base.var_x * n,
                var_y: base.var_y * n,
                cov: base.cov * n,
                n,
            };
            let p = gaussian_tail_probability(&q, true).unwrap();
            assert!((p - p1).abs() < 1e-9, "n={n}: {p} vs {p1}");
        }
    }

    #[test]
    fn opposite_side_equals_negated_covariance() {
        let q = GaussianTailQuery { var_x: 0.25, var_y: 0.2, cov: 0.1, n: 1.0 };
        let flipped = GaussianTailQuery { cov: -0.1, ..q };
        let a = gaussian_tail_probability(&q, false).unwrap();
        let b = gaussian_tail_probability(&flipped, true).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn tail_monotone_in_covariance() {
        let mut last = -1.0;
        for k in 0..12 {
            let cov = -0.24 + 0.04 * k as f64;
            let q = GaussianTailQuery { var_x: 0.25, var_y: 0.25, cov, n: 1.0 };
            let p = gaussian_tail_probability(&q, true).unwrap();
            assert!(p >= last - 1e-12, "not monotone at cov={cov}: {p} < {last}");
            last = p;
        }
    }

    #[test]
    fn tail_bounded_by_marginals() {
        for &(vx, vy, cov) in
            &[(0.25, 0.25, 0.1), (0.1, 0.2, -0.05), (0.25, 0.04, 0.09), (0.17, 0.17, 0.17)]
        {
            let q = GaussianTailQuery { var_x: vx, var_y: vy, cov, n: 1.0 };
            let p = gaussian_tail_probability(&q, true).unwrap();
            let mx = 0.5 * erfc(1.0 / (std::f64::consts::SQRT_2 * vx.sqrt()));
            let my = 0.5 * erfc(1.0 / (std::f64::consts::SQRT_2 * vy.sqrt()));
            assert!(p <= mx.min(my) + 1e-9, "tail {p} exceeds marginals {mx}, {my}");
        }
    }

    #[test]
    fn maximization_hits_cap_corner() {
        let m = maximize_tail_probability(0.25, 1.0 / 7.0, 1.0).unwrap();
        assert!((m.max_prob - 0.0050496).abs() < 1e-4, "max {}", m.max_prob);
        assert!((m.argmax.var_x - 0.25).abs() < 1e-3);
        assert!((m.argmax.var_y - 0.25).abs() < 1e-3);
        assert!((m.argmax.cov - 1.0 / 7.0).abs() < 1e-3);

        // rescaled caps give the same maximum
        let m2 = maximize_tail_probability(25.0, 100.0 / 7.0, 100.0).unwrap();
        assert!((m2.max_prob - m.max_prob).abs() < 1e-6);
    }

    #[test]
    fn zero_covariance_cap_maximum() {
        // cov <= ~0 forces the independent product at boundary variances
        let m = maximize_tail_probability(0.25, 1e-12, 1.0).unwrap();
        assert!((m.max_prob - 0.0005175685).abs() < 5e-6, "max {}", m.max_prob);
    }

    #[test]
    fn score_bounds() {
        let c = classical_score_bound();
        assert!((0.0098..=0.0102).contains(&c), "classical bound {c}");
        let m = maximize_tail_probability(0.25, 1.0 / 7.0, 1.0).unwrap();
        assert!((c - 2.0 * m.max_prob).abs() < 1e-15);
        let q = quantum_game_score(1e4).unwrap();
        assert!(q >= 0.0150, "quantum score {q}");
        assert!((q - 0.0150274).abs() < 1e-4, "quantum score {q}");
        let q2 = quantum_game_score(100.0).unwrap();
        assert!((q - q2).abs() < 1e-6);
    }

    #[test]
    fn score_transcript_hand_built_perfect_game() {
        // means come out at 50 by symmetric construction; every round wins
        let mut rounds = Vec::new();
        for (x, y) in SETTING_PAIRS {
            if x & y == 0 {
                rounds.push(GameRound { x, y, a_count: 61, b_count: 62 });
                rounds.push(GameRound { x, y, a_count: 39, b_count: 38 });
            } else {
                rounds.push(GameRound { x, y, a_count: 61, b_count: 39 });
                rounds.push(GameRound { x, y, a_count: 39, b_count: 61 });
            }
        }
        let t = GameTranscript { n_players: 100, rounds };
        let report = score_transcript(&t).unwrap();
        assert_eq!(report.avg_a, [50.0, 50.0]);
        assert_eq!(report.avg_b, [50.0, 50.0]);
        assert_eq!(report.per_pair_win_fraction, [1.0; 4]);
        assert_eq!(report.score, 1.0);
        assert!(round_win_flags(&t, &report).iter().all(|&w| w));
    }

    #[test]
    fn score_transcript_all_at_mean_scores_zero() {
        let rounds: Vec<GameRound> = SETTING_PAIRS
            .iter()
            .flat_map(|&(x, y)| {
                (0..3).map(move |_| GameRound { x, y, a_count: 50, b_count: 50 })
            })
            .collect();
        let t = GameTranscript { n_players: 100, rounds };
        let report = score_transcript(&t).unwrap();
        assert_eq!(report.score, 0.0);
        assert_eq!(report.per_pair_win_fraction, [0.0; 4]);
    }

    #[test]
    fn global_coin_players_score_zero() {
        let strategy = StrategySpec::GlobalCoin {
            heads: ResponseTable::ALL_ONES,
            tails: ResponseTable::ALL_ZEROS,
        };
        let t = play_game(&strategy, 100, 4000, 1234).unwrap();
        let report = score_transcript(&t).unwrap();
        // A = B always, so the sign product is +1; the (1,1) pair never wins
        assert_eq!(report.per_pair_win_fraction[3], 0.0);
        assert_eq!(report.score, 0.0);
    }

    #[test]
    fn score_invariant_under_round_permutation() {
        let strategy = StrategySpec::chsh_singlet();
        let t = play_game(&strategy, 400, 2000, 5).unwrap();
        let r1 = score_transcript(&t).unwrap();
        let mut shuffled = t.clone();
        shuffled.rounds.reverse();
        shuffled.rounds.rotate_left(313);
        let r2 = score_transcript(&shuffled).unwrap();
        assert_eq!(r1.score, r2.score);
        assert_eq!(r1.per_pair_win_fraction, r2.per_pair_win_fraction);
    }

    #[test]
    fn missing_pair_is_an_error() {
        let rounds = vec![
            GameRound { x: 0, y: 0, a_count: 1, b_count: 1 },
            GameRound { x: 0, y: 1, a_count: 1, b_count: 1 },
            GameRound { x: 1, y: 0, a_count: 1, b_count: 1 },
        ];
        let t = GameTranscript { n_players: 2, rounds };
        let err = score_transcript(&t).unwrap_err();
        assert!(err.to_string().contains("x=1, y=1"), "{err}");
    }

    #[test]
    fn play_game_validates_inputs() {
        let s = StrategySpec::chsh_singlet();
        assert!(play_game(&s, 0, 100, 0).is_err());
        assert!(play_game(&s, 10, 3, 0).is_err());
    }

    #[test]
    fn question_frequencies_are_uniform() {
        let s = StrategySpec::Deterministic { table: ResponseTable::ALL_ONES };
        let t = play_game(&s, 1, 40_000, 77).unwrap();
        let mut counts = [0u64; 4];
        for r in &t.rounds {
            counts[pair_index(r.x, r.y)] += 1;
            assert_eq!((r.a_count, r.b_count), (1, 1));
        }
        for c in counts {
            let f = c as f64 / 40_000.0;
            assert!((f - 0.25).abs() < 0.01, "pair frequency {f}");
        }
    }
}
