//! Posner-molecule toy Bell test.
//!
//! Two Posner molecules A and B are modeled as six phosphorus nuclear-spin
//! qubits each, prepared so that qubit i of A forms a singlet with qubit i
//! of B ("six singlets shared"). The physically accessible operations are a
//! phase rotation `exp(-i theta Z / 2)` of one qubit and the binding
//! measurement, which projects a Posner pair onto `tau_A + tau_B = 0 (mod 3)`,
//! where tau labels the eigensectors of the molecule's threefold symmetry
//! rotation.
//!
//! # Conventions (pinned by the published probabilities)
//!
//! * Amplitude indices are little-endian; Posner A holds qubits 0-5, Posner
//!   B holds qubits 6-11; singlet pairs are (i, 6+i).
//! * The symmetry rotation G is the qubit permutation (0 1 2)(3 4 5) within
//!   a Posner, in the encoding "the bit at position q moves to position
//!   sigma(q)". Posner B's molecular axis points opposite to A's in the
//!   prebinding orientation; in this index encoding that makes B's cycle
//!   (6 7 8)(9 10 11), the orientation for which the unrotated state lies
//!   entirely in the tau_A + tau_B = 0 sector and the binding curve
//!   reproduces the published 0.934 / 0.620 values.
//! * Sector projectors are `P_t = (1/3) sum_k w^{-tk} G^k` with
//!   `w = exp(2 pi i / 3)`; t in {0, 1, 2} encodes tau in {0, +1, -1}.
//! * Rotations act on qubit index 0 of the chosen Posner (0 for A, 6 for B).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const N_QUBITS: usize = 12;
const DIM: usize = 1 << N_QUBITS;

/// Joint state of one entangled Posner pair: 4096 complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosnerPairState {
    amplitudes: Vec<Complex64>,
}

/// Which molecule of a pair an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Posner {
    A,
    B,
}

/// Parity of the two binding outcomes in the four-Posner measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingParity {
    Even,
    Odd,
}

/// Joint tau-sector weights of a Posner pair. Entry `q[t_a][t_b]` is the
/// squared norm of the state projected onto sectors (t_a, t_b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSectorDistribution {
    pub q: [[f64; 3]; 3],
}

impl TauSectorDistribution {
    pub fn total(&self) -> f64 {
        self.q.iter().flatten().sum()
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.q {
            for &p in row {
                if !(p >= -1e-12) {
                    return Err(Error::invalid(format!("negative sector weight {p}")));
                }
            }
        }
        if (self.total() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "sector weights sum to {}, not 1",
                self.total()
            )));
        }
        Ok(())
    }

    /// Total weight on sectors with t_a + t_b != 0 (mod 3).
    pub fn off_diagonal_sum(&self) -> f64 {
        let mut acc = 0.0;
        for ta in 0..3 {
            for tb in 0..3 {
                if (ta + tb) % 3 != 0 {
                    acc += self.q[ta][tb];
                }
            }
        }
        acc
    }
}

// qubit permutation tables: A-cycle (0 1 2)(3 4 5) on the low 6 bits,
// B uses the same cycle pattern on its own 6 bits (see module docs).
fn cycle_perm6() -> [u8; 64] {
    let sigma = [1usize, 2, 0, 4, 5, 3]; // bit at q moves to sigma[q]
    let mut table = [0u8; 64];
    for (n, entry) in table.iter_mut().enumerate() {
        let mut m = 0usize;
        for (q, &s) in sigma.iter().enumerate() {
            m |= ((n >> q) & 1) << s;
        }
        *entry = m as u8;
    }
    table
}

/// index map of G^k on one Posner's 6 bits (k = 0, 1, 2)
fn perm_powers() -> [[u8; 64]; 3] {
    let p1 = cycle_perm6();
    let mut p2 = [0u8; 64];
    for n in 0..64 {
        p2[n] = p1[p1[n] as usize];
    }
    let mut id = [0u8; 64];
    for (n, entry) in id.iter_mut().enumerate() {
        *entry = n as u8;
    }
    [id, p1, p2]
}

fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

impl PosnerPairState {
    fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), DIM);
        PosnerPairState { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |<self|other>|
    pub fn overlap_magnitude(&self, other: &PosnerPairState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }

    /// Apply `G_A^j G_B^k` (a pure index permutation).
    fn permuted(&self, j: usize, k: usize, powers: &[[u8; 64]; 3]) -> Vec<Complex64> {
        let pa = &powers[j];
        let pb = &powers[k];
        let mut out = vec![Complex64::default(); DIM];
        for (n, &amp) in self.amplitudes.iter().enumerate() {
            let a = n & 0x3f;
            let b = n >> 6;
            let m = (pa[a] as usize) | ((pb[b] as usize) << 6);
            out[m] = amp;
        }
        out
    }
}

/// The "six singlets shared" state: qubit i of A with qubit 6+i of B in
/// `(|01> - |10>)/sqrt(2)` for i = 0..5.
pub fn six_singlets_state() -> PosnerPairState {
    let mut amps = vec![Complex64::default(); DIM];
    let norm = (0.5f64).sqrt().powi(6);
    for bits in 0u32..64 {
        // bit i chooses the |1 0> branch (with sign -1) of singlet i
        let mut index = 0usize;
        let mut sign = 1.0;
        for i in 0..6 {
            if (bits >> i) & 1 == 1 {
                index |= 1 << i; // A_i = 1
                sign = -sign;
            } else {
                index |= 1 << (6 + i); // B_i = 1
            }
        }
        amps[index] = Complex64::new(sign * norm, 0.0);
    }
    PosnerPairState::from_amplitudes(amps)
}

/// Rotate qubit 0 of the chosen Posner by `exp(-i theta Z / 2)`.
pub fn tau_rotation(state: &PosnerPairState, theta: f64, posner: Posner) -> PosnerPairState {
    let qubit = match posner {
        Posner::A => 0,
        Posner::B => 6,
    };
    let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
    let phase1 = Complex64::from_polar(1.0, theta / 2.0);
    let amps = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(n, &a)| if (n >> qubit) & 1 == 0 { a * phase0 } else { a * phase1 })
        .collect();
    PosnerPairState::from_amplitudes(amps)
}

/// Joint tau-sector weights, via the character sum
/// `q(t_a, t_b) = (1/9) sum_{j,k} w^{-(t_a j + t_b k)} <psi| G_A^j G_B^k |psi>`.
pub fn tau_sector_distribution(state: &PosnerPairState) -> TauSectorDistribution {
    let powers = perm_powers();
    let w = omega();
    // overlaps s[j][k] = <psi| G_A^j G_B^k |psi>
    let mut s = [[Complex64::default(); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let permuted = state.permuted(j, k, &powers);
            s[j][k] = state
                .amplitudes
                .iter()
                .zip(&permuted)
                .map(|(a, g)| a.conj() * g)
                .sum();
        }
    }
    let mut q = [[0.0f64; 3]; 3];
    for (ta, row) in q.iter_mut().enumerate() {
        for (tb, entry) in row.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for (j, s_row) in s.iter().enumerate() {
                for (k, &sjk) in s_row.iter().enumerate() {
                    acc += w.powi(-((ta * j + tb * k) as i32)) * sjk;
                }
            }
            *entry = (acc.re / 9.0).max(0.0);
        }
    }
    TauSectorDistribution { q }
}

/// Project onto the joint sector (t_a, t_b). The result is unnormalized;
/// its squared norm equals the sector weight.
pub fn project_sector(state: &PosnerPairState, t_a: usize, t_b: usize) -> PosnerPairState {
    let powers = perm_powers();
    let w = omega();
    let mut amps = vec![Complex64::default(); DIM];
    for j in 0..3 {
        for k in 0..3 {
            let phase = w.powi(-((t_a * j + t_b * k) as i32)) / 9.0;
            let permuted = state.permuted(j, k, &powers);
            for (acc, g) in amps.iter_mut().zip(&permuted) {
                *acc += phase * g;
            }
        }
    }
    PosnerPairState::from_amplitudes(amps)
}

/// Probability that the two binding measurements (A with A', B with B')
/// produce outcomes of the requested parity, given the sector weights of
/// the two pairs. Binding succeeds on a sector pair iff t + t' = 0 (mod 3);
/// the tau projectors are orthogonal, so the four-Posner probability
/// factorizes exactly over the two pairs.
pub fn binding_probability(
    pair1: &TauSectorDistribution,
    pair2: &TauSectorDistribution,
    parity: BindingParity,
) -> f64 {
    let mut p_even = 0.0;
    for ta in 0..3 {
        for tb in 0..3 {
            let w1 = pair1.q[ta][tb];
            if w1 == 0.0 {
                continue;
            }
            for ta2 in 0..3 {
                for tb2 in 0..3 {
                    let bind_a = (ta + ta2) % 3 == 0;
                    let bind_b = (tb + tb2) % 3 == 0;
                    if bind_a == bind_b {
                        p_even += w1 * pair2.q[ta2][tb2];
                    }
                }
            }
        }
    }
    match parity {
        BindingParity::Even => p_even,
        BindingParity::Odd => 1.0 - p_even,
    }
}

/// Even-parity binding probability after rotating Posner A of the first
/// pair by `theta`, with the second pair left unrotated.
pub fn even_binding_probability(theta: f64) -> f64 {
    let base = six_singlets_state();
    let rotated = tau_rotation(&base, theta, Posner::A);
    let q1 = tau_sector_distribution(&rotated);
    let q2 = tau_sector_distribution(&base);
    binding_probability(&q1, &q2, BindingParity::Even)
}

/// The even-binding curve over a grid of rotation angles.
pub fn even_binding_curve(theta_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("theta grid must be nonempty"));
    }
    let base = six_singlets_state();
    let q2 = tau_sector_distribution(&base);
    Ok(theta_grid
        .iter()
        .map(|&theta| {
            let rotated = tau_rotation(&base, theta, Posner::A);
            let q1 = tau_sector_distribution(&rotated);
            (theta, binding_probability(&q1, &q2, BindingParity::Even))
        })
        .collect())
}

/// Alice's rotation angles for questions 0 and 1.
pub const ALICE_ANGLES: [f64; 2] = [-std::f64::consts::FRAC_PI_8, 3.0 * std::f64::consts::FRAC_PI_8];
/// Bob's rotation angles for questions 0 and 1.
pub const BOB_ANGLES: [f64; 2] = [std::f64::consts::FRAC_PI_8, -3.0 * std::f64::consts::FRAC_PI_8];

/// Win probability of the few-Posner CHSH game.
///
/// Per question pair (x, y), Alice rotates Posner A by her angle and Bob
/// rotates Posner B by his; the pair then reports the binding outcomes.
/// Even parity wins on 00, 01, 10 and odd parity wins on 11. Questions are
/// uniform, so the value is the average of the four win probabilities
/// (which evaluates to about 0.796, beating the classical 3/4).
pub fn posner_game_win_probability() -> f64 {
    let base = six_singlets_state();
    let q_ref = tau_sector_distribution(&base);
    let mut total = 0.0;
    for x in 0..2usize {
        for y in 0..2usize {
            let rotated = tau_rotation(
                &tau_rotation(&base, ALICE_ANGLES[x], Posner::A),
                BOB_ANGLES[y],
                Posner::B,
            );
            let q = tau_sector_distribution(&rotated);
            let parity =
                if x & y == 1 { BindingParity::Odd } else { BindingParity::Even };
            total += binding_probability(&q, &q_ref, parity);
        }
    }
    total / 4.0
}

const BIG_QUBITS: usize = 24;
const BIG_DIM: usize = 1 << BIG_QUBITS;

/// Brute-force oracle for the even-parity binding probability.
///
/// Materializes the full 24-qubit product state (qubits 0-11 for the AB
/// pair, 12-23 for A'B'), applies the rotation to qubit 0, and evaluates
/// `<Pi_even>` directly from permutation overlaps of the 2^24 amplitude
/// vector, using `Pi_XX' = (1/3) sum_k G_X^k G_X'^k` — the projectors are
/// never materialized as matrices. Exists to validate the sector method.
pub fn brute_force_even_parity(theta_a: f64) -> Result<f64> {
    let mut amps: Vec<Complex64> = Vec::new();
    amps.try_reserve_exact(BIG_DIM).map_err(|_| {
        Error::ResourceLimit(format!(
            "cannot allocate {} MiB for the 24-qubit state; use the sector method instead",
            BIG_DIM * std::mem::size_of::<Complex64>() / (1024 * 1024)
        ))
    })?;

    let pair = six_singlets_state();
    let rotated = tau_rotation(&pair, theta_a, Posner::A);
    // |psi> = rotated_{AB} (x) unrotated_{A'B'}, little-endian: low 12 bits AB
    for hi in 0..DIM {
        let factor = pair.amplitudes[hi];
        if factor == Complex64::default() {
            // product stays zero across the whole low block
            amps.extend(std::iter::repeat(Complex64::default()).take(DIM));
            continue;
        }
        for lo in 0..DIM {
            amps.push(rotated.amplitudes[lo] * factor);
        }
    }

    let powers = perm_powers();
    // overlap <psi| G_A^j G_{A'}^j G_B^k G_{B'}^k |psi>
    let overlap = |j: usize, k: usize| -> Complex64 {
        // inverse permutation of G^j is G^(3-j); overlap computed as
        // sum_n conj(psi[n]) psi[sigma^{-1}(n)]
        let ia = &powers[(3 - j) % 3];
        let ib = &powers[(3 - k) % 3];
        let mut acc = Complex64::default();
        for (n, amp) in amps.iter().enumerate() {
            if *amp == Complex64::default() {
                continue;
            }
            let a = n & 0x3f;
            let b = (n >> 6) & 0x3f;
            let a2 = (n >> 12) & 0x3f;
            let b2 = (n >> 18) & 0x3f;
            let m = (ia[a] as usize)
                | ((ib[b] as usize) << 6)
                | ((ia[a2] as usize) << 12)
                | ((ib[b2] as usize) << 18);
            acc += amp.conj() * amps[m];
        }
        acc
    };

    let mut s = [[Complex64::default(); 3]; 3];
    for (j, row) in s.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            *entry = overlap(j, k);
        }
    }
    // Pi_even = 1 - Pi_AA' - Pi_BB' + 2 Pi_AA' Pi_BB'
    let pi_aa: Complex64 = (0..3).map(|j| s[j][0]).sum::<Complex64>() / 3.0;
    let pi_bb: Complex64 = (0..3).map(|k| s[0][k]).sum::<Complex64>() / 3.0;
    let joint: Complex64 =
        s.iter().flatten().copied().sum::<Complex64>() / 9.0;
    let p = 1.0 - pi_aa.re - pi_bb.re + 2.0 * joint.re;
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact curve value: p_even(theta) = 7/9 + (2/9) cos(theta).
    /// The published table prints these truncated to three decimals.
    fn analytic_even_binding(theta: f64) -> f64 {
        7.0 / 9.0 + 2.0 / 9.0 * theta.cos()
    }

    #[test]
    fn six_singlets_state_is_normalized() {
        let s = six_singlets_state();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_marginals_are_maximally_mixed() {
        let s = six_singlets_state();
        for qubit in [0usize, 3, 7, 11] {
            let mut z = 0.0;
            let mut x = Complex64::default();
            for (n, amp) in s.amplitudes().iter().enumerate() {
                let bit = (n >> qubit) & 1;
                z += (1.0 - 2.0 * bit as f64) * amp.norm_sqr();
                x += amp.conj() * s.amplitudes()[n ^ (1 << qubit)];
            }
            assert!(z.abs() < 1e-12, "<Z> on qubit {qubit} = {z}");
            assert!(x.norm() < 1e-12, "<X> on qubit {qubit} = {x}");
        }
    }

    #[test]
    fn unrotated_state_occupies_only_zero_sum_sectors() {
        let q = tau_sector_distribution(&six_singlets_state());
        q.validate().unwrap();
        assert!(q.off_diagonal_sum() < 1e-10, "off-sector weight {}", q.off_diagonal_sum());
        // support is exactly {(0,0), (1,2), (2,1)}
        assert!(q.q[0][0] > 0.3);
        assert!(q.q[1][2] > 0.3);
        assert!(q.q[2][1] > 0.3);
        assert!(q.q[1][1] < 1e-12 && q.q[2][2] < 1e-12);
        assert!(q.q[0][1] < 1e-12 && q.q[1][0] < 1e-12);
        assert!((q.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_is_identity_at_zero_and_composes() {
        let s = six_singlets_state();
        let r0 = tau_rotation(&s, 0.0, Posner::A);
        assert_eq!(s, r0);
        let a = tau_rotation(&tau_rotation(&s, 0.31, Posner::A), 0.87, Posner::A);
        let b = tau_rotation(&s, 1.18, Posner::A);
        let diff: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "composition mismatch {diff}");
    }

    #[test]
    fn opposite_rotations_transfer_between_posners() {
        // R_A(t1) R_B(-t2) |psi> equals R_A(t1 + t2) |psi> up to global phase
        let s = six_singlets_state();
        let (t1, t2) = (0.37, -1.21);
        let lhs = tau_rotation(&tau_rotation(&s, t1, Posner::A), -t2, Posner::B);
        let rhs = tau_rotation(&s, t1 + t2, Posner::A);
        assert!((lhs.overlap_magnitude(&rhs) - 1.0).abs() < 1e-12);
        assert!((lhs.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_norm_for_random_states() {
        // pseudo-random dense state, fixed recurrence for reproducibility
        let mut seedval = 1u64;
        let mut next = || {
            seedval = seedval.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seedval >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..10 {
            let mut amps: Vec<Complex64> =
                (0..DIM).map(|_| Complex64::new(next(), next())).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for a in &mut amps {
                *a /= norm;
            }
            let state = PosnerPairState::from_amplitudes(amps);
            let rotated = tau_rotation(&state, 2.13, Posner::B);
            assert!((rotated.norm() - 1.0).abs() < 1e-12);
            let q = tau_sector_distribution(&rotated);
            assert!((q.total() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sector_projection_is_idempotent() {
        let s = tau_rotation(&six_singlets_state(), 0.9, Posner::A);
        for ta in 0..3 {
            for tb in 0..3 {
                let once = project_sector(&s, ta, tb);
                let twice = project_sector(&once, ta, tb);
                let diff: f64 = once
                    .amplitudes()
                    .iter()
                    .zip(twice.amplitudes())
                    .map(|(u, v)| (u - v).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12, "sector ({ta},{tb}) not idempotent: {diff}");
                // projected norm^2 equals the sector weight
                let w = tau_sector_distribution(&s).q[ta][tb];
                assert!((once.norm().powi(2) - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn binding_table_values() {
        // theta = 0: unit even-parity probability
        assert!((even_binding_probability(0.0) - 1.0).abs() < 1e-12);
        // published table: +-pi/4 -> 0.934..., 3pi/4 -> 0.620... (truncated)
        let p_plus = even_binding_probability(std::f64::consts::FRAC_PI_4);
        let p_minus = even_binding_probability(-std::f64::consts::FRAC_PI_4);
        let p_34 = even_binding_probability(3.0 * std::f64::consts::FRAC_PI_4);
        assert!((p_plus - analytic_even_binding(std::f64::consts::FRAC_PI_4)).abs() < 1e-12);
        assert!((p_plus - p_minus).abs() < 1e-12);
        assert!((p_34 - analytic_even_binding(3.0 * std::f64::consts::FRAC_PI_4)).abs() < 1e-12);
        // three-decimal truncation matches the printed table
        assert_eq!((p_plus * 1000.0).floor(), 934.0);
        assert_eq!((p_34 * 1000.0).floor(), 620.0);
    }

    #[test]
    fn binding_curve_shape() {
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 * std::f64::consts::PI / 16.0).collect();
        let curve = even_binding_curve(&grid).unwrap();
        assert!((curve[0].1 - 1.0).abs() < 1e-12);
        for w in curve.windows(2) {
            assert!(w[1].1 < w[0].1 + 1e-12, "curve not decreasing at {}", w[1].0);
        }
        for &(theta, p) in &curve {
            assert!((p - analytic_even_binding(theta)).abs() < 1e-12);
        }
        assert!(even_binding_curve(&[]).is_err());
    }

    #[test]
    fn game_win_probability_beats_classical() {
        let w = posner_game_win_probability();
        assert!(w > 0.795, "win probability {w}");
        assert!(w > 0.75);
        // equals 3/4 p_even(pi/4) + 1/4 (1 - p_even(3 pi/4))
        let expect = 0.75 * analytic_even_binding(std::f64::consts::FRAC_PI_4)
            + 0.25 * (1.0 - analytic_even_binding(3.0 * std::f64::consts::FRAC_PI_4));
        assert!((w - expect).abs() < 1e-12);
        // the paper reports the truncated-table estimate 0.7955
        assert!((w - 0.7955).abs() < 1e-3);
    }
}
