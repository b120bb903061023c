//! Polar codes of length `μ = 2ⁿ`: construction for a BI-AWGN channel,
//! encoding, and successive-cancellation (SC) decoding.
//!
//! Bit vectors use natural index order and the transform
//! `x = (enc(u_a) ⊕ enc(u_b), enc(u_b))` for `u = (u_a, u_b)`, i.e.
//! `x = u·F^{⊗n}` with `F = [[1, 0], [1, 1]]` and no bit reversal. Frozen
//! positions carry 0. LLRs are `ln P(0)/P(1)`, so positive means bit 0.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::trial_rng;
use crate::error::{invalid, Error, Result};

/// A polar code with its information set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    mu: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
    design_noise_power: f64,
}

impl PolarCode {
    /// Builds a code from an explicit information set, e.g. one read back
    /// from a config file.
    pub fn from_info_set(
        mu: usize,
        mut info_set: Vec<usize>,
        design_noise_power: f64,
    ) -> Result<Self> {
        check_length(mu)?;
        info_set.sort_unstable();
        if info_set.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("info_set", "contains duplicates"));
        }
        if let Some(&bad) = info_set.iter().find(|&&i| i >= mu) {
            return Err(invalid("info_set", format!("index {bad} >= mu = {mu}")));
        }
        let mut frozen = vec![true; mu];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(Self {
            mu,
            info_set,
            frozen,
            design_noise_power,
        })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// Sorted information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn dimension(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.info_set.len() as f64 / self.mu as f64
    }

    pub fn design_noise_power(&self) -> f64 {
        self.design_noise_power
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }
}

fn check_length(mu: usize) -> Result<()> {
    if mu == 0 || !mu.is_power_of_two() {
        return Err(invalid("mu", format!("{mu} is not a power of two")));
    }
    Ok(())
}

/// Selects the `round(μ·rate)` most reliable synthetic channels for a
/// BI-AWGN channel with noise power `noise_power`.
///
/// Reliability is the mean LLR of each synthetic channel under the Gaussian
/// approximation of density evolution; ties go to the lower index.
pub fn construct(mu: usize, rate: f64, noise_power: f64) -> Result<PolarCode> {
    check_length(mu)?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid("rate", format!("{rate} is outside [0, 1]")));
    }
    if !(noise_power > 0.0) || !noise_power.is_finite() {
        return Err(invalid(
            "noise_power",
            format!("{noise_power} is not positive"),
        ));
    }
    let k = (mu as f64 * rate).round() as usize;
    let means = channel_mean_llrs(mu, 2.0 / noise_power);
    let info = most_reliable(&means, k);
    PolarCode::from_info_set(mu, info, noise_power)
}

/// Indices of the `k` largest scores (ties to the lower index), sorted.
pub fn most_reliable(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut info: Vec<usize> = order.into_iter().take(k).collect();
    info.sort_unstable();
    info
}

/// Mean LLR of each synthetic channel when the physical channel's LLR is
/// `N(m₀, 2m₀)`, following `means(N, m) = means(N/2, m⁻) ++ means(N/2, m⁺)`
/// with `m⁻` the check combination and `m⁺ = 2m`.
pub fn channel_mean_llrs(mu: usize, m0: f64) -> Vec<f64> {
    let mut means = vec![m0];
    while means.len() < mu {
        // Each pass adds the least significant index bit, so every entry
        // splits into an adjacent (m⁻, m⁺) pair.
        means = means
            .iter()
            .flat_map(|&m| [check_mean(m), 2.0 * m])
            .collect();
    }
    means
}

/// Chung's approximation of `1 − E tanh(L/2)`, `L ~ N(m, 2m)`, in logs.
fn log_phi(m: f64) -> f64 {
    if m <= 0.0 {
        0.0
    } else if m < 10.0 {
        -0.4527 * m.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / m).ln() - m / 4.0 + (1.0 - 10.0 / (7.0 * m)).ln()
    }
}

/// Inverse of [`log_phi`] (which is decreasing) by bisection.
fn inverse_log_phi(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while log_phi(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean after a check combination of two independent channels of mean `m`:
/// `φ⁻¹(1 − (1 − φ(m))²)`.
fn check_mean(m: f64) -> f64 {
    let lp = log_phi(m);
    // ln(1 − (1 − φ)²) = ln φ + ln(2 − φ).
    inverse_log_phi(lp + (2.0 - lp.exp()).ln())
}

/// In-place `x ↦ x·F^{⊗n}` over GF(2); an involution.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut span = 1;
    while span < n {
        for block in (0..n).step_by(2 * span) {
            for k in block..block + span {
                bits[k] ^= bits[k + span];
            }
        }
        span *= 2;
    }
}

/// Places `info` on the information set, zeros elsewhere, and transforms.
pub fn polar_encode_bits(info: &[u8], code: &PolarCode) -> Result<Vec<u8>> {
    if info.len() != code.dimension() {
        return Err(Error::LengthMismatch {
            expected: code.dimension(),
            actual: info.len(),
        });
    }
    if info.iter().any(|&b| b > 1) {
        return Err(invalid("info", "bits must be 0 or 1"));
    }
    let mut u = vec![0u8; code.mu];
    for (&pos, &bit) in code.info_set.iter().zip(info) {
        u[pos] = bit;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// As [`polar_encode_bits`], modulated `0 ↦ +1`, `1 ↦ −1`.
pub fn polar_encode(info: &[u8], code: &PolarCode) -> Result<Vec<i8>> {
    Ok(crate::modcode::modulate(&polar_encode_bits(info, code)?))
}

/// `2·atanh(tanh(a/2)·tanh(b/2))`, evaluated without overflow.
///
/// The log form cancels two terms near ln 2 when both inputs are small,
/// which can zero or even flip tiny outputs, so small inputs use the
/// tanh form directly.
#[inline]
fn check_combine(a: f64, b: f64) -> f64 {
    let (x, y) = (a.abs(), b.abs());
    let magnitude = if x.min(y) < 16.0 {
        2.0 * ((0.5 * x).tanh() * (0.5 * y).tanh()).atanh()
    } else {
        x.min(y) + (-(x + y)).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p()
    };
    if (a < 0.0) != (b < 0.0) {
        -magnitude
    } else {
        magnitude
    }
}

#[inline]
fn decide(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Successive-cancellation decoder with reusable scratch buffers.
#[derive(Debug, Default)]
pub struct ScDecoder {
    scratch: Vec<f64>,
    u: Vec<u8>,
    x: Vec<u8>,
    leaves: Vec<f64>,
    operations: u64,
}

impl ScDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of LLR combinations performed by the last decode:
    /// `μ·log₂ μ`.
    pub fn operations(&self) -> u64 {
        self.operations
    }

    /// Decision LLR of each `u_i` in the last decode.
    pub fn leaf_llrs(&self) -> &[f64] {
        &self.leaves
    }

    /// Decodes `llrs` and returns the information bits.
    pub fn decode(&mut self, llrs: &[f64], code: &PolarCode) -> Result<Vec<u8>> {
        self.run(llrs, &code.frozen)?;
        Ok(code.info_set.iter().map(|&i| self.u[i]).collect())
    }

    /// Genie-aided pass for the all-zero codeword: every decision is forced
    /// to 0, so [`Self::leaf_llrs`] holds the LLR each synthetic channel
    /// would see with all earlier bits known.
    pub fn genie_pass(&mut self, llrs: &[f64]) -> Result<()> {
        let all_frozen = vec![true; llrs.len()];
        self.run(llrs, &all_frozen)
    }

    fn run(&mut self, llrs: &[f64], frozen: &[bool]) -> Result<()> {
        let mu = frozen.len();
        if llrs.len() != mu {
            return Err(Error::LengthMismatch {
                expected: mu,
                actual: llrs.len(),
            });
        }
        if llrs.iter().any(|l| l.is_nan()) {
            return Err(invalid("llrs", "contain NaN"));
        }
        self.scratch.resize(mu, 0.0);
        self.u.resize(mu, 0);
        self.x.resize(mu, 0);
        self.leaves.resize(mu, 0.0);
        self.operations = 0;
        decode_node(
            llrs,
            frozen,
            &mut self.u,
            &mut self.x,
            &mut self.leaves,
            &mut self.scratch,
            &mut self.operations,
        );
        Ok(())
    }
}

fn decode_node(
    llrs: &[f64],
    frozen: &[bool],
    u: &mut [u8],
    x: &mut [u8],
    leaves: &mut [f64],
    scratch: &mut [f64],
    operations: &mut u64,
) {
    let n = llrs.len();
    if n == 1 {
        leaves[0] = llrs[0];
        u[0] = if frozen[0] { 0 } else { decide(llrs[0]) };
        x[0] = u[0];
        return;
    }
    let half = n / 2;
    let (child, rest) = scratch.split_at_mut(half);
    let (u_a, u_b) = u.split_at_mut(half);
    let (x_a, x_b) = x.split_at_mut(half);
    let (leaves_a, leaves_b) = leaves.split_at_mut(half);
    let (frozen_a, frozen_b) = frozen.split_at(half);

    for k in 0..half {
        child[k] = check_combine(llrs[k], llrs[k + half]);
    }
    decode_node(child, frozen_a, u_a, x_a, leaves_a, rest, operations);
    for k in 0..half {
        child[k] = llrs[k + half] + if x_a[k] == 0 { llrs[k] } else { -llrs[k] };
    }
    decode_node(child, frozen_b, u_b, x_b, leaves_b, rest, operations);
    for k in 0..half {
        x_a[k] ^= x_b[k];
    }
    *operations += n as u64;
}

/// One-shot SC decode; see [`ScDecoder`].
pub fn sc_decode(llrs: &[f64], code: &PolarCode) -> Result<Vec<u8>> {
    ScDecoder::new().decode(llrs, code)
}

/// Monte-Carlo estimate of each synthetic channel's genie-aided error rate
/// on a BI-AWGN channel with noise power `noise_power`.
///
/// This is the reference that density-evolution construction is checked
/// against; trials are independent streams of `seed`.
pub fn monte_carlo_error_rates(
    mu: usize,
    noise_power: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_length(mu)?;
    if !(noise_power > 0.0) {
        return Err(invalid(
            "noise_power",
            format!("{noise_power} is not positive"),
        ));
    }
    const BATCH: u64 = 256;
    let sigma = noise_power.sqrt();
    let batches = trials.div_ceil(BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut decoder = ScDecoder::new();
            let mut llrs = vec![0.0; mu];
            let mut errors = vec![0.0f64; mu];
            for trial in batch * BATCH..((batch + 1) * BATCH).min(trials) {
                let mut rng = trial_rng(seed, trial);
                for l in llrs.iter_mut() {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    *l = 2.0 * (1.0 + sigma * noise) / noise_power;
                }
                decoder.genie_pass(&llrs).expect("lengths match");
                for (e, &l) in errors.iter_mut().zip(decoder.leaf_llrs()) {
                    *e += if l < 0.0 {
                        1.0
                    } else if l == 0.0 {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            errors
        })
        .collect::<Vec<_>>();
    let mut total = vec![0.0; mu];
    for batch in counts {
        for (t, e) in total.iter_mut().zip(batch) {
            *t += e;
        }
    }
    Ok(total.into_iter().map(|e| e / trials as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_butterfly() {
        let code = PolarCode::from_info_set(2, vec![1], 1.0).unwrap();
        assert_eq!(polar_encode_bits(&[1], &code).unwrap(), vec![1, 1]);
        assert_eq!(polar_encode(&[1], &code).unwrap(), vec![-1, -1]);
        let code = PolarCode::from_info_set(2, vec![0], 1.0).unwrap();
        assert_eq!(polar_encode_bits(&[1], &code).unwrap(), vec![1, 0]);
    }

    #[test]
    fn transform_is_an_involution_and_recursive() {
        let mut bits: Vec<u8> = (0..16).map(|k| ((k * 7 + 3) % 5 % 2) as u8).collect();
        let orig = bits.clone();
        polar_transform(&mut bits);
        // x = (enc(u_a) ⊕ enc(u_b), enc(u_b)).
        let (mut a, mut b) = (orig[..8].to_vec(), orig[8..].to_vec());
        polar_transform(&mut a);
        polar_transform(&mut b);
        let expected: Vec<u8> = a
            .iter()
            .zip(&b)
            .map(|(p, q)| p ^ q)
            .chain(b.iter().copied())
            .collect();
        assert_eq!(bits, expected);
        polar_transform(&mut bits);
        assert_eq!(bits, orig);
    }

    #[test]
    fn construction_edges() {
        assert!(construct(64, 0.0, 1.0).unwrap().info_set().is_empty());
        assert_eq!(
            construct(64, 1.0, 1.0).unwrap().info_set(),
            (0..64).collect::<Vec<_>>()
        );
        assert!(construct(48, 0.5, 1.0).is_err());
        assert!(construct(64, 1.5, 1.0).is_err());
        assert!(construct(64, 0.5, 0.0).is_err());
        let code = construct(1024, 0.5, 1.0).unwrap();
        assert_eq!(code.dimension(), 512);
        assert_eq!(code, construct(1024, 0.5, 1.0).unwrap());
        // The last channel is always the best and the first the worst.
        assert!(code.info_set().contains(&1023) && !code.info_set().contains(&0));
    }

    #[test]
    fn mean_llrs_follow_the_recursion() {
        let means = channel_mean_llrs(4, 2.0);
        let (minus, plus) = (check_mean(2.0), 4.0);
        let expected = [check_mean(minus), 2.0 * minus, check_mean(plus), 2.0 * plus];
        for (a, b) in means.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        // Large means stay finite and ordered.
        assert!(check_mean(5000.0) > 4000.0 && check_mean(5000.0) < 5000.0);
        assert!((inverse_log_phi(log_phi(3.0)) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn box_plus_matches_definition() {
        for &(a, b) in &[(0.3, -1.2), (4.0, 5.0), (-2.0, -0.1), (0.0, 3.0)] {
            let exact = 2.0 * (f64::tanh(a / 2.0) * f64::tanh(b / 2.0)).atanh();
            assert!((check_combine(a, b) - exact).abs() < 1e-12);
        }
        assert!((check_combine(800.0, -900.0) + 800.0).abs() < 1e-9);
        let large = 20.0 + (-50.0f64).exp().ln_1p() - (-10.0f64).exp().ln_1p();
        assert!((check_combine(20.0, 30.0) - large).abs() < 1e-12);
        // Tiny inputs keep their product-like magnitude and sign.
        let tiny = check_combine(1e-9, -2e-9);
        assert!(tiny < 0.0 && (tiny + 1e-18).abs() < 1e-24);
    }

    #[test]
    fn noiseless_round_trip_and_operation_count() {
        let code = construct(256, 0.4, 0.5).unwrap();
        let info: Vec<u8> = (0..code.dimension())
            .map(|k| ((k * 13) % 3 == 0) as u8)
            .collect();
        let word = polar_encode(&info, &code).unwrap();
        let llrs: Vec<f64> = word.iter().map(|&s| 4.0 * f64::from(s)).collect();
        let mut decoder = ScDecoder::new();
        assert_eq!(decoder.decode(&llrs, &code).unwrap(), info);
        assert_eq!(decoder.operations(), 256 * 8);
    }

    #[test]
    fn zero_llrs_decode_to_zeros() {
        let code = construct(32, 0.5, 1.0).unwrap();
        assert_eq!(sc_decode(&[0.0; 32], &code).unwrap(), vec![0; 16]);
        assert!(sc_decode(&[0.0; 16], &code).is_err());
        assert!(polar_encode(&[0; 3], &code).is_err());
    }
}
