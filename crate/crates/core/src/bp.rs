//! Belief propagation over the weight-3 checks `a_{0,i} = a_{0,j}·a_{i,j}`,
//! estimating information bits only.
//!
//! Three variants share one workspace:
//!
//! * **full** — every ordered pair `(i, j)` carries its own message, and
//!   the message bit `j` sends toward bit `i` excludes what `j` learned
//!   through the check `[i, j]` in the previous round;
//! * **simplified** — every bit broadcasts one offset `u_j = tanh(h_j/2)`
//!   to all checks;
//! * **frozen** — the simplified variant with a prefix of bits known; a
//!   known bit's checks reduce to repetitions `a_j·u_{i,j}`.
//!
//! Offsets `u = 2q - 1` and log-likelihoods `h` are related by
//! `u = tanh(h/2)`. A check combines offsets multiplicatively, so bit `i`
//! gathers `h_i = 2 z_{0,i} + Σ_j 2 atanh(u_{i,j} u_j)` where
//! `u_{i,j} = tanh(z_{i,j})`. The term `2 z_{0,i}` is the bit's own channel
//! observation (the check through the constant vertex 0).
//!
//! The sum of `2 atanh(p) = ln((1+p)/(1-p))` terms is accumulated as the log
//! of a running product over chunks of 16 edges, so a round costs one
//! logarithm per 16 edges rather than one per edge. Updates are Jacobi:
//! round `ℓ+1` reads only round-`ℓ` values.

use std::ops::Range;

use crate::channel::ReceivedBlock;
use crate::error::{invalid, Error, Result};

/// Offsets are clamped to `±(1 - OFFSET_CLAMP)` before `atanh`.
pub const OFFSET_CLAMP: f64 = 1e-12;
const MAX_OFFSET: f64 = 1.0 - OFFSET_CLAMP;
const CHUNK: usize = 16;

/// Round count and instrumentation for one decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpConfig {
    pub iterations: usize,
    /// Stop once the hard decisions repeat across two consecutive rounds.
    pub early_exit: bool,
    /// Record per-round moments of the bit offsets.
    pub trace: bool,
}

impl BpConfig {
    pub fn fixed(iterations: usize) -> Self {
        Self {
            iterations,
            early_exit: false,
            trace: false,
        }
    }

    pub fn traced(iterations: usize) -> Self {
        Self {
            iterations,
            early_exit: false,
            trace: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations", "need at least one round"));
        }
        Ok(())
    }
}

/// Empirical power moments of the undecided bit offsets after one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetMoments {
    pub mean: f64,
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// `sign(llh)` as ±1, ties resolved to `+1`.
    pub hard_bits: Vec<i8>,
    pub llh: Vec<f64>,
    pub iterations_used: usize,
    /// Edge evaluations performed (one per `(i, j)` visit per round).
    pub edge_updates: u64,
    /// `trace[ℓ]` holds the moments of `u_{·|ℓ}`; empty unless requested.
    pub trace: Vec<OffsetMoments>,
}

/// Statistics of a run on a [`Decoder`] workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub iterations_used: usize,
    pub edge_updates: u64,
    pub trace: Vec<OffsetMoments>,
}

/// Hard decision with the `h = 0 ↦ +1` tie rule.
#[inline]
pub fn hard_decision(h: f64) -> i8 {
    if h < 0.0 {
        -1
    } else {
        1
    }
}

/// `ceil(2 ln m / ln c)`, at least 1; refused for `c <= 1`.
pub fn default_iterations(m: usize, c: f64) -> Result<usize> {
    iterations_for(m as f64, c)
}

/// [`default_iterations`] for a real-valued dimension.
pub fn iterations_for(m: f64, c: f64) -> Result<usize> {
    if !(c > 1.0) {
        return Err(invalid(
            "c",
            format!("{c} <= 1: decoding does not converge, pass an explicit round count"),
        ));
    }
    let rounds = 2.0 * m.ln() / c.ln();
    // Absorb rounding so that exact integers (e.g. m=128, c=4) stay put.
    Ok(((rounds - 1e-9).ceil() as usize).max(1))
}

/// Reusable buffers for decoding many blocks of the same dimension.
#[derive(Debug, Clone)]
pub struct Decoder {
    m: usize,
    /// `tanh(z_{i,j})`, dense and symmetric with a zero diagonal.
    parity: Vec<f64>,
    /// `z_{0,i}`.
    intrinsic: Vec<f64>,
    /// Broadcast offsets (simplified/frozen).
    offsets: Vec<f64>,
    /// `incoming[i*m + j]`: offset of bit `j` as used by bit `i` (full).
    incoming: Vec<f64>,
    /// `ratio[i*m + j] = (1+p)/(1-p)` of the message into `i` via `[i, j]`.
    ratio: Vec<f64>,
    llh: Vec<f64>,
    hard: Vec<i8>,
    loaded: bool,
}

impl Decoder {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            parity: vec![0.0; m * m],
            intrinsic: vec![0.0; m],
            offsets: vec![0.0; m],
            incoming: Vec::new(),
            ratio: Vec::new(),
            llh: vec![0.0; m],
            hard: vec![1; m],
            loaded: false,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Log-likelihoods `h_{i|L}` of the last run (0-based bits).
    pub fn llh(&self) -> &[f64] {
        &self.llh
    }

    /// Reads a rescaled block and precomputes `u_{i,j} = tanh(z_{i,j})`.
    pub fn load(&mut self, z: &ReceivedBlock) -> Result<()> {
        if !z.is_scaled() {
            return Err(Error::NotScaled);
        }
        if z.m() != self.m {
            return Err(invalid(
                "block",
                format!("decoder has m={}, block has m={}", self.m, z.m()),
            ));
        }
        let m = self.m;
        let values = z.values();
        // Colexicographic walk: for vertex j, positions [0, j], [1, j], …, [j-1, j].
        let mut k = 0;
        for j in 1..=m {
            self.intrinsic[j - 1] = values[k];
            k += 1;
            for i in 1..j {
                let u = values[k].tanh();
                self.parity[(i - 1) * m + (j - 1)] = u;
                self.parity[(j - 1) * m + (i - 1)] = u;
                k += 1;
            }
        }
        for i in 0..m {
            self.parity[i * m + i] = 0.0;
        }
        self.loaded = true;
        Ok(())
    }

    fn check_ready(&self, cfg: &BpConfig) -> Result<()> {
        cfg.validate()?;
        if !self.loaded {
            return Err(invalid("decoder", "no block loaded"));
        }
        Ok(())
    }

    /// Simplified variant with bits `0..known.len()` fixed to `known`.
    pub fn run_frozen(&mut self, known: &[i8], cfg: &BpConfig) -> Result<RunStats> {
        self.check_ready(cfg)?;
        let m = self.m;
        if known.len() > m {
            return Err(invalid(
                "known",
                format!("{} frozen bits exceed m={m}", known.len()),
            ));
        }
        if let Some(bad) = known.iter().find(|&&a| a != 1 && a != -1) {
            return Err(invalid("known", format!("entry {bad} is not ±1")));
        }
        let first = known.len();
        self.hard.fill(0);
        for (o, &a) in self.offsets.iter_mut().zip(known) {
            *o = f64::from(a);
        }
        self.offsets[first..].copy_from_slice(&self.intrinsic[first..]);
        for (h, &a) in self.llh.iter_mut().zip(known) {
            *h = if a > 0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }

        let mut stats = RunStats {
            iterations_used: 0,
            edge_updates: 0,
            trace: Vec::new(),
        };
        if cfg.trace {
            stats.trace.push(moments(&self.offsets[first..]));
        }
        for round in 1..=cfg.iterations {
            for i in first..m {
                let row = &self.parity[i * m..(i + 1) * m];
                self.llh[i] = 2.0 * self.intrinsic[i] + log_ratio_sum(row, &self.offsets);
            }
            stats.edge_updates += ((m - first) * m) as u64;
            stats.iterations_used = round;
            for i in first..m {
                self.offsets[i] = (0.5 * self.llh[i]).tanh();
            }
            if cfg.trace {
                stats.trace.push(moments(&self.offsets[first..]));
            }
            if cfg.early_exit && self.decisions_stable(first) && round < cfg.iterations {
                break;
            }
        }
        debug_assert!(stats.edge_updates <= (cfg.iterations * m * m) as u64);
        Ok(stats)
    }

    /// Full variant with per-edge extrinsic messages.
    pub fn run_full(&mut self, cfg: &BpConfig) -> Result<RunStats> {
        self.check_ready(cfg)?;
        let m = self.m;
        self.incoming.resize(m * m, 0.0);
        self.ratio.resize(m * m, 0.0);
        self.hard.fill(0);
        for i in 0..m {
            for j in 0..m {
                self.incoming[i * m + j] = self.intrinsic[j].tanh();
            }
        }

        let mut stats = RunStats {
            iterations_used: 0,
            edge_updates: 0,
            trace: Vec::new(),
        };
        if cfg.trace {
            self.offsets.copy_from_slice(&self.intrinsic);
            stats.trace.push(moments(&self.offsets));
        }
        for round in 1..=cfg.iterations {
            // A-B: per-edge ratios and their log-sum.
            for i in 0..m {
                let row = i * m..(i + 1) * m;
                let sum = edge_ratios(
                    &self.parity[row.clone()],
                    &self.incoming[row.clone()],
                    &mut self.ratio[row],
                );
                self.llh[i] = 2.0 * self.intrinsic[i] + sum;
            }
            stats.edge_updates += (m * m) as u64;
            stats.iterations_used = round;
            if cfg.trace {
                for (o, &h) in self.offsets.iter_mut().zip(&self.llh) {
                    *o = (0.5 * h).tanh();
                }
                stats.trace.push(moments(&self.offsets));
            }
            let stop = cfg.early_exit && self.decisions_stable(0);
            if round == cfg.iterations || stop {
                break;
            }
            // C: message i → j is tanh((h_i - h_i(j))/2) = (R_i - r_ij)/(R_i + r_ij).
            for i in 0..m {
                let h = self.llh[i];
                let outgoing = &self.ratio[i * m..(i + 1) * m];
                if h.abs() < 600.0 {
                    let total = h.exp();
                    for (j, &r) in outgoing.iter().enumerate() {
                        self.incoming[j * m + i] = (total - r) / (total + r);
                    }
                } else {
                    let s = h.signum();
                    for j in 0..m {
                        self.incoming[j * m + i] = s;
                    }
                }
            }
        }
        Ok(stats)
    }

    fn decisions_stable(&mut self, first: usize) -> bool {
        let mut stable = true;
        for i in first..self.m {
            let d = hard_decision(self.llh[i]);
            if d != self.hard[i] {
                stable = false;
                self.hard[i] = d;
            }
        }
        stable
    }

    fn result(&self, outputs: Range<usize>, stats: RunStats) -> DecodeResult {
        let llh = self.llh[outputs].to_vec();
        DecodeResult {
            hard_bits: llh.iter().map(|&h| hard_decision(h)).collect(),
            llh,
            iterations_used: stats.iterations_used,
            edge_updates: stats.edge_updates,
            trace: stats.trace,
        }
    }
}

/// `Σ_j ln((1+p_j)/(1-p_j))` with `p_j = clamp(row_j · offsets_j)`.
#[inline]
fn log_ratio_sum(row: &[f64], offsets: &[f64]) -> f64 {
    let mut total = 0.0;
    for (rc, oc) in row.chunks(CHUNK).zip(offsets.chunks(CHUNK)) {
        let mut num = [1.0f64; 4];
        let mut den = [1.0f64; 4];
        for (k, (&a, &b)) in rc.iter().zip(oc).enumerate() {
            let p = (a * b).clamp(-MAX_OFFSET, MAX_OFFSET);
            num[k & 3] *= 1.0 + p;
            den[k & 3] *= 1.0 - p;
        }
        total +=
            ((num[0] * num[1]) * (num[2] * num[3]) / ((den[0] * den[1]) * (den[2] * den[3]))).ln();
    }
    total
}

/// Stores each edge's likelihood ratio and returns the sum of their logs.
#[inline]
fn edge_ratios(row: &[f64], incoming: &[f64], ratio: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for ((rc, ic), out) in row
        .chunks(CHUNK)
        .zip(incoming.chunks(CHUNK))
        .zip(ratio.chunks_mut(CHUNK))
    {
        let mut prod = [1.0f64; 4];
        for (k, ((&a, &b), o)) in rc.iter().zip(ic).zip(out.iter_mut()).enumerate() {
            let p = (a * b).clamp(-MAX_OFFSET, MAX_OFFSET);
            let r = (1.0 + p) / (1.0 - p);
            *o = r;
            prod[k & 3] *= r;
        }
        total += ((prod[0] * prod[1]) * (prod[2] * prod[3])).ln();
    }
    total
}

fn moments(offsets: &[f64]) -> OffsetMoments {
    let n = offsets.len().max(1) as f64;
    OffsetMoments {
        mean: offsets.iter().sum::<f64>() / n,
        second_moment: offsets.iter().map(|u| u * u).sum::<f64>() / n,
    }
}

/// Full belief propagation with extrinsic message exclusion.
pub fn decode_full(z: &ReceivedBlock, cfg: &BpConfig) -> Result<DecodeResult> {
    let mut dec = Decoder::new(z.m());
    dec.load(z)?;
    let stats = dec.run_full(cfg)?;
    Ok(dec.result(0..z.m(), stats))
}

/// Belief propagation with one shared offset per bit.
pub fn decode_simplified(z: &ReceivedBlock, cfg: &BpConfig) -> Result<DecodeResult> {
    decode_frozen(z, &[], 0..z.m(), cfg)
}

/// Simplified decoding with bits `0..known.len()` known; returns the
/// decisions for `outputs`, which must lie past the known prefix.
pub fn decode_frozen(
    z: &ReceivedBlock,
    known: &[i8],
    outputs: Range<usize>,
    cfg: &BpConfig,
) -> Result<DecodeResult> {
    if outputs.start < known.len() {
        return Err(Error::FrozenOverlap {
            known: known.len(),
            start: outputs.start,
        });
    }
    if outputs.end > z.m() || outputs.start > outputs.end {
        return Err(invalid(
            "outputs",
            format!("{outputs:?} is not inside 0..{}", z.m()),
        ));
    }
    let mut dec = Decoder::new(z.m());
    dec.load(z)?;
    let stats = dec.run_frozen(known, cfg)?;
    Ok(dec.result(outputs, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rescale, transmit, CodeParams};
    use crate::modcode::{info_position, pair_count};

    fn noiseless(m: usize, c: f64) -> ReceivedBlock {
        let p = CodeParams::from_c(m, c).unwrap();
        let y = ReceivedBlock::new(m, vec![1.0; pair_count(m)], false).unwrap();
        rescale(&y, &p).unwrap()
    }

    /// Direct per-edge evaluation of one simplified round.
    fn reference_round(z: &ReceivedBlock, offsets: &[f64]) -> Vec<f64> {
        let m = z.m();
        (1..=m)
            .map(|i| {
                let mut h = 2.0 * z.get(0, i);
                for j in 1..=m {
                    if j != i {
                        h += 2.0 * (z.get(i, j).tanh() * offsets[j - 1]).atanh();
                    }
                }
                h
            })
            .collect()
    }

    #[test]
    fn iteration_policy() {
        assert_eq!(default_iterations(128, 4.0).unwrap(), 7);
        assert_eq!(
            iterations_for(std::f64::consts::E.powi(2), std::f64::consts::E.powi(2)).unwrap(),
            2
        );
        assert_eq!(default_iterations(128, std::f64::consts::E).unwrap(), 10);
        assert_eq!(default_iterations(2, 1000.0).unwrap(), 1);
        assert!(default_iterations(128, 1.0).is_err());
        assert!(default_iterations(128, 0.5).is_err());
    }

    #[test]
    fn chunked_sum_matches_direct_atanh() {
        let p = CodeParams::from_c(37, 3.0).unwrap();
        let y = transmit(&vec![1; p.n], &p, 11).unwrap();
        let z = rescale(&y, &p).unwrap();
        let r = decode_simplified(&z, &BpConfig::fixed(1)).unwrap();
        let initial: Vec<f64> = (1..=37).map(|j| z.get(0, j)).collect();
        let expected = reference_round(&z, &initial);
        for (a, b) in r.llh.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn noiseless_decodes_to_all_one() {
        let z = noiseless(24, 4.0);
        for l in [1, 3, 8] {
            assert!(decode_full(&z, &BpConfig::fixed(l))
                .unwrap()
                .hard_bits
                .iter()
                .all(|&b| b == 1));
            assert!(decode_simplified(&z, &BpConfig::fixed(l))
                .unwrap()
                .hard_bits
                .iter()
                .all(|&b| b == 1));
        }
    }

    #[test]
    fn flipped_information_symbol_is_corrected() {
        let m = 64;
        let mut z = noiseless(m, 4.0);
        let k = info_position(1);
        z.values_mut()[k] = -z.values()[k];
        for r in [
            decode_full(&z, &BpConfig::fixed(8)).unwrap(),
            decode_simplified(&z, &BpConfig::fixed(8)).unwrap(),
        ] {
            assert_eq!(r.hard_bits[0], 1);
            assert!(r.hard_bits.iter().all(|&b| b == 1));
        }
    }

    #[test]
    fn unscaled_block_is_rejected() {
        let y = ReceivedBlock::new(4, vec![1.0; 10], false).unwrap();
        assert_eq!(decode_full(&y, &BpConfig::fixed(2)), Err(Error::NotScaled));
        let z = noiseless(4, 4.0);
        assert!(decode_full(&z, &BpConfig::fixed(0)).is_err());
    }

    #[test]
    fn frozen_overlap_is_rejected() {
        let z = noiseless(8, 4.0);
        assert_eq!(
            decode_frozen(&z, &[1, 1, 1], 2..8, &BpConfig::fixed(2)),
            Err(Error::FrozenOverlap { known: 3, start: 2 })
        );
        assert!(decode_frozen(&z, &[1, 2], 2..8, &BpConfig::fixed(2)).is_err());
    }

    #[test]
    fn single_unknown_bit_is_recovered() {
        let m = 16;
        let z = noiseless(m, 2.0);
        let r = decode_frozen(&z, &vec![1; m - 1], m - 1..m, &BpConfig::fixed(1)).unwrap();
        assert_eq!(r.hard_bits, vec![1]);
        assert!(r.llh[0] > 0.0);
    }

    #[test]
    fn zero_llh_ties_to_plus_one() {
        assert_eq!(hard_decision(0.0), 1);
        assert_eq!(hard_decision(-0.0), 1);
        assert_eq!(hard_decision(-1e-300), -1);
    }

    #[test]
    fn early_exit_stops_on_stable_decisions() {
        let z = noiseless(16, 4.0);
        let cfg = BpConfig {
            iterations: 20,
            early_exit: true,
            trace: false,
        };
        let r = decode_simplified(&z, &cfg).unwrap();
        assert!(r.iterations_used < 20);
        let r = decode_full(&z, &cfg).unwrap();
        assert!(r.iterations_used < 20);
    }

    #[test]
    fn work_is_linear_in_n_per_round() {
        let z = noiseless(50, 4.0);
        let n = pair_count(50) as u64;
        for l in [1, 4, 9] {
            let r = decode_simplified(&z, &BpConfig::fixed(l)).unwrap();
            assert!(r.edge_updates <= 3 * n * l as u64);
            let r = decode_full(&z, &BpConfig::fixed(l)).unwrap();
            assert!(r.edge_updates <= 3 * n * l as u64);
        }
    }
}
