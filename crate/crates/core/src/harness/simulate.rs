//! Monte-Carlo engines.
//!
//! Trials are split into fixed batches of consecutive trial indices and the
//! batches run on the rayon pool. Trial `t` draws everything from
//! `trial_rng(seed, t)`, and batch results are integer counts, so the totals
//! are identical for any thread count or schedule.

use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{hard_decision, BpConfig, Decoder};
use crate::channel::{transmit_all_one_scaled, trial_rng, CodeParams, ReceivedBlock};
use crate::error::{invalid, Result};
use crate::harness::stats::ErrorCount;
use crate::modcode::modulate;
use crate::multilevel::{ml_decode, ml_encode, Feedback, MultilevelScheme};
use crate::polar::polar_encode_bits;

/// Trials per work unit.
pub const BATCH: u64 = 64;

/// Which BP variant a sweep runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// One shared offset per bit.
    #[default]
    Simplified,
    /// Per-edge extrinsic messages.
    Full,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::Simplified => "simplified",
            DecoderKind::Full => "full",
        }
    }
}

/// Runs `f` over every batch of `0..trials` in parallel and merges the
/// results with `merge`, always in batch order.
fn batched<T, F, M>(trials: u64, f: F, merge: M) -> Result<T>
where
    T: Send + Default,
    F: Fn(std::ops::Range<u64>) -> Result<T> + Sync,
    M: Fn(&mut T, T) + Sync,
{
    let batches = trials.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|k| f(k * BATCH..((k + 1) * BATCH).min(trials)))
        .collect::<Result<Vec<T>>>()?;
    let mut total = T::default();
    for part in parts {
        merge(&mut total, part);
    }
    Ok(total)
}

/// BER of the all-one codeword with the first `known` information bits
/// frozen to +1; only the remaining `m − known` bits are counted.
pub fn simulate_ber(
    params: &CodeParams,
    known: usize,
    decoder: DecoderKind,
    cfg: &BpConfig,
    trials: u64,
    seed: u64,
) -> Result<ErrorCount> {
    let m = params.m;
    if known >= m {
        return Err(invalid(
            "known",
            format!("{known} leaves no bit of m={m} to decode"),
        ));
    }
    if known > 0 && decoder == DecoderKind::Full {
        return Err(invalid(
            "decoder",
            "frozen bits require the simplified decoder",
        ));
    }
    let frozen = vec![1i8; known];
    batched(
        trials,
        |range| {
            let mut dec = Decoder::new(m);
            let mut block = ReceivedBlock::new(m, vec![0.0; params.n], true)?;
            let mut count = ErrorCount::default();
            for trial in range {
                let mut rng = trial_rng(seed, trial);
                transmit_all_one_scaled(&mut block, params, &mut rng);
                dec.load(&block)?;
                match decoder {
                    DecoderKind::Simplified => dec.run_frozen(&frozen, cfg)?,
                    DecoderKind::Full => dec.run_full(cfg)?,
                };
                let errors = dec.llh()[known..]
                    .iter()
                    .filter(|&&h| hard_decision(h) < 0)
                    .count();
                count.record((m - known) as u64, errors as u64);
            }
            Ok(count)
        },
        |total, part| *total += part,
    )
}

/// Outcome of a multilevel Monte-Carlo run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultilevelCount {
    /// Hard-decision symbol errors entering each round's polar decoder.
    pub rounds: Vec<ErrorCount>,
    /// Errors in the decoded polar information bits.
    pub info: ErrorCount,
    /// Symbol errors of plain simplified BP on the same received blocks.
    pub bare: ErrorCount,
    pub bp_edge_updates: u64,
    pub polar_operations: u64,
}

impl MultilevelCount {
    fn merge(&mut self, other: Self) {
        if self.rounds.is_empty() {
            self.rounds = vec![ErrorCount::default(); other.rounds.len()];
        }
        for (mine, theirs) in self.rounds.iter_mut().zip(other.rounds) {
            *mine += theirs;
        }
        self.info += other.info;
        self.bare += other.bare;
        self.bp_edge_updates += other.bp_edge_updates;
        self.polar_operations += other.polar_operations;
    }
}

/// Sends uniformly random polar information blocks through the compound
/// code and decodes them with the multilevel decoder and, for comparison,
/// with plain simplified BP.
///
/// With `genie`, each round freezes the transmitted symbols instead of its
/// own decisions.
pub fn simulate_multilevel(
    scheme: &MultilevelScheme,
    cfg: &BpConfig,
    trials: u64,
    seed: u64,
    genie: bool,
) -> Result<MultilevelCount> {
    let config = scheme.config();
    let (b, mu, m) = (config.b, config.mu, config.m());
    let params = scheme.params();
    let sigma = params.sigma2.sqrt();
    batched(
        trials,
        |range| {
            let mut bare = Decoder::new(m);
            let mut count = MultilevelCount {
                rounds: vec![ErrorCount::default(); b],
                ..Default::default()
            };
            for trial in range {
                let mut rng = trial_rng(seed, trial);
                let blocks: Vec<Vec<u8>> = (0..b)
                    .map(|s| {
                        (0..scheme.block_len(s))
                            .map(|_| rng.random::<u8>() & 1)
                            .collect()
                    })
                    .collect();
                let mut truth = Vec::with_capacity(m);
                for (block, code) in blocks.iter().zip(scheme.codes()) {
                    truth.extend(modulate(&polar_encode_bits(block, code)?));
                }
                let word = ml_encode(&blocks, scheme)?;
                let values = word
                    .iter()
                    .map(|&x| {
                        let noise: f64 = StandardNormal.sample(&mut rng);
                        params.delta * (f64::from(x) + sigma * noise)
                    })
                    .collect();
                let z = ReceivedBlock::new(m, values, true)?;

                let feedback = if genie {
                    Feedback::Genie(&truth)
                } else {
                    Feedback::Decoded
                };
                let out = ml_decode(&z, scheme, cfg, feedback)?;
                for (s, round) in out.rounds.iter().enumerate() {
                    let wrong = round
                        .pre_polar
                        .iter()
                        .zip(&truth[s * mu..(s + 1) * mu])
                        .filter(|(a, t)| a != t)
                        .count();
                    count.rounds[s].record(mu as u64, wrong as u64);
                }
                let info_bits: usize = blocks.iter().map(Vec::len).sum();
                let info_errors = out
                    .blocks
                    .iter()
                    .flatten()
                    .zip(blocks.iter().flatten())
                    .filter(|(a, t)| a != t)
                    .count();
                count.info.record(info_bits as u64, info_errors as u64);
                count.bp_edge_updates += out.bp_edge_updates;
                count.polar_operations += out.polar_operations;

                bare.load(&z)?;
                bare.run_frozen(&[], cfg)?;
                let wrong = bare
                    .llh()
                    .iter()
                    .zip(&truth)
                    .filter(|(&h, &t)| hard_decision(h) != t)
                    .count();
                count.bare.record(m as u64, wrong as u64);
            }
            Ok(count)
        },
        MultilevelCount::merge,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::params_from_snr_db;
    use crate::multilevel::allocate_rates;

    #[test]
    fn batch_boundaries_do_not_change_totals() {
        let params = params_from_snr_db(16, 0.0).unwrap();
        let cfg = BpConfig::fixed(4);
        let whole =
            simulate_ber(&params, 0, DecoderKind::Simplified, &cfg, 3 * BATCH + 5, 9).unwrap();
        let head = simulate_ber(&params, 0, DecoderKind::Simplified, &cfg, BATCH, 9).unwrap();
        assert_eq!(whole.trials, 3 * BATCH + 5);
        assert_eq!(whole.bits, whole.trials * 16);
        assert!(head.errors <= whole.errors);
        let again =
            simulate_ber(&params, 0, DecoderKind::Simplified, &cfg, 3 * BATCH + 5, 9).unwrap();
        assert_eq!(whole, again);
    }

    #[test]
    fn frozen_bits_are_not_counted() {
        let params = params_from_snr_db(16, -2.0).unwrap();
        let cfg = BpConfig::fixed(4);
        let count = simulate_ber(&params, 12, DecoderKind::Simplified, &cfg, 100, 1).unwrap();
        assert_eq!(count.bits, 400);
        assert!(simulate_ber(&params, 16, DecoderKind::Simplified, &cfg, 10, 1).is_err());
        assert!(simulate_ber(&params, 4, DecoderKind::Full, &cfg, 10, 1).is_err());
    }

    #[test]
    fn multilevel_counts_are_consistent() {
        let scheme = MultilevelScheme::new(allocate_rates(4.0, 2, 16, 0.25).unwrap()).unwrap();
        let count = simulate_multilevel(&scheme, &BpConfig::fixed(5), 70, 3, false).unwrap();
        assert_eq!(count.rounds.len(), 2);
        assert!(count
            .rounds
            .iter()
            .all(|r| r.trials == 70 && r.bits == 70 * 16));
        assert_eq!(count.bare.bits, 70 * 32);
        let k: usize = (0..2).map(|s| scheme.block_len(s)).sum();
        assert_eq!(count.info.bits, 70 * k as u64);
        assert_eq!(count.polar_operations, 70 * 2 * 16 * 4);
    }
}
