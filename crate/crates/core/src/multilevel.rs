//! The compound code: `b` polar-coded sub-blocks of length `μ` form the
//! `m = b·μ` information bits of one `C_m` codeword.
//!
//! Decoding runs in rounds. Round `s` runs BP with the bits of rounds
//! `0..s` frozen, hands the log-likelihoods of sub-block `s` to the SC
//! decoder of its polar code, and re-encodes the result so that it can be
//! frozen in later rounds. Each round therefore sees a larger fraction
//! `λ = s/b` of known bits and a better channel, and the polar rates grow
//! accordingly.

use serde::{Deserialize, Serialize};

use crate::analysis::{biawgn_capacity, fixed_point, frozen_fixed_point};
use crate::bp::{hard_decision, BpConfig, Decoder};
use crate::channel::{params_from_snr_db, snr_db_from_c, CodeParams, ReceivedBlock};
use crate::error::{invalid, Error, Result};
use crate::modcode::{encode, modulate, InfoWord};
use crate::polar::{construct, polar_encode_bits, PolarCode, ScDecoder};

/// Serializable description of a multilevel scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilevelConfig {
    pub b: usize,
    pub mu: usize,
    pub margin: f64,
    pub snr_db: f64,
    /// Polar code rate of each round.
    pub rates: Vec<f64>,
    /// Sorted information set of each round's polar code.
    pub info_sets: Vec<Vec<usize>>,
}

impl MultilevelConfig {
    pub fn m(&self) -> usize {
        self.b * self.mu
    }

    /// Checks the structural invariants; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(invalid("b", "must be at least 1"));
        }
        if self.mu == 0 || !self.mu.is_power_of_two() {
            return Err(invalid("mu", format!("{} is not a power of two", self.mu)));
        }
        if self.m() < 2 {
            return Err(invalid("mu", "b·mu must be at least 2"));
        }
        if !(self.margin > 0.0 && self.margin <= 1.0) {
            return Err(invalid(
                "margin",
                format!("{} is outside (0, 1]", self.margin),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(invalid("snr_db", "must be finite"));
        }
        if self.rates.len() != self.b {
            return Err(invalid(
                "rates",
                format!("{} entries for b = {}", self.rates.len(), self.b),
            ));
        }
        if self.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(invalid("rates", "every rate must lie in [0, 1]"));
        }
        if self.rates.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("rates", "must be non-decreasing"));
        }
        if self.info_sets.len() != self.b {
            return Err(invalid(
                "info_sets",
                format!("{} entries for b = {}", self.info_sets.len(), self.b),
            ));
        }
        for (s, (set, rate)) in self.info_sets.iter().zip(&self.rates).enumerate() {
            let expected = (self.mu as f64 * rate).round() as usize;
            if set.len() != expected {
                return Err(invalid(
                    "info_sets",
                    format!(
                        "round {s} has {} positions, rate implies {expected}",
                        set.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Information bits per `C_m` codeword over its length: `Σ μ r_s / n`.
    pub fn compound_rate(&self) -> f64 {
        let k: usize = self.info_sets.iter().map(Vec::len).sum();
        k as f64 / crate::modcode::pair_count(self.m()) as f64
    }
}

/// Per-round polar rates `r_s = (1 − margin)·C(c·X(s/b))`, with each
/// round's code constructed for its own effective channel.
pub fn allocate_rates(c: f64, b: usize, mu: usize, margin: f64) -> Result<MultilevelConfig> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(invalid("c", format!("{c} must exceed 1")));
    }
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(invalid("margin", format!("{margin} is outside (0, 1]")));
    }
    if b == 0 {
        return Err(invalid("b", "must be at least 1"));
    }
    // Validates c once for all rounds.
    fixed_point(c)?;
    let mut rates = Vec::with_capacity(b);
    let mut info_sets = Vec::with_capacity(b);
    for s in 0..b {
        let a = c * frozen_fixed_point(s as f64 / b as f64, c)?.effective;
        let rate = ((1.0 - margin) * biawgn_capacity(a)).clamp(0.0, 1.0);
        let code = construct(mu, rate, 1.0 / a)?;
        rates.push(rate);
        info_sets.push(code.info_set().to_vec());
    }
    let config = MultilevelConfig {
        b,
        mu,
        margin,
        snr_db: snr_db_from_c(c),
        rates,
        info_sets,
    };
    config.validate()?;
    Ok(config)
}

/// A validated configuration with its polar codes and channel parameters.
#[derive(Debug, Clone)]
pub struct MultilevelScheme {
    config: MultilevelConfig,
    codes: Vec<PolarCode>,
    params: CodeParams,
}

impl MultilevelScheme {
    pub fn new(config: MultilevelConfig) -> Result<Self> {
        config.validate()?;
        let params = params_from_snr_db(config.m(), config.snr_db)?;
        let codes = config
            .info_sets
            .iter()
            .enumerate()
            .map(|(s, set)| {
                let x = frozen_fixed_point(s as f64 / config.b as f64, params.c)?.effective;
                PolarCode::from_info_set(config.mu, set.clone(), 1.0 / (params.c * x))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            codes,
            params,
        })
    }

    pub fn config(&self) -> &MultilevelConfig {
        &self.config
    }

    pub fn codes(&self) -> &[PolarCode] {
        &self.codes
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Information bits of round `s`.
    pub fn block_len(&self, s: usize) -> usize {
        self.codes[s].dimension()
    }
}

/// Polar-encodes each block, concatenates them into the `m` information
/// bits and encodes those with `C_m`; returns the ±1 codeword.
pub fn ml_encode(blocks: &[Vec<u8>], scheme: &MultilevelScheme) -> Result<Vec<i8>> {
    let b = scheme.config.b;
    if blocks.len() != b {
        return Err(Error::LengthMismatch {
            expected: b,
            actual: blocks.len(),
        });
    }
    let mut info = Vec::with_capacity(scheme.config.m());
    for (block, code) in blocks.iter().zip(&scheme.codes) {
        info.extend(polar_encode_bits(block, code)?);
    }
    let m = scheme.config.m();
    Ok(modulate(&encode(&InfoWord::new(info)?, m)?))
}

/// Where the frozen bits of earlier rounds come from.
#[derive(Debug, Clone, Copy)]
pub enum Feedback<'a> {
    /// Re-encoded polar decisions, as in the real scheme.
    Decoded,
    /// The transmitted information symbols (±1, length `m`): every earlier
    /// round is forced correct, isolating the statistics of each round.
    Genie(&'a [i8]),
}

/// What happened in one decoding round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    /// Fraction of information bits frozen during this round.
    pub lambda: f64,
    /// `h_{i|L}` for the bits of this round, as passed to the SC decoder.
    pub llh: Vec<f64>,
    /// Hard decisions on `llh` before polar decoding (±1).
    pub pre_polar: Vec<i8>,
    /// Mean posterior error probability `1/(1 + e^{|h|})` of `llh`.
    pub estimated_ber: f64,
    /// Positions where the re-encoded polar output overrides `pre_polar`.
    pub corrections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelDecode {
    /// Decoded information bits of each round's polar code.
    pub blocks: Vec<Vec<u8>>,
    /// The `m` information symbols after re-encoding (±1).
    pub symbols: Vec<i8>,
    pub rounds: Vec<RoundReport>,
    pub bp_edge_updates: u64,
    pub polar_operations: u64,
}

/// Runs the `b` decoding rounds on a rescaled block.
pub fn ml_decode(
    z: &ReceivedBlock,
    scheme: &MultilevelScheme,
    cfg: &BpConfig,
    feedback: Feedback<'_>,
) -> Result<MultilevelDecode> {
    let MultilevelConfig { b, mu, .. } = scheme.config;
    let m = scheme.config.m();
    if z.m() != m {
        return Err(invalid(
            "block",
            format!("block has m={}, scheme has m={m}", z.m()),
        ));
    }
    if let Feedback::Genie(truth) = feedback {
        if truth.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: truth.len(),
            });
        }
    }
    let mut decoder = Decoder::new(m);
    decoder.load(z)?;
    let mut sc = ScDecoder::new();
    let mut known: Vec<i8> = Vec::with_capacity(m);
    let mut out = MultilevelDecode {
        blocks: Vec::with_capacity(b),
        symbols: Vec::with_capacity(m),
        rounds: Vec::with_capacity(b),
        bp_edge_updates: 0,
        polar_operations: 0,
    };
    for (s, code) in scheme.codes.iter().enumerate() {
        let range = s * mu..(s + 1) * mu;
        let stats = decoder.run_frozen(&known, cfg)?;
        out.bp_edge_updates += stats.edge_updates;
        let llh = decoder.llh()[range.clone()].to_vec();
        let block = sc.decode(&llh, code)?;
        out.polar_operations += sc.operations();
        let symbols = modulate(&polar_encode_bits(&block, code)?);

        let pre_polar: Vec<i8> = llh.iter().map(|&h| hard_decision(h)).collect();
        let estimated_ber =
            llh.iter().map(|h| 1.0 / (1.0 + h.abs().exp())).sum::<f64>() / mu as f64;
        let corrections = pre_polar
            .iter()
            .zip(&symbols)
            .filter(|(a, b)| a != b)
            .count();
        out.rounds.push(RoundReport {
            round: s,
            lambda: s as f64 / b as f64,
            llh,
            pre_polar,
            estimated_ber,
            corrections,
        });
        match feedback {
            Feedback::Decoded => known.extend_from_slice(&symbols),
            Feedback::Genie(truth) => known.extend_from_slice(&truth[range]),
        }
        out.symbols.extend_from_slice(&symbols);
        out.blocks.push(block);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{c_from_snr_db, rescale, transmit};

    fn scheme(b: usize, mu: usize, snr_db: f64) -> MultilevelScheme {
        MultilevelScheme::new(allocate_rates(c_from_snr_db(snr_db), b, mu, 0.25).unwrap()).unwrap()
    }

    #[test]
    fn rates_grow_with_rounds() {
        let config = allocate_rates(4.0, 4, 64, 0.25).unwrap();
        assert!(config.rates.windows(2).all(|w| w[1] > w[0]));
        for (s, &r) in config.rates.iter().enumerate() {
            let x = frozen_fixed_point(s as f64 / 4.0, 4.0).unwrap().effective;
            assert!((r - 0.75 * biawgn_capacity(4.0 * x)).abs() < 1e-12);
        }
        let none = allocate_rates(4.0, 4, 64, 1.0).unwrap();
        assert!(none.rates.iter().all(|&r| r == 0.0) && none.info_sets.iter().all(Vec::is_empty));
        assert!(allocate_rates(1.0, 4, 64, 0.25).is_err());
        assert!(allocate_rates(4.0, 4, 48, 0.25).is_err());
    }

    #[test]
    fn config_json_round_trip_and_validation() {
        let config = allocate_rates(4.0, 2, 16, 0.25).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: MultilevelConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        let mut bad = config.clone();
        bad.rates.reverse();
        assert!(bad.validate().is_err());
        let mut bad = config;
        bad.info_sets[0].push(0);
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidParameter {
                name: "info_sets",
                ..
            })
        ));
    }

    #[test]
    fn all_zero_blocks_give_the_all_one_word() {
        let sc = scheme(4, 16, 0.0);
        let blocks: Vec<Vec<u8>> = (0..4).map(|s| vec![0; sc.block_len(s)]).collect();
        assert!(ml_encode(&blocks, &sc).unwrap().iter().all(|&x| x == 1));
        assert!(ml_encode(&blocks[..3], &sc).is_err());
    }

    #[test]
    fn noiseless_round_trip() {
        let sc = scheme(4, 16, 0.0);
        let blocks: Vec<Vec<u8>> = (0..4)
            .map(|s| (0..sc.block_len(s)).map(|k| ((k + s) % 2) as u8).collect())
            .collect();
        let word = ml_encode(&blocks, &sc).unwrap();
        let clean =
            ReceivedBlock::new(64, word.iter().map(|&x| f64::from(x)).collect(), false).unwrap();
        let z = rescale(&clean, sc.params()).unwrap();
        let out = ml_decode(&z, &sc, &BpConfig::fixed(6), Feedback::Decoded).unwrap();
        assert_eq!(out.blocks, blocks);
        assert!(out.rounds.iter().all(|r| r.corrections == 0));
        // BP work shrinks as rounds freeze more bits; SC work is μ log μ per round.
        assert_eq!(out.polar_operations, 4 * 16 * 4);
        assert_eq!(out.bp_edge_updates, 6 * 64 * (64 + 48 + 32 + 16));
    }

    #[test]
    fn genie_feedback_uses_the_truth() {
        let sc = scheme(2, 32, -1.0);
        let word = vec![1i8; sc.params().n];
        let z = rescale(&transmit(&word, sc.params(), 5).unwrap(), sc.params()).unwrap();
        let truth = vec![1i8; 64];
        let genie = ml_decode(&z, &sc, &BpConfig::fixed(5), Feedback::Genie(&truth)).unwrap();
        assert_eq!(genie.rounds.len(), 2);
        assert_eq!(genie.rounds[1].lambda, 0.5);
        assert!(ml_decode(&z, &sc, &BpConfig::fixed(5), Feedback::Genie(&truth[..10])).is_err());
    }
}
