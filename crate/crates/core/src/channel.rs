//! SNR bookkeeping and the AWGN channel.
//!
//! With `c = 4·SNR` (SNR per information bit, linear) a code of dimension
//! `m` has rate `2/(m+1)` and channel noise power `σ² = (m+1)/c`. Received
//! values are rescaled by `δ = 1/(σ²+1)` so that, for the all-one codeword,
//! the first and second moments of every rescaled symbol both equal `δ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::modcode::{pair_count, PairIndex};

/// Dimensions and noise scale of a code `C_m` on the AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeParams {
    pub m: usize,
    pub n: usize,
    pub rate: f64,
    pub c: f64,
    pub delta: f64,
    pub sigma2: f64,
}

impl CodeParams {
    pub fn from_c(m: usize, c: f64) -> Result<Self> {
        if m < 2 {
            return Err(invalid("m", format!("{m} < 2")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("c", format!("{c} is not a positive finite number")));
        }
        let mf = m as f64;
        Ok(Self {
            m,
            n: pair_count(m),
            rate: 2.0 / (mf + 1.0),
            c,
            delta: c / (mf + c + 1.0),
            sigma2: (mf + 1.0) / c,
        })
    }

    /// SNR per information bit, linear.
    pub fn snr(&self) -> f64 {
        1.0 / (2.0 * self.sigma2 * self.rate)
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.c / 4.0).log10()
    }
}

/// Converts an SNR per information bit in dB into the noise scale `c`.
pub fn c_from_snr_db(snr_db: f64) -> f64 {
    4.0 * 10f64.powf(snr_db / 10.0)
}

pub fn snr_db_from_c(c: f64) -> f64 {
    10.0 * (c / 4.0).log10()
}

pub fn params_from_snr_db(m: usize, snr_db: f64) -> Result<CodeParams> {
    if !snr_db.is_finite() {
        return Err(invalid("snr_db", "must be finite"));
    }
    CodeParams::from_c(m, c_from_snr_db(snr_db))
}

/// Channel outputs indexed by unordered pairs `[i, j]`, `0 <= i < j <= m`,
/// in the linear layout of [`PairIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    m: usize,
    values: Vec<f64>,
    scaled: bool,
}

impl ReceivedBlock {
    pub fn new(m: usize, values: Vec<f64>, scaled: bool) -> Result<Self> {
        let n = pair_count(m);
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: values.len(),
            });
        }
        Ok(Self { m, values, scaled })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at the unordered pair `{i, j}`; `i == j` is not a position.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[PairIndex::new(i, j).linear()]
    }

    /// Flat little-endian `f64` dump in pair-index order, for debugging.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(m: usize, bytes: &[u8], scaled: bool) -> Result<Self> {
        if !bytes.len().is_multiple_of(8) {
            return Err(invalid("bytes", "length is not a multiple of 8"));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        Self::new(m, values, scaled)
    }
}

/// Random stream for one Monte-Carlo trial.
///
/// Each `(seed, trial)` pair owns its own ChaCha stream, and symbols are
/// drawn in pair-index order, so a trial's noise does not depend on which
/// worker runs it or in what order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn check_codeword(codeword: &[i8], params: &CodeParams) -> Result<()> {
    if codeword.len() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: codeword.len(),
        });
    }
    if let Some(bad) = codeword.iter().find(|&&s| s != 1 && s != -1) {
        return Err(invalid("codeword", format!("entry {bad} is not ±1")));
    }
    Ok(())
}

/// Sends a ±1 codeword through the AWGN channel with noise power `σ²`.
pub fn transmit(codeword: &[i8], params: &CodeParams, seed: u64) -> Result<ReceivedBlock> {
    transmit_trial(codeword, params, seed, 0)
}

pub fn transmit_trial(
    codeword: &[i8],
    params: &CodeParams,
    seed: u64,
    trial: u64,
) -> Result<ReceivedBlock> {
    check_codeword(codeword, params)?;
    let mut rng = trial_rng(seed, trial);
    let sigma = params.sigma2.sqrt();
    let values = codeword
        .iter()
        .map(|&s| {
            let noise: f64 = StandardNormal.sample(&mut rng);
            f64::from(s) + sigma * noise
        })
        .collect();
    ReceivedBlock::new(params.m, values, false)
}

/// Fills `block` with the rescaled channel output of the all-one codeword.
///
/// Equivalent to `rescale(transmit(1ⁿ))` but writes in place; used by the
/// simulation loops.
pub fn transmit_all_one_scaled<R: Rng + ?Sized>(
    block: &mut ReceivedBlock,
    params: &CodeParams,
    rng: &mut R,
) {
    debug_assert_eq!(block.m, params.m);
    let sigma = params.sigma2.sqrt();
    let delta = params.delta;
    for v in block.values.iter_mut() {
        let noise: f64 = StandardNormal.sample(rng);
        *v = delta * (1.0 + sigma * noise);
    }
    block.scaled = true;
}

/// `z = δ·y`.
pub fn rescale(block: &ReceivedBlock, params: &CodeParams) -> Result<ReceivedBlock> {
    if block.scaled {
        return Err(Error::AlreadyScaled);
    }
    if block.m != params.m {
        return Err(invalid(
            "params",
            format!("block has m={}, params have m={}", block.m, params.m),
        ));
    }
    Ok(ReceivedBlock {
        m: block.m,
        values: block.values.iter().map(|v| v * params.delta).collect(),
        scaled: true,
    })
}
