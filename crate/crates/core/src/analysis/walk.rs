//! Sign-crossing recursion and the resulting BER estimates.
//!
//! Early in decoding, the average offset of the information bits can land
//! on the wrong side of zero. `P_ℓ` is the probability that it is negative
//! after round `ℓ`; it starts at `Q(√c)` and obeys
//! `P_{ℓ+1} = S_ℓ + P_ℓ·T_ℓ`, where `S_ℓ` is the probability of crossing
//! from the positive side and `T_ℓ = 1 − 2S_ℓ`.

use crate::analysis::moments::fixed_point;
use crate::channel::CodeParams;
use crate::error::{invalid, Error, Result};
use crate::numerics::gaussian_q;

/// Stop once `|P_{ℓ+1} − P_ℓ|` falls below this.
pub const WALK_TOLERANCE: f64 = 1e-12;
/// Hard cap on the number of rounds.
pub const WALK_MAX_STEPS: usize = 200;

/// How the per-round signal scale is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// `c_ℓ = c^{(ℓ+1)/2}` (infinite block length).
    Asymptotic,
    /// `C_ℓ = √(c^{ℓ+1} / (1 − c^{ℓ+1}/m))` while the denominator is at least
    /// one half, then the asymptotic scale.
    Finite { m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkRecursion {
    pub c: f64,
    pub mode: WalkMode,
    /// `P_0, …, P_L`.
    pub p: Vec<f64>,
    /// `S_0, …, S_{L−1}`.
    pub s: Vec<f64>,
    /// `T_0, …, T_{L−1}`.
    pub t: Vec<f64>,
}

impl WalkRecursion {
    /// Runs the recursion for at most `max_steps` rounds, stopping early
    /// once it has converged.
    pub fn run(c: f64, max_steps: usize, mode: WalkMode) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(invalid("c", format!("{c} must exceed 1")));
        }
        if let WalkMode::Finite { m } = mode {
            if m < 2 {
                return Err(invalid("m", format!("{m} < 2")));
            }
        }
        let mut p = vec![gaussian_q(c.sqrt())];
        let (mut s, mut t) = (Vec::new(), Vec::new());
        for step in 0..max_steps {
            let cross = crossing_probability(signal_scale(c, step, mode));
            let keep = 1.0 - 2.0 * cross;
            let prev = p[step];
            let next = cross + prev * keep;
            if !(0.0..=1.0).contains(&next) {
                return Err(Error::Divergence {
                    step: step + 1,
                    value: next,
                });
            }
            s.push(cross);
            t.push(keep);
            p.push(next);
            if (next - prev).abs() < WALK_TOLERANCE {
                break;
            }
        }
        Ok(Self { c, mode, p, s, t })
    }

    /// The converged tail value `P_∞`.
    pub fn limit(&self) -> f64 {
        *self.p.last().expect("P_0 is always present")
    }
}

/// Signal-to-spread ratio of the average offset entering round `ℓ`.
pub fn signal_scale(c: f64, step: usize, mode: WalkMode) -> f64 {
    let power = c.powf(step as f64 + 1.0);
    if let WalkMode::Finite { m } = mode {
        let denominator = 1.0 - power / m as f64;
        if denominator >= 0.5 {
            return (power / denominator).sqrt();
        }
    }
    power.sqrt()
}

/// `S = E Q(s·T)` for `T ~ N(s, 1)`, which is `P(N(s², 1+s²) < 0)`.
pub fn crossing_probability(scale: f64) -> f64 {
    // s²/√(1+s²), written so that it stays finite as s overflows.
    gaussian_q(scale / (1.0 + 1.0 / (scale * scale)).sqrt())
}

/// Probability that ML decoding of the two-word code `{1ⁿ, g}` errs, for
/// `g` a minimum-weight row: `Q((m−1)δ / √(m(δ − δ²)))`, which tends to
/// `Q(√c)`.
pub fn pairwise_error(params: &CodeParams) -> f64 {
    let (m, delta) = (params.m as f64, params.delta);
    gaussian_q((m - 1.0) * delta / (m * (delta - delta * delta)).sqrt())
}

/// Lower bound on the ML bit error rate: `2Q(√c) − 2Q(√c)²`.
pub fn ml_ber_lower_bound(c: f64) -> f64 {
    let q = gaussian_q(c.max(0.0).sqrt());
    2.0 * q - 2.0 * q * q
}

/// Asymptotic BER of the soft decoder.
///
/// For `c ≤ 1` the only fixed point is zero and the decoder learns nothing,
/// so the BER is 1/2. Otherwise offsets settle at `±x*` with probabilities
/// `1 − P_∞` and `P_∞`, giving `(1−P_∞)q + P_∞(1−q)` with `q = Q(√(x*c))`.
pub fn soft_decoder_ber(c: f64) -> Result<f64> {
    soft_ber_with(c, WalkMode::Asymptotic)
}

/// As [`soft_decoder_ber`], with the finite-length crossing recursion.
pub fn soft_decoder_ber_finite(c: f64, m: usize) -> Result<f64> {
    soft_ber_with(c, WalkMode::Finite { m })
}

fn soft_ber_with(c: f64, mode: WalkMode) -> Result<f64> {
    let fp = fixed_point(c)?;
    let Some(x) = fp.positive_root() else {
        return Ok(0.5);
    };
    let limit = WalkRecursion::run(c, WALK_MAX_STEPS, mode)?.limit();
    let q = gaussian_q((x * c).sqrt());
    Ok((1.0 - limit) * q + limit * (1.0 - q))
}
