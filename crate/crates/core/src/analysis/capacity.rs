//! BI-AWGN capacity and the minimum SNR of the multilevel scheme.
//!
//! In a scheme with `b` rounds, round `s` sees a fraction `λ = s/b` of its
//! bits already decoded, so its bits behave like a BI-AWGN channel with
//! inverse noise power `c·X(λ)`. Averaging the capacity over rounds gives
//! the achievable rate `ρ_c`, and the scheme needs SNR `c/(4ρ_c)` per
//! information bit.

use rayon::prelude::*;

use crate::analysis::moments::{fixed_point, solve_frozen};
use crate::error::{invalid, Result};
use crate::numerics::Quadrature;

/// `ln 2` in dB: the minimum SNR per bit of any code as the rate goes to 0.
pub fn shannon_limit_db() -> f64 {
    10.0 * std::f64::consts::LN_2.log10()
}

/// Capacity in bits of the BI-AWGN channel `y = ±1 + N(0, 1/a)`.
///
/// Computed as `1 − E log₂(1 + e^{−L})` over the channel LLR
/// `L ~ N(2a, 4a)`, which avoids the density-entropy cancellation at small
/// `a`. Returns 0 for `a ≤ 0`.
pub fn biawgn_capacity(a: f64) -> f64 {
    if !(a > 0.0) {
        return 0.0;
    }
    let root = a.sqrt();
    // L = 2√a·T with T ~ N(√a, 1); log(1 + e^{−L}) is a softplus.
    // Its branch points sit at Im t = ±π/(2√a).
    let penalty = Quadrature::shared().expect_in_strip(
        |t| {
            let v = -2.0 * root * t;
            v.max(0.0) + (-v.abs()).exp().ln_1p()
        },
        root,
        std::f64::consts::FRAC_PI_2 / root,
    );
    (1.0 - penalty / std::f64::consts::LN_2).clamp(0.0, 1.0)
}

/// Mean capacity over the rounds `λ = s/b`, `s = 0, …, b−1`.
pub fn average_capacity(b: usize, c: f64) -> Result<f64> {
    if b == 0 {
        return Err(invalid("b", "must be at least 1"));
    }
    let floor = fixed_point(c)?.positive_root().unwrap_or(0.0);
    let per_round: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|s| {
            solve_frozen(s as f64 / b as f64, c, floor).map(|fp| biawgn_capacity(c * fp.effective))
        })
        .collect::<Result<_>>()?;
    Ok(per_round.iter().sum::<f64>() / b as f64)
}

/// Optimal operating point of the `b`-round scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSnr {
    pub b: usize,
    pub c_opt: f64,
    pub rho_c: f64,
    /// Minimum SNR per information bit, linear.
    pub kappa: f64,
    pub kappa_db: f64,
}

/// Default search grid for [`min_snr`]: `c ∈ [1.0, 1.5]` in steps of 0.05.
///
/// The optimum sits at `c ≈ 1.05–1.15` for `b` between 10² and 10⁴.
pub fn default_c_grid() -> Vec<f64> {
    (0..=10).map(|k| 1.0 + 0.05 * k as f64).collect()
}

const GOLDEN_TOLERANCE: f64 = 1e-6;
const MAX_WIDENINGS: usize = 200;

/// Minimizes `c/(4ρ_c)` over `c`.
///
/// The grid is scanned first; if the best point sits on an edge the grid is
/// extended in that direction one step at a time until it is interior. The
/// bracket around the best grid point is then refined by golden-section
/// search.
pub fn min_snr(b: usize, c_grid: &[f64]) -> Result<MinSnr> {
    if b == 0 {
        return Err(invalid("b", "must be at least 1"));
    }
    if c_grid.is_empty() {
        return Err(invalid("c_grid", "is empty"));
    }
    if c_grid.iter().any(|c| !(*c > 0.0) || !c.is_finite())
        || c_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(invalid(
            "c_grid",
            "must be positive, finite and strictly increasing",
        ));
    }
    let kappa = |c: f64| -> Result<f64> { Ok(c / (4.0 * average_capacity(b, c)?)) };

    let mut grid: Vec<f64> = c_grid.to_vec();
    let mut values: Vec<f64> = grid.iter().map(|&c| kappa(c)).collect::<Result<_>>()?;
    let step = if grid.len() > 1 {
        grid[1] - grid[0]
    } else {
        0.05 * grid[0]
    };
    for _ in 0..MAX_WIDENINGS {
        let best = argmin(&values);
        if best == 0 && grid[0] - step > 0.0 {
            let c = grid[0] - step;
            values.insert(0, kappa(c)?);
            grid.insert(0, c);
        } else if best == grid.len() - 1 {
            let c = grid[best] + step;
            values.push(kappa(c)?);
            grid.push(c);
        } else {
            break;
        }
    }

    let best = argmin(&values);
    let (c_opt, kappa_opt) = if best == 0 || best == grid.len() - 1 {
        (grid[best], values[best])
    } else {
        golden_section(kappa, grid[best - 1], grid[best + 1])?
    };
    let rho_c = c_opt / (4.0 * kappa_opt);
    Ok(MinSnr {
        b,
        c_opt,
        rho_c,
        kappa: kappa_opt,
        kappa_db: 10.0 * kappa_opt.log10(),
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    best
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOLERANCE {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}
