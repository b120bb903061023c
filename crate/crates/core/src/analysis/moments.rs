//! Offset-moment maps and their fixed points.
//!
//! `R_c(x)` maps the mean offset `x` of the information bits in one BP round
//! to the mean offset in the next round (in the large-`m` limit). Its fixed
//! points determine the asymptotic behavior of the decoder; with a fraction
//! `λ` of frozen bits the map becomes `X ↦ λ + (1−λ)·R_c(X)`.

use crate::error::{invalid, Error, Result};
use crate::numerics::{find_root, Quadrature};

/// Lower end of the bracket searched for the positive fixed point.
const ROOT_FLOOR: f64 = 1e-8;
const ROOT_TOLERANCE: f64 = 1e-15;
/// Largest accepted `|R_c(x) − x|` at a reported root.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("c", format!("{c} is not a positive finite number")));
    }
    Ok(())
}

/// Half-width of the pole-free strip of `tanh(a·t)`.
pub(crate) fn tanh_strip(a: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / a
}

/// `R_c(x) = E tanh(a·T)` with `a = √(|x|c)` and `T ~ N(a, 1)`, extended
/// oddly to negative `x`.
pub fn moment_map(x: f64, c: f64) -> f64 {
    let a = (x.abs() * c).sqrt();
    if a == 0.0 {
        return 0.0;
    }
    let value = Quadrature::shared().expect_in_strip(|t| (a * t).tanh(), a, tanh_strip(a));
    value.copysign(x)
}

/// Conditional next-round moments `(F_c, G_c)` of an offset whose mean is
/// `x` and whose power is `σ²`: `E tanh(σ√c·T)` and `E tanh²(σ√c·T)` with
/// `T ~ N(x√c/σ, 1)`.
///
/// When `|x| = σ²` both reduce to `R_c`, which is why mean and power stay
/// locked together across rounds.
pub fn offset_moments(x: f64, sigma: f64, c: f64) -> Result<(f64, f64)> {
    check_c(c)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", format!("{sigma} is not positive")));
    }
    if x.abs() > sigma {
        return Err(invalid("x", format!("|{x}| exceeds sigma = {sigma}")));
    }
    let scale = sigma * c.sqrt();
    let mean = x * c.sqrt() / sigma;
    let q = Quadrature::shared();
    let strip = tanh_strip(scale);
    let f = q.expect_in_strip(|t| (scale * t).tanh(), mean, strip);
    let g = q.expect_in_strip(
        |t| {
            let u = (scale * t).tanh();
            u * u
        },
        mean,
        strip,
    );
    Ok((f, g))
}

/// Roots of `x = R_c(x)` on `[−1, 1]`, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub c: f64,
    pub roots: Vec<f64>,
    /// `|R_c(x) − x|` for each root.
    pub residuals: Vec<f64>,
}

impl FixedPointResult {
    /// The stable root `x* ∈ (0, 1)`, present iff `c > 1`.
    pub fn positive_root(&self) -> Option<f64> {
        self.roots.iter().copied().find(|&x| x > 0.0)
    }
}

/// Solves `x = R_c(x)`.
///
/// `R_c` is concave on `[0, 1]` with slope `c` at the origin, so a positive
/// root exists iff `R_c(x) > x` just above zero; it is then unique and is
/// found by bracketing on `[1e-8, 1]`.
pub fn fixed_point(c: f64) -> Result<FixedPointResult> {
    check_c(c)?;
    let g = |x: f64| moment_map(x, c) - x;
    let mut roots = vec![0.0];
    if g(ROOT_FLOOR) > 0.0 {
        // For large c, R_c(1) rounds to 1 and x* is 1 to working precision.
        let x = if g(1.0) >= 0.0 {
            1.0
        } else {
            find_root(g, ROOT_FLOOR, 1.0, ROOT_TOLERANCE)?
        };
        roots = vec![-x, 0.0, x];
    }
    let residuals: Vec<f64> = roots
        .iter()
        .map(|&x| (moment_map(x, c) - x).abs())
        .collect();
    if let Some(&worst) = residuals.iter().max_by(|a, b| a.total_cmp(b)) {
        if worst > RESIDUAL_LIMIT {
            return Err(Error::NonConvergence {
                what: "fixed_point",
                steps: 0,
                last_change: worst,
            });
        }
    }
    Ok(FixedPointResult {
        c,
        roots,
        residuals,
    })
}

/// Solution of the frozen-bit system `X = λ + (1−λ)x`, `x = R_c(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenFixedPoint {
    pub lambda: f64,
    pub c: f64,
    /// Mean offset over all bits, frozen ones included.
    pub effective: f64,
    /// Mean offset of the bits still being decoded.
    pub fresh: f64,
    /// `|λ + (1−λ)R_c(X) − X|`.
    pub residual: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid("lambda", format!("{lambda} is outside [0, 1]")));
    }
    Ok(())
}

/// Solves the frozen-bit system for `λ ∈ [0, 1]`.
///
/// The map `X ↦ λ + (1−λ)R_c(X)` is increasing and concave, starts above
/// the diagonal at `X = λ` and ends below it at `X = 1`, so its fixed point
/// on `[λ, 1]` is unique and is the limit of the iteration from `X₀ = λ`
/// (see [`frozen_iteration`]). It is computed by bracketing rather than by
/// iterating, which is much faster when the contraction is weak.
pub fn frozen_fixed_point(lambda: f64, c: f64) -> Result<FrozenFixedPoint> {
    check_c(c)?;
    check_lambda(lambda)?;
    let floor = fixed_point(c)?.positive_root().unwrap_or(0.0);
    solve_frozen(lambda, c, floor)
}

/// As [`frozen_fixed_point`] with the unfrozen root `x*` (or 0) supplied,
/// so sweeps over `λ` at fixed `c` solve it once.
pub(crate) fn solve_frozen(lambda: f64, c: f64, floor: f64) -> Result<FrozenFixedPoint> {
    let phi = |x: f64| lambda + (1.0 - lambda) * moment_map(x, c);
    let effective = if lambda == 1.0 {
        1.0
    } else if lambda == 0.0 {
        floor
    } else {
        // Every root lies above both λ and x*, where the map is still above
        // the diagonal.
        let lo = lambda.max(floor);
        find_root(|x| phi(x) - x, lo, 1.0, ROOT_TOLERANCE)?
    };
    let residual = (phi(effective) - effective).abs();
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::NonConvergence {
            what: "frozen_fixed_point",
            steps: 0,
            last_change: residual,
        });
    }
    Ok(FrozenFixedPoint {
        lambda,
        c,
        effective,
        fresh: moment_map(effective, c),
        residual,
    })
}

/// Trajectory `X₀ = λ, X_{ℓ+1} = λ + (1−λ)R_c(X_ℓ)`, stopped once
/// successive iterates differ by less than `tol`.
///
/// Fails with [`Error::NonConvergence`] when the Cauchy criterion is not met
/// within `max_steps`.
pub fn frozen_iteration(lambda: f64, c: f64, tol: f64, max_steps: usize) -> Result<Vec<f64>> {
    check_c(c)?;
    check_lambda(lambda)?;
    let mut trajectory = vec![lambda];
    let mut x = lambda;
    for _ in 0..max_steps {
        let next = lambda + (1.0 - lambda) * moment_map(x, c);
        trajectory.push(next);
        let change = (next - x).abs();
        x = next;
        if change < tol {
            return Ok(trajectory);
        }
    }
    let n = trajectory.len();
    Err(Error::NonConvergence {
        what: "frozen_iteration",
        steps: max_steps,
        last_change: (trajectory[n - 1] - trajectory[n - 2]).abs(),
    })
}
