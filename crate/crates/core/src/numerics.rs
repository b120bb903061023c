//! Numerical kernels shared by the analysis engine: the Gaussian tail
//! function, Gaussian-weighted integrals and bracketed root finding.
//!
//! Every integral in the bound machinery has the form
//!
//! ```text
//!     E[f(T)],  T ~ N(mean, 1)
//! ```
//!
//! so a Gauss–Hermite rule (weight `e^{-t²/2}`, normalized) is used with the
//! node set shifted by `mean`. The integrands are all smooth (tanh, tanh², Q
//! and `log(1 + e^x)` compositions), which makes a fixed rule accurate; the
//! checked entry point [`gauss_integral`] compares against a rule with twice
//! as many abscissas.

use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

use crate::error::{invalid, Error, Result};

/// Upper-tail probability of a standard Gaussian, `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln Q(x)`, usable deep in the tail where `Q(x)` underflows.
pub fn log_gaussian_q(x: f64) -> f64 {
    if x < 25.0 {
        return gaussian_q(x).ln();
    }
    // Asymptotic (Mills ratio) expansion; relative error < 1e-10 past x = 25.
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - (x * (2.0 * PI).sqrt()).ln() + series.ln()
}

/// Gauss–Hermite rule for expectations against the unit Gaussian weight.
#[derive(Debug, Clone)]
struct HermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HermiteRule {
    /// Nodes and weights for `E[f(T)], T ~ N(0, 1)`, dropping abscissas
    /// beyond `radius`.
    fn new(n: usize, radius: f64) -> Self {
        // Physicists' Hermite roots by Newton iteration on the orthonormal
        // recurrence, then rescaled to the probabilists' weight.
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let nf = n as f64;
        let half = n.div_ceil(2);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 3e-14 {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let norm = PI.sqrt();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.into_iter().zip(w) {
            let t = SQRT_2 * xi;
            if t.abs() <= radius {
                nodes.push(t);
                weights.push(wi / norm);
            }
        }
        Self { nodes, weights }
    }

    #[inline]
    fn expect<F: Fn(f64) -> f64>(&self, f: F, mean: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t + mean))
            .sum()
    }
}

/// Configuration of the Gaussian-weighted integration operator.
///
/// Cloning is cheap; the node tables are shared.
#[derive(Debug, Clone)]
pub struct Quadrature {
    abscissa_count: usize,
    truncation_radius: f64,
    absolute_tolerance: f64,
    rule: Arc<HermiteRule>,
    doubled: Arc<HermiteRule>,
}

impl Quadrature {
    pub const DEFAULT_ABSCISSAS: usize = 96;
    pub const DEFAULT_RADIUS: f64 = 10.0;
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(
        abscissa_count: usize,
        truncation_radius: f64,
        absolute_tolerance: f64,
    ) -> Result<Self> {
        if abscissa_count < 32 {
            return Err(invalid("abscissa_count", format!("{abscissa_count} < 32")));
        }
        if !(truncation_radius >= 8.0) {
            return Err(invalid(
                "truncation_radius",
                format!("{truncation_radius} < 8"),
            ));
        }
        if !(absolute_tolerance > 0.0) {
            return Err(invalid("absolute_tolerance", "must be positive"));
        }
        Ok(Self {
            abscissa_count,
            truncation_radius,
            absolute_tolerance,
            rule: Arc::new(HermiteRule::new(abscissa_count, truncation_radius)),
            doubled: Arc::new(HermiteRule::new(2 * abscissa_count, truncation_radius)),
        })
    }

    pub fn abscissa_count(&self) -> usize {
        self.abscissa_count
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn absolute_tolerance(&self) -> f64 {
        self.absolute_tolerance
    }

    /// `E[f(T)]` for `T ~ N(mean, 1)` using the base rule only, without the
    /// refinement check. This is the hot path for the fixed-point solvers.
    #[inline]
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, mean: f64) -> f64 {
        self.rule.expect(f, mean)
    }
}

impl Quadrature {
    /// `E[f(T)]` for `T ~ N(mean, 1)` when `f` is analytic in the strip
    /// `|Im t| < strip` (e.g. `tanh(a·t)` with `strip = π/(2a)`).
    ///
    /// Uses the uniform trapezoid rule over `mean ± radius`, whose error
    /// decays like `exp(−2π·strip/h)`; the step `h` is set to `strip/6`
    /// (at most 1/2), which puts that error below `1e-16`. Gauss–Hermite
    /// converges slowly when `strip` is small, so the BER machinery prefers
    /// this rule for `tanh`-type integrands.
    pub fn expect_in_strip<F: Fn(f64) -> f64>(&self, f: F, mean: f64, strip: f64) -> f64 {
        let radius = self.truncation_radius;
        let h0 = (strip / 6.0).min(0.5);
        let half = (radius / h0).ceil() as i64;
        let h = radius / half as f64;
        let weight = h / (2.0 * std::f64::consts::PI).sqrt();
        let mut sum = 0.0;
        for k in -half..=half {
            let d = k as f64 * h;
            sum += f(mean + d) * (-0.5 * d * d).exp();
        }
        sum * weight
    }
}

impl Quadrature {
    /// Process-wide instance with the default configuration.
    pub fn shared() -> &'static Quadrature {
        static DEFAULT: OnceLock<Quadrature> = OnceLock::new();
        DEFAULT.get_or_init(|| {
            Quadrature::new(
                Self::DEFAULT_ABSCISSAS,
                Self::DEFAULT_RADIUS,
                Self::DEFAULT_TOLERANCE,
            )
            .expect("default quadrature parameters are valid")
        })
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::shared().clone()
    }
}

/// `(2π)^{-1/2} ∫ f(t) e^{-(t-mean)²/2} dt`, checked by refinement.
///
/// Returns the doubled-rule value; fails if the base and doubled rules
/// disagree by more than the configured tolerance.
pub fn gauss_integral<F: Fn(f64) -> f64>(f: F, mean: f64, q: &Quadrature) -> Result<f64> {
    let coarse = q.rule.expect(&f, mean);
    let fine = q.doubled.expect(&f, mean);
    let change = (fine - coarse).abs();
    if !(change <= q.absolute_tolerance) {
        return Err(Error::NonConvergence {
            what: "gauss_integral",
            steps: 2 * q.abscissa_count,
            last_change: change,
        });
    }
    Ok(fine)
}

/// Bracketed root finder on `[lo, hi]`: Illinois false position with a
/// bisection step whenever the bracket fails to halve.
///
/// Returns as soon as `|g(x)| <= tol` or the bracket is narrower than `tol`.
/// When `g` has the same sign at both ends the midpoint is probed once: a
/// tangential root there is accepted, a sign change there narrows the
/// bracket, anything else is [`Error::BracketInvalid`].
pub fn find_root<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(invalid("bracket", format!("lo={lo}, hi={hi}, tol={tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a);
    if ga.abs() <= tol {
        return Ok(a);
    }
    let mut gb = g(b);
    if gb.abs() <= tol {
        return Ok(b);
    }
    if b - a <= tol {
        return Ok(0.5 * (a + b));
    }
    if ga.signum() == gb.signum() {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm.abs() <= tol {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            return Err(Error::BracketInvalid {
                lo,
                hi,
                g_lo: ga,
                g_hi: gb,
            });
        }
        b = mid;
        gb = gm;
    }
    // Which end was retained on the previous step (-1 = a, 1 = b).
    let mut side = 0i8;
    for _ in 0..2000 {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mut x = (a * gb - b * ga) / (gb - ga);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let gx = g(x);
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            let gm = g(mid);
            if gm.abs() <= tol {
                return Ok(mid);
            }
            if gm.signum() == ga.signum() {
                a = mid;
                ga = gm;
            } else {
                b = mid;
                gb = gm;
            }
            side = 0;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_reference_values() {
        assert_eq!(gaussian_q(0.0), 0.5);
        // erfc(√2)/2 to 16 digits.
        assert!((gaussian_q(2.0) - 0.022_750_131_948_179_21).abs() < 1e-16);
        assert!((1.0 - gaussian_q(-10.0)).abs() < 1e-15);
    }

    #[test]
    fn log_q_is_continuous_at_switch() {
        let below = gaussian_q(24.999_999).ln();
        let above = log_gaussian_q(25.000_001);
        assert!((below - above).abs() < 1e-3);
        assert!(log_gaussian_q(40.0).is_finite());
        assert!(log_gaussian_q(40.0) < log_gaussian_q(39.0));
    }

    #[test]
    fn weights_normalize() {
        for n in [32, 64, 96, 192] {
            let rule = HermiteRule::new(n, 10.0);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "n={n}: {total}");
            let second: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| w * t * t)
                .sum();
            assert!((second - 1.0).abs() < 1e-12, "n={n}: {second}");
        }
    }

    #[test]
    fn integral_moments() {
        let q = Quadrature::default();
        for mean in [-5.0, 0.0, 3.0, 5.0] {
            assert!((gauss_integral(|_| 1.0, mean, &q).unwrap() - 1.0).abs() < 1e-10);
            assert!((gauss_integral(|t| t, mean, &q).unwrap() - mean).abs() < 1e-10);
        }
        assert!(gauss_integral(f64::tanh, 0.0, &q).unwrap().abs() < 1e-14);
    }

    #[test]
    fn integral_reports_nonconvergence_for_kinks() {
        let q = Quadrature::default();
        let kink = |t: f64| (t - 0.3).abs();
        assert!(matches!(
            gauss_integral(kink, 0.0, &q),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn quadrature_rejects_bad_config() {
        assert!(Quadrature::new(16, 10.0, 1e-10).is_err());
        assert!(Quadrature::new(64, 4.0, 1e-10).is_err());
        assert!(Quadrature::new(64, 10.0, 0.0).is_err());
    }

    #[test]
    fn root_examples() {
        let r = find_root(|x| x - 0.5, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5).abs() < 1e-14);
        let r = find_root(|x| x * x, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(r, 0.0);
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::BracketInvalid { .. })
        ));
    }

    #[test]
    fn strip_rule_handles_nearby_poles() {
        let q = Quadrature::shared();
        // E tanh(5T), T ~ N(5, 1), against the same rule at a much finer step.
        let coarse = q.expect_in_strip(|t| (5.0 * t).tanh(), 5.0, std::f64::consts::PI / 10.0);
        let fine = q.expect_in_strip(|t| (5.0 * t).tanh(), 5.0, std::f64::consts::PI / 100.0);
        assert!((coarse - fine).abs() < 1e-14, "{}", coarse - fine);
        assert!((q.expect_in_strip(|t| t * t, 0.5, 10.0) - 1.25).abs() < 1e-14);
    }

    #[test]
    fn root_handles_flat_and_steep_functions() {
        let r = find_root(|x: f64| (x - 0.7).powi(3), 0.0, 1.0, 1e-15).unwrap();
        assert!((r - 0.7).abs() < 1e-5);
        let r = find_root(|x: f64| (50.0 * (x - 0.2)).tanh(), -3.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.2).abs() < 1e-14);
    }

    #[test]
    fn root_is_idempotent() {
        let g = |x: f64| x.powi(3) - 0.3;
        let r = find_root(g, 0.0, 1.0, 1e-13).unwrap();
        assert_eq!(find_root(g, r, r, 1e-13).unwrap(), r);
    }
}
