//! Analytical bounds for the soft decoder: the offset-moment map and its
//! fixed points, the sign-crossing recursion, the frozen-bit system and the
//! capacity of the multilevel scheme.

mod capacity;
mod moments;
mod walk;

pub use capacity::{
    average_capacity, biawgn_capacity, default_c_grid, min_snr, shannon_limit_db, MinSnr,
};
pub use moments::{
    fixed_point, frozen_fixed_point, frozen_iteration, moment_map, offset_moments,
    FixedPointResult, FrozenFixedPoint, RESIDUAL_LIMIT,
};
pub use walk::{
    crossing_probability, ml_ber_lower_bound, pairwise_error, signal_scale, soft_decoder_ber,
    soft_decoder_ber_finite, WalkMode, WalkRecursion, WALK_MAX_STEPS, WALK_TOLERANCE,
};

use crate::channel::c_from_snr_db;
use crate::error::{invalid, Result};
use crate::numerics::gaussian_q;

/// Asymptotic BER of the information bits that are still being decoded when
/// a fraction `λ` of them is frozen: `Q(√(c·X(λ)))`.
pub fn frozen_decoder_ber(lambda: f64, c: f64) -> Result<f64> {
    let fp = frozen_fixed_point(lambda, c)?;
    Ok(gaussian_q((c * fp.effective).sqrt()))
}

/// Which quantity a [`BoundCurve`] tabulates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    MlLower,
    SoftAsymptotic,
    SoftFinite { m: usize },
    Frozen { lambda: f64 },
    Simulation,
}

impl BoundKind {
    /// Name used in the `bound_kind` CSV column.
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::MlLower => "ml-lower",
            BoundKind::SoftAsymptotic => "soft-asymptotic",
            BoundKind::SoftFinite { .. } => "soft-finite",
            BoundKind::Frozen { .. } => "frozen",
            BoundKind::Simulation => "simulation",
        }
    }

    /// The bound at one SNR (dB per information bit).
    pub fn evaluate(&self, snr_db: f64) -> Result<f64> {
        let c = c_from_snr_db(snr_db);
        match *self {
            BoundKind::MlLower => Ok(ml_ber_lower_bound(c)),
            BoundKind::SoftAsymptotic => soft_decoder_ber(c),
            BoundKind::SoftFinite { m } => soft_decoder_ber_finite(c, m),
            BoundKind::Frozen { lambda } => frozen_decoder_ber(lambda, c),
            BoundKind::Simulation => Err(invalid(
                "kind",
                "simulation curves are measured, not computed",
            )),
        }
    }
}

/// BER (or probability) as a function of SNR in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    kind: BoundKind,
    snr_db: Vec<f64>,
    values: Vec<f64>,
}

impl BoundCurve {
    /// Checks that the grid is strictly increasing and every value is a
    /// probability.
    pub fn new(kind: BoundKind, snr_db: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if snr_db.len() != values.len() {
            return Err(crate::Error::LengthMismatch {
                expected: snr_db.len(),
                actual: values.len(),
            });
        }
        if snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("snr_db", "grid must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid("values", format!("{v} is not a probability")));
        }
        Ok(Self {
            kind,
            snr_db,
            values,
        })
    }

    /// Evaluates `kind` over `snr_db`.
    pub fn tabulate(kind: BoundKind, snr_db: &[f64]) -> Result<Self> {
        let values = snr_db
            .iter()
            .map(|&s| kind.evaluate(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, snr_db.to_vec(), values)
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.snr_db.iter().copied().zip(self.values.iter().copied())
    }
}
