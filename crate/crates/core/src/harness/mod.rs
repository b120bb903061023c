//! Experiment descriptions and the runner that turns them into CSV tables.
//!
//! An [`ExperimentSpec`] is plain data (loadable from JSON) naming one of
//! the experiment kinds and its grid. [`run`] validates it, evaluates the
//! bounds, runs any Monte-Carlo trials and returns a [`Table`]. The output
//! depends only on the spec: the same spec gives byte-identical CSV on any
//! machine or thread count.

mod simulate;
mod stats;
mod table;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use simulate::{simulate_ber, simulate_multilevel, DecoderKind, MultilevelCount, BATCH};
pub use stats::{wilson_interval, ErrorCount, Z_95};
pub use table::{cell, Cell, Table, BER_COLUMNS};

use crate::analysis::{
    default_c_grid, fixed_point, frozen_decoder_ber, min_snr, moment_map, pairwise_error,
    shannon_limit_db, BoundKind,
};
use crate::bp::{default_iterations, BpConfig};
use crate::channel::{c_from_snr_db, params_from_snr_db, snr_db_from_c};
use crate::error::{Error, Result};
use crate::multilevel::{allocate_rates, MultilevelConfig, MultilevelScheme};

/// Trials per SNR point when a spec does not say.
pub const DEFAULT_TRIALS: u64 = 100_000;
/// Information length when a spec does not say.
pub const DEFAULT_M: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Simulated BER against the ML and soft-decoder bounds.
    BerSweep,
    /// Simulated BER with a known prefix against the frozen-bit bound.
    FrozenSweep,
    /// Every bound on an SNR grid, no simulation.
    BoundsTable,
    /// Minimum SNR of the multilevel scheme for each `b`.
    CapacityTable,
    /// The offset-moment map `R_c(x)` on `x ∈ [0, 1]`.
    FixedPointPlot,
    /// Monte-Carlo run of the multilevel scheme.
    MultilevelRun,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::BerSweep => "ber-sweep",
            ExperimentKind::FrozenSweep => "frozen-sweep",
            ExperimentKind::BoundsTable => "bounds-table",
            ExperimentKind::CapacityTable => "capacity-table",
            ExperimentKind::FixedPointPlot => "fixed-point-plot",
            ExperimentKind::MultilevelRun => "multilevel-run",
        }
    }
}

/// Multilevel settings used when no explicit configuration is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilevelSpec {
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_mu")]
    pub mu: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Freeze the transmitted symbols instead of the decoded ones.
    #[serde(default)]
    pub genie: bool,
    /// A complete scheme; overrides `b`, `mu`, `margin` and the SNR grid.
    #[serde(default)]
    pub config: Option<MultilevelConfig>,
}

impl Default for MultilevelSpec {
    fn default() -> Self {
        Self {
            b: default_b(),
            mu: default_mu(),
            margin: default_margin(),
            genie: false,
            config: None,
        }
    }
}

fn default_b() -> usize {
    4
}

fn default_mu() -> usize {
    64
}

fn default_margin() -> f64 {
    0.25
}

fn default_m() -> usize {
    DEFAULT_M
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default = "default_m")]
    pub m: usize,
    /// SNR per information bit, dB.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    /// Fractions of frozen information bits.
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// BP iterations; `None` uses `ceil(2 ln m / ln c)` at each SNR.
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub decoder: DecoderKind,
    /// Interleaving depths for the capacity table.
    #[serde(default)]
    pub b: Vec<usize>,
    #[serde(default)]
    pub multilevel: MultilevelSpec,
    /// Where the CLI writes the table; not part of the experiment itself.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// A spec of the given kind with every other field at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            m: DEFAULT_M,
            snr_db: Vec::new(),
            lambda: Vec::new(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            iterations: None,
            decoder: DecoderKind::default(),
            b: Vec::new(),
            multilevel: MultilevelSpec::default(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| field("spec", e.to_string()))
    }

    /// The spec as echoed into the CSV metadata (without the output path).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }

    /// Checks the fields that `kind` uses; errors carry the field path.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let kind = self.kind;
        let simulates = matches!(kind, BerSweep | FrozenSweep | MultilevelRun);
        if matches!(kind, BerSweep | FrozenSweep | BoundsTable) && self.m < 2 {
            return Err(field("m", format!("{} < 2", self.m)));
        }
        let needs_snr = !matches!(kind, CapacityTable)
            && !(kind == MultilevelRun && self.multilevel.config.is_some());
        if needs_snr && self.snr_db.is_empty() {
            return Err(field("snr_db", "at least one SNR is required"));
        }
        for (i, s) in self.snr_db.iter().enumerate() {
            if !s.is_finite() {
                return Err(field(format!("snr_db[{i}]"), format!("{s} is not finite")));
            }
        }
        if kind == FrozenSweep && self.lambda.is_empty() {
            return Err(field("lambda", "at least one fraction is required"));
        }
        for (i, &l) in self.lambda.iter().enumerate() {
            if !(0.0..1.0).contains(&l) {
                return Err(field(
                    format!("lambda[{i}]"),
                    format!("{l} is outside [0, 1)"),
                ));
            }
            if kind == FrozenSweep && known_bits(l, self.m) >= self.m {
                return Err(field(
                    format!("lambda[{i}]"),
                    format!("{l} freezes every bit of m={}", self.m),
                ));
            }
        }
        if kind == FrozenSweep && self.decoder == DecoderKind::Full {
            return Err(field("decoder", "frozen sweeps use the simplified decoder"));
        }
        if simulates && self.trials == 0 {
            return Err(field("trials", "must be at least 1"));
        }
        if self.iterations == Some(0) {
            return Err(field("iterations", "must be at least 1"));
        }
        if simulates && self.iterations.is_none() {
            for (i, &s) in self.snr_db.iter().enumerate() {
                if c_from_snr_db(s) <= 1.0 {
                    return Err(field(
                        format!("snr_db[{i}]"),
                        format!("{s} dB has c ≤ 1, so set iterations explicitly"),
                    ));
                }
            }
        }
        if kind == CapacityTable {
            if self.b.is_empty() {
                return Err(field("b", "at least one depth is required"));
            }
            if let Some(i) = self.b.iter().position(|&b| b == 0) {
                return Err(field(format!("b[{i}]"), "must be at least 1"));
            }
        }
        if kind == MultilevelRun {
            let ml = &self.multilevel;
            if let Some(config) = &ml.config {
                if !self.snr_db.is_empty() {
                    return Err(field(
                        "snr_db",
                        "the multilevel configuration fixes the SNR; leave this empty",
                    ));
                }
                config
                    .validate()
                    .map_err(|e| within("multilevel.config", e))?;
            } else {
                if ml.b == 0 {
                    return Err(field("multilevel.b", "must be at least 1"));
                }
                if ml.mu < 2 || !ml.mu.is_power_of_two() {
                    return Err(field(
                        "multilevel.mu",
                        format!("{} is not a power of two ≥ 2", ml.mu),
                    ));
                }
                if !(ml.margin > 0.0 && ml.margin <= 1.0) {
                    return Err(field(
                        "multilevel.margin",
                        format!("{} is outside (0, 1]", ml.margin),
                    ));
                }
                for (i, &s) in self.snr_db.iter().enumerate() {
                    if c_from_snr_db(s) <= 1.0 {
                        return Err(field(
                            format!("snr_db[{i}]"),
                            format!("{s} dB has c ≤ 1; no rate can be allocated"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn field(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidField {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Re-homes a nested validation error under `prefix`.
fn within(prefix: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => field(format!("{prefix}.{name}"), reason),
        Error::InvalidField { path, reason } => field(format!("{prefix}.{path}"), reason),
        other => field(prefix, other.to_string()),
    }
}

/// Number of frozen bits for a fraction `λ` of `m`.
pub fn known_bits(lambda: f64, m: usize) -> usize {
    (lambda * m as f64).round() as usize
}

fn iterations_at(spec: &ExperimentSpec, m: usize, c: f64) -> Result<usize> {
    match spec.iterations {
        Some(l) => Ok(l),
        None => default_iterations(m, c),
    }
}

/// Validates `spec` and produces its table.
pub fn run(spec: &ExperimentSpec) -> Result<Table> {
    spec.validate()?;
    let columns: &[&'static str] = match spec.kind {
        ExperimentKind::CapacityTable => &[
            "b",
            "c_opt",
            "snr_db_opt",
            "rho_c",
            "kappa",
            "kappa_db",
            "gap_db",
        ],
        ExperimentKind::FixedPointPlot => &["snr_db", "c", "x", "r_c", "x_star"],
        _ => &BER_COLUMNS,
    };
    let mut table = Table::new(columns);
    table.annotate("modlab", env!("CARGO_PKG_VERSION"));
    table.annotate("kind", spec.kind.label());
    table.annotate("seed", spec.seed.to_string());
    table.annotate("spec", spec.to_json());
    match spec.kind {
        ExperimentKind::BerSweep => ber_sweep(spec, &mut table)?,
        ExperimentKind::FrozenSweep => frozen_sweep(spec, &mut table)?,
        ExperimentKind::BoundsTable => bounds_table(spec, &mut table)?,
        ExperimentKind::CapacityTable => capacity_table(spec, &mut table)?,
        ExperimentKind::FixedPointPlot => fixed_point_plot(spec, &mut table)?,
        ExperimentKind::MultilevelRun => multilevel_run(spec, &mut table)?,
    }
    Ok(table)
}

/// A BER row: simulation columns from `count` (if any), then one bound.
fn ber_row(
    snr_db: f64,
    lambda: Option<f64>,
    m: usize,
    count: Option<&ErrorCount>,
    bound_kind: &str,
    bound_value: Option<f64>,
) -> Vec<Cell> {
    let sim: [Cell; 5] = match count {
        Some(c) => {
            let (lo, hi) = c.wilson();
            [
                cell(c.trials),
                cell(c.errors),
                cell(c.reported_rate()),
                cell(lo),
                cell(hi),
            ]
        }
        None => Default::default(),
    };
    let mut row = vec![cell(snr_db), lambda.and_then(cell_f64), cell(m)];
    row.extend(sim);
    row.push(cell(bound_kind));
    row.push(bound_value.and_then(cell_f64));
    row
}

fn cell_f64(v: f64) -> Cell {
    cell(v)
}

fn ber_sweep(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    table.annotate("decoder", spec.decoder.label());
    let mut used = Vec::new();
    for (i, &snr) in spec.snr_db.iter().enumerate() {
        let params = params_from_snr_db(spec.m, snr)?;
        let l = iterations_at(spec, spec.m, params.c)?;
        used.push(l.to_string());
        let count = simulate_ber(
            &params,
            0,
            spec.decoder,
            &BpConfig::fixed(l),
            spec.trials,
            spec.seed.wrapping_add(i as u64),
        )?;
        for kind in [
            BoundKind::MlLower,
            BoundKind::SoftAsymptotic,
            BoundKind::SoftFinite { m: spec.m },
        ] {
            let value = kind.evaluate(snr)?;
            table.push(ber_row(
                snr,
                None,
                spec.m,
                Some(&count),
                kind.label(),
                Some(value),
            ));
        }
    }
    table.annotate("iterations", used.join(";"));
    Ok(())
}

fn frozen_sweep(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    table.annotate("decoder", spec.decoder.label());
    let mut used = Vec::new();
    for (i, &snr) in spec.snr_db.iter().enumerate() {
        let params = params_from_snr_db(spec.m, snr)?;
        let l = iterations_at(spec, spec.m, params.c)?;
        used.push(l.to_string());
        for (j, &lambda) in spec.lambda.iter().enumerate() {
            let known = known_bits(lambda, spec.m);
            let exact = known as f64 / spec.m as f64;
            // Distinct, reproducible seed per grid point.
            let seed = spec.seed.wrapping_add((i * spec.lambda.len() + j) as u64);
            let count = simulate_ber(
                &params,
                known,
                spec.decoder,
                &BpConfig::fixed(l),
                spec.trials,
                seed,
            )?;
            let bound = frozen_decoder_ber(exact, params.c)?;
            table.push(ber_row(
                snr,
                Some(exact),
                spec.m,
                Some(&count),
                "frozen",
                Some(bound),
            ));
        }
    }
    table.annotate("iterations", used.join(";"));
    Ok(())
}

fn bounds_table(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    for &snr in &spec.snr_db {
        for kind in [
            BoundKind::MlLower,
            BoundKind::SoftAsymptotic,
            BoundKind::SoftFinite { m: spec.m },
        ] {
            let value = kind.evaluate(snr)?;
            table.push(ber_row(snr, None, spec.m, None, kind.label(), Some(value)));
        }
        let params = params_from_snr_db(spec.m, snr)?;
        table.push(ber_row(
            snr,
            None,
            spec.m,
            None,
            "two-word",
            Some(pairwise_error(&params)),
        ));
        for &lambda in &spec.lambda {
            let value = frozen_decoder_ber(lambda, params.c)?;
            table.push(ber_row(
                snr,
                Some(lambda),
                spec.m,
                None,
                "frozen",
                Some(value),
            ));
        }
    }
    Ok(())
}

fn capacity_table(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    let shannon = shannon_limit_db();
    table.annotate("shannon_limit_db", shannon.to_string());
    let grid = default_c_grid();
    for &b in &spec.b {
        let best = min_snr(b, &grid)?;
        table.push(vec![
            cell(best.b),
            cell(best.c_opt),
            cell(snr_db_from_c(best.c_opt)),
            cell(best.rho_c),
            cell(best.kappa),
            cell(best.kappa_db),
            cell(best.kappa_db - shannon),
        ]);
    }
    Ok(())
}

/// Points per unit interval in the fixed-point plot.
const PLOT_POINTS: usize = 100;

fn fixed_point_plot(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    for &snr in &spec.snr_db {
        let c = c_from_snr_db(snr);
        let x_star = fixed_point(c)?.positive_root();
        for k in 0..=PLOT_POINTS {
            let x = k as f64 / PLOT_POINTS as f64;
            table.push(vec![
                cell(snr),
                cell(c),
                cell(x),
                cell(moment_map(x, c)),
                x_star.and_then(cell_f64),
            ]);
        }
    }
    Ok(())
}

fn multilevel_run(spec: &ExperimentSpec, table: &mut Table) -> Result<()> {
    let ml = &spec.multilevel;
    let configs: Vec<MultilevelConfig> = match &ml.config {
        Some(config) => vec![config.clone()],
        None => spec
            .snr_db
            .iter()
            .map(|&s| allocate_rates(c_from_snr_db(s), ml.b, ml.mu, ml.margin))
            .collect::<Result<_>>()?,
    };
    table.annotate("feedback", if ml.genie { "genie" } else { "decoded" });
    for (i, config) in configs.into_iter().enumerate() {
        let snr = config.snr_db;
        let scheme = MultilevelScheme::new(config)?;
        let config = scheme.config();
        let (m, b) = (config.m(), config.b);
        let c = scheme.params().c;
        let l = iterations_at(spec, m, c)?;
        let count = simulate_multilevel(
            &scheme,
            &BpConfig::fixed(l),
            spec.trials,
            spec.seed.wrapping_add(i as u64),
            ml.genie,
        )?;
        let rates: Vec<String> = config.rates.iter().map(f64::to_string).collect();
        table.annotate(format!("snr_db={snr} rates"), rates.join(";"));
        table.annotate(
            format!("snr_db={snr} compound_rate"),
            config.compound_rate().to_string(),
        );
        table.annotate(format!("snr_db={snr} iterations"), l.to_string());
        table.annotate(
            format!("snr_db={snr} bp_edge_updates"),
            count.bp_edge_updates.to_string(),
        );
        table.annotate(
            format!("snr_db={snr} polar_operations"),
            count.polar_operations.to_string(),
        );
        for (s, round) in count.rounds.iter().enumerate() {
            let lambda = s as f64 / b as f64;
            let bound = frozen_decoder_ber(lambda, c)?;
            table.push(ber_row(
                snr,
                Some(lambda),
                m,
                Some(round),
                "frozen",
                Some(bound),
            ));
        }
        table.push(ber_row(snr, None, m, Some(&count.info), "multilevel", None));
        let bare = BoundKind::SoftFinite { m }.evaluate(snr)?;
        table.push(ber_row(
            snr,
            None,
            m,
            Some(&count.bare),
            BoundKind::SoftFinite { m }.label(),
            Some(bare),
        ));
    }
    Ok(())
}
