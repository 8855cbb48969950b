//! Concentration sweeps over a grid of network sizes.
//!
//! For each size the model family is instantiated, the exact expected
//! adjacency matrices are computed once, and a batch of sampled realizations
//! is compared against them. Comparisons happen on the normalized scale
//! `A / delta` (delta taken from the expectation, per variant) so spectral
//! deviations are directly comparable to the concentration bounds after the
//! same rescaling. Each (size, trial, variant) triple yields one record;
//! per-size failures are recorded in the row status instead of aborting the
//! sweep.

use std::fmt;
use std::io::{BufRead, Write};

use crate::bounds::evaluate_bounds;
use crate::centrality::{
    avg_l1_error, degree_centrality, eigenvector_centrality, katz_centrality, CentralityVector,
};
use crate::expectation::{expected_adjacency, ExpectOptions, ExpectedMatrices};
use crate::linalg::{SymMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::model::{ModelConfig, SugmSpec};
use crate::par;
use crate::sampler::{sample, SampleOptions};

/// Column layout of the sweep CSV. Frozen: downstream tooling and the
/// round-trip reader key on these exact names.
pub const RECORD_HEADER: &str =
    "n,trial,variant,status,connected,gap,alpha,delta,norm_error,degree_error,eigen_error,katz_error,prop_bound";

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("epsilon = {epsilon} outside (0, 1)")]
    EpsilonOutOfRange { epsilon: f64 },
    #[error("sizes must be strictly ascending, got {sizes:?}")]
    UnsortedSizes { sizes: Vec<usize> },
    #[error("fixed alpha = {alpha} is not a positive finite number")]
    AlphaOutOfRange { alpha: f64 },
    #[error("no plottable series: every record is failed, degenerate, or non-positive")]
    EmptyPlot,
    #[error("csv line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which realized matrix a record compares: edge counts or their 0/1 cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Weighted,
    Unweighted,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Weighted, Variant::Unweighted];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Weighted => "weighted",
            Variant::Unweighted => "unweighted",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Row health. `Degenerate` marks rows whose eigenvector or Katz columns are
/// meaningless (tied top eigenvalues, unresolvable discount); those columns
/// hold NaN. `Failed` carries the error that prevented the row's size or
/// trial from being computed at all; every numeric column is NaN then.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordStatus {
    Ok,
    Degenerate,
    Failed(String),
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordStatus::Ok => f.write_str("ok"),
            RecordStatus::Degenerate => f.write_str("degenerate"),
            // Keep the CSV grid intact: the reason must stay on one line
            // and must not introduce extra columns.
            RecordStatus::Failed(reason) => {
                write!(f, "failed: {}", reason.replace([',', '\n', '\r'], ";"))
            }
        }
    }
}

/// One measured comparison between a sampled network and its expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n: usize,
    pub trial_index: usize,
    pub variant: Variant,
    pub status: RecordStatus,
    /// The sampled weighted graph is connected.
    pub connected_flag: bool,
    /// lambda1 - lambda2 of the normalized expected adjacency.
    pub gap: f64,
    /// Katz discount applied to both the realized and expected matrices.
    pub alpha_used: f64,
    /// Expected max row sum of the variant's unnormalized matrix.
    pub delta: f64,
    /// Spectral norm of (realized - expected) / delta.
    pub norm_error: f64,
    pub degree_error: f64,
    pub eigen_error: f64,
    pub katz_error: f64,
    /// Concentration bound for the variant on the unnormalized scale;
    /// the normalized claim is norm_error <= prop_bound / delta.
    pub bound_value: f64,
}

impl SweepRecord {
    fn failed(n: usize, trial_index: usize, variant: Variant, reason: &str) -> SweepRecord {
        SweepRecord {
            n,
            trial_index,
            variant,
            status: RecordStatus::Failed(reason.to_string()),
            connected_flag: false,
            gap: f64::NAN,
            alpha_used: f64::NAN,
            delta: f64::NAN,
            norm_error: f64::NAN,
            degree_error: f64::NAN,
            eigen_error: f64::NAN,
            katz_error: f64::NAN,
            bound_value: f64::NAN,
        }
    }

    /// Row in `RECORD_HEADER` order. Floats use the shortest round-trip
    /// form, so re-parsing reproduces them bit for bit.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.trial_index,
            self.variant,
            self.status,
            self.connected_flag,
            self.gap,
            self.alpha_used,
            self.delta,
            self.norm_error,
            self.degree_error,
            self.eigen_error,
            self.katz_error,
            self.bound_value,
        )
    }
}

/// Dominant-eigenvector displacement per record, kept out of the CSV.
/// Pairs with `gap` and `norm_error` for subspace perturbation checks.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDeviation {
    pub n: usize,
    pub trial_index: usize,
    pub variant: Variant,
    /// L2 distance between sign-aligned unit dominant eigenvectors of the
    /// normalized realized and expected matrices.
    pub deviation: f64,
    pub gap: f64,
    pub norm_error: f64,
    pub connected: bool,
    /// Either side had a tied top pair; the deviation is meaningless.
    pub degenerate: bool,
}

/// Katz discount policy for the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    /// Half the invertibility window of the expected matrix:
    /// alpha = 1 / (2 lambda1(E)).
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Network sizes, strictly ascending.
    pub sizes: Vec<usize>,
    /// Sampled realizations per size.
    pub trials: usize,
    /// Tail mass for the concentration bounds.
    pub epsilon: f64,
    /// Root seed; each (size, trial) derives its own sampling seed.
    pub master_seed: u64,
    pub alpha: AlphaChoice,
}

impl SweepOptions {
    pub fn new(sizes: Vec<usize>) -> SweepOptions {
        SweepOptions { sizes, trials: 5, epsilon: 0.05, master_seed: 0, alpha: AlphaChoice::Auto }
    }
}

/// Everything a sweep produced: the record grid sorted by
/// (n, trial, variant), the eigenvector displacement sidecar in the same
/// order, and the density-ratio envelope used in the bound columns.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub eigen_deviations: Vec<EigenDeviation>,
    /// max(1, delta_w / delta_u) over the sizes that evaluated cleanly.
    pub mu: f64,
}

/// SplitMix-style mix of (master, n, trial) into a sampling seed. Distinct
/// trials must decorrelate even when master seeds are small integers.
fn derive_seed(master: u64, n: usize, trial: usize) -> u64 {
    let mut h = master ^ 0x9E37_79B9_7F4A_7C15;
    for v in [n as u64, trial as u64] {
        h ^= v.wrapping_mul(0xBF58_476D_1CE4_E5B9).wrapping_add(0x94D0_49BB_1331_11EB);
        h = h.rotate_left(27).wrapping_mul(0x2545_F491_4F6C_DD1D);
        h ^= h >> 31;
    }
    h
}

/// Per-size state shared by every trial at that size.
enum SizePrep {
    Ready { spec: SugmSpec, expected: ExpectedMatrices, ratio: f64 },
    Failed(String),
}

/// Expected-side context for one variant at one size.
struct VariantContext {
    variant: Variant,
    delta: f64,
    /// 1/delta, or 0 when the matrix is identically zero (then realized
    /// matrices are a.s. zero too and every comparison is exactly 0).
    scale: f64,
    normalized: SymMatrix,
    gap: f64,
    degenerate_gap: bool,
    alpha: f64,
    bound: f64,
    e_degree: CentralityVector,
    e_eigen: CentralityVector,
    e_unit: Vec<f64>,
    e_katz: Option<CentralityVector>,
}

fn unit_of(c: &CentralityVector) -> Vec<f64> {
    let norm = c.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return c.values.clone();
    }
    c.values.iter().map(|v| v / norm).collect()
}

fn build_variant_context(
    variant: Variant,
    raw_expected: &SymMatrix,
    delta: f64,
    bound: f64,
    alpha_choice: AlphaChoice,
) -> Result<VariantContext, String> {
    let scale = if delta > 0.0 { 1.0 / delta } else { 0.0 };
    let normalized = raw_expected.scaled(scale);
    let top = normalized
        .top_two_eigenpairs(DEFAULT_TOL, DEFAULT_MAX_ITER)
        .map_err(|e| format!("expected eigenpairs: {e}"))?;
    let eigen = eigenvector_centrality(&normalized)
        .map_err(|e| format!("expected eigenvector centrality: {e}"))?;
    let alpha = match alpha_choice {
        AlphaChoice::Fixed(a) => a,
        AlphaChoice::Auto => {
            if top.lambda1 > 0.0 {
                1.0 / (2.0 * top.lambda1)
            } else {
                f64::NAN
            }
        }
    };
    let e_katz = if alpha.is_finite() && alpha > 0.0 {
        katz_centrality(&normalized, alpha).ok()
    } else {
        None
    };
    let e_unit = unit_of(&eigen.centrality);
    let e_degree = degree_centrality(&normalized);
    Ok(VariantContext {
        variant,
        delta,
        scale,
        normalized,
        gap: top.lambda1 - top.lambda2,
        degenerate_gap: eigen.degenerate_gap,
        alpha,
        bound,
        e_degree,
        e_eigen: eigen.centrality,
        e_unit,
        e_katz,
    })
}

/// Compare one sampled matrix against its variant context.
fn measure_trial(
    ctx: &VariantContext,
    raw_realized: &SymMatrix,
    n: usize,
    trial_index: usize,
    connected: bool,
) -> (SweepRecord, EigenDeviation) {
    let realized = raw_realized.scaled(ctx.scale);
    let diff = realized.sub(&ctx.normalized);
    let norm_error = match diff.spectral_norm(DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Ok(v) => v,
        Err(e) => {
            let record =
                SweepRecord::failed(n, trial_index, ctx.variant, &format!("deviation norm: {e}"));
            let dev = EigenDeviation {
                n,
                trial_index,
                variant: ctx.variant,
                deviation: f64::NAN,
                gap: ctx.gap,
                norm_error: f64::NAN,
                connected,
                degenerate: true,
            };
            return (record, dev);
        }
    };
    let degree_error = avg_l1_error(&degree_centrality(&realized), &ctx.e_degree)
        .expect("degree vectors share kind and length");

    let mut degenerate = ctx.degenerate_gap;
    let (eigen_error, deviation) = match eigenvector_centrality(&realized) {
        Ok(eigen) if !eigen.degenerate_gap && !ctx.degenerate_gap => {
            // The nonnegative-sum convention fixes signs on both sides, but
            // align explicitly so near-zero-sum vectors cannot flip.
            let mut values = eigen.centrality.values;
            let dot: f64 = values.iter().zip(&ctx.e_eigen.values).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                for v in &mut values {
                    *v = -*v;
                }
            }
            let aligned =
                CentralityVector { kind: ctx.e_eigen.kind, values, alpha: None };
            let err = avg_l1_error(&aligned, &ctx.e_eigen)
                .expect("eigen vectors share kind and length");
            let unit = unit_of(&aligned);
            let dev = unit
                .iter()
                .zip(&ctx.e_unit)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            (err, dev)
        }
        _ => {
            degenerate = true;
            (f64::NAN, f64::NAN)
        }
    };

    let katz_error = match (&ctx.e_katz, ctx.alpha) {
        (Some(e_katz), alpha) if alpha.is_finite() => match katz_centrality(&realized, alpha) {
            Ok(katz) => {
                avg_l1_error(&katz, e_katz).expect("katz vectors share kind and length")
            }
            Err(_) => {
                degenerate = true;
                f64::NAN
            }
        },
        _ => {
            degenerate = true;
            f64::NAN
        }
    };

    let status = if degenerate { RecordStatus::Degenerate } else { RecordStatus::Ok };
    let record = SweepRecord {
        n,
        trial_index,
        variant: ctx.variant,
        status,
        connected_flag: connected,
        gap: ctx.gap,
        alpha_used: ctx.alpha,
        delta: ctx.delta,
        norm_error,
        degree_error,
        eigen_error,
        katz_error,
        bound_value: ctx.bound,
    };
    let dev = EigenDeviation {
        n,
        trial_index,
        variant: ctx.variant,
        deviation,
        gap: ctx.gap,
        norm_error,
        connected,
        degenerate,
    };
    (record, dev)
}

/// Run the full grid. For each size the family is instantiated and its exact
/// expectation computed once; trials then sample with seeds derived from
/// (master_seed, n, trial) and may run in parallel. Per-size errors (model
/// capacity, budget) become `Failed` rows rather than aborting. Records come
/// back sorted by (n, trial, variant); zero trials yield an empty grid.
pub fn run_sweep(family: &ModelConfig, options: &SweepOptions) -> Result<SweepOutcome, SweepError> {
    if !(options.epsilon > 0.0 && options.epsilon < 1.0) {
        return Err(SweepError::EpsilonOutOfRange { epsilon: options.epsilon });
    }
    if !options.sizes.windows(2).all(|w| w[0] < w[1]) {
        return Err(SweepError::UnsortedSizes { sizes: options.sizes.clone() });
    }
    if let AlphaChoice::Fixed(alpha) = options.alpha {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(SweepError::AlphaOutOfRange { alpha });
        }
    }

    // Phase 1: exact expectations, once per size.
    let expect_options = ExpectOptions::default();
    let preps: Vec<(usize, SizePrep)> = options
        .sizes
        .iter()
        .map(|&n| {
            let prep = match family.at_size(n) {
                Ok(spec) => match expected_adjacency(&spec, &expect_options) {
                    Ok(expected) => {
                        let dw = expected.delta_weighted();
                        let du = expected.delta_unweighted();
                        let ratio = if du > 0.0 { (dw / du).max(1.0) } else { 1.0 };
                        SizePrep::Ready { spec, expected, ratio }
                    }
                    Err(e) => SizePrep::Failed(e.to_string()),
                },
                Err(e) => SizePrep::Failed(e.to_string()),
            };
            (n, prep)
        })
        .collect();

    // Density-ratio envelope over the sizes that evaluated cleanly; the
    // unweighted bound uses one mu for the whole sweep.
    let mu = preps
        .iter()
        .filter_map(|(_, p)| match p {
            SizePrep::Ready { ratio, .. } => Some(*ratio),
            SizePrep::Failed(_) => None,
        })
        .fold(1.0_f64, f64::max);

    let mut records = Vec::with_capacity(options.sizes.len() * options.trials * 2);
    let mut eigen_deviations = Vec::with_capacity(records.capacity());
    let sample_options = SampleOptions::default();

    for (n, prep) in &preps {
        let n = *n;
        let (spec, expected) = match prep {
            SizePrep::Ready { spec, expected, .. } => (spec, expected),
            SizePrep::Failed(reason) => {
                for trial in 0..options.trials {
                    for variant in Variant::ALL {
                        records.push(SweepRecord::failed(n, trial, variant, reason));
                    }
                }
                continue;
            }
        };

        let report = match evaluate_bounds(expected, spec.m_max(), options.epsilon, mu) {
            Ok(report) => report,
            Err(e) => {
                let reason = format!("bound evaluation: {e}");
                for trial in 0..options.trials {
                    for variant in Variant::ALL {
                        records.push(SweepRecord::failed(n, trial, variant, &reason));
                    }
                }
                continue;
            }
        };

        let contexts: Result<Vec<VariantContext>, String> = Variant::ALL
            .into_iter()
            .map(|variant| {
                let (raw, delta, bound) = match variant {
                    Variant::Weighted => {
                        (&expected.weighted, report.delta_weighted, report.prop1_bound)
                    }
                    Variant::Unweighted => {
                        (&expected.unweighted, report.delta_unweighted, report.prop2_bound)
                    }
                };
                build_variant_context(variant, raw, delta, bound, options.alpha)
            })
            .collect();
        let contexts = match contexts {
            Ok(c) => c,
            Err(reason) => {
                for trial in 0..options.trials {
                    for variant in Variant::ALL {
                        records.push(SweepRecord::failed(n, trial, variant, &reason));
                    }
                }
                continue;
            }
        };

        // Phase 2: independent trials, parallelizable, merged in order.
        let per_trial: Vec<Vec<(SweepRecord, EigenDeviation)>> =
            par::map_indexed(options.trials, |trial| {
                let seed = derive_seed(options.master_seed, n, trial);
                match sample(spec, seed, &sample_options) {
                    Ok(realization) => {
                        let connected = realization.is_connected();
                        let unweighted = realization.unweighted();
                        contexts
                            .iter()
                            .map(|ctx| {
                                let raw = match ctx.variant {
                                    Variant::Weighted => &realization.weighted,
                                    Variant::Unweighted => &unweighted,
                                };
                                measure_trial(ctx, raw, n, trial, connected)
                            })
                            .collect()
                    }
                    Err(e) => {
                        let reason = format!("sampling: {e}");
                        Variant::ALL
                            .into_iter()
                            .map(|variant| {
                                let record = SweepRecord::failed(n, trial, variant, &reason);
                                let dev = EigenDeviation {
                                    n,
                                    trial_index: trial,
                                    variant,
                                    deviation: f64::NAN,
                                    gap: f64::NAN,
                                    norm_error: f64::NAN,
                                    connected: false,
                                    degenerate: true,
                                };
                                (record, dev)
                            })
                            .collect()
                    }
                }
            });
        for trial_rows in per_trial {
            for (record, dev) in trial_rows {
                records.push(record);
                eigen_deviations.push(dev);
            }
        }
    }

    Ok(SweepOutcome { records, eigen_deviations, mu })
}

/// Write the frozen header plus one `csv_row` per record. Identical record
/// lists produce byte-identical output.
pub fn emit_csv(records: &[SweepRecord], mut out: impl Write) -> Result<(), SweepError> {
    writeln!(out, "{RECORD_HEADER}")?;
    for record in records {
        writeln!(out, "{}", record.csv_row())?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
    line: usize,
) -> Result<T, SweepError> {
    field.parse().map_err(|_| SweepError::MalformedCsv {
        line,
        reason: format!("bad {name} value {field:?}"),
    })
}

/// Parse output of `emit_csv`. Floats written in shortest round-trip form
/// come back exactly; a `Failed` reason survives as its sanitized form.
pub fn read_records(input: impl BufRead) -> Result<Vec<SweepRecord>, SweepError> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end() == RECORD_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(SweepError::MalformedCsv {
                line: 1,
                reason: format!("unexpected header {header:?}"),
            })
        }
        Some((_, Err(e))) => return Err(SweepError::Io(e)),
        None => {
            return Err(SweepError::MalformedCsv { line: 1, reason: "missing header".into() })
        }
    }
    let mut records = Vec::new();
    for (index, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = index + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(SweepError::MalformedCsv {
                line: lineno,
                reason: format!("expected 13 columns, got {}", fields.len()),
            });
        }
        let variant = match fields[2] {
            "weighted" => Variant::Weighted,
            "unweighted" => Variant::Unweighted,
            other => {
                return Err(SweepError::MalformedCsv {
                    line: lineno,
                    reason: format!("unknown variant {other:?}"),
                })
            }
        };
        let status = match fields[3] {
            "ok" => RecordStatus::Ok,
            "degenerate" => RecordStatus::Degenerate,
            other => match other.strip_prefix("failed: ") {
                Some(reason) => RecordStatus::Failed(reason.to_string()),
                None => {
                    return Err(SweepError::MalformedCsv {
                        line: lineno,
                        reason: format!("unknown status {other:?}"),
                    })
                }
            },
        };
        records.push(SweepRecord {
            n: parse_field(fields[0], "n", lineno)?,
            trial_index: parse_field(fields[1], "trial", lineno)?,
            variant,
            status,
            connected_flag: parse_field(fields[4], "connected", lineno)?,
            gap: parse_field(fields[5], "gap", lineno)?,
            alpha_used: parse_field(fields[6], "alpha", lineno)?,
            delta: parse_field(fields[7], "delta", lineno)?,
            norm_error: parse_field(fields[8], "norm_error", lineno)?,
            degree_error: parse_field(fields[9], "degree_error", lineno)?,
            eigen_error: parse_field(fields[10], "eigen_error", lineno)?,
            katz_error: parse_field(fields[11], "katz_error", lineno)?,
            bound_value: parse_field(fields[12], "prop_bound", lineno)?,
        });
    }
    Ok(records)
}

const PLOT_WIDTH: f64 = 720.0;
const PLOT_HEIGHT: f64 = 480.0;
const PLOT_MARGIN_LEFT: f64 = 70.0;
const PLOT_MARGIN_RIGHT: f64 = 150.0;
const PLOT_MARGIN_TOP: f64 = 40.0;
const PLOT_MARGIN_BOTTOM: f64 = 50.0;

const SERIES_KINDS: [&str; 4] = ["norm", "degree", "eigen", "katz"];
const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn error_of(record: &SweepRecord, kind: &str) -> f64 {
    match kind {
        "norm" => record.norm_error,
        "degree" => record.degree_error,
        "eigen" => record.eigen_error,
        _ => record.katz_error,
    }
}

/// Self-contained SVG of trial-averaged errors on log-log axes: one
/// polyline per (variant, error kind), x is the size grid. Rows with failed
/// status or non-finite values are skipped; averages that are not strictly
/// positive cannot be placed on a log axis and drop out of their series.
/// Each polyline carries a `data-series` attribute naming it.
pub fn emit_plot(records: &[SweepRecord], mut out: impl Write) -> Result<(), SweepError> {
    // (label, color, points in data space)
    let mut series: Vec<(String, &str, Vec<(f64, f64)>)> = Vec::new();
    let mut color_index = 0;
    for variant in Variant::ALL {
        for kind in SERIES_KINDS {
            let mut sizes: Vec<usize> = records
                .iter()
                .filter(|r| r.variant == variant)
                .map(|r| r.n)
                .collect();
            sizes.sort_unstable();
            sizes.dedup();
            let mut points = Vec::new();
            for n in sizes {
                let values: Vec<f64> = records
                    .iter()
                    .filter(|r| {
                        r.variant == variant
                            && r.n == n
                            && !matches!(r.status, RecordStatus::Failed(_))
                    })
                    .map(|r| error_of(r, kind))
                    .filter(|v| v.is_finite())
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                if mean > 0.0 {
                    points.push((n as f64, mean));
                }
            }
            let color = SERIES_COLORS[color_index % SERIES_COLORS.len()];
            color_index += 1;
            if !points.is_empty() {
                series.push((format!("{variant}-{kind}"), color, points));
            }
        }
    }
    if series.is_empty() {
        return Err(SweepError::EmptyPlot);
    }

    let xs: Vec<f64> = series.iter().flat_map(|s| s.2.iter().map(|p| p.0.ln())).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.2.iter().map(|p| p.1.ln())).collect();
    let (x_min, x_max) = min_max(&xs);
    let (y_min, y_max) = min_max(&ys);
    let inner_w = PLOT_WIDTH - PLOT_MARGIN_LEFT - PLOT_MARGIN_RIGHT;
    let inner_h = PLOT_HEIGHT - PLOT_MARGIN_TOP - PLOT_MARGIN_BOTTOM;
    let to_x = |v: f64| {
        let t = if x_max > x_min { (v.ln() - x_min) / (x_max - x_min) } else { 0.5 };
        PLOT_MARGIN_LEFT + t * inner_w
    };
    let to_y = |v: f64| {
        let t = if y_max > y_min { (v.ln() - y_min) / (y_max - y_min) } else { 0.5 };
        // SVG y grows downward; larger values sit higher.
        PLOT_MARGIN_TOP + (1.0 - t) * inner_h
    };

    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\">"
    )?;
    writeln!(out, "  <rect width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" fill=\"white\"/>")?;
    writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">trial-averaged deviation vs network size (log-log)</text>",
        PLOT_MARGIN_LEFT
    )?;
    let x0 = PLOT_MARGIN_LEFT;
    let x1 = PLOT_WIDTH - PLOT_MARGIN_RIGHT;
    let y0 = PLOT_MARGIN_TOP;
    let y1 = PLOT_HEIGHT - PLOT_MARGIN_BOTTOM;
    writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y1:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>"
    )?;
    writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>"
    )?;
    writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">n (log)</text>",
        (x0 + x1) / 2.0 - 20.0,
        y1 + 34.0
    )?;
    writeln!(
        out,
        "  <text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.2})\">error (log)</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )?;

    // Tick marks at every distinct size that appears in some series.
    let mut tick_sizes: Vec<u64> = series
        .iter()
        .flat_map(|s| s.2.iter().map(|p| p.0 as u64))
        .collect();
    tick_sizes.sort_unstable();
    tick_sizes.dedup();
    for n in tick_sizes {
        let x = to_x(n as f64);
        writeln!(
            out,
            "  <line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y1 + 5.0
        )?;
        writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{n}</text>",
            x - 10.0,
            y1 + 18.0
        )?;
    }

    for (index, (label, color, points)) in series.iter().enumerate() {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        writeln!(
            out,
            "  <polyline data-series=\"{label}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        )?;
        let ly = PLOT_MARGIN_TOP + 14.0 * index as f64;
        writeln!(
            out,
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            x1 + 10.0,
            ly
        )?;
        writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>",
            x1 + 24.0,
            ly + 9.0
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
