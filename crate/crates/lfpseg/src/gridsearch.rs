//! The parameter-search protocol: Cartesian grids over detector parameters,
//! seeded train/validation splits, deterministic (optionally parallel)
//! corpus evaluation, top-k reporting and low-SNR fine-tuning.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::DensityThresholds;
use crate::error::{Error, Result};
use crate::metrics::{
    evaluate, pearson_corr, ClassCounts, ClassMetrics, EvalReport, MatchRule, ScoreWeights,
};
use crate::pipeline::{detect_and_classify, Algorithm, DetectorConfig};
use crate::signal::AnnotatedRecord;

/// A parameter swept by the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    ThresholdSigma,
    DeltaS,
    LagS,
    Influence,
    IctalDensityHz,
    InterictalDensityHz,
    MinIctalDurationS,
    PadS,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::ThresholdSigma => "threshold_sigma",
            AxisParam::DeltaS => "delta_s",
            AxisParam::LagS => "lag_s",
            AxisParam::Influence => "influence",
            AxisParam::IctalDensityHz => "ictal_density_hz",
            AxisParam::InterictalDensityHz => "interictal_density_hz",
            AxisParam::MinIctalDurationS => "min_ictal_duration_s",
            AxisParam::PadS => "pad_s",
        }
    }

    fn apply(
        &self,
        config: &mut DetectorConfig,
        thresholds: &mut DensityThresholds,
        value: f64,
    ) -> Result<()> {
        let mismatch = |algorithm: &'static str| Error::AxisMismatch {
            axis: self.name().to_string(),
            algorithm,
        };
        match self {
            AxisParam::ThresholdSigma => match config {
                DetectorConfig::Zdr(p) => p.threshold_sigma = value,
                DetectorConfig::Ampde(p) => p.threshold_sigma = value,
            },
            AxisParam::DeltaS => match config {
                DetectorConfig::Zdr(p) => p.delta_s = value,
                DetectorConfig::Ampde(p) => p.delta_s = value,
            },
            AxisParam::LagS => match config {
                DetectorConfig::Zdr(p) => p.lag_s = value,
                DetectorConfig::Ampde(_) => return Err(mismatch("ampde")),
            },
            AxisParam::Influence => match config {
                DetectorConfig::Zdr(p) => p.influence = value,
                DetectorConfig::Ampde(_) => return Err(mismatch("ampde")),
            },
            AxisParam::IctalDensityHz => thresholds.ictal_density_hz = value,
            AxisParam::InterictalDensityHz => thresholds.interictal_density_hz = value,
            AxisParam::MinIctalDurationS => thresholds.min_ictal_duration_s = value,
            AxisParam::PadS => thresholds.pad_s = value,
        }
        Ok(())
    }

    /// Keeps fine-tuning candidates inside the parameter's domain.
    fn clamp(&self, value: f64) -> Option<f64> {
        match self {
            AxisParam::Influence => Some(value.clamp(0.0, 1.0)),
            AxisParam::PadS => (value >= 0.0).then_some(value),
            _ => (value > 0.0).then_some(value),
        }
    }
}

/// One grid axis: a parameter and the values it sweeps.
#[derive(Debug, Clone)]
pub struct GridAxis {
    pub param: AxisParam,
    pub values: Vec<f64>,
}

/// Grid definition: fixed base parameters plus swept axes, expanded in
/// listed order (first axis slowest).
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub base: DetectorConfig,
    pub thresholds: DensityThresholds,
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    /// The standard optimization matrix for the z-score detector:
    /// threshold 4/5/6 sigma, delta 3/4/5 s, lag 0.125/0.25/0.5 s.
    pub fn zdr_matrix(base: crate::zdr::ZdrParams, thresholds: DensityThresholds) -> GridSpec {
        GridSpec {
            base: DetectorConfig::Zdr(base),
            thresholds,
            axes: vec![
                GridAxis {
                    param: AxisParam::ThresholdSigma,
                    values: vec![4.0, 5.0, 6.0],
                },
                GridAxis {
                    param: AxisParam::DeltaS,
                    values: vec![3.0, 4.0, 5.0],
                },
                GridAxis {
                    param: AxisParam::LagS,
                    values: vec![0.125, 0.25, 0.5],
                },
            ],
        }
    }

    /// The standard optimization matrix for the multiscale detector:
    /// threshold 3/4/5/6 sigma, delta 1.5/2/2.5 s.
    pub fn ampde_matrix(
        base: crate::ampde::AmpdeParams,
        thresholds: DensityThresholds,
    ) -> GridSpec {
        GridSpec {
            base: DetectorConfig::Ampde(base),
            thresholds,
            axes: vec![
                GridAxis {
                    param: AxisParam::ThresholdSigma,
                    values: vec![3.0, 4.0, 5.0, 6.0],
                },
                GridAxis {
                    param: AxisParam::DeltaS,
                    values: vec![1.5, 2.0, 2.5],
                },
            ],
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.base.algorithm()
    }
}

/// One fully resolved grid cell.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub config: DetectorConfig,
    pub thresholds: DensityThresholds,
    /// Swept values in axis order, for reporting.
    pub axis_values: Vec<f64>,
}

/// Expands the spec into the full Cartesian product, first axis slowest.
pub fn param_grid(spec: &GridSpec) -> Result<Vec<GridPoint>> {
    for axis in &spec.axes {
        if axis.values.is_empty() {
            return Err(Error::EmptyAxis {
                name: axis.param.name().to_string(),
            });
        }
    }
    let total: usize = spec.axes.iter().map(|a| a.values.len()).product();
    let mut points = Vec::with_capacity(total);
    let mut cursor = vec![0usize; spec.axes.len()];
    loop {
        let mut config = spec.base;
        let mut thresholds = spec.thresholds;
        let mut axis_values = Vec::with_capacity(spec.axes.len());
        for (axis, &i) in spec.axes.iter().zip(&cursor) {
            let value = axis.values[i];
            axis.param.apply(&mut config, &mut thresholds, value)?;
            axis_values.push(value);
        }
        points.push(GridPoint {
            config,
            thresholds,
            axis_values,
        });
        // Odometer increment, rightmost axis fastest.
        let mut pos = spec.axes.len();
        loop {
            if pos == 0 {
                return Ok(points);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < spec.axes[pos].values.len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Train/validation split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

/// Seeded shuffle, then the first ceil(fraction * n) records go to train and
/// the rest to validation.
pub fn split_dataset(
    records: &[AnnotatedRecord],
    spec: &SplitSpec,
) -> Result<(Vec<AnnotatedRecord>, Vec<AnnotatedRecord>)> {
    if records.len() < 2 {
        return Err(Error::TooFew {
            what: "records",
            min: 2,
            got: records.len(),
        });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParam {
            name: "train_fraction",
            detail: format!("must lie in (0, 1), got {}", spec.train_fraction),
        });
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..order.len()).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        order.swap(i, j);
    }
    let n_train = (spec.train_fraction * records.len() as f64).ceil() as usize;
    let train = order[..n_train]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    let validation = order[n_train..]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    Ok((train, validation))
}

/// Evaluation of one parameter set over a record corpus.
#[derive(Debug, Clone)]
pub struct GridResult {
    pub point: GridPoint,
    /// Position of the parameter set in the expanded grid; the ranking
    /// tie-breaker.
    pub grid_index: usize,
    pub per_record: Vec<(String, EvalReport)>,
    pub mean_score: f64,
}

fn zeroed_report() -> EvalReport {
    let zero = ClassMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        jaccard: 0.0,
        counts: ClassCounts::default(),
    };
    EvalReport {
        ictal: zero,
        interictal: zero,
        score: 0.0,
    }
}

fn eval_cell(
    point: &GridPoint,
    record: &AnnotatedRecord,
    rule: &MatchRule,
    weights: &ScoreWeights,
) -> EvalReport {
    let result = detect_and_classify(&point.config, &point.thresholds, &record.signal)
        .and_then(|(_, segmentation)| evaluate(&record.reference, &segmentation, rule, weights));
    match result {
        Ok(report) => report,
        Err(err) => {
            log::warn!(
                "detector failed on record {}: {err}; scoring cell as 0",
                record.session_id
            );
            zeroed_report()
        }
    }
}

/// Evaluates every grid point on every record and ranks parameter sets by
/// mean score (descending; ties resolve to the earlier grid point).
///
/// `workers` sizes the thread pool; 0 uses all available cores. Results are
/// identical for any worker count: cells are pure and merged by index.
pub fn run_grid(
    records: &[AnnotatedRecord],
    spec: &GridSpec,
    rule: &MatchRule,
    weights: &ScoreWeights,
    workers: usize,
) -> Result<Vec<GridResult>> {
    if records.is_empty() {
        return Err(Error::TooFew {
            what: "records",
            min: 1,
            got: 0,
        });
    }
    let points = param_grid(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParam {
            name: "workers",
            detail: e.to_string(),
        })?;

    let n_records = records.len();
    let reports: Vec<EvalReport> = pool.install(|| {
        (0..points.len() * n_records)
            .into_par_iter()
            .map(|cell| {
                let point = &points[cell / n_records];
                let record = &records[cell % n_records];
                eval_cell(point, record, rule, weights)
            })
            .collect()
    });

    let mut results: Vec<GridResult> = points
        .into_iter()
        .enumerate()
        .map(|(grid_index, point)| {
            let slice = &reports[grid_index * n_records..(grid_index + 1) * n_records];
            let per_record: Vec<(String, EvalReport)> = records
                .iter()
                .zip(slice)
                .map(|(r, report)| (r.session_id.clone(), report.clone()))
                .collect();
            let mean_score =
                per_record.iter().map(|(_, r)| r.score).sum::<f64>() / n_records as f64;
            GridResult {
                point,
                grid_index,
                per_record,
                mean_score,
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.mean_score
            .partial_cmp(&a.mean_score)
            .unwrap()
            .then(a.grid_index.cmp(&b.grid_index))
    });
    Ok(results)
}

/// The best configurations of a ranked grid run.
#[derive(Debug, Clone)]
pub struct TopKSelection {
    /// The top min(k, len) results, best first.
    pub top: Vec<GridResult>,
    /// Mean of the selected results' mean scores.
    pub average_score: f64,
    /// The rank-1 parameter set.
    pub recommended: GridPoint,
}

/// Takes the best `k` entries of a ranked result list.
pub fn select_top_k(results: &[GridResult], k: usize) -> Result<TopKSelection> {
    if results.is_empty() {
        return Err(Error::TooFew {
            what: "grid results",
            min: 1,
            got: 0,
        });
    }
    let take = k.min(results.len()).max(1);
    let top: Vec<GridResult> = results[..take].to_vec();
    let average_score = top.iter().map(|r| r.mean_score).sum::<f64>() / take as f64;
    Ok(TopKSelection {
        average_score,
        recommended: results[0].point.clone(),
        top,
    })
}

/// Refines a configuration on the low-SNR subset of the corpus.
///
/// Builds a local grid around `base`: every swept axis takes up to
/// `refine_radius` steps on each side at half the original grid spacing
/// (single-value axes stay fixed), evaluates it on records with
/// `snr_db < snr_cutoff_db` and returns the winner. The incumbent is part of
/// the local grid, so the result never scores worse than `base` on that
/// subset. Without low-SNR records, `base` is returned unchanged.
#[allow(clippy::too_many_arguments)]
pub fn finetune_low_snr(
    records: &[AnnotatedRecord],
    spec: &GridSpec,
    base: &GridPoint,
    snr_cutoff_db: f64,
    refine_radius: usize,
    rule: &MatchRule,
    weights: &ScoreWeights,
    workers: usize,
) -> Result<GridPoint> {
    let low_snr: Vec<AnnotatedRecord> = records
        .iter()
        .filter(|r| r.snr_db.is_some_and(|snr| snr < snr_cutoff_db))
        .cloned()
        .collect();
    if low_snr.is_empty() || refine_radius == 0 {
        return Ok(base.clone());
    }

    let mut local_axes = Vec::with_capacity(spec.axes.len());
    for (axis, &center) in spec.axes.iter().zip(&base.axis_values) {
        let mut sorted = axis.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        let spacing = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let mut values = vec![center];
        if spacing.is_finite() {
            let step = spacing / 2.0;
            for offset in 1..=refine_radius {
                for sign in [-1.0, 1.0] {
                    if let Some(v) = axis.param.clamp(center + sign * offset as f64 * step) {
                        values.push(v);
                    }
                }
            }
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        local_axes.push(GridAxis {
            param: axis.param,
            values,
        });
    }
    let local_spec = GridSpec {
        base: base.config,
        thresholds: base.thresholds,
        axes: local_axes,
    };
    let ranked = run_grid(&low_snr, &local_spec, rule, weights, workers)?;
    Ok(ranked
        .into_iter()
        .next()
        .expect("local grid is non-empty")
        .point)
}

/// Pearson correlation between per-record SNR and score.
pub fn correlate_score_snr(per_record: &[(f64, f64)]) -> Result<f64> {
    let snrs: Vec<f64> = per_record.iter().map(|&(snr, _)| snr).collect();
    let scores: Vec<f64> = per_record.iter().map(|&(_, score)| score).collect();
    pearson_corr(&snrs, &scores)
}

/// Serializes ranked grid results as CSV: one row per parameter set with the
/// axis values, the mean score and per-metric means over the corpus.
pub fn results_csv(spec: &GridSpec, results: &[GridResult]) -> String {
    let mut out = String::new();
    for axis in &spec.axes {
        out.push_str(axis.param.name());
        out.push(',');
    }
    out.push_str("mean_score,");
    let metric_means = [
        "mean_precision_ictal",
        "mean_precision_interictal",
        "mean_recall_ictal",
        "mean_recall_interictal",
        "mean_jaccard_ictal",
        "mean_jaccard_interictal",
        "mean_f_measure_ictal",
        "mean_f_measure_interictal",
    ];
    out.push_str(&metric_means.join(","));
    out.push('\n');
    for result in results {
        for v in &result.point.axis_values {
            out.push_str(&v.to_string());
            out.push(',');
        }
        let n = result.per_record.len() as f64;
        let mean = |f: &dyn Fn(&EvalReport) -> f64| {
            result.per_record.iter().map(|(_, r)| f(r)).sum::<f64>() / n
        };
        let columns = [
            result.mean_score,
            mean(&|r| r.ictal.precision),
            mean(&|r| r.interictal.precision),
            mean(&|r| r.ictal.recall),
            mean(&|r| r.interictal.recall),
            mean(&|r| r.ictal.jaccard),
            mean(&|r| r.interictal.jaccard),
            mean(&|r| r.ictal.f1),
            mean(&|r| r.interictal.f1),
        ];
        let row: Vec<String> = columns.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// JSON-serializable summary of a full grid-search run.
#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub algorithm: String,
    /// Recommended (rank-1, optionally fine-tuned) axis values by name.
    pub recommended: BTreeMap<String, f64>,
    pub recommended_mean_score: f64,
    pub top_k: usize,
    pub top_k_average_score: f64,
    pub n_configurations: usize,
    pub n_train_records: usize,
    pub n_validation_records: usize,
    /// Mean score of the recommended configuration on the validation split.
    pub validation_mean_score: Option<f64>,
    /// Pearson correlation between record SNR and score on the train split.
    pub score_snr_correlation: Option<f64>,
}
