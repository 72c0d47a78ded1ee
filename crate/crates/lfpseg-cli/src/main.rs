//! Command-line interface for the LFP semantic-segmentation toolkit.
//!
//! Subcommands: `synth` (generate an annotated synthetic corpus), `detect`
//! (run a detector over a signal), `evaluate` (score a segmentation against
//! a reference), `gridsearch` (parameter search over a corpus), `plotdata`
//! (flatten reports into tidy rows) and `snr` (event-over-baseline power).
//!
//! Exit codes: 0 success, 1 detection/evaluation domain error, 2 usage or
//! I/O error.

mod config;
mod records;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{resolve, ConfigMap};
use lfpseg::{
    detect_and_classify, estimate_snr, evaluate, read_annotations, read_signal, results_csv,
    run_grid, select_top_k, split_dataset, synth_record, write_annotations, write_signal,
    Algorithm, AmpdeParams, AnnotatedRecord, CoincidenceDenominator, DensityThresholds,
    DetectorConfig, EvalReport, GridSpec, GridSummary, MatchRule, ScoreWeights, SignalFormat,
    SplitSpec, SynthSpec, ZdrParams,
};
use records::{load_corpus, write_record_meta, RecordMeta};

#[derive(Parser)]
#[command(name = "lfpseg", version, about = "Semantic segmentation of LFP recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an annotated synthetic corpus.
    Synth(SynthArgs),
    /// Run a detector over a signal and write segmentation + peak files.
    Detect(DetectArgs),
    /// Score an output segmentation against a reference annotation.
    Evaluate(EvaluateArgs),
    /// Grid-search detector parameters over an annotated corpus.
    Gridsearch(GridsearchArgs),
    /// Flatten report/grid CSVs into tidy (session, metric, value, snr) rows.
    Plotdata(PlotdataArgs),
    /// Estimate event-over-baseline SNR of an annotated signal.
    Snr(SnrArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Key = value config file; flags override config, config overrides
    /// defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Signal file format.
    #[arg(long, global = true, value_parser = ["csv", "raw-f32"])]
    format: Option<String>,
    /// Seed for every randomized step of the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn load(&self) -> Result<ConfigMap> {
        ConfigMap::load(self.config.as_deref())
    }

    fn format(&self, cfg: &ConfigMap) -> Result<SignalFormat> {
        let name = resolve(self.format.clone(), cfg.string("format"), "csv".to_string());
        Ok(SignalFormat::parse(&name)?)
    }

    fn seed(&self, cfg: &ConfigMap) -> Result<u64> {
        Ok(resolve(self.seed, cfg.u64("seed")?, 0))
    }
}

/// Detector and density-classifier parameters shared by `detect` and
/// `gridsearch` (where they form the fixed base of the grid).
#[derive(Args, Debug, Clone)]
struct DetectorArgs {
    /// Detection algorithm.
    #[arg(long, value_parser = ["zdr", "ampde"])]
    algorithm: Option<String>,
    /// History length in seconds (zdr).
    #[arg(long)]
    lag_s: Option<f64>,
    /// Z-score threshold (zdr) or amplitude gate (ampde), in sigmas.
    #[arg(long)]
    threshold_sigma: Option<f64>,
    /// Outlier influence on the running statistics, 0..1 (zdr).
    #[arg(long)]
    influence: Option<f64>,
    /// Peak integration window in seconds.
    #[arg(long)]
    delta_s: Option<f64>,
    /// Use the one-sided z-test instead of |z| (zdr).
    #[arg(long)]
    one_sided: bool,
    /// Analysis window length in seconds (ampde).
    #[arg(long)]
    window_s: Option<f64>,
    /// Window overlap in seconds (ampde).
    #[arg(long)]
    overlap_s: Option<f64>,
    /// Scalogram scale cap (ampde).
    #[arg(long)]
    scale_cap: Option<usize>,
    /// Skip the 0.5-50 Hz bandpass conditioning (ampde).
    #[arg(long)]
    no_bandpass: bool,
    /// Minimum peak rate for an ictal interval, peaks/s.
    #[arg(long)]
    ictal_density: Option<f64>,
    /// Minimum peak rate for an interictal interval, peaks/s.
    #[arg(long)]
    interictal_density: Option<f64>,
    /// Minimum ictal interval duration in seconds.
    #[arg(long)]
    min_ictal_duration: Option<f64>,
    /// Interval padding beyond the peak span, seconds per side.
    #[arg(long)]
    pad_s: Option<f64>,
}

impl DetectorArgs {
    fn algorithm(&self, cfg: &ConfigMap) -> Result<Algorithm> {
        let name = resolve(
            self.algorithm.clone(),
            cfg.string("algorithm"),
            "zdr".to_string(),
        );
        Algorithm::parse(&name).with_context(|| format!("unknown algorithm {name:?}"))
    }

    fn detector_config(&self, cfg: &ConfigMap, seed: u64) -> Result<DetectorConfig> {
        Ok(match self.algorithm(cfg)? {
            Algorithm::Zdr => {
                let d = ZdrParams::default();
                DetectorConfig::Zdr(ZdrParams {
                    lag_s: resolve(self.lag_s, cfg.f64("lag-s")?, d.lag_s),
                    threshold_sigma: resolve(
                        self.threshold_sigma,
                        cfg.f64("threshold-sigma")?,
                        d.threshold_sigma,
                    ),
                    influence: resolve(self.influence, cfg.f64("influence")?, d.influence),
                    delta_s: resolve(self.delta_s, cfg.f64("delta-s")?, d.delta_s),
                    two_sided: !(self.one_sided || cfg.bool("one-sided")?.unwrap_or(false)),
                    sigma_floor: d.sigma_floor,
                })
            }
            Algorithm::Ampde => {
                let d = AmpdeParams::default();
                DetectorConfig::Ampde(AmpdeParams {
                    window_s: resolve(self.window_s, cfg.f64("window-s")?, d.window_s),
                    overlap_s: resolve(self.overlap_s, cfg.f64("overlap-s")?, d.overlap_s),
                    scale_cap: Some(resolve(
                        self.scale_cap,
                        cfg.usize("scale-cap")?,
                        d.scale_cap.unwrap_or(1000),
                    )),
                    threshold_sigma: resolve(
                        self.threshold_sigma,
                        cfg.f64("threshold-sigma")?,
                        d.threshold_sigma,
                    ),
                    delta_s: resolve(self.delta_s, cfg.f64("delta-s")?, d.delta_s),
                    alpha: d.alpha,
                    rng_seed: seed,
                    apply_bandpass: !(self.no_bandpass
                        || cfg.bool("no-bandpass")?.unwrap_or(false)),
                })
            }
        })
    }

    fn thresholds(&self, cfg: &ConfigMap) -> Result<DensityThresholds> {
        let d = DensityThresholds::default();
        Ok(DensityThresholds {
            ictal_density_hz: resolve(
                self.ictal_density,
                cfg.f64("ictal-density")?,
                d.ictal_density_hz,
            ),
            interictal_density_hz: resolve(
                self.interictal_density,
                cfg.f64("interictal-density")?,
                d.interictal_density_hz,
            ),
            min_ictal_duration_s: resolve(
                self.min_ictal_duration,
                cfg.f64("min-ictal-duration")?,
                d.min_ictal_duration_s,
            ),
            pad_s: resolve(self.pad_s, cfg.f64("pad-s")?, d.pad_s),
        })
    }
}

#[derive(Args, Debug, Clone)]
struct RuleArgs {
    /// Minimum coincidence ratio for a true positive.
    #[arg(long)]
    min_coincidence: Option<f64>,
    /// Allowed output overhang as a fraction of the reference length.
    #[arg(long)]
    max_overhang: Option<f64>,
    /// Coincidence denominator.
    #[arg(long, value_parser = ["reference", "output"])]
    denominator: Option<String>,
    /// Bound the overhang per boundary side instead of in total.
    #[arg(long)]
    per_side_overhang: bool,
}

impl RuleArgs {
    fn rule(&self, cfg: &ConfigMap) -> Result<MatchRule> {
        let d = MatchRule::default();
        let denominator = match resolve(
            self.denominator.clone(),
            cfg.string("denominator"),
            "reference".to_string(),
        )
        .as_str()
        {
            "output" => CoincidenceDenominator::Output,
            _ => CoincidenceDenominator::Reference,
        };
        Ok(MatchRule {
            min_coincidence: resolve(
                self.min_coincidence,
                cfg.f64("min-coincidence")?,
                d.min_coincidence,
            ),
            max_overhang_frac: resolve(
                self.max_overhang,
                cfg.f64("max-overhang")?,
                d.max_overhang_frac,
            ),
            denominator,
            per_side_overhang: self.per_side_overhang
                || cfg.bool("per-side-overhang")?.unwrap_or(false),
        })
    }
}

#[derive(Args, Debug, Clone)]
struct WeightArgs {
    #[arg(long)]
    w_prec_ictal: Option<f64>,
    #[arg(long)]
    w_jaccard_ictal: Option<f64>,
    #[arg(long)]
    w_recall_ictal: Option<f64>,
    #[arg(long)]
    w_prec_inter: Option<f64>,
    #[arg(long)]
    w_recall_inter: Option<f64>,
}

impl WeightArgs {
    fn weights(&self, cfg: &ConfigMap) -> Result<ScoreWeights> {
        let d = ScoreWeights::default();
        Ok(ScoreWeights {
            w_prec_ictal: resolve(self.w_prec_ictal, cfg.f64("w-prec-ictal")?, d.w_prec_ictal),
            w_jaccard_ictal: resolve(
                self.w_jaccard_ictal,
                cfg.f64("w-jaccard-ictal")?,
                d.w_jaccard_ictal,
            ),
            w_recall_ictal: resolve(
                self.w_recall_ictal,
                cfg.f64("w-recall-ictal")?,
                d.w_recall_ictal,
            ),
            w_prec_inter: resolve(self.w_prec_inter, cfg.f64("w-prec-inter")?, d.w_prec_inter),
            w_recall_inter: resolve(
                self.w_recall_inter,
                cfg.f64("w-recall-inter")?,
                d.w_recall_inter,
            ),
        })
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of records to generate.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Record duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Sample rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Target event-over-baseline SNR in dB.
    #[arg(long)]
    snr: Option<f64>,
    /// Per-record uniform SNR jitter: targets fall in [snr-j, snr+j].
    #[arg(long)]
    snr_jitter: Option<f64>,
    /// Ictal bursts per record.
    #[arg(long)]
    n_ictal: Option<usize>,
    /// Interictal transients per record.
    #[arg(long)]
    n_interictal: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    use rand::Rng;
    use rand::SeedableRng;

    let cfg = args.common.load()?;
    let format = args.common.format(&cfg)?;
    let seed = args.common.seed(&cfg)?;
    let base = SynthSpec::default();
    let duration_s = resolve(args.duration, cfg.f64("duration")?, base.duration_s);
    let rate = resolve(args.rate, cfg.f64("rate")?, base.sample_rate_hz);
    let snr = resolve(args.snr, cfg.f64("snr")?, base.target_snr_db);
    let jitter = resolve(args.snr_jitter, cfg.f64("snr-jitter")?, 0.0);
    let n_ictal = resolve(args.n_ictal, cfg.usize("n-ictal")?, base.n_ictal);
    let n_interictal = resolve(
        args.n_interictal,
        cfg.usize("n-interictal")?,
        base.n_interictal,
    );

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut jitter_rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6a69_7474);
    for i in 0..args.n {
        let offset = if jitter > 0.0 {
            jitter_rng.random_range(-jitter..=jitter)
        } else {
            0.0
        };
        let spec = SynthSpec {
            duration_s,
            sample_rate_hz: rate,
            target_snr_db: snr + offset,
            n_ictal,
            n_interictal,
            rng_seed: seed.wrapping_add(i as u64),
            ..base
        };
        let mut record = synth_record(&spec)?;
        record.session_id = format!("rec-{i:03}");
        let stem = record.session_id.clone();
        let signal_file = format!("{stem}.signal.{}", format.extension());
        let annotations_file = format!("{stem}.annotations.csv");
        write_signal(&record.signal, &args.out.join(&signal_file), format)?;
        write_annotations(
            &record.reference,
            &args.out.join(&annotations_file),
            record.signal.sample_rate_hz(),
        )?;
        let meta = RecordMeta {
            session_id: record.session_id.clone(),
            sample_rate_hz: record.signal.sample_rate_hz(),
            n_samples: record.signal.len(),
            format: match format {
                SignalFormat::Csv => "csv".to_string(),
                SignalFormat::RawF32 => "raw-f32".to_string(),
            },
            signal_file,
            annotations_file,
            target_snr_db: Some(spec.target_snr_db),
            measured_snr_db: record.snr_db,
            seed: Some(spec.rng_seed),
        };
        write_record_meta(&args.out.join(format!("{stem}.record.json")), &meta)?;
        println!(
            "{stem}: {:.0} s at {:.0} Hz, {} ictal + {} interictal, snr {:.2} dB",
            duration_s,
            rate,
            n_ictal,
            n_interictal,
            record.snr_db.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Input signal file.
    #[arg(long)]
    input: PathBuf,
    /// Output segmentation CSV (default: <input>.segmentation.csv).
    #[arg(long)]
    out_segmentation: Option<PathBuf>,
    /// Output peak-train CSV (default: <input>.peaks.csv).
    #[arg(long)]
    out_peaks: Option<PathBuf>,
}

fn cmd_detect(args: DetectArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let format = args.common.format(&cfg)?;
    let seed = args.common.seed(&cfg)?;
    let signal = read_signal(&args.input, format)?;
    let config = args.detector.detector_config(&cfg, seed)?;
    let thresholds = args.detector.thresholds(&cfg)?;
    let (peaks, segmentation) = detect_and_classify(&config, &thresholds, &signal)?;

    let seg_path = args
        .out_segmentation
        .unwrap_or_else(|| suffixed(&args.input, ".segmentation.csv"));
    write_annotations(&segmentation, &seg_path, signal.sample_rate_hz())?;

    let peaks_path = args
        .out_peaks
        .unwrap_or_else(|| suffixed(&args.input, ".peaks.csv"));
    let mut peak_csv = String::from("index,time_s,amplitude\n");
    for ((&index, time_s), &amplitude) in peaks
        .indices()
        .iter()
        .zip(peaks.times_s())
        .zip(peaks.amplitudes())
    {
        peak_csv.push_str(&format!("{index},{time_s},{amplitude}\n"));
    }
    std::fs::write(&peaks_path, peak_csv)
        .with_context(|| format!("cannot write {}", peaks_path.display()))?;

    println!(
        "{}: {} peaks, {} labeled intervals -> {}, {}",
        config.algorithm().as_str(),
        peaks.len(),
        segmentation.intervals().len(),
        seg_path.display(),
        peaks_path.display()
    );
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    weights: WeightArgs,
    /// Reference annotations CSV.
    #[arg(long)]
    reference: PathBuf,
    /// Output (detector) segmentation CSV.
    #[arg(long)]
    output: PathBuf,
    /// Sample rate used to convert annotation times, Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Total signal duration in seconds (default: the latest annotation end).
    #[arg(long)]
    duration: Option<f64>,
    /// Where to write the report CSV (default: <output>.report.csv).
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Latest end time in an annotations CSV, for sizing the sample space when
/// no duration is given.
fn annotations_max_end_s(path: &Path) -> Result<f64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut max_end = 0.0f64;
    for line in text.lines().skip(1) {
        let mut fields = line.trim().split(',');
        let (Some(_), Some(end)) = (fields.next(), fields.next()) else {
            continue;
        };
        if let Ok(end) = end.trim().parse::<f64>() {
            max_end = max_end.max(end);
        }
    }
    Ok(max_end)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let rate = resolve(args.rate, cfg.f64("rate")?, 2000.0);
    let duration = match resolve(args.duration, cfg.f64("duration")?, 0.0) {
        d if d > 0.0 => d,
        _ => annotations_max_end_s(&args.reference)?.max(annotations_max_end_s(&args.output)?),
    };
    let total_len = (duration * rate).round() as usize;
    let reference = read_annotations(&args.reference, rate, total_len)?;
    let output = read_annotations(&args.output, rate, total_len)?;
    let rule = args.rule.rule(&cfg)?;
    let weights = args.weights.weights(&cfg)?;
    let report = evaluate(&reference, &output, &rule, &weights)?;

    let report_path = args
        .report
        .unwrap_or_else(|| suffixed(&args.output, ".report.csv"));
    std::fs::write(
        &report_path,
        format!("{}\n{}\n", EvalReport::csv_header(), report.to_csv_row()),
    )
    .with_context(|| format!("cannot write {}", report_path.display()))?;

    println!(
        "ictal:      precision {:.3}  recall {:.3}  f1 {:.3}  jaccard {:.3}",
        report.ictal.precision, report.ictal.recall, report.ictal.f1, report.ictal.jaccard
    );
    println!(
        "interictal: precision {:.3}  recall {:.3}  f1 {:.3}  jaccard {:.3}",
        report.interictal.precision,
        report.interictal.recall,
        report.interictal.f1,
        report.interictal.jaccard
    );
    println!("score: {:.4}", report.score);
    println!("report written to {}", report_path.display());
    Ok(())
}

#[derive(Args, Debug)]
struct GridsearchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    weights: WeightArgs,
    /// Corpus directory containing *.record.json entries.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for results.csv, summary.json and recommended.conf.
    #[arg(long)]
    out_dir: PathBuf,
    /// Fraction of records that train the grid.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// How many top configurations to average.
    #[arg(long)]
    top_k: Option<usize>,
    /// Fine-tune the winner on low-SNR training records.
    #[arg(long)]
    finetune: bool,
    /// SNR cutoff (dB) below which records join the fine-tuning subset.
    #[arg(long)]
    snr_cutoff: Option<f64>,
    /// Local-grid radius around the winner, in half-spacing steps.
    #[arg(long)]
    refine_radius: Option<usize>,
}

fn mean_score_on(
    records: &[AnnotatedRecord],
    config: &DetectorConfig,
    thresholds: &DensityThresholds,
    rule: &MatchRule,
    weights: &ScoreWeights,
) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for record in records {
        let score = detect_and_classify(config, thresholds, &record.signal)
            .and_then(|(_, seg)| evaluate(&record.reference, &seg, rule, weights))
            .map(|r| r.score)
            .unwrap_or(0.0);
        sum += score;
    }
    Some(sum / records.len() as f64)
}

fn cmd_gridsearch(args: GridsearchArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let seed = args.common.seed(&cfg)?;
    let rule = args.rule.rule(&cfg)?;
    let weights = args.weights.weights(&cfg)?;
    let thresholds = args.detector.thresholds(&cfg)?;
    let algorithm = args.detector.algorithm(&cfg)?;
    let base = args.detector.detector_config(&cfg, seed)?;
    let spec = match base {
        DetectorConfig::Zdr(p) => GridSpec::zdr_matrix(p, thresholds),
        DetectorConfig::Ampde(p) => GridSpec::ampde_matrix(p, thresholds),
    };

    let records = load_corpus(&args.corpus)?;
    let split = SplitSpec {
        train_fraction: resolve(args.train_fraction, cfg.f64("train-fraction")?, 0.7),
        seed,
    };
    let (train, validation) = split_dataset(&records, &split)?;

    let results = run_grid(&train, &spec, &rule, &weights, args.workers)?;
    let top_k = resolve(args.top_k, cfg.usize("top-k")?, 10);
    let selection = select_top_k(&results, top_k)?;

    let mut recommended = selection.recommended.clone();
    if args.finetune {
        let cutoff = resolve(args.snr_cutoff, cfg.f64("snr-cutoff")?, 20.0);
        let radius = resolve(args.refine_radius, cfg.usize("refine-radius")?, 1);
        recommended = lfpseg::finetune_low_snr(
            &train,
            &spec,
            &recommended,
            cutoff,
            radius,
            &rule,
            &weights,
            args.workers,
        )?;
    }

    let validation_mean_score = mean_score_on(
        &validation,
        &recommended.config,
        &recommended.thresholds,
        &rule,
        &weights,
    );

    // Score-vs-SNR correlation of the recommended configuration over the
    // training split. Undefined (constant scores or missing SNRs) -> null.
    let snr_scores: Vec<(f64, f64)> = train
        .iter()
        .filter_map(|record| {
            let snr = record.snr_db?;
            let score =
                detect_and_classify(&recommended.config, &recommended.thresholds, &record.signal)
                    .and_then(|(_, seg)| evaluate(&record.reference, &seg, &rule, &weights))
                    .map(|r| r.score)
                    .unwrap_or(0.0);
            Some((snr, score))
        })
        .collect();
    let score_snr_correlation = if snr_scores.len() >= 2 {
        lfpseg::correlate_score_snr(&snr_scores).ok()
    } else {
        None
    };

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let results_path = args.out_dir.join("results.csv");
    std::fs::write(&results_path, results_csv(&spec, &results))
        .with_context(|| format!("cannot write {}", results_path.display()))?;

    let mut axis_map = BTreeMap::new();
    for (axis, &value) in spec.axes.iter().zip(&recommended.axis_values) {
        axis_map.insert(axis.param.name().to_string(), value);
    }
    let summary = GridSummary {
        algorithm: algorithm.as_str().to_string(),
        recommended: axis_map.clone(),
        recommended_mean_score: results[0].mean_score,
        top_k,
        top_k_average_score: selection.average_score,
        n_configurations: results.len(),
        n_train_records: train.len(),
        n_validation_records: validation.len(),
        validation_mean_score,
        score_snr_correlation,
    };
    let summary_path = args.out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .with_context(|| format!("cannot write {}", summary_path.display()))?;

    // A reusable config file carrying the winning parameters.
    let mut conf = format!("algorithm = {}\n", algorithm.as_str());
    for (key, value) in &axis_map {
        conf.push_str(&format!("{} = {}\n", key.replace('_', "-"), value));
    }
    let conf_path = args.out_dir.join("recommended.conf");
    std::fs::write(&conf_path, conf)
        .with_context(|| format!("cannot write {}", conf_path.display()))?;

    println!(
        "{}: {} configurations on {} train records; best mean score {:.4} (top-{} average {:.4})",
        algorithm.as_str(),
        results.len(),
        train.len(),
        results[0].mean_score,
        selection.top.len(),
        selection.average_score
    );
    if let Some(v) = validation_mean_score {
        println!(
            "validation mean score: {v:.4} over {} records",
            validation.len()
        );
    }
    if let Some(r) = score_snr_correlation {
        println!("score-vs-SNR correlation (train): {r:.3}");
    }
    println!("artifacts in {}", args.out_dir.display());
    Ok(())
}

#[derive(Args, Debug)]
struct PlotdataArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Report or grid-results CSV files.
    #[arg(long, required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn plot_rows_from_report(path: &Path, header: &str, row: &str, out: &mut String) {
    let session = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("report")
        .trim_end_matches(".csv")
        .trim_end_matches(".report")
        .to_string();
    // SNR joins in from a sibling record metadata file when one exists.
    let snr = path
        .parent()
        .map(|dir| dir.join(format!("{session}.record.json")))
        .filter(|p| p.exists())
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|text| serde_json::from_str::<RecordMeta>(&text).ok())
        .and_then(|meta| meta.measured_snr_db);
    let snr_str = snr.map(|v| v.to_string()).unwrap_or_default();
    for (metric, value) in header.split(',').zip(row.split(',')) {
        out.push_str(&format!("{session},{},{value},{snr_str}\n", metric.trim()));
    }
}

fn plot_rows_from_grid(header: &str, lines: &[&str], out: &mut String) -> Result<()> {
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let score_column = columns
        .iter()
        .position(|c| *c == "mean_score")
        .context("grid csv lacks a mean_score column")?;
    for line in lines {
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != columns.len() {
            continue;
        }
        let session = columns[..score_column]
            .iter()
            .zip(&values)
            .map(|(c, v)| format!("{c}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        for (metric, value) in columns[score_column..].iter().zip(&values[score_column..]) {
            out.push_str(&format!("{session},{metric},{value},\n"));
        }
    }
    Ok(())
}

fn cmd_plotdata(args: PlotdataArgs) -> Result<()> {
    let mut out = String::from("session,metric,value,snr\n");
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut lines = text.lines();
        let header = lines.next().context("empty input csv")?.trim().to_string();
        let rest: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
        let report_header: String = EvalReport::csv_header()
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if header == report_header {
            let row = rest.first().context("report csv has no data row")?;
            plot_rows_from_report(path, &header, row, &mut out);
        } else if header.contains("mean_score") {
            plot_rows_from_grid(&header, &rest, &mut out)?;
        } else {
            bail!("unrecognized csv header in {}", path.display());
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, out)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

#[derive(Args, Debug)]
struct SnrArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Signal file.
    #[arg(long)]
    signal: PathBuf,
    /// Reference annotations CSV.
    #[arg(long)]
    annotations: PathBuf,
}

fn cmd_snr(args: SnrArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let format = args.common.format(&cfg)?;
    let signal = read_signal(&args.signal, format)?;
    let reference = read_annotations(&args.annotations, signal.sample_rate_hz(), signal.len())?;
    let record = AnnotatedRecord::new(signal, reference, None, "snr")?;
    println!("{:.6}", estimate_snr(&record)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Gridsearch(args) => cmd_gridsearch(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::Snr(args) => cmd_snr(args),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<lfpseg::Error>() {
                Some(lfpseg::Error::Io { .. }) | Some(lfpseg::Error::Format { .. }) => 2,
                Some(_) => 1,
                // Config, JSON and argument problems are usage errors.
                None => 2,
            };
            ExitCode::from(code)
        }
    }
}
