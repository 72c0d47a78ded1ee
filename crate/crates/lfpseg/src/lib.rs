//! Semantic segmentation of local field potential (LFP) recordings.
//!
//! The crate labels every sample of a single-channel voltage trace as
//! baseline, interictal or ictal using one of two lightweight detectors:
//!
//! * [`zdr`] — ZdensityRODE, a streaming adaptive z-score outlier detector
//!   with bounded memory, suited to online operation;
//! * [`ampde`] — AMPDE, a windowed automatic multiscale peak detector built
//!   on a local-maxima scalogram.
//!
//! Both emit peak trains that the shared [`density`] classifier chains into
//! intervals and labels by peak density and duration. [`metrics`] scores a
//! segmentation against reference annotations (event matching, per-class
//! precision/recall/F-measure/Jaccard and a weighted composite score), and
//! [`gridsearch`] runs the deterministic parameter-search protocol over an
//! annotated corpus. [`synth`] generates seeded ground-truth records so the
//! whole pipeline is testable end to end without recordings.
//!
//! ```
//! use lfpseg::{
//!     detect_and_classify, evaluate, synth_record, DensityThresholds, DetectorConfig,
//!     MatchRule, ScoreWeights, SynthSpec, ZdrParams,
//! };
//!
//! let record = synth_record(&SynthSpec { rng_seed: 7, ..SynthSpec::default() }).unwrap();
//! let config = DetectorConfig::Zdr(ZdrParams::default());
//! let (_peaks, segmentation) =
//!     detect_and_classify(&config, &DensityThresholds::default(), &record.signal).unwrap();
//! let report = evaluate(
//!     &record.reference,
//!     &segmentation,
//!     &MatchRule::default(),
//!     &ScoreWeights::default(),
//! )
//! .unwrap();
//! assert!(report.score > 0.5);
//! ```

// Parameter guards are written as !(x > 0.0) so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ampde;
pub mod density;
pub mod error;
pub mod gridsearch;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod signal;
pub mod synth;
pub mod zdr;

pub use ampde::{ampde_process, compute_lms, detect_peaks_in_window, gamma, optimal_scale, AmpdeParams, GammaVector, LmsMatrix};
pub use density::{classify, integrate, DensityThresholds, RawInterval};
pub use error::{Error, Result};
pub use gridsearch::{
    correlate_score_snr, finetune_low_snr, param_grid, results_csv, run_grid, select_top_k,
    split_dataset, AxisParam, GridAxis, GridPoint, GridResult, GridSpec, GridSummary, SplitSpec,
    TopKSelection,
};
pub use io::{read_annotations, read_signal, write_annotations, write_signal, SignalFormat};
pub use metrics::{
    coincidence_ratio, evaluate, f1, jaccard, match_events, mcda_score, pearson_corr, precision,
    recall, ClassCounts, ClassMetrics, CoincidenceDenominator, EvalReport, MatchRule, ScoreWeights,
};
pub use pipeline::{detect_and_classify, Algorithm, DetectorConfig};
pub use preprocess::{
    bandpass, detrend_linear, moving_average, notch_filter, remove_offset, BandpassSpec, NotchSpec,
};
pub use signal::{AnnotatedRecord, LabelClass, LabelInterval, PeakTrain, Segmentation, Signal};
pub use synth::{estimate_snr, synth_record, SynthSpec};
pub use zdr::{zdr_new, zdr_process, zdr_step, PeakEvent, ZdrParams, ZdrState};
