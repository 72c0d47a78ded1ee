//! Core domain types shared by every stage of the pipeline: signals,
//! labeled segmentations and detected peak trains.

use crate::error::{Error, Result};

/// A uniformly sampled single-channel voltage trace (microvolts).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    /// Builds a signal, rejecting empty traces, non-finite samples and
    /// non-positive sample rates.
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidRate {
                rate_hz: sample_rate_hz,
            });
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Signal {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Replaces the samples, keeping the sample rate. The replacement must
    /// satisfy the same invariants as `new`.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Signal::new(samples, self.sample_rate_hz)
    }
}

/// The three semantic classes assigned to every sample.
///
/// Integer codes follow the annotation convention
/// (0: baseline, 1: interictal event, 2: ictal event).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelClass {
    Baseline = 0,
    Interictal = 1,
    Ictal = 2,
}

impl LabelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelClass::Baseline => "baseline",
            LabelClass::Interictal => "interictal",
            LabelClass::Ictal => "ictal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "baseline" => Ok(LabelClass::Baseline),
            "interictal" => Ok(LabelClass::Interictal),
            "ictal" => Ok(LabelClass::Ictal),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// A half-open labeled span of samples: `[start_sample, end_sample)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelInterval {
    pub start_sample: usize,
    /// Exclusive end.
    pub end_sample: usize,
    pub label: LabelClass,
}

impl LabelInterval {
    pub fn new(start_sample: usize, end_sample: usize, label: LabelClass) -> Result<Self> {
        if end_sample <= start_sample {
            return Err(Error::InvalidInterval {
                start: start_sample,
                end: end_sample,
            });
        }
        Ok(LabelInterval {
            start_sample,
            end_sample,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.end_sample - self.start_sample
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration_s(&self, sample_rate_hz: f64) -> f64 {
        self.len() as f64 / sample_rate_hz
    }
}

/// An ordered, non-overlapping set of labeled intervals over a signal of
/// `total_len` samples. Gaps between intervals are implicitly baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    intervals: Vec<LabelInterval>,
    total_len: usize,
}

impl Segmentation {
    /// Builds a segmentation. Intervals are sorted by start; overlapping
    /// intervals or intervals extending past `total_len` are rejected.
    pub fn new(mut intervals: Vec<LabelInterval>, total_len: usize) -> Result<Self> {
        intervals.sort_by_key(|iv| iv.start_sample);
        for pair in intervals.windows(2) {
            if pair[1].start_sample < pair[0].end_sample {
                return Err(Error::OverlappingIntervals {
                    a_start: pair[0].start_sample,
                    a_end: pair[0].end_sample,
                    b_start: pair[1].start_sample,
                    b_end: pair[1].end_sample,
                });
            }
        }
        if let Some(last) = intervals.last() {
            if last.end_sample > total_len {
                return Err(Error::IntervalOutOfBounds {
                    start: last.start_sample,
                    end: last.end_sample,
                    len: total_len,
                });
            }
        }
        Ok(Segmentation {
            intervals,
            total_len,
        })
    }

    /// A segmentation with no events: every sample is baseline.
    pub fn all_baseline(total_len: usize) -> Self {
        Segmentation {
            intervals: Vec::new(),
            total_len,
        }
    }

    pub fn intervals(&self) -> &[LabelInterval] {
        &self.intervals
    }

    pub fn total_len(&self) -> usize {
        self.total_len
    }

    /// Intervals carrying the given label.
    pub fn intervals_of(&self, label: LabelClass) -> impl Iterator<Item = &LabelInterval> {
        self.intervals.iter().filter(move |iv| iv.label == label)
    }

    /// Materializes the per-sample label vector: baseline everywhere except
    /// inside the stored intervals.
    pub fn materialize(&self) -> Vec<LabelClass> {
        let mut labels = vec![LabelClass::Baseline; self.total_len];
        for iv in &self.intervals {
            for l in &mut labels[iv.start_sample..iv.end_sample] {
                *l = iv.label;
            }
        }
        labels
    }
}

/// A signal together with its reference annotation; one corpus entry.
#[derive(Debug, Clone)]
pub struct AnnotatedRecord {
    pub signal: Signal,
    pub reference: Segmentation,
    pub snr_db: Option<f64>,
    pub session_id: String,
}

impl AnnotatedRecord {
    pub fn new(
        signal: Signal,
        reference: Segmentation,
        snr_db: Option<f64>,
        session_id: impl Into<String>,
    ) -> Result<Self> {
        if reference.total_len() != signal.len() {
            return Err(Error::LengthMismatch {
                a: reference.total_len(),
                b: signal.len(),
            });
        }
        Ok(AnnotatedRecord {
            signal,
            reference,
            snr_db,
            session_id: session_id.into(),
        })
    }
}

/// Detected peaks: strictly increasing sample indices with the signal value
/// at each peak. Produced by the detectors, consumed by the density
/// classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakTrain {
    indices: Vec<usize>,
    amplitudes: Vec<f64>,
    sample_rate_hz: f64,
}

impl PeakTrain {
    pub fn new(indices: Vec<usize>, amplitudes: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if indices.len() != amplitudes.len() {
            return Err(Error::SequenceLengthMismatch {
                a: indices.len(),
                b: amplitudes.len(),
            });
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::InvalidRate {
                rate_hz: sample_rate_hz,
            });
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Format {
                what: "peak train",
                detail: "indices must be strictly increasing".to_string(),
            });
        }
        Ok(PeakTrain {
            indices,
            amplitudes,
            sample_rate_hz,
        })
    }

    pub fn empty(sample_rate_hz: f64) -> Self {
        PeakTrain {
            indices: Vec::new(),
            amplitudes: Vec::new(),
            sample_rate_hz,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Peak times in seconds.
    pub fn times_s(&self) -> impl Iterator<Item = f64> + '_ {
        let rate = self.sample_rate_hz;
        self.indices.iter().map(move |&i| i as f64 / rate)
    }
}
