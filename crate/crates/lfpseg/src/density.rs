//! Peak-density post-processing shared by both detectors: look-forward
//! integration of peak trains into intervals, then duration/density
//! classification into ictal, interictal or baseline.

use crate::error::{Error, Result};
use crate::signal::{LabelClass, LabelInterval, PeakTrain, Segmentation};

/// Classification thresholds expressed as peak rates so they compose with
/// any integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityThresholds {
    /// Minimum peak density for an ictal call, peaks per second.
    pub ictal_density_hz: f64,
    /// Minimum peak density for an interictal call, peaks per second.
    pub interictal_density_hz: f64,
    /// Minimum padded duration for an ictal call, seconds.
    pub min_ictal_duration_s: f64,
    /// Symmetric extension of each interval beyond its peak span, seconds.
    /// Zero keeps intervals at their bare peak extents.
    pub pad_s: f64,
}

impl Default for DensityThresholds {
    fn default() -> Self {
        DensityThresholds {
            ictal_density_hz: 2.0,
            interictal_density_hz: 0.2,
            min_ictal_duration_s: 5.0,
            pad_s: 0.25,
        }
    }
}

impl DensityThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.ictal_density_hz > 0.0)
            || !(self.interictal_density_hz > 0.0)
            || self.interictal_density_hz >= self.ictal_density_hz
        {
            return Err(Error::InvalidParam {
                name: "density thresholds",
                detail: format!(
                    "need 0 < interictal ({}) < ictal ({})",
                    self.interictal_density_hz, self.ictal_density_hz
                ),
            });
        }
        if !(self.min_ictal_duration_s > 0.0) {
            return Err(Error::InvalidParam {
                name: "min_ictal_duration_s",
                detail: format!("must be positive, got {}", self.min_ictal_duration_s),
            });
        }
        if self.pad_s < 0.0 {
            return Err(Error::InvalidParam {
                name: "pad_s",
                detail: format!("must be non-negative, got {}", self.pad_s),
            });
        }
        Ok(())
    }
}

/// A chained group of peaks with its padded extent (inclusive sample
/// bounds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawInterval {
    pub start_sample: usize,
    /// Inclusive end.
    pub end_sample: usize,
    pub peak_count: usize,
}

/// Chains peaks into intervals: a new interval starts at each unconsumed
/// peak and extends while successive gaps stay within `delta_s` (inclusive).
/// Each closed interval spans first to last peak, padded by `pad_s` per side
/// and clamped to `[0, total_len)`. Intervals whose padded extents touch are
/// merged so the result is disjoint and every peak belongs to exactly one
/// interval.
pub fn integrate(
    peaks: &PeakTrain,
    delta_s: f64,
    pad_s: f64,
    total_len: usize,
) -> Result<Vec<RawInterval>> {
    if !(delta_s > 0.0) {
        return Err(Error::InvalidParam {
            name: "delta_s",
            detail: format!("must be positive, got {delta_s}"),
        });
    }
    if pad_s < 0.0 {
        return Err(Error::InvalidParam {
            name: "pad_s",
            detail: format!("must be non-negative, got {pad_s}"),
        });
    }
    let rate = peaks.sample_rate_hz();
    let delta_samples = delta_s * rate;
    let pad_samples = (pad_s * rate).round() as usize;

    let mut chained: Vec<RawInterval> = Vec::new();
    for &index in peaks.indices() {
        match chained.last_mut() {
            Some(current) if (index - current.end_sample) as f64 <= delta_samples => {
                current.end_sample = index;
                current.peak_count += 1;
            }
            _ => chained.push(RawInterval {
                start_sample: index,
                end_sample: index,
                peak_count: 1,
            }),
        }
    }

    let mut padded: Vec<RawInterval> = Vec::new();
    for iv in chained {
        let start = iv.start_sample.saturating_sub(pad_samples);
        let end = (iv.end_sample + pad_samples).min(total_len.saturating_sub(1));
        match padded.last_mut() {
            // Padding can make neighboring intervals touch; merge to keep
            // the output disjoint.
            Some(previous) if start <= previous.end_sample => {
                previous.end_sample = end;
                previous.peak_count += iv.peak_count;
            }
            _ => padded.push(RawInterval {
                start_sample: start,
                end_sample: end,
                peak_count: iv.peak_count,
            }),
        }
    }
    Ok(padded)
}

/// Labels integrated intervals by peak density and duration: ictal when the
/// density reaches `ictal_density_hz` and the duration reaches
/// `min_ictal_duration_s`; otherwise interictal when the density reaches
/// `interictal_density_hz`; otherwise the interval dissolves into baseline.
pub fn classify(
    intervals: &[RawInterval],
    thresholds: &DensityThresholds,
    total_len: usize,
    sample_rate_hz: f64,
) -> Result<Segmentation> {
    thresholds.validate()?;
    for pair in intervals.windows(2) {
        if pair[1].start_sample <= pair[0].end_sample {
            return Err(Error::OverlappingIntervals {
                a_start: pair[0].start_sample,
                a_end: pair[0].end_sample,
                b_start: pair[1].start_sample,
                b_end: pair[1].end_sample,
            });
        }
    }
    let mut labeled = Vec::new();
    for iv in intervals {
        // A bare single-peak interval with zero padding still occupies one
        // sample.
        let span = (iv.end_sample - iv.start_sample).max(1);
        let duration_s = span as f64 / sample_rate_hz;
        let density = iv.peak_count as f64 / duration_s;
        let label = if density >= thresholds.ictal_density_hz
            && duration_s >= thresholds.min_ictal_duration_s
        {
            Some(LabelClass::Ictal)
        } else if density >= thresholds.interictal_density_hz {
            Some(LabelClass::Interictal)
        } else {
            None
        };
        if let Some(label) = label {
            let end = (iv.end_sample + 1).min(total_len);
            labeled.push(LabelInterval::new(iv.start_sample, end, label)?);
        }
    }
    Segmentation::new(labeled, total_len)
}
