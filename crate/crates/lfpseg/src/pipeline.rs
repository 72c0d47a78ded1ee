//! End-to-end detection: detector selection, peak extraction and density
//! classification in one call.

use crate::ampde::{ampde_process, AmpdeParams};
use crate::density::{classify, integrate, DensityThresholds};
use crate::error::Result;
use crate::signal::{PeakTrain, Segmentation, Signal};
use crate::zdr::{zdr_process, ZdrParams};

/// The two detection algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Zdr,
    Ampde,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Zdr => "zdr",
            Algorithm::Ampde => "ampde",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zdr" => Some(Algorithm::Zdr),
            "ampde" => Some(Algorithm::Ampde),
            _ => None,
        }
    }
}

/// Concrete parameters for one detector run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorConfig {
    Zdr(ZdrParams),
    Ampde(AmpdeParams),
}

impl DetectorConfig {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            DetectorConfig::Zdr(_) => Algorithm::Zdr,
            DetectorConfig::Ampde(_) => Algorithm::Ampde,
        }
    }

    /// Look-forward integration window handed to the density classifier.
    pub fn delta_s(&self) -> f64 {
        match self {
            DetectorConfig::Zdr(p) => p.delta_s,
            DetectorConfig::Ampde(p) => p.delta_s,
        }
    }

    /// Runs conditioning and peak detection.
    pub fn detect(&self, signal: &Signal) -> Result<PeakTrain> {
        match self {
            DetectorConfig::Zdr(p) => zdr_process(p, signal),
            DetectorConfig::Ampde(p) => ampde_process(p, signal),
        }
    }
}

/// Full pipeline: detector, look-forward integration with the detector's
/// delta, and density classification. Returns both the peak train and the
/// resulting segmentation.
pub fn detect_and_classify(
    config: &DetectorConfig,
    thresholds: &DensityThresholds,
    signal: &Signal,
) -> Result<(PeakTrain, Segmentation)> {
    let peaks = config.detect(signal)?;
    let intervals = integrate(&peaks, config.delta_s(), thresholds.pad_s, signal.len())?;
    let segmentation = classify(&intervals, thresholds, signal.len(), signal.sample_rate_hz())?;
    Ok((peaks, segmentation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::LabelClass;
    use crate::synth::{synth_record, SynthSpec};

    #[test]
    fn zdr_pipeline_segments_a_synthetic_record() {
        let record = synth_record(&SynthSpec {
            rng_seed: 17,
            ..SynthSpec::default()
        })
        .unwrap();
        let config = DetectorConfig::Zdr(ZdrParams::default());
        let (peaks, seg) =
            detect_and_classify(&config, &DensityThresholds::default(), &record.signal).unwrap();
        assert!(!peaks.is_empty());
        let ictal = seg.intervals_of(LabelClass::Ictal).count();
        assert!(ictal >= 1, "expected at least one ictal interval");
    }

    #[test]
    fn ampde_pipeline_segments_a_synthetic_record() {
        let record = synth_record(&SynthSpec {
            rng_seed: 17,
            ..SynthSpec::default()
        })
        .unwrap();
        let config = DetectorConfig::Ampde(AmpdeParams::default());
        let (peaks, seg) =
            detect_and_classify(&config, &DensityThresholds::default(), &record.signal).unwrap();
        assert!(!peaks.is_empty());
        let ictal = seg.intervals_of(LabelClass::Ictal).count();
        assert!(ictal >= 1, "expected at least one ictal interval");
    }
}
