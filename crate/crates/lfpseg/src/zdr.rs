//! ZdensityRODE: streaming adaptive z-score outlier detection.
//!
//! The detector keeps a FIFO of the last `lag` filtered values and their
//! running mean and standard deviation. After a lag-long training stage it
//! z-tests every incoming sample, damps outlier samples into the history by
//! the influence weight, and emits a peak whenever an outlier sample turns
//! out to be a strict local maximum (decided one sample later, when the
//! right neighbor is known). Peak-to-interval integration lives in the
//! density classifier.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::preprocess::{notch_filter, NotchSpec};
use crate::signal::{PeakTrain, Signal};

/// Detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZdrParams {
    /// History length in seconds (lag).
    pub lag_s: f64,
    /// Z-score threshold in standard deviations.
    pub threshold_sigma: f64,
    /// Weight of outlier samples when updating the history, in [0, 1].
    /// 0 freezes the history during outliers, 1 tracks the raw signal.
    pub influence: f64,
    /// Look-forward integration window in seconds, consumed by the density
    /// classifier when chaining peaks into intervals.
    pub delta_s: f64,
    /// Test |z| instead of z. LFP deflections are bipolar, so this defaults
    /// to true; set false for the strictly one-sided variant.
    pub two_sided: bool,
    /// Lower bound on sigma when used as a divisor, in signal units.
    pub sigma_floor: f64,
}

impl Default for ZdrParams {
    fn default() -> Self {
        ZdrParams {
            lag_s: 0.25,
            threshold_sigma: 5.0,
            influence: 0.5,
            delta_s: 4.0,
            two_sided: true,
            sigma_floor: 1e-9,
        }
    }
}

impl ZdrParams {
    fn validate(&self) -> Result<()> {
        if !(self.lag_s > 0.0) {
            return Err(Error::InvalidParam {
                name: "lag_s",
                detail: format!("must be positive, got {}", self.lag_s),
            });
        }
        if !(self.threshold_sigma > 0.0) {
            return Err(Error::InvalidParam {
                name: "threshold_sigma",
                detail: format!("must be positive, got {}", self.threshold_sigma),
            });
        }
        if !(0.0..=1.0).contains(&self.influence) {
            return Err(Error::InvalidParam {
                name: "influence",
                detail: format!("must lie in [0, 1], got {}", self.influence),
            });
        }
        if !(self.delta_s > 0.0) {
            return Err(Error::InvalidParam {
                name: "delta_s",
                detail: format!("must be positive, got {}", self.delta_s),
            });
        }
        if !(self.sigma_floor > 0.0) {
            return Err(Error::InvalidParam {
                name: "sigma_floor",
                detail: format!("must be positive, got {}", self.sigma_floor),
            });
        }
        Ok(())
    }
}

/// A peak emitted by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEvent {
    /// Sample index of the peak in the processed signal.
    pub index: usize,
    /// Signal value at the peak.
    pub amplitude: f64,
}

/// Exact running statistics are refreshed from the buffer at this cadence to
/// keep incremental float drift below 1e-9 relative.
const RESUM_INTERVAL: usize = 4096;

/// Detector state. Memory is O(lag * sample_rate), independent of how many
/// samples have been processed.
#[derive(Debug, Clone)]
pub struct ZdrState {
    params: ZdrParams,
    lag_samples: usize,
    /// FIFO of the last `lag_samples` filtered values U.
    buffer: VecDeque<f64>,
    sum: f64,
    sum_sq: f64,
    pushes_since_resum: usize,
    /// Raw previous sample and whether it was flagged as an outlier.
    prev: Option<(f64, bool)>,
    /// Raw sample before the previous one.
    prev_prev: Option<f64>,
    /// Index of the next incoming sample.
    sample_index: usize,
    outlier_count: u64,
}

/// Creates an untrained detector state. The lag is converted to
/// ceil(lag_s * sample_rate) samples and must come out at 2 or more.
pub fn zdr_new(params: &ZdrParams, sample_rate_hz: f64) -> Result<ZdrState> {
    params.validate()?;
    if !(sample_rate_hz > 0.0) {
        return Err(Error::InvalidRate {
            rate_hz: sample_rate_hz,
        });
    }
    let lag_samples = (params.lag_s * sample_rate_hz).ceil() as usize;
    if lag_samples < 2 {
        return Err(Error::LagTooShort {
            samples: lag_samples,
        });
    }
    Ok(ZdrState {
        params: *params,
        lag_samples,
        buffer: VecDeque::with_capacity(lag_samples),
        sum: 0.0,
        sum_sq: 0.0,
        pushes_since_resum: 0,
        prev: None,
        prev_prev: None,
        sample_index: 0,
        outlier_count: 0,
    })
}

impl ZdrState {
    pub fn is_trained(&self) -> bool {
        self.buffer.len() >= self.lag_samples
    }

    pub fn lag_samples(&self) -> usize {
        self.lag_samples
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// Samples flagged as outliers so far (not all become peaks).
    pub fn outlier_count(&self) -> u64 {
        self.outlier_count
    }

    pub fn samples_seen(&self) -> usize {
        self.sample_index
    }

    /// Current running mean of the filtered history.
    pub fn mu(&self) -> f64 {
        if self.buffer.is_empty() {
            0.0
        } else {
            self.sum / self.buffer.len() as f64
        }
    }

    /// Current running standard deviation of the filtered history.
    pub fn sigma(&self) -> f64 {
        if self.buffer.is_empty() {
            return 0.0;
        }
        let n = self.buffer.len() as f64;
        let mean = self.sum / n;
        (self.sum_sq / n - mean * mean).max(0.0).sqrt()
    }

    fn push_filtered(&mut self, u: f64) {
        if self.buffer.len() == self.lag_samples {
            let old = self.buffer.pop_front().expect("buffer non-empty");
            self.sum -= old;
            self.sum_sq -= old * old;
        }
        self.buffer.push_back(u);
        self.sum += u;
        self.sum_sq += u * u;
        self.pushes_since_resum += 1;
        if self.pushes_since_resum >= RESUM_INTERVAL {
            self.sum = self.buffer.iter().sum();
            self.sum_sq = self.buffer.iter().map(|v| v * v).sum();
            self.pushes_since_resum = 0;
        }
    }

    fn advance(&mut self, x: f64, outlier: bool) {
        self.prev_prev = self.prev.map(|(v, _)| v);
        self.prev = Some((x, outlier));
        self.sample_index += 1;
    }
}

/// Feeds one sample through the detector.
///
/// Returns a peak for sample n-1 once sample n shows that n-1 was an outlier
/// sitting at a strict local maximum. During the training stage the buffer
/// fills with raw samples and nothing is emitted.
pub fn zdr_step(state: &mut ZdrState, x: f64) -> Option<PeakEvent> {
    if !state.is_trained() {
        state.push_filtered(x);
        state.advance(x, false);
        return None;
    }

    let sigma = state.sigma().max(state.params.sigma_floor);
    let z = (x - state.mu()) / sigma;
    let outlier = if state.params.two_sided {
        z.abs() > state.params.threshold_sigma
    } else {
        z > state.params.threshold_sigma
    };
    if outlier {
        state.outlier_count += 1;
    }

    // Local-maximum confirmation for the previous sample, now that its right
    // neighbor is known.
    let mut emitted = None;
    if let (Some((x_prev, prev_outlier)), Some(x_prev_prev)) = (state.prev, state.prev_prev) {
        if prev_outlier && x_prev_prev < x_prev && x < x_prev {
            emitted = Some(PeakEvent {
                index: state.sample_index - 1,
                amplitude: x_prev,
            });
        }
    }

    let u = if outlier {
        let u_prev = *state.buffer.back().expect("trained buffer is non-empty");
        state.params.influence * x + (1.0 - state.params.influence) * u_prev
    } else {
        x
    };
    state.push_filtered(u);
    state.advance(x, outlier);
    emitted
}

/// Runs the detector over a whole signal: 50 Hz notch conditioning, then a
/// sample-by-sample fold of `zdr_step`. Bit-identical to streaming the
/// notched samples through `zdr_step` by hand.
pub fn zdr_process(params: &ZdrParams, signal: &Signal) -> Result<PeakTrain> {
    let mut state = zdr_new(params, signal.sample_rate_hz())?;
    if signal.len() <= state.lag_samples {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            min: state.lag_samples,
        });
    }
    let conditioned = notch_filter(signal, &NotchSpec::default())?;
    let mut indices = Vec::new();
    let mut amplitudes = Vec::new();
    for &x in conditioned.samples() {
        if let Some(peak) = zdr_step(&mut state, x) {
            indices.push(peak.index);
            amplitudes.push(peak.amplitude);
        }
    }
    PeakTrain::new(indices, amplitudes, signal.sample_rate_hz())
}
