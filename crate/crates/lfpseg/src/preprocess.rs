//! Signal conditioning shared by both detectors: powerline notch, bandpass,
//! linear detrend, moving average and offset removal.
//!
//! All filters are causal IIR biquads (RBJ cookbook coefficients) run from
//! zero state, so output sample `i` depends only on input samples `0..=i`.

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Second-order IIR notch specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchSpec {
    pub center_hz: f64,
    pub quality_factor: f64,
}

impl Default for NotchSpec {
    fn default() -> Self {
        // 50 Hz powerline rejection with a narrow notch.
        NotchSpec {
            center_hz: 50.0,
            quality_factor: 90.0,
        }
    }
}

/// Passband specification for the bandpass conditioner.
///
/// A `low_hz` of zero disables the highpass half, leaving a pure lowpass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        BandpassSpec {
            low_hz: 0.5,
            high_hz: 50.0,
        }
    }
}

/// One direct-form II transposed biquad section.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: f64,
    s2: f64,
}

impl Biquad {
    fn from_unnormalized(b0: f64, b1: f64, b2: f64, a0: f64, a1: f64, a2: f64) -> Self {
        Biquad {
            b0: b0 / a0,
            b1: b1 / a0,
            b2: b2 / a0,
            a1: a1 / a0,
            a2: a2 / a0,
            s1: 0.0,
            s2: 0.0,
        }
    }

    pub(crate) fn notch(center_hz: f64, quality_factor: f64, sample_rate_hz: f64) -> Self {
        let omega = 2.0 * std::f64::consts::PI * center_hz / sample_rate_hz;
        let (sin_w, cos_w) = omega.sin_cos();
        let alpha = sin_w / (2.0 * quality_factor);
        Self::from_unnormalized(1.0, -2.0 * cos_w, 1.0, 1.0 + alpha, -2.0 * cos_w, 1.0 - alpha)
    }

    pub(crate) fn lowpass(cutoff_hz: f64, q: f64, sample_rate_hz: f64) -> Self {
        let omega = 2.0 * std::f64::consts::PI * cutoff_hz / sample_rate_hz;
        let (sin_w, cos_w) = omega.sin_cos();
        let alpha = sin_w / (2.0 * q);
        Self::from_unnormalized(
            (1.0 - cos_w) / 2.0,
            1.0 - cos_w,
            (1.0 - cos_w) / 2.0,
            1.0 + alpha,
            -2.0 * cos_w,
            1.0 - alpha,
        )
    }

    pub(crate) fn highpass(cutoff_hz: f64, q: f64, sample_rate_hz: f64) -> Self {
        let omega = 2.0 * std::f64::consts::PI * cutoff_hz / sample_rate_hz;
        let (sin_w, cos_w) = omega.sin_cos();
        let alpha = sin_w / (2.0 * q);
        Self::from_unnormalized(
            (1.0 + cos_w) / 2.0,
            -(1.0 + cos_w),
            (1.0 + cos_w) / 2.0,
            1.0 + alpha,
            -2.0 * cos_w,
            1.0 - alpha,
        )
    }

    #[inline]
    pub(crate) fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    pub(crate) fn process_buffer(&mut self, samples: &[f64]) -> Vec<f64> {
        samples.iter().map(|&x| self.process(x)).collect()
    }
}

// Pole quality factors of a 4th-order Butterworth response split into two
// cascaded biquads: 1/(2 cos(22.5 deg)) and 1/(2 cos(67.5 deg)).
const BUTTERWORTH4_Q: [f64; 2] = [0.5411961001461969, 1.3065629648763764];

fn check_below_nyquist(what: &'static str, freq_hz: f64, sample_rate_hz: f64) -> Result<()> {
    let nyquist = sample_rate_hz / 2.0;
    if !(freq_hz > 0.0) || freq_hz >= nyquist {
        return Err(Error::NyquistViolation {
            what,
            freq_hz,
            nyquist_hz: nyquist,
        });
    }
    Ok(())
}

/// Applies a second-order IIR notch at `spec.center_hz`.
///
/// Unity gain at DC by construction; steady-state rejection at the center
/// frequency exceeds 40 dB.
pub fn notch_filter(signal: &Signal, spec: &NotchSpec) -> Result<Signal> {
    check_below_nyquist("notch center", spec.center_hz, signal.sample_rate_hz())?;
    if !(spec.quality_factor > 0.0) {
        return Err(Error::InvalidParam {
            name: "quality_factor",
            detail: format!("must be positive, got {}", spec.quality_factor),
        });
    }
    let mut biquad = Biquad::notch(spec.center_hz, spec.quality_factor, signal.sample_rate_hz());
    signal.with_samples(biquad.process_buffer(signal.samples()))
}

/// Applies a causal bandpass: 4th-order Butterworth highpass at `low_hz`
/// cascaded with a 4th-order Butterworth lowpass at `high_hz` (24 dB/octave
/// per edge). `low_hz == 0` skips the highpass half.
pub fn bandpass(signal: &Signal, spec: &BandpassSpec) -> Result<Signal> {
    if spec.low_hz < 0.0 || spec.low_hz >= spec.high_hz {
        return Err(Error::InvalidBand {
            low_hz: spec.low_hz,
            high_hz: spec.high_hz,
        });
    }
    check_below_nyquist("bandpass high edge", spec.high_hz, signal.sample_rate_hz())?;
    let rate = signal.sample_rate_hz();
    let mut sections = Vec::with_capacity(4);
    if spec.low_hz > 0.0 {
        for &q in &BUTTERWORTH4_Q {
            sections.push(Biquad::highpass(spec.low_hz, q, rate));
        }
    }
    for &q in &BUTTERWORTH4_Q {
        sections.push(Biquad::lowpass(spec.high_hz, q, rate));
    }
    let mut out = signal.samples().to_vec();
    for section in &mut sections {
        for x in &mut out {
            *x = section.process(*x);
        }
    }
    signal.with_samples(out)
}

/// Subtracts the least-squares straight line from a window.
///
/// The refit line of the output is the zero line up to rounding.
pub fn detrend_linear(window: &[f64]) -> Result<Vec<f64>> {
    if window.len() < 2 {
        return Err(Error::WindowTooShort {
            len: window.len(),
            min: 2,
        });
    }
    let (intercept, slope) = line_fit(window);
    Ok(window
        .iter()
        .enumerate()
        .map(|(i, &x)| x - (intercept + slope * i as f64))
        .collect())
}

/// Least-squares line fit `x[i] ~ intercept + slope * i`, centered for
/// numerical stability.
pub(crate) fn line_fit(window: &[f64]) -> (f64, f64) {
    let n = window.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_x = window.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_i = 0.0;
    for (i, &x) in window.iter().enumerate() {
        let di = i as f64 - mean_i;
        cov += di * (x - mean_x);
        var_i += di * di;
    }
    let slope = if var_i > 0.0 { cov / var_i } else { 0.0 };
    (mean_x - slope * mean_i, slope)
}

/// Centered moving mean of width `w + 1` (`w` even), clamped at the edges so
/// output length equals input length.
pub fn moving_average(window: &[f64], w: usize) -> Result<Vec<f64>> {
    if w == 0 || !w.is_multiple_of(2) {
        return Err(Error::InvalidParam {
            name: "w",
            detail: format!("must be a positive even integer, got {w}"),
        });
    }
    if w > window.len() {
        return Err(Error::WindowTooShort {
            len: window.len(),
            min: w,
        });
    }
    let half = w / 2;
    let n = window.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let sum: f64 = window[lo..=hi].iter().sum();
        out.push(sum / (hi - lo + 1) as f64);
    }
    Ok(out)
}

/// Subtracts the mean so the output averages to zero.
pub fn remove_offset(signal: &Signal) -> Result<Signal> {
    let mean = signal.samples().iter().sum::<f64>() / signal.len() as f64;
    signal.with_samples(signal.samples().iter().map(|x| x - mean).collect())
}
