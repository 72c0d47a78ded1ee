//! Seeded synthetic LFP records with ground-truth annotations.
//!
//! The generator is the canonical test substrate: band-limited baseline
//! noise plus two event morphologies. Ictal events are sustained bursts of
//! sharp biphasic discharges whose rate sweeps downward over the burst;
//! interictal events are isolated biphasic transients of 50-200 ms. Event
//! amplitudes are solved so the event-over-baseline power ratio matches the
//! requested SNR exactly, and all samples are quantized to binary32 so
//! raw-f32 round trips are bit-exact.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::preprocess::Biquad;
use crate::signal::{AnnotatedRecord, LabelClass, LabelInterval, Segmentation, Signal};

/// Baseline noise RMS in signal units (microvolts).
const BASELINE_RMS: f64 = 10.0;
/// Noise band limit in Hz.
const NOISE_LOWPASS_HZ: f64 = 150.0;
/// Event-free lead-in so detectors can train on baseline.
const LEAD_IN_S: f64 = 5.0;
/// Event-free margin at the end of the record.
const TRAIL_S: f64 = 1.0;
/// Minimum separation between consecutive event footprints. Keeps distinct
/// events from being chained into one interval by the density classifier at
/// the largest swept integration window (5 s).
const MIN_GAP_S: f64 = 5.5;
/// Annotation margin around an interictal transient; reference intervals
/// mark the event context, not just the crest samples.
const INTERICTAL_REF_MARGIN_S: f64 = 0.175;
/// Width of one ictal discharge.
const ICTAL_PULSE_WIDTH_S: f64 = 0.03;
/// Ictal discharge rate sweep bounds (Hz), start and end of a burst.
const ICTAL_RATE_START: (f64, f64) = (3.2, 3.8);
const ICTAL_RATE_END: (f64, f64) = (2.3, 2.7);
/// Envelope ramp at each end of an ictal burst.
const ICTAL_RAMP_S: f64 = 0.6;
/// Interictal crest amplitude relative to ictal discharge crests. The ratio
/// makes interictal transients sink into the noise floor as SNR drops while
/// ictal discharges stay prominent.
const INTERICTAL_RELATIVE_AMPLITUDE: f64 = 0.15;

/// Parameters for one synthetic record.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub target_snr_db: f64,
    pub n_ictal: usize,
    pub n_interictal: usize,
    /// (lo, hi) bounds for ictal burst durations in seconds.
    pub ictal_duration_range_s: (f64, f64),
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            duration_s: 60.0,
            sample_rate_hz: 2000.0,
            target_snr_db: 20.0,
            n_ictal: 2,
            n_interictal: 5,
            ictal_duration_range_s: (6.0, 9.0),
            rng_seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidParam {
                name: "duration_s",
                detail: format!("must be positive, got {}", self.duration_s),
            });
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidRate {
                rate_hz: self.sample_rate_hz,
            });
        }
        let (lo, hi) = self.ictal_duration_range_s;
        if !(lo > 0.0) || lo > hi {
            return Err(Error::InvalidParam {
                name: "ictal_duration_range_s",
                detail: format!("need 0 < lo <= hi, got ({lo}, {hi})"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Ictal {
        duration_s: f64,
        rate_start_hz: f64,
        rate_end_hz: f64,
    },
    Interictal {
        pulse_width_s: f64,
    },
}

impl EventKind {
    /// Placed footprint, which equals the reference interval extent.
    fn footprint_s(&self) -> f64 {
        match *self {
            EventKind::Ictal { duration_s, .. } => duration_s,
            EventKind::Interictal { pulse_width_s } => {
                pulse_width_s + 2.0 * INTERICTAL_REF_MARGIN_S
            }
        }
    }

    fn label(&self) -> LabelClass {
        match self {
            EventKind::Ictal { .. } => LabelClass::Ictal,
            EventKind::Interictal { .. } => LabelClass::Interictal,
        }
    }
}

/// Biphasic discharge shape: one sine cycle under a Hann window, normalized
/// to unit crest amplitude. `u` runs over [0, 1].
fn biphasic(u: f64) -> f64 {
    let hann = (std::f64::consts::PI * u).sin().powi(2);
    (2.0 * std::f64::consts::PI * u).sin() * hann / BIPHASIC_CREST
}

/// Crest of the unnormalized biphasic shape: max of sin(2 pi u) sin^2(pi u),
/// attained at u = 1/3 with value 3 sqrt(3) / 8.
const BIPHASIC_CREST: f64 = 0.649519052838329;

/// Smooth trapezoid envelope over a burst of duration `d` with cosine ramps.
fn burst_envelope(t: f64, d: f64) -> f64 {
    let ramp = ICTAL_RAMP_S.min(d / 2.0);
    if t < 0.0 || t > d {
        0.0
    } else if t < ramp {
        let u = t / ramp;
        0.5 * (1.0 - (std::f64::consts::PI * u).cos())
    } else if t > d - ramp {
        let u = (d - t) / ramp;
        0.5 * (1.0 - (std::f64::consts::PI * u).cos())
    } else {
        1.0
    }
}

/// Adds a biphasic pulse with the given crest amplitude into `buf`.
fn add_pulse(buf: &mut [f64], rate: f64, onset_s: f64, width_s: f64, amplitude: f64) {
    let start = (onset_s * rate).round() as usize;
    let n = (width_s * rate).round() as usize;
    for k in 0..=n {
        let i = start + k;
        if i >= buf.len() {
            break;
        }
        buf[i] += amplitude * biphasic(k as f64 / n as f64);
    }
}

/// Generates a deterministic annotated record from the spec.
pub fn synth_record(spec: &SynthSpec) -> Result<AnnotatedRecord> {
    spec.validate()?;
    let rate = spec.sample_rate_hz;
    let n = (spec.duration_s * rate).round() as usize;
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);

    // Band-limited baseline noise, normalized to BASELINE_RMS.
    let mut lp = Biquad::lowpass(NOISE_LOWPASS_HZ.min(rate * 0.45), std::f64::consts::FRAC_1_SQRT_2, rate);
    let mut noise: Vec<f64> = (0..n)
        .map(|_| lp.process(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let rms = (noise.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    for x in &mut noise {
        *x *= BASELINE_RMS / rms;
    }

    // Draw event morphologies, then interleave them in random order.
    let mut events: Vec<EventKind> = Vec::new();
    let (dur_lo, dur_hi) = spec.ictal_duration_range_s;
    for _ in 0..spec.n_ictal {
        events.push(EventKind::Ictal {
            duration_s: rng.random_range(dur_lo..=dur_hi),
            rate_start_hz: rng.random_range(ICTAL_RATE_START.0..=ICTAL_RATE_START.1),
            rate_end_hz: rng.random_range(ICTAL_RATE_END.0..=ICTAL_RATE_END.1),
        });
    }
    for _ in 0..spec.n_interictal {
        events.push(EventKind::Interictal {
            pulse_width_s: rng.random_range(0.05..=0.2),
        });
    }
    // Fisher-Yates with the record RNG keeps placement order seeded.
    for i in (1..events.len()).rev() {
        let j = rng.random_range(0..=i);
        events.swap(i, j);
    }

    // Place events: fixed lead-in/trailing margins, a minimum gap between
    // footprints, and the leftover slack spread randomly over the gaps.
    let mut intervals = Vec::with_capacity(events.len());
    let mut waveform = vec![0.0; n];
    if !events.is_empty() {
        let total_footprint: f64 = events.iter().map(|e| e.footprint_s()).sum();
        let needed =
            LEAD_IN_S + TRAIL_S + total_footprint + MIN_GAP_S * (events.len() - 1) as f64;
        if needed > spec.duration_s {
            return Err(Error::EventPlacement {
                needed_s: needed,
                available_s: spec.duration_s,
            });
        }
        let slack = spec.duration_s - needed;
        let weights: Vec<f64> = (0..events.len()).map(|_| rng.random::<f64>()).collect();
        let weight_sum: f64 = weights.iter().sum();

        let mut cursor = LEAD_IN_S;
        for (event, weight) in events.iter().zip(&weights) {
            cursor += slack * weight / weight_sum;
            let start_s = cursor;
            let footprint = event.footprint_s();
            match *event {
                EventKind::Ictal {
                    duration_s,
                    rate_start_hz,
                    rate_end_hz,
                } => {
                    // Discharge train with a linearly swept rate.
                    let mut t = 1.0 / rate_start_hz;
                    while t < duration_s - ICTAL_PULSE_WIDTH_S {
                        let instantaneous_rate =
                            rate_start_hz + (rate_end_hz - rate_start_hz) * (t / duration_s);
                        let amplitude =
                            burst_envelope(t, duration_s) * rng.random_range(0.95..=1.05);
                        add_pulse(
                            &mut waveform,
                            rate,
                            start_s + t,
                            ICTAL_PULSE_WIDTH_S,
                            amplitude,
                        );
                        t += 1.0 / instantaneous_rate;
                    }
                }
                EventKind::Interictal { pulse_width_s } => {
                    let amplitude = INTERICTAL_RELATIVE_AMPLITUDE * rng.random_range(0.95..=1.05);
                    add_pulse(
                        &mut waveform,
                        rate,
                        start_s + INTERICTAL_REF_MARGIN_S,
                        pulse_width_s,
                        amplitude,
                    );
                }
            }
            let start_sample = (start_s * rate).round() as usize;
            let end_sample = (((start_s + footprint) * rate).round() as usize).min(n);
            intervals.push(LabelInterval::new(start_sample, end_sample, event.label())?);
            cursor += footprint + MIN_GAP_S;
        }
    }
    let reference = Segmentation::new(intervals, n)?;

    // Solve the waveform scale so that event power over baseline power hits
    // the target ratio exactly: sum over event samples of (noise + s*w)^2
    // equals ratio * baseline_power * |event samples|.
    let mut samples = noise;
    if !reference.intervals().is_empty() {
        let labels = reference.materialize();
        let mut sum_ww = 0.0;
        let mut sum_nw = 0.0;
        let mut sum_nn_event = 0.0;
        let mut n_event = 0usize;
        let mut sum_nn_base = 0.0;
        let mut n_base = 0usize;
        for i in 0..n {
            if labels[i] != LabelClass::Baseline {
                sum_ww += waveform[i] * waveform[i];
                sum_nw += samples[i] * waveform[i];
                sum_nn_event += samples[i] * samples[i];
                n_event += 1;
            } else {
                sum_nn_base += samples[i] * samples[i];
                n_base += 1;
            }
        }
        let ratio = 10f64.powf(spec.target_snr_db / 10.0);
        let target_power = ratio * (sum_nn_base / n_base as f64) * n_event as f64;
        // sum_ww * s^2 + 2 sum_nw * s + (sum_nn_event - target_power) = 0
        let a = sum_ww;
        let b = 2.0 * sum_nw;
        let c = sum_nn_event - target_power;
        let discriminant = b * b - 4.0 * a * c;
        if a <= 0.0 || discriminant < 0.0 {
            return Err(Error::InvalidParam {
                name: "target_snr_db",
                detail: format!(
                    "{} dB is unreachable for this event layout",
                    spec.target_snr_db
                ),
            });
        }
        let scale = (-b + discriminant.sqrt()) / (2.0 * a);
        if scale <= 0.0 {
            return Err(Error::InvalidParam {
                name: "target_snr_db",
                detail: format!("{} dB is below the baseline floor", spec.target_snr_db),
            });
        }
        for i in 0..n {
            samples[i] += scale * waveform[i];
        }
    }

    // Quantize to binary32 so the raw-f32 format round-trips bit-exactly.
    for x in &mut samples {
        *x = f64::from(*x as f32);
    }

    let signal = Signal::new(samples, rate)?;
    let snr_db = estimate_snr_parts(&signal, &reference).ok();
    AnnotatedRecord::new(signal, reference, snr_db, format!("synth-{}", spec.rng_seed))
}

fn estimate_snr_parts(signal: &Signal, reference: &Segmentation) -> Result<f64> {
    let labels = reference.materialize();
    let mut sum_event = 0.0;
    let mut n_event = 0usize;
    let mut sum_base = 0.0;
    let mut n_base = 0usize;
    for (x, label) in signal.samples().iter().zip(&labels) {
        if *label != LabelClass::Baseline {
            sum_event += x * x;
            n_event += 1;
        } else {
            sum_base += x * x;
            n_base += 1;
        }
    }
    if n_event == 0 {
        return Err(Error::UndefinedSnr { missing: "event" });
    }
    if n_base == 0 || sum_base == 0.0 {
        return Err(Error::UndefinedSnr {
            missing: "baseline",
        });
    }
    let p_event = sum_event / n_event as f64;
    let p_base = sum_base / n_base as f64;
    Ok(10.0 * (p_event / p_base).log10())
}

/// Event power over baseline power in dB, measured against the record's
/// reference annotation: events are all samples inside non-baseline
/// intervals, baseline is everything else.
pub fn estimate_snr(record: &AnnotatedRecord) -> Result<f64> {
    estimate_snr_parts(&record.signal, &record.reference)
}
