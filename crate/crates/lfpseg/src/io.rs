//! Signal and annotation file formats.
//!
//! Signals travel either as CSV (`rate_hz=<float>` header line, one sample
//! per line) or as raw little-endian 32-bit floats with a JSON sidecar
//! `<path>.meta.json` holding `{"rate_hz": .., "n_samples": ..}`.
//! Annotations are CSV with a `start_s,end_s,label` header; labels are
//! `baseline`, `interictal` or `ictal`. Detector output uses the same
//! annotation format, so results can be re-read and evaluated like any
//! reference file.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{LabelClass, LabelInterval, Segmentation, Signal};

/// On-disk signal encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    /// `rate_hz=<float>` header, one decimal sample per line.
    Csv,
    /// Little-endian IEEE 754 binary32 samples plus a JSON sidecar.
    RawF32,
}

impl SignalFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SignalFormat::Csv),
            "raw-f32" => Ok(SignalFormat::RawF32),
            other => Err(Error::format("signal format", other.to_string())),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            SignalFormat::Csv => "csv",
            SignalFormat::RawF32 => "f32",
        }
    }
}

/// Sidecar metadata for the raw-f32 format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSidecar {
    pub rate_hz: f64,
    pub n_samples: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Reads a signal in the given format.
pub fn read_signal(path: &Path, format: SignalFormat) -> Result<Signal> {
    match format {
        SignalFormat::Csv => read_signal_csv(path),
        SignalFormat::RawF32 => read_signal_raw(path),
    }
}

fn read_signal_csv(path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format("signal csv", "empty file"))?;
    let rate_hz = header
        .strip_prefix("rate_hz=")
        .ok_or_else(|| {
            Error::format(
                "signal csv",
                format!("expected 'rate_hz=<float>' header, got {header:?}"),
            )
        })?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::format("signal csv", format!("bad rate: {e}")))?;
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let x = line
            .parse::<f64>()
            .map_err(|e| Error::format("signal csv", format!("line {}: {e}", lineno + 2)))?;
        if !x.is_finite() {
            return Err(Error::NonFiniteSample {
                index: samples.len(),
            });
        }
        samples.push(x);
    }
    Signal::new(samples, rate_hz)
}

fn read_signal_raw(path: &Path) -> Result<Signal> {
    let meta_path = sidecar_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: RawSidecar = serde_json::from_str(&meta_text)
        .map_err(|e| Error::format("raw-f32 sidecar", e.to_string()))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != meta.n_samples * 4 {
        return Err(Error::format(
            "raw-f32 signal",
            format!(
                "expected {} bytes for {} samples, got {}",
                meta.n_samples * 4,
                meta.n_samples,
                bytes.len()
            ),
        ));
    }
    let mut samples = Vec::with_capacity(meta.n_samples);
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !x.is_finite() {
            return Err(Error::NonFiniteSample { index: i });
        }
        samples.push(f64::from(x));
    }
    Signal::new(samples, meta.rate_hz)
}

/// Writes a signal in the given format.
///
/// CSV preserves full `f64` precision. Raw-f32 quantizes each sample to
/// binary32, so a read-back is bit-exact whenever the samples are
/// f32-representable (the synthetic generator emits such samples).
pub fn write_signal(signal: &Signal, path: &Path, format: SignalFormat) -> Result<()> {
    match format {
        SignalFormat::Csv => write_signal_csv(signal, path),
        SignalFormat::RawF32 => write_signal_raw(signal, path),
    }
}

fn write_signal_csv(signal: &Signal, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "rate_hz={}", signal.sample_rate_hz()).map_err(io_err)?;
    for x in signal.samples() {
        writeln!(w, "{x}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn write_signal_raw(signal: &Signal, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(signal.len() * 4);
    for &x in signal.samples() {
        bytes.extend_from_slice(&(x as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = RawSidecar {
        rate_hz: signal.sample_rate_hz(),
        n_samples: signal.len(),
    };
    let meta_path = sidecar_path(path);
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).unwrap())
        .map_err(|e| Error::io(&meta_path, e))
}

/// Reads an annotations CSV into a segmentation over `total_len` samples.
///
/// Times in seconds are converted to sample indices with the supplied rate
/// (rounded to nearest). Rows may appear in any order; overlapping rows are
/// rejected.
pub fn read_annotations(path: &Path, sample_rate_hz: f64, total_len: usize) -> Result<Segmentation> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "start_s,end_s,label" => {}
        Some(header) => {
            return Err(Error::format(
                "annotations csv",
                format!("expected 'start_s,end_s,label' header, got {header:?}"),
            ))
        }
        // An empty file means "all baseline".
        None => return Ok(Segmentation::all_baseline(total_len)),
    }
    let mut intervals = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse_time = |field: Option<&str>| -> Result<f64> {
            field
                .ok_or_else(|| {
                    Error::format("annotations csv", format!("line {}: missing field", lineno + 2))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::format("annotations csv", format!("line {}: {e}", lineno + 2)))
        };
        let start_s = parse_time(fields.next())?;
        let end_s = parse_time(fields.next())?;
        let label = LabelClass::parse(fields.next().ok_or_else(|| {
            Error::format("annotations csv", format!("line {}: missing label", lineno + 2))
        })?)?;
        let start = (start_s * sample_rate_hz).round() as i64;
        let end = (end_s * sample_rate_hz).round() as i64;
        if start < 0 || end <= start {
            return Err(Error::InvalidInterval {
                start: start.max(0) as usize,
                end: end.max(0) as usize,
            });
        }
        intervals.push(LabelInterval::new(start as usize, end as usize, label)?);
    }
    Segmentation::new(intervals, total_len)
}

/// Writes a segmentation as an annotations CSV (times in seconds).
pub fn write_annotations(seg: &Segmentation, path: &Path, sample_rate_hz: f64) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "start_s,end_s,label").map_err(io_err)?;
    for iv in seg.intervals() {
        writeln!(
            w,
            "{},{},{}",
            iv.start_sample as f64 / sample_rate_hz,
            iv.end_sample as f64 / sample_rate_hz,
            iv.label.as_str()
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn csv_header_and_rows_round_trip() {
        let dir = tmp();
        let path = dir.path().join("sig.csv");
        fs::write(&path, "rate_hz=2000\n1.5\n-0.25\n3.0\n").unwrap();
        let sig = read_signal(&path, SignalFormat::Csv).unwrap();
        assert_eq!(sig.len(), 3);
        assert_eq!(sig.sample_rate_hz(), 2000.0);
        assert_eq!(sig.samples(), &[1.5, -0.25, 3.0]);
    }

    #[test]
    fn raw_f32_length_and_rate_from_sidecar() {
        let dir = tmp();
        let path = dir.path().join("sig.f32");
        let samples: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.001).sin()).collect();
        let sig = Signal::new(samples, 2000.0).unwrap();
        write_signal(&sig, &path, SignalFormat::RawF32).unwrap();
        let back = read_signal(&path, SignalFormat::RawF32).unwrap();
        assert_eq!(back.len(), 4000);
        assert!((back.duration_s() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nan_sample_is_rejected_with_index() {
        let dir = tmp();
        let path = dir.path().join("sig.csv");
        fs::write(&path, "rate_hz=2000\n1.0\nNaN\n").unwrap();
        match read_signal(&path, SignalFormat::Csv) {
            Err(Error::NonFiniteSample { index }) => assert_eq!(index, 1),
            other => panic!("expected NonFiniteSample, got {other:?}"),
        }
    }

    #[test]
    fn raw_f32_round_trip_is_bit_exact() {
        let dir = tmp();
        let path = dir.path().join("sig.f32");
        // f32-representable samples survive the binary32 encoding bit-exactly.
        let samples: Vec<f64> = (0..1000)
            .map(|i| f64::from(((i as f32) * 0.37).sin() * 12.5))
            .collect();
        let sig = Signal::new(samples, 2000.0).unwrap();
        write_signal(&sig, &path, SignalFormat::RawF32).unwrap();
        let back = read_signal(&path, SignalFormat::RawF32).unwrap();
        assert_eq!(back, sig);
    }

    #[test]
    fn csv_round_trip_close_to_exact() {
        let dir = tmp();
        let path = dir.path().join("sig.csv");
        let samples: Vec<f64> = (0..500).map(|i| ((i * i) as f64 * 0.0137).sin() * 40.0).collect();
        let max_abs = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sig = Signal::new(samples, 2000.0).unwrap();
        write_signal(&sig, &path, SignalFormat::Csv).unwrap();
        let back = read_signal(&path, SignalFormat::Csv).unwrap();
        let max_diff = sig
            .samples()
            .iter()
            .zip(back.samples())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_diff < 1e-6 * max_abs);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_signal(
            &Signal::new(vec![1.0], 2000.0).unwrap(),
            Path::new("/nonexistent-dir/sig.csv"),
            SignalFormat::Csv,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn annotation_row_converts_to_sample_indices() {
        let dir = tmp();
        let path = dir.path().join("ann.csv");
        fs::write(&path, "start_s,end_s,label\n10.0,25.0,ictal\n").unwrap();
        let seg = read_annotations(&path, 2000.0, 60_000).unwrap();
        assert_eq!(seg.intervals().len(), 1);
        let iv = seg.intervals()[0];
        assert_eq!(iv.start_sample, 20_000);
        assert_eq!(iv.end_sample, 50_000);
        assert_eq!(iv.label, LabelClass::Ictal);
    }

    #[test]
    fn overlapping_annotation_rows_rejected() {
        let dir = tmp();
        let path = dir.path().join("ann.csv");
        fs::write(
            &path,
            "start_s,end_s,label\n1.0,3.0,ictal\n2.0,4.0,interictal\n",
        )
        .unwrap();
        assert!(matches!(
            read_annotations(&path, 2000.0, 10_000),
            Err(Error::OverlappingIntervals { .. })
        ));
    }

    #[test]
    fn empty_annotation_file_is_all_baseline() {
        let dir = tmp();
        let path = dir.path().join("ann.csv");
        fs::write(&path, "").unwrap();
        let seg = read_annotations(&path, 2000.0, 5000).unwrap();
        assert!(seg.intervals().is_empty());
        assert_eq!(seg.total_len(), 5000);
    }

    #[test]
    fn unknown_label_and_reversed_interval_rejected() {
        let dir = tmp();
        let path = dir.path().join("ann.csv");
        fs::write(&path, "start_s,end_s,label\n1.0,2.0,spike\n").unwrap();
        assert!(matches!(
            read_annotations(&path, 2000.0, 10_000),
            Err(Error::UnknownLabel(_))
        ));
        fs::write(&path, "start_s,end_s,label\n3.0,1.0,ictal\n").unwrap();
        assert!(matches!(
            read_annotations(&path, 2000.0, 10_000),
            Err(Error::InvalidInterval { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Raw-f32 round trip is bit-exact for f32-representable samples.
        #[test]
        fn prop_raw_round_trip(values in proptest::collection::vec(-1e6f32..1e6f32, 1..200)) {
            let dir = tmp();
            let path = dir.path().join("sig.f32");
            let samples: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            let sig = Signal::new(samples, 2000.0).unwrap();
            write_signal(&sig, &path, SignalFormat::RawF32).unwrap();
            let back = read_signal(&path, SignalFormat::RawF32).unwrap();
            prop_assert_eq!(back, sig);
        }

        // Annotations survive a write/read cycle exactly (integer sample bounds).
        #[test]
        fn prop_annotation_round_trip(
            starts in proptest::collection::vec(0usize..10_000, 1..8),
            lens in proptest::collection::vec(1usize..500, 8),
            labels in proptest::collection::vec(0u8..3, 8),
        ) {
            // Build disjoint intervals by accumulating offsets.
            let mut intervals = Vec::new();
            let mut cursor = 0usize;
            for (i, &gap) in starts.iter().enumerate() {
                let start = cursor + gap;
                let end = start + lens[i];
                let label = match labels[i] {
                    0 => LabelClass::Baseline,
                    1 => LabelClass::Interictal,
                    _ => LabelClass::Ictal,
                };
                intervals.push(LabelInterval::new(start, end, label).unwrap());
                cursor = end;
            }
            let total_len = cursor + 100;
            let seg = Segmentation::new(intervals, total_len).unwrap();
            let dir = tmp();
            let path = dir.path().join("ann.csv");
            write_annotations(&seg, &path, 2000.0).unwrap();
            let back = read_annotations(&path, 2000.0, total_len).unwrap();
            prop_assert_eq!(back, seg);
        }
    }
}
