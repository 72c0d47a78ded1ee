use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by signal I/O, conditioning, detection and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("signal is empty")]
    EmptySignal,

    #[error("sample rate must be positive, got {rate_hz}")]
    InvalidRate { rate_hz: f64 },

    #[error("interval end {end} must be greater than start {start}")]
    InvalidInterval { start: usize, end: usize },

    #[error("intervals overlap: [{a_start}, {a_end}) and [{b_start}, {b_end})")]
    OverlappingIntervals {
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },

    #[error("unknown label {0:?}; expected baseline, interictal or ictal")]
    UnknownLabel(String),

    #[error("interval [{start}, {end}) exceeds signal length {len}")]
    IntervalOutOfBounds { start: usize, end: usize, len: usize },

    #[error("{what} frequency {freq_hz} Hz must lie below the Nyquist frequency {nyquist_hz} Hz")]
    NyquistViolation {
        what: &'static str,
        freq_hz: f64,
        nyquist_hz: f64,
    },

    #[error("invalid band: low {low_hz} Hz must be below high {high_hz} Hz")]
    InvalidBand { low_hz: f64, high_hz: f64 },

    #[error("window of {len} samples is too short; need at least {min}")]
    WindowTooShort { len: usize, min: usize },

    #[error("signal of {len} samples is too short; need more than {min}")]
    SignalTooShort { len: usize, min: usize },

    #[error("lag of {samples} samples is too short; need at least 2")]
    LagTooShort { samples: usize },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParam { name: &'static str, detail: String },

    #[error("events cannot be placed without overlap: need {needed_s:.3} s, have {available_s:.3} s")]
    EventPlacement { needed_s: f64, available_s: f64 },

    #[error("SNR is undefined: record has no {missing} samples")]
    UndefinedSnr { missing: &'static str },

    #[error("segmentations have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("score weights must sum to 1, got {sum}")]
    WeightSum { sum: f64 },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("sequences have different lengths: {a} vs {b}")]
    SequenceLengthMismatch { a: usize, b: usize },

    #[error("need at least {min} {what}, got {got}")]
    TooFew {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("grid axis {name:?} is empty")]
    EmptyAxis { name: String },

    #[error("grid axis {axis:?} does not apply to algorithm {algorithm}")]
    AxisMismatch { axis: String, algorithm: &'static str },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
