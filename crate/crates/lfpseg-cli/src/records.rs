//! Corpus conventions: one record is a signal file, an annotations CSV and a
//! `<stem>.record.json` metadata file tying them together.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use lfpseg::{read_annotations, read_signal, AnnotatedRecord, SignalFormat};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordMeta {
    pub session_id: String,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    /// `csv` or `raw-f32`.
    pub format: String,
    pub signal_file: String,
    pub annotations_file: String,
    pub target_snr_db: Option<f64>,
    pub measured_snr_db: Option<f64>,
    pub seed: Option<u64>,
}

pub fn write_record_meta(path: &Path, meta: &RecordMeta) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(meta)?)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn load_record(meta_path: &Path) -> Result<AnnotatedRecord> {
    let text = std::fs::read_to_string(meta_path)
        .with_context(|| format!("cannot read {}", meta_path.display()))?;
    let meta: RecordMeta = serde_json::from_str(&text)
        .with_context(|| format!("bad record metadata {}", meta_path.display()))?;
    let dir = meta_path.parent().unwrap_or(Path::new("."));
    let format = SignalFormat::parse(&meta.format)?;
    let signal = read_signal(&dir.join(&meta.signal_file), format)?;
    let reference = read_annotations(
        &dir.join(&meta.annotations_file),
        signal.sample_rate_hz(),
        signal.len(),
    )?;
    Ok(AnnotatedRecord::new(
        signal,
        reference,
        meta.measured_snr_db,
        meta.session_id,
    )?)
}

/// Loads every `*.record.json` in the directory, sorted by file name so
/// corpus order is stable.
pub fn load_corpus(dir: &Path) -> Result<Vec<AnnotatedRecord>> {
    let mut meta_paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".record.json"))
        })
        .collect();
    meta_paths.sort();
    anyhow::ensure!(
        !meta_paths.is_empty(),
        "no *.record.json files in {}",
        dir.display()
    );
    meta_paths.iter().map(|p| load_record(p)).collect()
}
