//! Trial bundles: a directory with `manifest.json` plus one raw payload per
//! trial (little-endian f32, row-major channels × samples).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsetrial_core::nalgebra::DMatrix;
use sparsetrial_core::{Label, Trial, TrialSet};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sample_rate_hz: f64,
    pub channels: usize,
    pub samples: usize,
    pub label_set: Vec<Label>,
    pub trials: Vec<TrialEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    pub file: String,
    pub label: Label,
    pub session: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contaminated: Option<bool>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn read_bundle(dir: &Path) -> Result<TrialSet> {
    let manifest = read_manifest(dir)?;
    let (m, n) = (manifest.channels, manifest.samples);
    if manifest.trials.is_empty() {
        return Err(Error::Data("manifest lists no trials".into()));
    }
    let flagged = manifest
        .trials
        .iter()
        .filter(|t| t.contaminated.is_some())
        .count();
    if flagged != 0 && flagged != manifest.trials.len() {
        return Err(Error::Data(
            "contaminated flag present on some trials only".into(),
        ));
    }
    let mut trials = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        if !manifest.label_set.contains(&entry.label) {
            return Err(Error::Data(format!(
                "{}: unknown label {}",
                entry.file, entry.label
            )));
        }
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() != 4 * m * n {
            return Err(Error::Data(format!(
                "{}: payload is {} bytes, expected {}",
                entry.file,
                bytes.len(),
                4 * m * n
            )));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("{}: non-finite sample", entry.file)));
        }
        trials.push(Trial::new(
            DMatrix::from_row_slice(m, n, &values),
            entry.label,
        ));
    }
    let sessions = manifest.trials.iter().map(|t| t.session).collect();
    let contaminated = (flagged != 0).then(|| {
        manifest
            .trials
            .iter()
            .map(|t| t.contaminated.unwrap_or(false))
            .collect()
    });
    TrialSet::new(
        trials,
        manifest.sample_rate_hz,
        manifest.label_set,
        sessions,
        contaminated,
    )
    .map_err(|e| Error::Data(e.to_string()))
}

/// Writes `set` to `dir`, creating it if needed. Every sample is checked for
/// f32 representability before anything touches the filesystem.
pub fn write_bundle(set: &TrialSet, dir: &Path) -> Result<()> {
    for (k, t) in set.trials().iter().enumerate() {
        if t.data.iter().any(|&v| !(v as f32).is_finite()) {
            return Err(Error::Data(format!(
                "trial {k}: value not representable as f32"
            )));
        }
    }
    let width = set.len().to_string().len().max(4);
    let flags = set.contaminated();
    let entries: Vec<TrialEntry> = (0..set.len())
        .map(|k| TrialEntry {
            file: format!("trial_{k:0width$}.f32"),
            label: set.trial(k).label,
            session: set.sessions()[k],
            contaminated: flags.map(|f| f[k]),
        })
        .collect();
    let manifest = Manifest {
        sample_rate_hz: set.sample_rate_hz(),
        channels: set.channels(),
        samples: set.samples(),
        label_set: set.label_set().to_vec(),
        trials: entries,
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (entry, t) in manifest.trials.iter().zip(set.trials()) {
        let mut bytes = Vec::with_capacity(4 * t.data.len());
        for row in t.data.row_iter() {
            for &v in row.iter() {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        let path = dir.join(&entry.file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
