use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, write_wav};

use super::conditions::{generate_condition, ConditionSpec};
use super::RefcondError;

/// One line of a batch generation manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub speech_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_path: Option<PathBuf>,
    pub condition_id: String,
    pub output_path: PathBuf,
}

/// A manifest entry after processing, carrying the gains that were applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedEntry {
    #[serde(flatten)]
    pub entry: ManifestEntry,
    pub applied_noise_gain_db: Option<f64>,
    pub post_mix_scale: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct EntryError {
    pub path: PathBuf,
    #[source]
    pub source: RefcondError,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads the inputs of one entry, renders its condition and writes the
/// output WAV. Relative inputs resolve against `input_dir`, relative outputs
/// against `output_dir`.
pub fn process_entry(
    entry: &ManifestEntry,
    input_dir: &Path,
    output_dir: &Path,
) -> Result<GeneratedEntry, EntryError> {
    let err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: RefcondError| EntryError { path, source }
    };
    let spec = ConditionSpec::reference(&entry.condition_id).map_err(err(&entry.output_path))?;
    let speech_path = resolve(input_dir, &entry.speech_path);
    let speech = read_wav(&speech_path).map_err(|e| err(&speech_path)(e.into()))?;
    let noise = match (&entry.noise_path, spec.needs_noise()) {
        (Some(p), true) => {
            let p = resolve(input_dir, p);
            Some(read_wav(&p).map_err(|e| err(&p)(e.into()))?)
        }
        _ => None,
    };
    let out = generate_condition(&spec, &speech, noise.as_ref()).map_err(err(&entry.output_path))?;
    let out_path = resolve(output_dir, &entry.output_path);
    write_wav(&out_path, &out.clip).map_err(|e| err(&out_path)(e.into()))?;
    Ok(GeneratedEntry {
        entry: entry.clone(),
        applied_noise_gain_db: out.applied_noise_gain_db,
        post_mix_scale: out.post_mix_scale,
    })
}
