//! Synthesis of the twelve fullband reference conditions: A-weighted SNR
//! mixing and four levels of spectral-subtraction speech distortion.

mod conditions;
mod distortion;
mod level;
mod manifest;
mod mix;
mod weighting;

use thiserror::Error;

use crate::audio::AudioError;

pub use conditions::{generate_condition, ConditionOutput, ConditionSpec};
pub use distortion::{apply_ns_distortion, apply_spectral_distortion, DistortionParams, NsLevel};
pub use manifest::{process_entry, EntryError, GeneratedEntry, ManifestEntry};
pub use level::{active_speech_level, rms_level, ACTIVITY_RANGE_DB, LEVEL_FRAME_MS};
pub use mix::{measure_snr_a, mix_at_snr, Mixture, SnrMeasurement, CLIP_GUARD_PEAK};
pub use weighting::{a_weight, a_weighting_db, a_weighting_gain};

#[derive(Debug, Error)]
pub enum RefcondError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("no active speech in clip")]
    NoActiveSpeech,
    #[error("noise clip is silent")]
    SilentNoise,
    #[error("noise has {noise} samples but speech has {speech}")]
    NoiseTooShort { noise: usize, speech: usize },
    #[error("distortion level {0} outside 1..=4")]
    InvalidLevel(u8),
    #[error("invalid distortion parameters: {0}")]
    InvalidParams(String),
    #[error("unknown reference condition {0:?}")]
    UnknownCondition(String),
    #[error("condition {0:?} does not match the reference table")]
    InconsistentCondition(String),
    #[error("condition {0:?} mixes noise but no noise clip was given")]
    MissingNoise(String),
}
