use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;

use super::distortion::{apply_ns_distortion, NsLevel};
use super::mix::mix_at_snr;
use super::RefcondError;

/// A test condition: one of the twelve reference conditions, or a system
/// under test identified only by its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns_level: Option<NsLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_a: Option<f64>,
}

/// (id, speech distortion level, A-weighted SNR in dB)
const REFERENCE_TABLE: [(&str, Option<u8>, Option<f64>); 12] = [
    ("i01", None, None),
    ("i02", None, Some(0.0)),
    ("i03", None, Some(12.0)),
    ("i04", None, Some(24.0)),
    ("i05", None, Some(36.0)),
    ("i06", Some(1), None),
    ("i07", Some(2), None),
    ("i08", Some(3), None),
    ("i09", Some(4), None),
    ("i10", Some(3), Some(24.0)),
    ("i11", Some(2), Some(12.0)),
    ("i12", Some(1), Some(0.0)),
];

impl ConditionSpec {
    /// Looks up a reference condition (`i01` .. `i12`).
    pub fn reference(id: &str) -> Result<Self, RefcondError> {
        REFERENCE_TABLE
            .iter()
            .find(|(name, _, _)| *name == id)
            .map(|&(name, level, snr)| Self {
                id: name.to_string(),
                ns_level: level.map(|l| NsLevel::new(l).expect("table levels are 1..=4")),
                snr_db_a: snr,
            })
            .ok_or_else(|| RefcondError::UnknownCondition(id.to_string()))
    }

    /// All twelve reference conditions in table order.
    pub fn all_reference() -> Vec<Self> {
        REFERENCE_TABLE
            .iter()
            .map(|(id, _, _)| Self::reference(id).expect("table ids resolve"))
            .collect()
    }

    /// A system-under-test label with no synthetic processing.
    pub fn system(label: impl Into<String>) -> Self {
        Self {
            id: label.into(),
            ns_level: None,
            snr_db_a: None,
        }
    }

    pub fn is_reference(&self) -> bool {
        Self::reference(&self.id).is_ok_and(|r| r == *self)
    }

    pub fn needs_noise(&self) -> bool {
        self.snr_db_a.is_some()
    }
}

/// Output of one condition, with the mixing gains the batch manifest records.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutput {
    pub clip: AudioClip,
    pub applied_noise_gain_db: Option<f64>,
    pub post_mix_scale: f64,
}

/// Renders a reference condition. Speech is distorted first (if the condition
/// has a distortion level), then noise is added at the condition's SNR.
pub fn generate_condition(
    spec: &ConditionSpec,
    speech: &AudioClip,
    noise: Option<&AudioClip>,
) -> Result<ConditionOutput, RefcondError> {
    let table = ConditionSpec::reference(&spec.id)?;
    if table != *spec {
        return Err(RefcondError::InconsistentCondition(spec.id.clone()));
    }
    speech.require_fullband()?;

    let distorted = match spec.ns_level {
        Some(level) => apply_ns_distortion(speech, level)?,
        None => speech.clone(),
    };
    match spec.snr_db_a {
        None => Ok(ConditionOutput {
            clip: distorted,
            applied_noise_gain_db: None,
            post_mix_scale: 1.0,
        }),
        Some(snr) => {
            let noise = noise.ok_or_else(|| RefcondError::MissingNoise(spec.id.clone()))?;
            let mix = mix_at_snr(&distorted, noise, snr)?;
            Ok(ConditionOutput {
                clip: mix.clip,
                applied_noise_gain_db: Some(mix.noise_gain_db),
                post_mix_scale: mix.post_mix_scale,
            })
        }
    }
}
