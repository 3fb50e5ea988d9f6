use crate::audio::{AudioClip, AudioError};
use crate::scale::{Score, ScaleScores};

use super::{CampaignError, Stimulus, StimulusKind};

/// The prompt is spliced in at the middle of the base clip.
pub const DEFAULT_SPLICE_FRACTION: f64 = 0.5;

/// Audio and answer of a trapping question: the leading part of a normal
/// rating clip followed by a spoken instruction to select a given score.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappingClip {
    pub audio: AudioClip,
    pub expected: ScaleScores,
    /// Index of the first prompt sample.
    pub splice_at: usize,
}

impl TrappingClip {
    pub fn into_stimulus(
        self,
        clip_id: impl Into<String>,
        url: impl Into<String>,
        condition_id: impl Into<String>,
    ) -> (Stimulus, AudioClip) {
        let stimulus = Stimulus {
            clip_id: clip_id.into(),
            url: url.into(),
            condition_id: condition_id.into(),
            kind: StimulusKind::Trapping,
            expected_answer: Some(self.expected),
        };
        (stimulus, self.audio)
    }
}

pub fn make_trapping_stimulus(
    base: &AudioClip,
    prompt: &AudioClip,
    demanded_score: Score,
) -> Result<TrappingClip, CampaignError> {
    make_trapping_stimulus_at(base, prompt, demanded_score, DEFAULT_SPLICE_FRACTION)
}

pub fn make_trapping_stimulus_at(
    base: &AudioClip,
    prompt: &AudioClip,
    demanded_score: Score,
    splice_fraction: f64,
) -> Result<TrappingClip, CampaignError> {
    if base.sample_rate() != prompt.sample_rate() {
        return Err(AudioError::RateMismatch(base.sample_rate(), prompt.sample_rate()).into());
    }
    if prompt.len() > base.len() {
        return Err(CampaignError::PromptTooLong {
            prompt: prompt.len(),
            base: base.len(),
        });
    }
    if !(0.0..=1.0).contains(&splice_fraction) {
        return Err(CampaignError::BadSpliceFraction(splice_fraction));
    }
    let splice_at = (base.len() as f64 * splice_fraction).round() as usize;
    let mut samples = Vec::with_capacity(splice_at + prompt.len());
    samples.extend_from_slice(&base.samples()[..splice_at]);
    samples.extend_from_slice(prompt.samples());
    Ok(TrappingClip {
        audio: AudioClip::new(samples, base.sample_rate())?,
        expected: ScaleScores::uniform(demanded_score),
        splice_at,
    })
}
