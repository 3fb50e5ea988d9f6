//! Campaign planning: packing clips into rating tasks with control stimuli,
//! building trapping clips, and deciding which qualification sections a
//! returning worker has to repeat.

mod plan;
mod session;
mod trapping;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioError;
use crate::scale::ScaleScores;

pub use plan::{
    plan_campaign, trial_seed, AnswerKey, CampaignConfig, ControlAnswer, TaskAssignment, TaskKey,
    TaskPayload, TrialPayload,
};
pub use session::{
    append_worker_state, gate_session, read_worker_states, Section, SessionPolicy, WorkerState,
};
pub use trapping::{make_trapping_stimulus, make_trapping_stimulus_at, TrappingClip, DEFAULT_SPLICE_FRACTION};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("no rating clips given")]
    NoClips,
    #[error("{0} pool is empty")]
    EmptyPool(&'static str),
    #[error("task_size must be at least 2 (got {0})")]
    TaskSizeTooSmall(usize),
    #[error("target_votes_per_clip must be at least 1")]
    NoTargetVotes,
    #[error("task_size {task_size} exceeds the {clips} distinct rating clips")]
    NotEnoughClips { clips: usize, task_size: usize },
    #[error("invalid stimulus {0:?}: {1}")]
    InvalidStimulus(String, &'static str),
    #[error("duplicate clip id {0:?}")]
    DuplicateClip(String),
    #[error("prompt ({prompt} samples) is longer than the base clip ({base} samples)")]
    PromptTooLong { prompt: usize, base: usize },
    #[error("splice fraction {0} outside [0, 1]")]
    BadSpliceFraction(f64),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("worker {0:?}: pass timestamps must not go backwards")]
    NonMonotoneTimestamp(String),
    #[error("validity windows must be positive")]
    InvalidPolicy,
    #[error("worker state log: {0}")]
    StateLog(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StimulusKind {
    Rating,
    Trapping,
    Gold,
}

/// A clip as it enters a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub clip_id: String,
    pub url: String,
    pub condition_id: String,
    pub kind: StimulusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_answer: Option<ScaleScores>,
}

impl Stimulus {
    pub fn rating(clip_id: impl Into<String>, url: impl Into<String>, condition_id: impl Into<String>) -> Self {
        Self {
            clip_id: clip_id.into(),
            url: url.into(),
            condition_id: condition_id.into(),
            kind: StimulusKind::Rating,
            expected_answer: None,
        }
    }

    /// A clean, undistorted control clip expected to score 5 on every scale.
    pub fn gold(clip_id: impl Into<String>, url: impl Into<String>, condition_id: impl Into<String>) -> Self {
        Self {
            kind: StimulusKind::Gold,
            expected_answer: Some(ScaleScores::uniform(crate::scale::Score::MAX)),
            ..Self::rating(clip_id, url, condition_id)
        }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let invalid = |why| Err(CampaignError::InvalidStimulus(self.clip_id.clone(), why));
        if self.clip_id.is_empty() {
            return invalid("empty clip id");
        }
        match (self.kind, &self.expected_answer) {
            (StimulusKind::Rating, Some(_)) => invalid("rating stimulus carries an expected answer"),
            (StimulusKind::Trapping | StimulusKind::Gold, None) => invalid("control stimulus lacks an expected answer"),
            (StimulusKind::Trapping, Some(e)) if !(e.sig == e.bak && e.bak == e.ovrl) => {
                invalid("trapping stimulus must demand the same score on all scales")
            }
            _ => Ok(()),
        }
    }
}
