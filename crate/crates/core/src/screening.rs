//! Data screening: qualification scoring, task-level control checks, and
//! extraction of the reliable rating votes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::campaign::{AnswerKey, ControlAnswer, TaskKey};
use crate::scale::{Scale, ScaleOrder, Score};

/// Column layout of the votes CSV.
pub const VOTES_CSV_HEADER: &str =
    "worker_id,task_id,clip_id,scale_order,sig,bak,ovrl,playback_sig,playback_bak,playback_ovrl,submitted_at";

/// Minimum fraction of digit triplets transcribed correctly.
pub const HEARING_PASS_THRESHOLD: f64 = 0.8;
/// Minimum fraction of environment pair comparisons answered correctly (4 of 5).
pub const ENVIRONMENT_PASS_THRESHOLD: f64 = 0.8;
/// Allowed deviation of a gold answer from its expected score, per scale.
pub const GOLD_TOLERANCE: u8 = 1;

#[derive(Debug, Error)]
pub enum ScreeningError {
    #[error("malformed response {0:?}: expected three digits")]
    MalformedTriplet(String),
    #[error("no responses to score")]
    NoResponses,
    #[error("fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("votes CSV header mismatch; expected: {VOTES_CSV_HEADER}")]
    Header { found: String },
    #[error("votes CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// One worker's three ratings of one clip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub worker_id: String,
    pub task_id: String,
    pub clip_id: String,
    pub scale_order: ScaleOrder,
    pub sig: Score,
    pub bak: Score,
    pub ovrl: Score,
    pub playback_sig: bool,
    pub playback_bak: bool,
    pub playback_ovrl: bool,
    pub submitted_at: DateTime<Utc>,
}

impl Vote {
    pub fn score(&self, scale: Scale) -> Score {
        match scale {
            Scale::Sig => self.sig,
            Scale::Bak => self.bak,
            Scale::Ovrl => self.ovrl,
        }
    }

    pub fn playback_complete(&self) -> bool {
        self.playback_sig && self.playback_bak && self.playback_ovrl
    }
}

/// Reads a votes CSV, requiring the exact [`VOTES_CSV_HEADER`].
pub fn read_votes<R: Read>(reader: R) -> Result<Vec<Vote>, ScreeningError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let found = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != VOTES_CSV_HEADER {
        return Err(ScreeningError::Header { found });
    }
    rdr.deserialize().map(|r| r.map_err(ScreeningError::from)).collect()
}

pub fn write_votes<W: Write>(writer: W, votes: &[Vote]) -> Result<(), ScreeningError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(VOTES_CSV_HEADER.split(','))?;
    for v in votes {
        wtr.serialize(v)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn is_triplet(s: &str) -> bool {
    s.len() == 3 && s.bytes().all(|b| b.is_ascii_digit())
}

/// Fraction of digit triplets transcribed exactly (all three digits, in order).
pub fn score_digit_triplet<S: AsRef<str>>(responses: &[(S, S)]) -> Result<f64, ScreeningError> {
    if responses.is_empty() {
        return Err(ScreeningError::NoResponses);
    }
    let mut correct = 0usize;
    for (expected, answered) in responses {
        let (e, a) = (expected.as_ref().trim(), answered.as_ref().trim());
        for s in [e, a] {
            if !is_triplet(s) {
                return Err(ScreeningError::MalformedTriplet(s.to_string()));
            }
        }
        correct += usize::from(e == a);
    }
    Ok(correct as f64 / responses.len() as f64)
}

/// Fraction of pair comparisons whose answer matches the expected choice.
pub fn score_pair_comparisons<S: AsRef<str>>(responses: &[(S, S)]) -> Result<f64, ScreeningError> {
    if responses.is_empty() {
        return Err(ScreeningError::NoResponses);
    }
    let correct = responses
        .iter()
        .filter(|(e, a)| e.as_ref().trim() == a.as_ref().trim())
        .count();
    Ok(correct as f64 / responses.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub expected: String,
    pub answered: String,
}

/// Raw qualification answers of one worker, as submitted by the rating page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualificationRecord {
    pub worker_id: String,
    pub triplets: Vec<Response>,
    pub pairs: Vec<Response>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualificationResult {
    pub worker_id: String,
    pub hearing_correct: f64,
    pub environment_correct: f64,
    pub passed: bool,
}

fn meets(fraction: f64, threshold: f64) -> bool {
    fraction + 1e-12 >= threshold
}

impl QualificationResult {
    pub fn new(worker_id: impl Into<String>, hearing_correct: f64, environment_correct: f64) -> Result<Self, ScreeningError> {
        for f in [hearing_correct, environment_correct] {
            if !(0.0..=1.0).contains(&f) {
                return Err(ScreeningError::BadFraction(f));
            }
        }
        Ok(Self {
            worker_id: worker_id.into(),
            hearing_correct,
            environment_correct,
            passed: meets(hearing_correct, HEARING_PASS_THRESHOLD)
                && meets(environment_correct, ENVIRONMENT_PASS_THRESHOLD),
        })
    }

    pub fn evaluate(record: &QualificationRecord) -> Result<Self, ScreeningError> {
        let pairs = |rs: &[Response]| -> Vec<(String, String)> {
            rs.iter().map(|r| (r.expected.clone(), r.answered.clone())).collect()
        };
        Self::new(
            record.worker_id.clone(),
            score_digit_triplet(&pairs(&record.triplets))?,
            score_pair_comparisons(&pairs(&record.pairs))?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TrappingFailed,
    GoldOutOfTolerance,
    PlaybackIncomplete,
    UnqualifiedWorker,
}

/// Outcome for one worker's submission of one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningVerdict {
    pub task_id: String,
    pub worker_id: String,
    pub accepted: bool,
    pub reasons: Vec<RejectReason>,
}

fn control_votes<'a>(votes: &'a [Vote], control: &'a ControlAnswer) -> impl Iterator<Item = &'a Vote> {
    votes.iter().filter(move |v| v.clip_id == control.clip_id)
}

/// Screens one submission (all votes of one worker for one task).
pub fn screen_task(votes: &[Vote], key: &TaskKey, qualification: Option<&QualificationResult>) -> ScreeningVerdict {
    let mut reasons = BTreeSet::new();

    let mut trapping = control_votes(votes, &key.trapping).peekable();
    if trapping.peek().is_none()
        || trapping.any(|v| Scale::ALL.iter().any(|&s| v.score(s) != key.trapping.expected.get(s)))
    {
        reasons.insert(RejectReason::TrappingFailed);
    }

    let mut gold = control_votes(votes, &key.gold).peekable();
    if gold.peek().is_none()
        || gold.any(|v| {
            Scale::ALL
                .iter()
                .any(|&s| v.score(s).get().abs_diff(key.gold.expected.get(s).get()) > GOLD_TOLERANCE)
        })
    {
        reasons.insert(RejectReason::GoldOutOfTolerance);
    }

    if votes.iter().any(|v| !v.playback_complete()) {
        reasons.insert(RejectReason::PlaybackIncomplete);
    }
    if !qualification.is_some_and(|q| q.passed) {
        reasons.insert(RejectReason::UnqualifiedWorker);
    }

    let reasons: Vec<_> = reasons.into_iter().collect();
    ScreeningVerdict {
        task_id: key.task_id.clone(),
        worker_id: votes.first().map(|v| v.worker_id.clone()).unwrap_or_default(),
        accepted: reasons.is_empty(),
        reasons,
    }
}

/// Screens every submission in a vote batch. Verdicts are sorted by
/// (task_id, worker_id) and do not depend on the order of `votes`.
pub fn screen_votes(
    votes: &[Vote],
    answer_key: &AnswerKey,
    qualifications: &HashMap<String, QualificationResult>,
) -> Vec<ScreeningVerdict> {
    let keys: HashMap<&str, &TaskKey> = answer_key.tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut submissions: BTreeMap<(&str, &str), Vec<Vote>> = BTreeMap::new();
    for v in votes {
        submissions
            .entry((v.task_id.as_str(), v.worker_id.as_str()))
            .or_default()
            .push(v.clone());
    }
    submissions
        .into_iter()
        .map(|((task_id, worker_id), group)| match keys.get(task_id) {
            Some(key) => screen_task(&group, key, qualifications.get(worker_id)),
            None => {
                log::warn!("task {task_id:?} is not in the answer key; rejecting submission of {worker_id:?}");
                let mut reasons = vec![RejectReason::TrappingFailed, RejectReason::GoldOutOfTolerance];
                if !qualifications.get(worker_id).is_some_and(|q| q.passed) {
                    reasons.push(RejectReason::UnqualifiedWorker);
                }
                ScreeningVerdict {
                    task_id: task_id.to_string(),
                    worker_id: worker_id.to_string(),
                    accepted: false,
                    reasons,
                }
            }
        })
        .collect()
}

/// Rating votes of accepted submissions, control-clip votes removed.
pub fn filter_reliable(votes: &[Vote], verdicts: &[ScreeningVerdict], answer_key: &AnswerKey) -> Vec<Vote> {
    let accepted: HashSet<(&str, &str)> = verdicts
        .iter()
        .filter(|v| v.accepted)
        .map(|v| (v.task_id.as_str(), v.worker_id.as_str()))
        .collect();
    let known: HashSet<(&str, &str)> = verdicts
        .iter()
        .map(|v| (v.task_id.as_str(), v.worker_id.as_str()))
        .collect();
    let controls: HashSet<(&str, &str)> = answer_key
        .tasks
        .iter()
        .flat_map(|t| {
            [
                (t.task_id.as_str(), t.trapping.clip_id.as_str()),
                (t.task_id.as_str(), t.gold.clip_id.as_str()),
            ]
        })
        .collect();
    votes
        .iter()
        .filter(|v| {
            let submission = (v.task_id.as_str(), v.worker_id.as_str());
            if !known.contains(&submission) {
                log::warn!("vote for {:?} by {:?} has no verdict; dropped", v.task_id, v.worker_id);
            }
            accepted.contains(&submission) && !controls.contains(&(v.task_id.as_str(), v.clip_id.as_str()))
        })
        .cloned()
        .collect()
}
