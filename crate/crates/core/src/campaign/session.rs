use std::collections::{BTreeSet, HashMap};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::CampaignError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Qualification,
    Setup,
    Training,
}

fn default_setup() -> u32 {
    30
}

fn default_training() -> u32 {
    60
}

fn default_true() -> bool {
    true
}

/// How long a passed setup or training section stays valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPolicy {
    #[serde(rename = "setup_minutes", default = "default_setup")]
    pub setup_validity_minutes: u32,
    #[serde(rename = "training_minutes", default = "default_training")]
    pub training_validity_minutes: u32,
    /// Qualification is shown only until the worker passes it once.
    #[serde(default = "default_true")]
    pub qualification_once: bool,
}

impl Default for SessionPolicy {
    fn default() -> Self {
        Self {
            setup_validity_minutes: default_setup(),
            training_validity_minutes: default_training(),
            qualification_once: true,
        }
    }
}

impl SessionPolicy {
    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.setup_validity_minutes == 0 || self.training_validity_minutes == 0 {
            return Err(CampaignError::InvalidPolicy);
        }
        Ok(())
    }
}

/// Pass history of one worker. Only successful passes are recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerState {
    pub worker_id: String,
    #[serde(default)]
    pub qualification_passed: Option<DateTime<Utc>>,
    #[serde(default)]
    pub last_setup_pass: Option<DateTime<Utc>>,
    #[serde(default)]
    pub last_training_pass: Option<DateTime<Utc>>,
}

impl WorkerState {
    pub fn new(worker_id: impl Into<String>) -> Self {
        Self {
            worker_id: worker_id.into(),
            qualification_passed: None,
            last_setup_pass: None,
            last_training_pass: None,
        }
    }

    fn latest(&self) -> Option<DateTime<Utc>> {
        [self.qualification_passed, self.last_setup_pass, self.last_training_pass]
            .into_iter()
            .flatten()
            .max()
    }

    /// Records a successful pass. Passes must arrive in time order.
    pub fn record_pass(&mut self, section: Section, at: DateTime<Utc>) -> Result<(), CampaignError> {
        if self.latest().is_some_and(|t| at < t) {
            return Err(CampaignError::NonMonotoneTimestamp(self.worker_id.clone()));
        }
        let slot = match section {
            Section::Qualification => &mut self.qualification_passed,
            Section::Setup => &mut self.last_setup_pass,
            Section::Training => &mut self.last_training_pass,
        };
        *slot = Some(at);
        Ok(())
    }
}

fn expired(last: Option<DateTime<Utc>>, now: DateTime<Utc>, minutes: u32) -> bool {
    match last {
        None => true,
        Some(t) => now - t > Duration::minutes(minutes as i64),
    }
}

/// Sections the worker must complete before rating.
pub fn gate_session(state: &WorkerState, now: DateTime<Utc>, policy: &SessionPolicy) -> BTreeSet<Section> {
    let mut required = BTreeSet::new();
    if state.qualification_passed.is_none() || !policy.qualification_once {
        required.insert(Section::Qualification);
    }
    if expired(state.last_setup_pass, now, policy.setup_validity_minutes) {
        required.insert(Section::Setup);
    }
    if expired(state.last_training_pass, now, policy.training_validity_minutes) {
        required.insert(Section::Training);
    }
    required
}

/// Loads a newline-delimited JSON log of worker states; the last record for a
/// worker wins. A missing file is an empty store.
pub fn read_worker_states(path: impl AsRef<Path>) -> Result<HashMap<String, WorkerState>, CampaignError> {
    let file = match std::fs::File::open(path.as_ref()) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(CampaignError::StateLog(e.to_string())),
    };
    let mut states = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CampaignError::StateLog(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let state: WorkerState = serde_json::from_str(&line)
            .map_err(|e| CampaignError::StateLog(format!("line {}: {e}", lineno + 1)))?;
        states.insert(state.worker_id.clone(), state);
    }
    Ok(states)
}

pub fn append_worker_state(path: impl AsRef<Path>, state: &WorkerState) -> Result<(), CampaignError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path.as_ref())
        .map_err(|e| CampaignError::StateLog(e.to_string()))?;
    let line = serde_json::to_string(state).map_err(|e| CampaignError::StateLog(e.to_string()))?;
    writeln!(file, "{line}").map_err(|e| CampaignError::StateLog(e.to_string()))
}
