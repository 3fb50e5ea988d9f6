use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scale::{ScaleOrder, ScaleScores};

use super::session::SessionPolicy;
use super::{CampaignError, Stimulus, StimulusKind};

fn default_campaign_id() -> String {
    "campaign".to_string()
}

fn default_task_size() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    #[serde(default = "default_campaign_id")]
    pub campaign_id: String,
    #[serde(default = "default_task_size")]
    pub task_size: usize,
    pub target_votes_per_clip: usize,
    pub seed: u64,
    pub trapping_pool: Vec<Stimulus>,
    pub gold_pool: Vec<Stimulus>,
    #[serde(default)]
    pub policy: SessionPolicy,
}

/// One crowdsourcing task: `task_size` rating stimuli plus one trapping and
/// one gold stimulus, in presentation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub task_id: String,
    pub campaign_id: String,
    pub scale_order_seed: u64,
    pub stimuli: Vec<Stimulus>,
}

/// What the rating page receives for one task. Stimulus kinds, conditions and
/// expected answers are not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPayload {
    pub task_id: String,
    pub campaign_id: String,
    pub scale_order_seed: u64,
    pub trials: Vec<TrialPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPayload {
    pub clip_id: String,
    pub url: String,
    pub scale_order: ScaleOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlAnswer {
    pub clip_id: String,
    pub kind: StimulusKind,
    pub expected: ScaleScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskKey {
    pub task_id: String,
    pub trapping: ControlAnswer,
    pub gold: ControlAnswer,
}

/// Moderator-only answer key for a whole campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub campaign_id: String,
    pub tasks: Vec<TaskKey>,
}

impl AnswerKey {
    pub fn task(&self, task_id: &str) -> Option<&TaskKey> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }
}

/// Per-trial seed derived from the task seed and the trial's position.
pub fn trial_seed(task_seed: u64, index: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = task_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl TaskAssignment {
    pub fn payload(&self) -> TaskPayload {
        TaskPayload {
            task_id: self.task_id.clone(),
            campaign_id: self.campaign_id.clone(),
            scale_order_seed: self.scale_order_seed,
            trials: self
                .stimuli
                .iter()
                .enumerate()
                .map(|(i, s)| TrialPayload {
                    clip_id: s.clip_id.clone(),
                    url: s.url.clone(),
                    scale_order: ScaleOrder::from_seed(trial_seed(self.scale_order_seed, i)),
                })
                .collect(),
        }
    }

    pub fn key(&self) -> TaskKey {
        let control = |kind| {
            let s = self
                .stimuli
                .iter()
                .find(|s| s.kind == kind)
                .expect("every planned task holds one stimulus of each control kind");
            ControlAnswer {
                clip_id: s.clip_id.clone(),
                kind,
                expected: s.expected_answer.expect("validated control stimulus"),
            }
        };
        TaskKey {
            task_id: self.task_id.clone(),
            trapping: control(StimulusKind::Trapping),
            gold: control(StimulusKind::Gold),
        }
    }

    pub fn rating_clips(&self) -> impl Iterator<Item = &Stimulus> {
        self.stimuli.iter().filter(|s| s.kind == StimulusKind::Rating)
    }
}

impl CampaignConfig {
    fn validate(&self) -> Result<(), CampaignError> {
        if self.task_size < 2 {
            return Err(CampaignError::TaskSizeTooSmall(self.task_size));
        }
        if self.target_votes_per_clip == 0 {
            return Err(CampaignError::NoTargetVotes);
        }
        self.policy.validate()?;
        for (pool, kind, name) in [
            (&self.trapping_pool, StimulusKind::Trapping, "trapping"),
            (&self.gold_pool, StimulusKind::Gold, "gold"),
        ] {
            if pool.is_empty() {
                return Err(CampaignError::EmptyPool(name));
            }
            for s in pool {
                s.validate()?;
                if s.kind != kind {
                    return Err(CampaignError::InvalidStimulus(s.clip_id.clone(), "wrong kind for pool"));
                }
            }
        }
        Ok(())
    }

    pub fn answer_key(&self, tasks: &[TaskAssignment]) -> AnswerKey {
        AnswerKey {
            campaign_id: self.campaign_id.clone(),
            tasks: tasks.iter().map(TaskAssignment::key).collect(),
        }
    }
}

/// Packs rating clips into tasks until every clip sits in at least
/// `target_votes_per_clip` distinct tasks.
///
/// Clips are dealt round-robin from a freshly shuffled copy of the clip list
/// per round; a clip already present in the task being filled is deferred to
/// the next task. Each task then gets one trapping and one gold stimulus at
/// random positions other than the first, and its stimulus order is shuffled
/// from a stream keyed by `(seed, task index)`.
pub fn plan_campaign(clips: &[Stimulus], config: &CampaignConfig) -> Result<Vec<TaskAssignment>, CampaignError> {
    config.validate()?;
    if clips.is_empty() {
        return Err(CampaignError::NoClips);
    }
    let mut seen = HashSet::new();
    for c in clips {
        c.validate()?;
        if c.kind != StimulusKind::Rating {
            return Err(CampaignError::InvalidStimulus(c.clip_id.clone(), "not a rating stimulus"));
        }
        if !seen.insert(c.clip_id.as_str()) {
            return Err(CampaignError::DuplicateClip(c.clip_id.clone()));
        }
    }
    let k = config.task_size;
    if clips.len() < k {
        return Err(CampaignError::NotEnoughClips {
            clips: clips.len(),
            task_size: k,
        });
    }

    let mut deal_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..clips.len()).collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut membership = vec![0usize; clips.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();

    while membership.iter().any(|&m| m < config.target_votes_per_clip) {
        let mut members: Vec<usize> = Vec::with_capacity(k);
        let mut deferred: Vec<usize> = Vec::new();
        while members.len() < k {
            let Some(c) = queue.pop_front() else {
                order.shuffle(&mut deal_rng);
                queue.extend(order.iter().copied());
                continue;
            };
            if members.contains(&c) {
                deferred.push(c);
            } else {
                members.push(c);
            }
        }
        for d in deferred.into_iter().rev() {
            queue.push_front(d);
        }
        for &c in &members {
            membership[c] += 1;
        }
        groups.push(members);
    }

    let width = groups.len().to_string().len().max(4);
    let tasks = groups
        .into_iter()
        .enumerate()
        .map(|(t, members)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64 + 1);
            let mut stimuli: Vec<Stimulus> = members.iter().map(|&c| clips[c].clone()).collect();
            stimuli.shuffle(&mut rng);

            let trapping = config.trapping_pool[rng.gen_range(0..config.trapping_pool.len())].clone();
            let gold = config.gold_pool[rng.gen_range(0..config.gold_pool.len())].clone();
            // Positions in the final list of k + 2; never 0.
            let trap_pos = rng.gen_range(1..=k);
            stimuli.insert(trap_pos, trapping);
            let gold_pos = rng.gen_range(1..=k + 1);
            stimuli.insert(gold_pos, gold);

            TaskAssignment {
                task_id: format!("{}-t{:0width$}", config.campaign_id, t + 1),
                campaign_id: config.campaign_id.clone(),
                scale_order_seed: rng.gen(),
                stimuli,
            }
        })
        .collect();
    Ok(tasks)
}
