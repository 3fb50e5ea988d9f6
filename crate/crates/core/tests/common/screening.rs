//! Random screening fixtures and the property checks run against them.

use std::collections::{BTreeMap, HashMap};

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqeval::campaign::{AnswerKey, ControlAnswer, StimulusKind, TaskKey};
use sqeval::scale::{ScaleOrder, ScaleScores, Score};
use sqeval::screening::{filter_reliable, screen_votes, QualificationResult, Vote};
use sqeval::stats::aggregate;

pub struct Fixture {
    pub votes: Vec<Vote>,
    pub key: AnswerKey,
    pub qualifications: HashMap<String, QualificationResult>,
    /// Rating clips only.
    pub clip_conditions: HashMap<String, String>,
}

fn score(v: u8) -> Score {
    Score::new(v as i64).unwrap()
}

fn scores(rng: &mut ChaCha8Rng) -> (u8, u8, u8) {
    (rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5))
}

/// 1-4 tasks with 3-6 rating clips each, 1-4 workers, each worker submitting
/// a random subset of tasks. Control answers are right, near or wrong with
/// comparable probability; playback flags and qualifications are mostly
/// good so that accepted submissions are common.
pub fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tasks = rng.gen_range(1..=4);
    let n_workers = rng.gen_range(1..=4);
    let mut key = AnswerKey {
        campaign_id: "p".into(),
        tasks: Vec::new(),
    };
    let mut clip_conditions = HashMap::new();
    let mut task_clips = Vec::new();
    for t in 0..n_tasks {
        let task_id = format!("p-t{t}");
        let ratings: Vec<String> = (0..rng.gen_range(3..=6)).map(|c| format!("c{}", rng.gen_range(0..12) * 10 + c)).collect();
        for c in &ratings {
            clip_conditions.insert(c.clone(), format!("cond{}", c.len() % 3));
        }
        let trap = ScaleScores::uniform(score(rng.gen_range(1..=5)));
        key.tasks.push(TaskKey {
            task_id: task_id.clone(),
            trapping: ControlAnswer {
                clip_id: format!("trap{t}"),
                kind: StimulusKind::Trapping,
                expected: trap,
            },
            gold: ControlAnswer {
                clip_id: "gold".into(),
                kind: StimulusKind::Gold,
                expected: ScaleScores::uniform(score(5)),
            },
        });
        task_clips.push((task_id, ratings));
    }

    let mut qualifications = HashMap::new();
    let mut votes = Vec::new();
    let at = Utc.with_ymd_and_hms(2021, 2, 1, 9, 0, 0).unwrap();
    for w in 0..n_workers {
        let worker = format!("w{w}");
        if rng.gen_bool(0.85) {
            let hearing = if rng.gen_bool(0.85) { 1.0 } else { 0.6 };
            qualifications.insert(worker.clone(), QualificationResult::new(worker.clone(), hearing, 0.8).unwrap());
        }
        for (ti, (task_id, ratings)) in task_clips.iter().enumerate() {
            if !rng.gen_bool(0.8) {
                continue;
            }
            let tk = &key.tasks[ti];
            let mut push = |clip: &str, s: (u8, u8, u8), rng: &mut ChaCha8Rng| {
                let full = rng.gen_bool(0.95);
                votes.push(Vote {
                    worker_id: worker.clone(),
                    task_id: task_id.clone(),
                    clip_id: clip.to_string(),
                    scale_order: if rng.gen() { ScaleOrder::SigFirst } else { ScaleOrder::BakFirst },
                    sig: score(s.0),
                    bak: score(s.1),
                    ovrl: score(s.2),
                    playback_sig: full,
                    playback_bak: true,
                    playback_ovrl: true,
                    submitted_at: at,
                });
            };
            for c in ratings {
                let s = scores(&mut rng);
                push(c, s, &mut rng);
            }
            let t = tk.trapping.expected.sig.get();
            let trap_answer = if rng.gen_bool(0.8) { (t, t, t) } else { scores(&mut rng) };
            push(&tk.trapping.clip_id, trap_answer, &mut rng);
            let gold_answer = match rng.gen_range(0..4) {
                0 => scores(&mut rng),
                1 => (4, 5, 4),
                _ => (5, 5, 5),
            };
            push(&tk.gold.clip_id, gold_answer, &mut rng);
        }
    }
    votes.shuffle(&mut rng);
    Fixture {
        votes,
        key,
        qualifications,
        clip_conditions,
    }
}

/// Acceptance decided from first principles for one submission.
fn oracle_accepts(votes: &[&Vote], key: &TaskKey, qualified: bool) -> bool {
    let all = |v: &Vote, f: &dyn Fn(u8, u8) -> bool, e: &ScaleScores| {
        f(v.sig.get(), e.sig.get()) && f(v.bak.get(), e.bak.get()) && f(v.ovrl.get(), e.ovrl.get())
    };
    let trap: Vec<_> = votes.iter().filter(|v| v.clip_id == key.trapping.clip_id).collect();
    let gold: Vec<_> = votes.iter().filter(|v| v.clip_id == key.gold.clip_id).collect();
    qualified
        && !trap.is_empty()
        && trap.iter().all(|v| all(v, &|a, b| a == b, &key.trapping.expected))
        && !gold.is_empty()
        && gold.iter().all(|v| all(v, &|a, b| a.abs_diff(b) <= 1, &key.gold.expected))
        && votes.iter().all(|v| v.playback_sig && v.playback_bak && v.playback_ovrl)
}

fn vote_key(v: &Vote) -> (String, String, String, u8, u8, u8) {
    (v.task_id.clone(), v.worker_id.clone(), v.clip_id.clone(), v.sig.get(), v.bak.get(), v.ovrl.get())
}

/// Checks atomic rejection, control-vote exclusion and permutation
/// invariance on one fixture. `perm_seed` drives the reshuffle.
pub fn check_screening_properties(fx: &Fixture, perm_seed: u64) -> Result<(), String> {
    let verdicts = screen_votes(&fx.votes, &fx.key, &fx.qualifications);
    let reliable = filter_reliable(&fx.votes, &verdicts, &fx.key);

    let mut submissions: BTreeMap<(&str, &str), Vec<&Vote>> = BTreeMap::new();
    for v in &fx.votes {
        submissions.entry((&v.task_id, &v.worker_id)).or_default().push(v);
    }
    if submissions.len() != verdicts.len() {
        return Err(format!("{} submissions but {} verdicts", submissions.len(), verdicts.len()));
    }
    for verdict in &verdicts {
        let group = &submissions[&(verdict.task_id.as_str(), verdict.worker_id.as_str())];
        let key = fx.key.task(&verdict.task_id).unwrap();
        let qualified = fx.qualifications.get(&verdict.worker_id).is_some_and(|q| q.passed);
        if verdict.accepted != oracle_accepts(group, key, qualified) {
            return Err(format!("verdict mismatch for {}/{}", verdict.task_id, verdict.worker_id));
        }
        if verdict.accepted != verdict.reasons.is_empty() {
            return Err("accepted verdict with reasons".into());
        }
        let kept = reliable
            .iter()
            .filter(|v| v.task_id == verdict.task_id && v.worker_id == verdict.worker_id)
            .count();
        let rating = group
            .iter()
            .filter(|v| v.clip_id != key.trapping.clip_id && v.clip_id != key.gold.clip_id)
            .count();
        let expected = if verdict.accepted { rating } else { 0 };
        if kept != expected {
            return Err(format!("non-atomic: kept {kept} of {rating} for {}/{}", verdict.task_id, verdict.worker_id));
        }
    }

    for v in &reliable {
        let key = fx.key.task(&v.task_id).unwrap();
        if v.clip_id == key.trapping.clip_id || v.clip_id == key.gold.clip_id {
            return Err(format!("control vote {} survived", v.clip_id));
        }
    }
    if !reliable.is_empty() {
        // Control clips are absent from the clip map, so any leak is an error here.
        let scores = aggregate(&reliable, &fx.clip_conditions, None).map_err(|e| e.to_string())?;
        let n: usize = scores.iter().map(|s| s.sig.n).sum();
        if n != reliable.len() {
            return Err("aggregate vote count differs from reliable set".into());
        }
    }

    let mut shuffled = fx.votes.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
    let verdicts2 = screen_votes(&shuffled, &fx.key, &fx.qualifications);
    if verdicts2 != verdicts {
        return Err("verdicts depend on vote order".into());
    }
    let mut a: Vec<_> = reliable.iter().map(vote_key).collect();
    let mut b: Vec<_> = filter_reliable(&shuffled, &verdicts2, &fx.key).iter().map(vote_key).collect();
    a.sort();
    b.sort();
    if a != b {
        return Err("reliable set depends on vote order".into());
    }
    Ok(())
}
