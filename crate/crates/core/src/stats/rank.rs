use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aggregate::ConditionVote;
use super::correlation::average_ranks;
use crate::scale::Scale;

/// Per-condition mean of within-worker ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedScore {
    pub condition_id: String,
    pub sig: f64,
    pub bak: f64,
    pub ovrl: f64,
    /// Number of ranked votes behind the means.
    pub n: usize,
}

impl TransformedScore {
    pub fn get(&self, scale: Scale) -> f64 {
        match scale {
            Scale::Sig => self.sig,
            Scale::Bak => self.bak,
            Scale::Ovrl => self.ovrl,
        }
    }
}

/// Replaces each worker's scores by their average ranks within that worker's
/// own votes (per scale), then averages the ranks per condition. Workers with
/// a single vote carry no ranking information and are dropped.
pub fn rank_transform(votes: &[ConditionVote]) -> Vec<TransformedScore> {
    let mut by_worker: BTreeMap<&str, Vec<&ConditionVote>> = BTreeMap::new();
    for v in votes {
        by_worker.entry(&v.worker_id).or_default().push(v);
    }

    // condition -> (rank sums per scale, count)
    let mut sums: BTreeMap<&str, ([f64; 3], usize)> = BTreeMap::new();
    for (worker, group) in by_worker {
        if group.len() < 2 {
            log::warn!("worker {worker:?} has a single vote; dropped from rank transform");
            continue;
        }
        let ranks: Vec<Vec<f64>> = Scale::ALL
            .iter()
            .map(|&s| {
                let values: Vec<f64> = group.iter().map(|v| f64::from(v.scores.get(s))).collect();
                average_ranks(&values)
            })
            .collect();
        for (i, v) in group.iter().enumerate() {
            let entry = sums.entry(&v.condition_id).or_insert(([0.0; 3], 0));
            for (acc, r) in entry.0.iter_mut().zip(&ranks) {
                *acc += r[i];
            }
            entry.1 += 1;
        }
    }

    sums.into_iter()
        .map(|(id, (totals, n))| TransformedScore {
            condition_id: id.to_string(),
            sig: totals[0] / n as f64,
            bak: totals[1] / n as f64,
            ovrl: totals[2] / n as f64,
            n,
        })
        .collect()
}
