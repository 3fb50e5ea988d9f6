use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::scale::{Scale, ScaleScores};
use crate::screening::Vote;

use super::StatsError;

/// A reliable vote resolved to the condition its clip belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionVote {
    pub condition_id: String,
    pub worker_id: String,
    pub scores: ScaleScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleStat {
    pub mos: f64,
    /// Half-width of the 95% Student-t interval; absent for fewer than two votes.
    pub ci95: Option<f64>,
    pub n: usize,
    pub dmos: Option<f64>,
}

impl ScaleStat {
    pub fn from_mos(mos: f64) -> Self {
        Self {
            mos,
            ci95: None,
            n: 0,
            dmos: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionScore {
    pub condition_id: String,
    pub sig: ScaleStat,
    pub bak: ScaleStat,
    pub ovrl: ScaleStat,
}

impl ConditionScore {
    /// A score row known only by its MOS values (e.g. a transcribed table).
    pub fn from_mos(condition_id: impl Into<String>, sig: f64, bak: f64, ovrl: f64) -> Self {
        Self {
            condition_id: condition_id.into(),
            sig: ScaleStat::from_mos(sig),
            bak: ScaleStat::from_mos(bak),
            ovrl: ScaleStat::from_mos(ovrl),
        }
    }

    pub fn get(&self, scale: Scale) -> &ScaleStat {
        match scale {
            Scale::Sig => &self.sig,
            Scale::Bak => &self.bak,
            Scale::Ovrl => &self.ovrl,
        }
    }

    pub fn get_mut(&mut self, scale: Scale) -> &mut ScaleStat {
        match scale {
            Scale::Sig => &mut self.sig,
            Scale::Bak => &mut self.bak,
            Scale::Ovrl => &mut self.ovrl,
        }
    }

    pub fn mos(&self, scale: Scale) -> f64 {
        self.get(scale).mos
    }
}

/// Two-sided 95% Student-t quantile for `df` degrees of freedom.
pub fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("df >= 1")
        .inverse_cdf(0.975)
}

/// `t(0.975, n-1) * sd / sqrt(n)` with the sample standard deviation.
pub fn ci95_half_width(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some(t_quantile_975(n - 1) * var.sqrt() / (n as f64).sqrt())
}

/// Resolves each vote's clip to its condition.
pub fn attach_conditions(
    votes: &[Vote],
    clip_conditions: &HashMap<String, String>,
) -> Result<Vec<ConditionVote>, StatsError> {
    votes
        .iter()
        .map(|v| {
            let condition_id = clip_conditions
                .get(&v.clip_id)
                .ok_or_else(|| StatsError::UnknownClip(v.clip_id.clone()))?;
            Ok(ConditionVote {
                condition_id: condition_id.clone(),
                worker_id: v.worker_id.clone(),
                scores: ScaleScores {
                    sig: v.sig,
                    bak: v.bak,
                    ovrl: v.ovrl,
                },
            })
        })
        .collect()
}

/// Per-condition MOS, CI and (when `baseline` is given) DMOS, sorted by
/// condition id.
pub fn aggregate_condition_votes(votes: &[ConditionVote], baseline: Option<&str>) -> Result<Vec<ConditionScore>, StatsError> {
    if votes.is_empty() {
        return Err(StatsError::NoVotes);
    }
    let mut by_condition: BTreeMap<&str, Vec<&ScaleScores>> = BTreeMap::new();
    for v in votes {
        by_condition.entry(&v.condition_id).or_default().push(&v.scores);
    }
    let mut scores: Vec<ConditionScore> = by_condition
        .into_iter()
        .map(|(id, group)| {
            let stat = |scale: Scale| {
                let values: Vec<f64> = group.iter().map(|s| f64::from(s.get(scale))).collect();
                ScaleStat {
                    mos: values.iter().sum::<f64>() / values.len() as f64,
                    ci95: ci95_half_width(&values),
                    n: values.len(),
                    dmos: None,
                }
            };
            ConditionScore {
                condition_id: id.to_string(),
                sig: stat(Scale::Sig),
                bak: stat(Scale::Bak),
                ovrl: stat(Scale::Ovrl),
            }
        })
        .collect();
    if let Some(b) = baseline {
        apply_dmos(&mut scores, b)?;
    }
    Ok(scores)
}

/// Aggregates screened votes. Conditions named in `clip_conditions` that
/// received no votes are left out with a warning.
pub fn aggregate(
    votes: &[Vote],
    clip_conditions: &HashMap<String, String>,
    baseline: Option<&str>,
) -> Result<Vec<ConditionScore>, StatsError> {
    let resolved = attach_conditions(votes, clip_conditions)?;
    let voted: BTreeSet<&str> = resolved.iter().map(|v| v.condition_id.as_str()).collect();
    let known: BTreeSet<&str> = clip_conditions.values().map(String::as_str).collect();
    for missing in known.difference(&voted) {
        log::warn!("condition {missing:?} has no reliable votes; omitted");
    }
    aggregate_condition_votes(&resolved, baseline)
}

/// Sets `dmos = mos - mos(baseline)` on every scale of every row.
pub fn apply_dmos(scores: &mut [ConditionScore], baseline: &str) -> Result<(), StatsError> {
    let base = scores
        .iter()
        .find(|s| s.condition_id == baseline)
        .ok_or_else(|| StatsError::MissingBaseline(baseline.to_string()))?
        .clone();
    for row in scores.iter_mut() {
        for scale in Scale::ALL {
            let delta = if row.condition_id == baseline {
                0.0
            } else {
                row.mos(scale) - base.mos(scale)
            };
            row.get_mut(scale).dmos = Some(delta);
        }
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_default()
}

/// Table form of the scores: BAK, SIG, OVRL MOS, then DMOS, CI and vote
/// counts, values rounded to two decimals.
pub fn write_scores_csv<W: Write>(writer: W, scores: &[ConditionScore]) -> Result<(), StatsError> {
    let order = [Scale::Bak, Scale::Sig, Scale::Ovrl];
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["condition".to_string()];
    for suffix in ["mos", "dmos", "ci95", "n"] {
        header.extend(order.iter().map(|s| format!("{}_{suffix}", s.name().to_lowercase())));
    }
    wtr.write_record(&header)?;
    for row in scores {
        let mut rec = vec![row.condition_id.clone()];
        rec.extend(order.iter().map(|&s| cell(Some(row.mos(s)))));
        rec.extend(order.iter().map(|&s| cell(row.get(s).dmos)));
        rec.extend(order.iter().map(|&s| cell(row.get(s).ci95)));
        rec.extend(order.iter().map(|&s| row.get(s).n.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Score;

    fn cv(cond: &str, worker: &str, sig: i64, bak: i64, ovrl: i64) -> ConditionVote {
        ConditionVote {
            condition_id: cond.into(),
            worker_id: worker.into(),
            scores: ScaleScores {
                sig: Score::new(sig).unwrap(),
                bak: Score::new(bak).unwrap(),
                ovrl: Score::new(ovrl).unwrap(),
            },
        }
    }

    #[test]
    fn hand_t_interval() {
        // mean 4.333, sd 0.5774, t(0.975, 2) = 4.303
        let votes = [cv("a", "w1", 4, 1, 1), cv("a", "w2", 4, 1, 1), cv("a", "w3", 5, 1, 1)];
        let scores = aggregate_condition_votes(&votes, None).unwrap();
        let sig = scores[0].sig;
        assert!((sig.mos - 13.0 / 3.0).abs() < 1e-12);
        let expected = 4.302_652_73 * (1.0f64 / 3.0).sqrt() / 3f64.sqrt();
        assert!((sig.ci95.unwrap() - expected).abs() < 1e-6, "{:?}", sig.ci95);
        assert!((sig.ci95.unwrap() - 1.434).abs() < 1e-3);
        assert_eq!(scores[0].bak.ci95, Some(0.0));
    }

    #[test]
    fn single_vote_has_no_ci() {
        let scores = aggregate_condition_votes(&[cv("a", "w", 3, 3, 3)], None).unwrap();
        assert_eq!(scores[0].sig.n, 1);
        assert_eq!(scores[0].sig.ci95, None);
    }

    #[test]
    fn dmos_against_baseline() {
        let mut rows = vec![
            ConditionScore::from_mos("36", 3.90, 4.66, 3.78),
            ConditionScore::from_mos("noisy", 3.89, 2.61, 2.77),
        ];
        apply_dmos(&mut rows, "noisy").unwrap();
        assert!((rows[0].bak.dmos.unwrap() - 2.05).abs() < 1e-9);
        assert!((rows[0].sig.dmos.unwrap() - 0.01).abs() < 1e-9);
        assert!((rows[0].ovrl.dmos.unwrap() - 1.01).abs() < 1e-9);
        assert_eq!(rows[1].sig.dmos, Some(0.0));
        assert!(matches!(apply_dmos(&mut rows, "x"), Err(StatsError::MissingBaseline(_))));
    }

    #[test]
    fn unknown_clip_and_empty_input() {
        assert!(matches!(aggregate_condition_votes(&[], None), Err(StatsError::NoVotes)));
        assert!(matches!(aggregate(&[], &HashMap::new(), None), Err(StatsError::NoVotes)));
    }

    #[test]
    fn csv_layout() {
        let mut rows = vec![ConditionScore::from_mos("noisy", 3.89, 2.61, 2.77)];
        apply_dmos(&mut rows, "noisy").unwrap();
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "condition,bak_mos,sig_mos,ovrl_mos,bak_dmos,sig_dmos,ovrl_dmos,bak_ci95,sig_ci95,ovrl_ci95,bak_n,sig_n,ovrl_n"
        );
        assert_eq!(lines.next().unwrap(), "noisy,2.61,3.89,2.77,0.00,0.00,0.00,,,,0,0,0");
    }
}
