use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::aggregate::ConditionScore;
use super::correlation::{pearson, rmse, spearman};
use super::rank::TransformedScore;
use super::StatsError;
use crate::scale::Scale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleComparison {
    pub pcc: f64,
    pub srcc: f64,
    /// Spearman correlation of the rank-transformed condition means, when
    /// vote-level data for both runs was supplied.
    pub srcc_rank_transformed: Option<f64>,
    pub rmse: f64,
    pub average_ci_a: Option<f64>,
    pub average_ci_b: Option<f64>,
    pub n_conditions: usize,
}

/// Per-scale agreement between two runs over the same condition set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scales: BTreeMap<Scale, ScaleComparison>,
}

impl ComparisonReport {
    pub fn get(&self, scale: Scale) -> &ScaleComparison {
        &self.scales[&scale]
    }
}

fn index<T>(rows: &[T], id: impl Fn(&T) -> &str) -> Result<BTreeMap<&str, &T>, StatsError> {
    let mut map = BTreeMap::new();
    for r in rows {
        if map.insert(id(r), r).is_some() {
            return Err(StatsError::DuplicateCondition(id(r).to_string()));
        }
    }
    Ok(map)
}

fn same_keys<A, B>(a: &BTreeMap<&str, A>, b: &BTreeMap<&str, B>) -> Result<(), StatsError> {
    let ka: BTreeSet<&str> = a.keys().copied().collect();
    let kb: BTreeSet<&str> = b.keys().copied().collect();
    if ka != kb {
        return Err(StatsError::ConditionMismatch {
            only_a: ka.difference(&kb).map(|s| s.to_string()).collect(),
            only_b: kb.difference(&ka).map(|s| s.to_string()).collect(),
        });
    }
    Ok(())
}

fn average_ci(rows: &BTreeMap<&str, &ConditionScore>, scale: Scale) -> Option<f64> {
    let cis: Vec<f64> = rows.values().filter_map(|r| r.get(scale).ci95).collect();
    (!cis.is_empty()).then(|| cis.iter().sum::<f64>() / cis.len() as f64)
}

/// PCC, SRCC and RMSE on paired condition MOS values plus each run's mean CI.
pub fn compare_runs(a: &[ConditionScore], b: &[ConditionScore]) -> Result<ComparisonReport, StatsError> {
    let ia = index(a, |r| &r.condition_id)?;
    let ib = index(b, |r| &r.condition_id)?;
    same_keys(&ia, &ib)?;

    let mut scales = BTreeMap::new();
    for scale in Scale::ALL {
        let xa: Vec<f64> = ia.values().map(|r| r.mos(scale)).collect();
        let xb: Vec<f64> = ib.values().map(|r| r.mos(scale)).collect();
        scales.insert(
            scale,
            ScaleComparison {
                pcc: pearson(&xa, &xb)?,
                srcc: spearman(&xa, &xb)?,
                srcc_rank_transformed: None,
                rmse: rmse(&xa, &xb)?,
                average_ci_a: average_ci(&ia, scale),
                average_ci_b: average_ci(&ib, scale),
                n_conditions: xa.len(),
            },
        );
    }
    Ok(ComparisonReport { scales })
}

/// [`compare_runs`] plus SRCC on rank-transformed condition means.
pub fn compare_runs_ranked(
    a: &[ConditionScore],
    b: &[ConditionScore],
    ranked_a: &[TransformedScore],
    ranked_b: &[TransformedScore],
) -> Result<ComparisonReport, StatsError> {
    let mut report = compare_runs(a, b)?;
    let ta = index(ranked_a, |r| &r.condition_id)?;
    let tb = index(ranked_b, |r| &r.condition_id)?;
    same_keys(&ta, &tb)?;
    for (scale, cmp) in report.scales.iter_mut() {
        let xa: Vec<f64> = ta.values().map(|r| r.get(*scale)).collect();
        let xb: Vec<f64> = tb.values().map(|r| r.get(*scale)).collect();
        cmp.srcc_rank_transformed = Some(spearman(&xa, &xb)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(values: &[(f64, f64, f64)]) -> Vec<ConditionScore> {
        values
            .iter()
            .enumerate()
            .map(|(i, &(s, b, o))| ConditionScore::from_mos(format!("i{:02}", i + 1), s, b, o))
            .collect()
    }

    #[test]
    fn identical_runs() {
        let a = run(&[(1.2, 2.3, 1.5), (3.3, 4.1, 3.0), (4.8, 4.9, 4.7), (2.5, 1.4, 1.8)]);
        let report = compare_runs(&a, &a).unwrap();
        for scale in Scale::ALL {
            let c = report.get(scale);
            assert!((c.pcc - 1.0).abs() < 1e-12);
            assert_eq!(c.srcc, 1.0);
            assert_eq!(c.rmse, 0.0);
            assert_eq!(c.average_ci_a, None);
        }
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["scales"]["bak"]["pcc"].is_number());
    }

    #[test]
    fn mismatched_sets_are_listed() {
        let a = run(&[(1.0, 2.0, 3.0), (2.0, 3.0, 4.0)]);
        let mut b = a.clone();
        b[1].condition_id = "x".into();
        match compare_runs(&a, &b) {
            Err(StatsError::ConditionMismatch { only_a, only_b }) => {
                assert_eq!(only_a, vec!["i02"]);
                assert_eq!(only_b, vec!["x"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_of_rows_does_not_matter() {
        let a = run(&[(1.2, 2.3, 1.5), (3.3, 4.1, 3.0), (4.8, 4.9, 4.7), (2.5, 1.4, 1.8)]);
        let b = run(&[(1.0, 2.0, 1.4), (3.6, 4.3, 3.1), (4.5, 4.8, 4.9), (2.6, 1.9, 1.7)]);
        let mut b_rev = b.clone();
        b_rev.reverse();
        assert_eq!(compare_runs(&a, &b).unwrap(), compare_runs(&a, &b_rev).unwrap());
    }
}
