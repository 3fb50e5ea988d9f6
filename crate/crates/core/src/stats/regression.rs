use serde::{Deserialize, Serialize};

use super::aggregate::ConditionScore;
use super::correlation::pearson;
use super::StatsError;
use crate::scale::Scale;

/// `OVRL = intercept + coef_sig * SIG + coef_bak * BAK`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvrlModel {
    pub intercept: f64,
    pub coef_sig: f64,
    pub coef_bak: f64,
}

impl OvrlModel {
    pub fn new(intercept: f64, coef_sig: f64, coef_bak: f64) -> Self {
        Self {
            intercept,
            coef_sig,
            coef_bak,
        }
    }

    pub fn evaluate(&self, sig_mos: f64, bak_mos: f64) -> f64 {
        self.intercept + self.coef_sig * sig_mos + self.coef_bak * bak_mos
    }

    /// Relative weight of the signal scale over the background scale.
    pub fn sig_bak_ratio(&self) -> f64 {
        self.coef_sig / self.coef_bak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    #[serde(flatten)]
    pub model: OvrlModel,
    pub adjusted_r2: f64,
    /// Pearson correlation between fitted and observed OVRL.
    pub pearson_rho: f64,
    pub n: usize,
}

/// Least-squares solution of `x * beta = y` for a tall `x` with three columns,
/// by Householder QR.
fn least_squares3(mut x: Vec<[f64; 3]>, mut y: Vec<f64>) -> Result<[f64; 3], StatsError> {
    let n = x.len();
    let scale = x
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..3 {
        let norm = (col..n).map(|i| x[i][col].powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-10 * scale * (n as f64).sqrt() {
            return Err(StatsError::Singular);
        }
        let alpha = if x[col][col] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (col..n).map(|i| x[i][col]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|a| a * a).sum();
        for c in col..3 {
            let dot: f64 = (col..n).map(|i| v[i - col] * x[i][c]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in col..n {
                x[i][c] -= f * v[i - col];
            }
        }
        let dot: f64 = (col..n).map(|i| v[i - col] * y[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in col..n {
            y[i] -= f * v[i - col];
        }
        if x[col][col].abs() <= 1e-10 * scale {
            return Err(StatsError::Singular);
        }
    }
    let mut beta = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| x[row][c] * beta[c]).sum();
        beta[row] = (y[row] - tail) / x[row][row];
    }
    Ok(beta)
}

/// Ordinary least squares of OVRL MOS on SIG and BAK MOS over condition
/// means, unweighted, with intercept.
pub fn fit_ovrl_regression(scores: &[ConditionScore]) -> Result<RegressionFit, StatsError> {
    let n = scores.len();
    if n < 4 {
        return Err(StatsError::TooFewPoints { needed: 4, got: n });
    }
    let design: Vec<[f64; 3]> = scores
        .iter()
        .map(|s| [1.0, s.mos(Scale::Sig), s.mos(Scale::Bak)])
        .collect();
    let observed: Vec<f64> = scores.iter().map(|s| s.mos(Scale::Ovrl)).collect();
    let [intercept, coef_sig, coef_bak] = least_squares3(design, observed.clone())?;
    let model = OvrlModel::new(intercept, coef_sig, coef_bak);

    let fitted: Vec<f64> = scores
        .iter()
        .map(|s| model.evaluate(s.mos(Scale::Sig), s.mos(Scale::Bak)))
        .collect();
    let mean = observed.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    let ss_res: f64 = observed.iter().zip(&fitted).map(|(o, f)| (o - f).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r2 = 1.0 - ss_res / ss_tot;
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / (n - 3) as f64;
    let pearson_rho = if ss_res <= 1e-24 * ss_tot {
        1.0
    } else {
        pearson(&fitted, &observed)?
    };
    Ok(RegressionFit {
        model,
        adjusted_r2,
        pearson_rho,
        n,
    })
}

/// Evaluates a fitted model. Inputs outside the 1..5 scale range are used
/// as given, with a warning.
pub fn predict_ovrl(model: &OvrlModel, sig_mos: f64, bak_mos: f64) -> f64 {
    for (name, v) in [("SIG", sig_mos), ("BAK", bak_mos)] {
        if !(1.0..=5.0).contains(&v) {
            log::warn!("{name} MOS {v} outside the 1..5 scale");
        }
    }
    model.evaluate(sig_mos, bak_mos)
}
