use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sqeval::campaign::{plan_campaign, CampaignConfig, Stimulus, TaskPayload};
use sqeval::refcond::{process_entry, GeneratedEntry, ManifestEntry};
use sqeval::scale::Scale;
use sqeval::screening::{
    filter_reliable, screen_votes, write_votes, QualificationRecord, QualificationResult, RejectReason,
};
use sqeval::stats::{
    self, attach_conditions, compare_runs_ranked, fit_ovrl_regression, predict_ovrl, rank_transform,
    write_scores_csv, ConditionScore,
};

use crate::files::{ensure_dir, load_clip_map, load_votes, print_json, read_json, require_file, write_json};

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn gen_refcond(manifest: &Path, out: &Path, json: bool) -> Result<()> {
    require_file(manifest)?;
    let entries: Vec<ManifestEntry> = read_json(manifest)?;
    let input_dir = manifest.parent().unwrap_or(Path::new("."));
    let mut seen = HashSet::new();
    for e in &entries {
        let target = resolve(out, &e.output_path);
        if !seen.insert(target.clone()) {
            bail!("output {} appears more than once in the manifest", target.display());
        }
        require_file(&resolve(input_dir, &e.speech_path))?;
        if let Some(n) = &e.noise_path {
            require_file(&resolve(input_dir, n))?;
        }
    }
    ensure_dir(out)?;
    for target in &seen {
        if let Some(parent) = target.parent() {
            ensure_dir(parent)?;
        }
    }

    let results: Vec<_> = entries.par_iter().map(|e| process_entry(e, input_dir, out)).collect();
    let failures: Vec<_> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    if !failures.is_empty() {
        for f in &failures {
            log::error!("{f}");
        }
        for e in &entries {
            let target = resolve(out, &e.output_path);
            if target.exists() {
                let _ = fs::remove_file(&target);
            }
        }
        bail!("{} of {} entries failed; outputs removed (first: {})", failures.len(), entries.len(), failures[0]);
    }
    let generated: Vec<GeneratedEntry> = results.into_iter().map(|r| r.expect("checked above")).collect();
    write_json(&out.join("manifest.json"), &generated)?;

    if json {
        print_json(&generated)?;
    } else {
        println!("{:<8} {:>14} {:>10}  output", "cond", "noise_gain_db", "post_scale");
        for g in &generated {
            let gain = g.applied_noise_gain_db.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            println!(
                "{:<8} {:>14} {:>10.4}  {}",
                g.entry.condition_id,
                gain,
                g.post_mix_scale,
                g.entry.output_path.display()
            );
        }
        println!("{} files written to {}", generated.len(), out.display());
    }
    Ok(())
}

pub struct PlanOverrides {
    pub seed: Option<u64>,
    pub task_size: Option<usize>,
    pub target_votes: Option<usize>,
}

#[derive(Serialize)]
struct PlanFile<'a> {
    campaign_id: &'a str,
    tasks: Vec<TaskPayload>,
}

pub fn create_campaign(config: &Path, clips: &Path, out: &Path, overrides: PlanOverrides, json: bool) -> Result<()> {
    require_file(config)?;
    require_file(clips)?;
    let mut cfg: CampaignConfig = read_json(config)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(k) = overrides.task_size {
        cfg.task_size = k;
    }
    if let Some(v) = overrides.target_votes {
        cfg.target_votes_per_clip = v;
    }
    let clips: Vec<Stimulus> = read_json(clips)?;
    let tasks = plan_campaign(&clips, &cfg)?;
    let key = cfg.answer_key(&tasks);

    ensure_dir(out)?;
    let plan = PlanFile {
        campaign_id: &cfg.campaign_id,
        tasks: tasks.iter().map(|t| t.payload()).collect(),
    };
    write_json(&out.join("plan.json"), &plan)?;
    write_json(&out.join("answer_key.json"), &key)?;

    let mut membership: HashMap<&str, usize> = HashMap::new();
    for t in &tasks {
        for c in t.rating_clips() {
            *membership.entry(&c.clip_id).or_default() += 1;
        }
    }
    let min_votes = membership.values().copied().min().unwrap_or(0);
    if json {
        print_json(&serde_json::json!({
            "campaign_id": cfg.campaign_id,
            "tasks": tasks.len(),
            "rating_clips": clips.len(),
            "task_size": cfg.task_size,
            "min_votes_per_clip": min_votes,
        }))?;
    } else {
        println!(
            "{}: {} tasks of {} ratings + 2 controls over {} clips (min {} votes per clip)",
            cfg.campaign_id,
            tasks.len(),
            cfg.task_size,
            clips.len(),
            min_votes
        );
    }
    Ok(())
}

pub fn screen(votes: &Path, answer_key: &Path, qualifications: &Path, out: &Path, json: bool) -> Result<()> {
    for p in [votes, answer_key, qualifications] {
        require_file(p)?;
    }
    let votes = load_votes(votes)?;
    let key = read_json(answer_key)?;
    let records: Vec<QualificationRecord> = read_json(qualifications)?;
    let quals: HashMap<String, QualificationResult> = records
        .iter()
        .map(|r| {
            QualificationResult::evaluate(r)
                .map(|q| (q.worker_id.clone(), q))
                .with_context(|| format!("qualification of {}", r.worker_id))
        })
        .collect::<Result<_>>()?;

    let verdicts = screen_votes(&votes, &key, &quals);
    let reliable = filter_reliable(&votes, &verdicts, &key);
    ensure_dir(out)?;
    write_json(&out.join("verdicts.json"), &verdicts)?;
    let file = File::create(out.join("reliable_votes.csv")).context("creating reliable_votes.csv")?;
    write_votes(BufWriter::new(file), &reliable)?;

    let accepted = verdicts.iter().filter(|v| v.accepted).count();
    let mut reasons: BTreeMap<RejectReason, usize> = BTreeMap::new();
    for r in verdicts.iter().flat_map(|v| &v.reasons) {
        *reasons.entry(*r).or_default() += 1;
    }
    if json {
        print_json(&serde_json::json!({
            "submissions": verdicts.len(),
            "accepted": accepted,
            "rejected": verdicts.len() - accepted,
            "reliable_votes": reliable.len(),
            "reasons": reasons,
        }))?;
    } else {
        println!("{accepted} of {} submissions accepted, {} reliable votes", verdicts.len(), reliable.len());
        for (reason, n) in reasons {
            println!("  {:<24} {n}", serde_json::to_value(reason)?.as_str().unwrap_or_default());
        }
    }
    Ok(())
}

fn print_scores(scores: &[ConditionScore]) {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>6} {:>6} {:>6} {:>5}",
        "condition", "SIG", "BAK", "OVRL", "dSIG", "dBAK", "dOVRL", "n"
    );
    for s in scores {
        let cell = |scale| {
            let st = s.get(scale);
            format!("{:.2}±{}", st.mos, fmt(st.ci95))
        };
        println!(
            "{:<12} {:>12} {:>12} {:>12} {:>6} {:>6} {:>6} {:>5}",
            s.condition_id,
            cell(Scale::Sig),
            cell(Scale::Bak),
            cell(Scale::Ovrl),
            fmt(s.sig.dmos),
            fmt(s.bak.dmos),
            fmt(s.ovrl.dmos),
            s.ovrl.n
        );
    }
}

pub fn aggregate(votes: &Path, clips: &Path, baseline: Option<&str>, out: &Path, json: bool) -> Result<()> {
    require_file(votes)?;
    require_file(clips)?;
    let votes = load_votes(votes)?;
    if votes.is_empty() {
        bail!("no reliable votes to aggregate");
    }
    let clip_map = load_clip_map(clips)?;
    let scores = stats::aggregate(&votes, &clip_map, baseline)?;
    ensure_dir(out)?;
    write_json(&out.join("scores.json"), &scores)?;
    let file = File::create(out.join("scores.csv")).context("creating scores.csv")?;
    write_scores_csv(BufWriter::new(file), &scores)?;
    if json {
        print_json(&scores)?;
    } else {
        print_scores(&scores);
    }
    Ok(())
}

#[derive(Serialize)]
struct Prediction {
    condition: String,
    sig: f64,
    bak: f64,
    observed_ovrl: f64,
    predicted_ovrl: f64,
}

#[derive(Serialize)]
struct Analysis {
    fit: stats::RegressionFit,
    predictions: Vec<Prediction>,
}

pub fn analyze(scores: &Path, out: Option<&Path>, json: bool) -> Result<()> {
    require_file(scores)?;
    let scores: Vec<ConditionScore> = read_json(scores)?;
    let fit = fit_ovrl_regression(&scores)?;
    let predictions: Vec<Prediction> = scores
        .iter()
        .map(|s| Prediction {
            condition: s.condition_id.clone(),
            sig: s.mos(Scale::Sig),
            bak: s.mos(Scale::Bak),
            observed_ovrl: s.mos(Scale::Ovrl),
            predicted_ovrl: predict_ovrl(&fit.model, s.mos(Scale::Sig), s.mos(Scale::Bak)),
        })
        .collect();
    let analysis = Analysis { fit, predictions };
    if let Some(out) = out {
        ensure_dir(out)?;
        write_json(&out.join("analysis.json"), &analysis)?;
    }
    if json {
        return print_json(&analysis);
    }
    let m = &analysis.fit.model;
    println!(
        "OVRL = {:.3} + {:.3} SIG + {:.3} BAK  (adj R2 {:.3}, rho {:.3}, n {}, SIG/BAK {:.2})",
        m.intercept,
        m.coef_sig,
        m.coef_bak,
        analysis.fit.adjusted_r2,
        analysis.fit.pearson_rho,
        analysis.fit.n,
        m.sig_bak_ratio()
    );
    println!("{:<12} {:>6} {:>6} {:>9} {:>9}", "condition", "SIG", "BAK", "observed", "predicted");
    for p in &analysis.predictions {
        println!(
            "{:<12} {:>6.2} {:>6.2} {:>9.2} {:>9.2}",
            p.condition, p.sig, p.bak, p.observed_ovrl, p.predicted_ovrl
        );
    }
    Ok(())
}

pub fn compare_runs(
    a: &Path,
    b: &Path,
    votes: Option<(PathBuf, PathBuf, PathBuf)>,
    out: Option<&Path>,
    json: bool,
) -> Result<()> {
    require_file(a)?;
    require_file(b)?;
    let scores_a: Vec<ConditionScore> = read_json(a)?;
    let scores_b: Vec<ConditionScore> = read_json(b)?;
    let report = match votes {
        None => stats::compare_runs(&scores_a, &scores_b)?,
        Some((va, vb, clips)) => {
            let clip_map = load_clip_map(&clips)?;
            let ranked_a = rank_transform(&attach_conditions(&load_votes(&va)?, &clip_map)?);
            let ranked_b = rank_transform(&attach_conditions(&load_votes(&vb)?, &clip_map)?);
            compare_runs_ranked(&scores_a, &scores_b, &ranked_a, &ranked_b)?
        }
    };
    if let Some(out) = out {
        ensure_dir(out)?;
        write_json(&out.join("comparison.json"), &report)?;
    }
    if json {
        return print_json(&report);
    }
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    println!(
        "{:<6} {:>7} {:>7} {:>9} {:>7} {:>7} {:>7} {:>4}",
        "scale", "PCC", "SRCC", "SRCC(rt)", "RMSE", "CI a", "CI b", "n"
    );
    for (scale, c) in &report.scales {
        println!(
            "{:<6} {:>7.3} {:>7.3} {:>9} {:>7.3} {:>7} {:>7} {:>4}",
            scale.name(),
            c.pcc,
            c.srcc,
            fmt(c.srcc_rank_transformed),
            c.rmse,
            fmt(c.average_ci_a),
            fmt(c.average_ci_b),
            c.n_conditions
        );
    }
    Ok(())
}
