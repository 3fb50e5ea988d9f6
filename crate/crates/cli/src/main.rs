mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Reference-condition generation, campaign planning, screening and analysis
/// for P.835 crowdsourced listening tests.
#[derive(Debug, Parser)]
#[command(name = "sqeval", version)]
struct Cli {
    /// Print machine-readable JSON to stdout instead of tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render the reference conditions listed in a manifest to WAV files.
    GenRefcond {
        /// JSON list of {speech_path, noise_path?, condition_id, output_path}.
        /// Relative inputs resolve against the manifest's directory.
        manifest: PathBuf,
        /// Output directory; also receives the augmented manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pack rating clips into tasks and write plan.json and answer_key.json.
    CreateCampaign {
        /// Campaign configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// JSON list of rating stimuli.
        #[arg(long)]
        clips: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Rating clips per task (config default 10).
        #[arg(long)]
        task_size: Option<usize>,
        /// Overrides the configured number of votes per clip.
        #[arg(long)]
        target_votes: Option<usize>,
    },
    /// Screen submitted votes and write verdicts.json and reliable_votes.csv.
    Screen {
        /// Votes CSV.
        votes: PathBuf,
        #[arg(long)]
        answer_key: PathBuf,
        /// JSON list of qualification records; workers missing here are unqualified.
        #[arg(long)]
        qualifications: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-condition MOS, CI and DMOS from reliable votes.
    Aggregate {
        /// Reliable votes CSV.
        votes: PathBuf,
        /// JSON list of stimuli mapping clip ids to conditions.
        #[arg(long)]
        clips: PathBuf,
        /// Condition DMOS is computed against.
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit OVRL on SIG and BAK and tabulate predicted against observed OVRL.
    Analyze {
        /// scores.json written by `aggregate`.
        scores: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation and error between two runs over the same conditions.
    CompareRuns {
        a: PathBuf,
        b: PathBuf,
        /// Reliable votes of run A, enabling the rank-transformed SRCC.
        #[arg(long, requires_all = ["votes_b", "clips"])]
        votes_a: Option<PathBuf>,
        #[arg(long, requires_all = ["votes_a", "clips"])]
        votes_b: Option<PathBuf>,
        #[arg(long)]
        clips: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SQ_EVAL_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenRefcond { manifest, out } => commands::gen_refcond(&manifest, &out, cli.json),
        Command::CreateCampaign {
            config,
            clips,
            out,
            seed,
            task_size,
            target_votes,
        } => commands::create_campaign(
            &config,
            &clips,
            &out,
            commands::PlanOverrides {
                seed,
                task_size,
                target_votes,
            },
            cli.json,
        ),
        Command::Screen {
            votes,
            answer_key,
            qualifications,
            out,
        } => commands::screen(&votes, &answer_key, &qualifications, &out, cli.json),
        Command::Aggregate {
            votes,
            clips,
            baseline,
            out,
        } => commands::aggregate(&votes, &clips, baseline.as_deref(), &out, cli.json),
        Command::Analyze { scores, out } => commands::analyze(&scores, out.as_deref(), cli.json),
        Command::CompareRuns {
            a,
            b,
            votes_a,
            votes_b,
            clips,
            out,
        } => {
            let votes = votes_a.zip(votes_b).zip(clips).map(|((a, b), c)| (a, b, c));
            commands::compare_runs(&a, &b, votes, out.as_deref(), cli.json)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
