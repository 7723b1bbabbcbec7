//! `turnlab` — turn-taking analysis for dyadic conversations.
//!
//! Every analysis stage is independently invokable; `report` chains them
//! all. Exit codes: 0 success, 1 input error, 2 infeasible configuration,
//! 3 internal invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use turnlab::error::{Error, Result};
use turnlab::fixture::{write_fixture, FixtureSpec};
use turnlab::io::{
    load_segments_csv, read_wav_mono, write_exchanges_csv, write_feature_csv, write_segments_csv,
};
use turnlab::pipeline::{
    corpus_feature_names, load_classified_sessions, run_pipeline, session_sync_series,
    write_curve_files, PipelineConfig,
};
use turnlab::segmentation::{energy_vad, merge_to_ipus};
use turnlab::stats::{feature_comparison, role_stats, timing_stats};
use turnlab::exchange_census;

#[derive(Parser)]
#[command(
    name = "turnlab",
    version,
    about = "Analyze turn-taking in dyadic conversations: IPU segmentation, \
             exchange classification, timing statistics, onset-aligned \
             feature curves, and interlocutor synchrony."
)]
struct Cli {
    /// JSON settings file: pipeline settings for analysis commands, the
    /// corpus recipe for `fixture`. Omitted fields use defaults.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,

    /// Override the corpus seed of `fixture`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for session-parallel commands (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect speech in mono WAV files with the energy VAD; writes
    /// `<stem>_vad.csv` per input.
    Vad {
        #[arg(required = true)]
        audio: Vec<PathBuf>,
    },
    /// Merge VAD segment CSVs into inter-pausal units; writes
    /// `<stem>_ipus.csv` per input.
    Segment {
        #[arg(required = true)]
        segments: Vec<PathBuf>,
    },
    /// Detect and classify every turn exchange; writes `exchanges.csv`.
    Classify {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
    /// Corpus statistics (exchange census, timing, roles, feature
    /// comparison); writes `report.json` without curve files.
    Stats {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
    /// Sliding-window synchrony series between the interlocutors; writes
    /// one time-series CSV per session, measure, and feature.
    Sync {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
    /// Onset-aligned average feature curves; writes
    /// `curves/<feature>_<type>_<role>.csv`.
    Curves {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
    /// Full pipeline: statistics, curves, synchrony, `report.json`,
    /// `exchanges.csv`.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
    /// Generate a deterministic synthetic corpus with ground-truth labels.
    Fixture,
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|e| {
                Error::InvalidInput(format!("{}: invalid settings: {e}", path.display()))
            })
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into())
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Vad { audio } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            ensure_out(&cli.out)?;
            for input in &audio {
                let (samples, rate) = read_wav_mono(input)?;
                let segments = energy_vad(&samples, rate, &config.vad)
                    .map_err(|e| e.in_stage("vad", input.display().to_string()))?;
                let out = cli.out.join(format!("{}_vad.csv", stem(input)));
                write_segments_csv(&out, &segments)?;
                println!("{}: {} segments -> {}", input.display(), segments.len(), out.display());
            }
        }
        Command::Segment { segments } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            ensure_out(&cli.out)?;
            for input in &segments {
                let raw = load_segments_csv(input)?;
                let ipus = merge_to_ipus(&raw, config.ipu_gap)
                    .map_err(|e| e.in_stage("segment", input.display().to_string()))?;
                let out = cli.out.join(format!("{}_ipus.csv", stem(input)));
                write_segments_csv(&out, &ipus)?;
                println!(
                    "{}: {} segments -> {} IPUs -> {}",
                    input.display(),
                    raw.len(),
                    ipus.len(),
                    out.display()
                );
            }
        }
        Command::Classify { manifests } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            let sessions = load_classified_sessions(&manifests, &config, cli.jobs)?;
            ensure_out(&cli.out)?;
            let out = cli.out.join("exchanges.csv");
            write_exchanges_csv(&out, &sessions)?;
            let n: usize = sessions.iter().map(|s| s.exchanges.len()).sum();
            println!("{} sessions, {} exchanges -> {}", sessions.len(), n, out.display());
        }
        Command::Stats { manifests } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            let sessions = load_classified_sessions(&manifests, &config, cli.jobs)?;
            let census = exchange_census(sessions.iter().map(|s| s.exchanges.as_slice()));
            let timing = timing_stats(&sessions);
            let roles = role_stats(&sessions)?;
            let feature_names = corpus_feature_names(&sessions, &config);
            let comparison = if feature_names.is_empty() {
                None
            } else {
                Some(feature_comparison(&sessions, &feature_names, config.alpha)?)
            };
            ensure_out(&cli.out)?;
            let out = cli.out.join("report.json");
            let report = serde_json::json!({
                "params": config,
                "session_ids": sessions.iter().map(|s| s.session_id.clone()).collect::<Vec<_>>(),
                "census": census,
                "timing": timing,
                "roles": roles,
                "comparison": comparison,
            });
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
            std::fs::write(&out, text + "\n").map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            println!(
                "{} sessions, {} exchanges -> {}",
                sessions.len(),
                census.smooth + census.backchannel + census.interruption,
                out.display()
            );
        }
        Command::Sync { manifests } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            let sessions = load_classified_sessions(&manifests, &config, cli.jobs)?;
            let feature_names = corpus_feature_names(&sessions, &config);
            ensure_out(&cli.out)?;
            let mut written = 0usize;
            for s in &sessions {
                for (measure, series) in session_sync_series(s, &config.sync, &feature_names)? {
                    let out = cli.out.join(format!(
                        "{}_{}_{}.csv",
                        s.session_id, measure, series.feature_name
                    ));
                    write_feature_csv(&out, std::slice::from_ref(&series))?;
                    written += 1;
                }
            }
            println!("{} synchrony series -> {}", written, cli.out.display());
        }
        Command::Curves { manifests } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            let sessions = load_classified_sessions(&manifests, &config, cli.jobs)?;
            let feature_names = corpus_feature_names(&sessions, &config);
            ensure_out(&cli.out)?;
            let files = write_curve_files(&sessions, &feature_names, &config.curves, &cli.out)?;
            for f in &files {
                println!("{}", cli.out.join(f).display());
            }
        }
        Command::Report { manifests } => {
            let config: PipelineConfig = load_config(cli.config.as_deref())?;
            let report = run_pipeline(&manifests, &config, cli.jobs, &cli.out)?;
            println!(
                "{} sessions: {} smooth, {} backchannels, {} interruptions \
                 ({} successful, {} failed) -> {}",
                report.session_ids.len(),
                report.census.smooth,
                report.census.backchannel,
                report.census.interruption,
                report.census.interruption_successful,
                report.census.interruption_failed,
                cli.out.join("report.json").display()
            );
        }
        Command::Fixture => {
            let mut spec: FixtureSpec = load_config(cli.config.as_deref())?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let manifests = write_fixture(&spec, &cli.out)?;
            for m in &manifests {
                println!("{}", m.display());
            }
            println!("{}", cli.out.join("ground_truth.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
