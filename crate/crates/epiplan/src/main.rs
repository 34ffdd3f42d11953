//! Command-line driver for the full experiment: track generation, the three
//! collection/training phases, evaluation, baselines, and the debugging
//! exports (heatmaps and retrieval inspection).
//!
//! Every command resolves its config the same way — `--config` file, else
//! the `EPIPLAN_CONFIG` environment variable, else built-in defaults — then
//! applies `--set key=value` overrides and writes the effective config to
//! the output directory for the record. Commands that continue a run load
//! the database and encoder the previous command saved.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use epiplan::config::RunConfig;
use epiplan::heatmap::{self, HeatmapKind};
use epiplan::inspect::{inspect_state, render_report};
use epiplan::pipeline::{run_baseline, BaselineAgent, Metrics, Session};
use epiplan::sim::generate_track;
use epiplan::storage;
use epiplan::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "epiplan", version, about = "Episodic-memory racing planner")]
struct Cli {
    /// Config file; falls back to $EPIPLAN_CONFIG, then to defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set e=40. Repeatable.
    #[arg(long, value_name = "KEY=VALUE", value_parser = parse_set, global = true)]
    set: Vec<(String, String)>,

    /// Output directory; overrides the config's out_dir.
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the training and evaluation tracks and save them.
    TrackGen,
    /// Phase 1: collect straight-driving episodes into a fresh memory.
    Phase1,
    /// Phase 2: explore around remembered failures. Needs phase 1 output.
    Phase2,
    /// Phase 3: planner-driven training. Needs phase 1 and 2 output.
    Train(TrainArgs),
    /// Evaluate the trained planner on the held-out track.
    Eval,
    /// Evaluate a scripted baseline on the held-out track.
    Baseline(BaselineArgs),
    /// Export a latent-grid heatmap as CSV and PGM.
    ExportHeatmap(HeatmapArgs),
    /// Show what the planner retrieves for one remembered state.
    InspectState(InspectArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Also write every planning decision to traces.txt.
    #[arg(long)]
    traces: bool,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Which baseline to run.
    #[arg(long, value_parser = parse_agent)]
    agent: BaselineAgent,
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    /// What each cell shows.
    #[arg(long, value_parser = parse_kind)]
    kind: HeatmapKind,
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Episode holding the query state.
    #[arg(long)]
    episode: u32,
    /// Step index of the query state within the episode.
    #[arg(long)]
    step: u32,
    /// Comma-separated 1-based ranks to report.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 10, 100])]
    ranks: Vec<usize>,
}

fn parse_set(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn parse_agent(s: &str) -> std::result::Result<BaselineAgent, String> {
    BaselineAgent::from_str(s).ok_or_else(|| format!("unknown agent `{s}` (random, centerline)"))
}

fn parse_kind(s: &str) -> std::result::Result<HeatmapKind, String> {
    HeatmapKind::from_str(s).ok_or_else(|| format!("unknown kind `{s}` (population, value)"))
}

/// The artifact layout inside the output directory.
struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    fn new(cfg: &RunConfig) -> Artifacts {
        Artifacts {
            dir: PathBuf::from(&cfg.out_dir),
        }
    }

    fn config(&self) -> PathBuf {
        self.dir.join("config.txt")
    }

    fn db(&self) -> PathBuf {
        self.dir.join("db.txt")
    }

    fn masks(&self) -> PathBuf {
        self.dir.join("masks.txt")
    }

    fn encoder(&self) -> PathBuf {
        self.dir.join("encoder.txt")
    }

    fn curve(&self) -> PathBuf {
        self.dir.join("curve.csv")
    }

    fn metrics(&self) -> PathBuf {
        self.dir.join("metrics.txt")
    }

    fn traces(&self) -> PathBuf {
        self.dir.join("traces.txt")
    }

    fn track(&self, seed: u64) -> PathBuf {
        self.dir.join(format!("track_{seed}.txt"))
    }

    fn heatmap(&self, kind: HeatmapKind, ext: &str) -> PathBuf {
        self.dir.join(format!("heatmap_{}.{ext}", kind.as_str()))
    }

    fn inspect(&self) -> PathBuf {
        self.dir.join("inspect.txt")
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = if let Some(path) = &cli.config {
        RunConfig::load(path)?
    } else if let Some(path) = std::env::var_os("EPIPLAN_CONFIG") {
        RunConfig::load(Path::new(&path))?
    } else {
        RunConfig::default()
    };
    for (key, value) in &cli.set {
        cfg.set(key, value)?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_session(cfg: &RunConfig, paths: &Artifacts) -> Result<Session> {
    let db = storage::load_db(&paths.db(), &paths.masks())?;
    let encoder = storage::load_encoder(&paths.encoder())?;
    Session::from_parts(cfg.clone(), db, encoder)
}

fn save_session(session: &Session, paths: &Artifacts) -> Result<()> {
    storage::save_db(
        session.db(),
        session.encoder(),
        &paths.db(),
        &paths.masks(),
    )?;
    storage::save_encoder(session.encoder(), &paths.encoder())
}

fn print_metrics(agent: &str, m: &Metrics) {
    println!(
        "{agent} success_rate={} avg_speed_kmh={} episodes={} env_interactions={}",
        m.success_rate, m.avg_speed_kmh, m.episodes, m.env_interactions
    );
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli)?;
    let paths = Artifacts::new(&cfg);
    cfg.save(&paths.config())?;
    match cli.command {
        Command::TrackGen => {
            let params = cfg.track_params();
            for &seed in cfg.train_track_seeds.iter().chain([&cfg.eval_track_seed]) {
                let track = generate_track(seed, &params)?;
                let path = paths.track(seed);
                storage::save_track(&track, &path)?;
                println!(
                    "track seed={seed} length={} -> {}",
                    track.total_length(),
                    path.display()
                );
            }
        }
        Command::Phase1 => {
            let mut session = Session::new(cfg)?;
            session.phase1()?;
            save_session(&session, &paths)?;
            println!(
                "phase1 episodes={} records={}",
                session.db().episodes().len(),
                session.db().total_records()
            );
        }
        Command::Phase2 => {
            let mut session = load_session(&cfg, &paths)?;
            session.phase2()?;
            save_session(&session, &paths)?;
            println!(
                "phase2 episodes={} records={}",
                session.db().episodes().len(),
                session.db().total_records()
            );
        }
        Command::Train(args) => {
            let mut session = load_session(&cfg, &paths)?;
            let mut trace_lines = Vec::new();
            let curve = if args.traces {
                let mut on_decision = |ep: u32, step: u32, d: &epiplan::planner::Decision| {
                    trace_lines.push(storage::format_decision(ep, step, d));
                };
                session.train(Some(&mut on_decision))?
            } else {
                session.train(None)?
            };
            save_session(&session, &paths)?;
            storage::write_curve(&paths.curve(), &curve)?;
            if args.traces {
                storage::write_traces(&paths.traces(), &trace_lines)?;
            }
            let final_pct = curve.last().map_or(0.0, |c| c.success_pct);
            println!(
                "train episodes={} final_success_pct={final_pct}",
                curve.len()
            );
        }
        Command::Eval => {
            let session = load_session(&cfg, &paths)?;
            let metrics = session.evaluate()?;
            storage::append_metrics(&paths.metrics(), "planner", &metrics)?;
            print_metrics("planner", &metrics);
        }
        Command::Baseline(args) => {
            let metrics = run_baseline(&cfg, args.agent)?;
            storage::append_metrics(&paths.metrics(), args.agent.as_str(), &metrics)?;
            print_metrics(args.agent.as_str(), &metrics);
        }
        Command::ExportHeatmap(args) => {
            let session = load_session(&cfg, &paths)?;
            let csv = paths.heatmap(args.kind, "csv");
            let pgm = paths.heatmap(args.kind, "pgm");
            heatmap::write_csv(session.grid(), args.kind, &csv)?;
            heatmap::write_pgm(session.grid(), args.kind, &pgm)?;
            println!("heatmap {} -> {}, {}", args.kind.as_str(), csv.display(), pgm.display());
        }
        Command::InspectState(args) => {
            if args.ranks.is_empty() {
                return Err(Error::InvalidConfig(
                    "inspect-state needs at least one rank".into(),
                ));
            }
            let session = load_session(&cfg, &paths)?;
            let report = inspect_state(
                session.db(),
                session.grid(),
                session.encoder(),
                args.episode,
                args.step,
                &args.ranks,
                cfg.p,
            )?;
            let text = render_report(&report);
            storage::atomic_write(&paths.inspect(), text.as_bytes())?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}
