use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tarpitnav::detector::{extract_tarpits, read_trace, TarpitParams};
use tarpitnav::device::SimApp;
use tarpitnav::engine::{
    auc, heuristic_success_table, percent_increase, run_session, set_union_coverage, CoverageSeries,
    SessionConfig, SessionReport,
};
use tarpitnav::features::{screen_document, DefaultEmbedder, Embedder, TfidfVectorizer};
use tarpitnav::matcher::Lexicon;
use tarpitnav::motifs::{cluster_screens, load_manifest, train_with, write_manifest, FusedModel, TrainConfig};
use tarpitnav::navigator::FormValueStore;
use tarpitnav::silhouette::{render, DEFAULT_CANVAS};
use tarpitnav::snapshot::UiSnapshot;
use tarpitnav::synth::synth_dataset;

#[derive(Parser)]
#[command(name = "tarpitnav", version, about = "Detect and escape UI exploration tarpits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a hierarchy dump as a silhouette PPM.
    Silhouette {
        hierarchy: PathBuf,
        #[arg(long)]
        regions: Option<PathBuf>,
        #[arg(long, value_parser = parse_canvas, default_value = "144x256")]
        canvas: (u32, u32),
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Cluster screens or generate a synthetic labeled dataset
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Train the fused classifier and print the held-out evaluation.
    Train {
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print motifs ranked by probability, most likely first.
    Classify {
        hierarchy: PathBuf,
        #[arg(long)]
        regions: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the tarpit screens of a recorded trace, one per line.
    ExtractTarpits {
        trace: PathBuf,
        #[arg(long, default_value_t = 5)]
        min_actions: usize,
        #[arg(long, default_value_t = 10_000)]
        min_ms: u64,
        #[arg(long, default_value_t = 200)]
        top_k: usize,
    },
    /// Explore a simulated app and write a session report.
    Run(RunArgs),
    /// Coverage metrics over session reports
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Cluster screens by embedding and report the elbow choice of k.
    Cluster {
        manifest: PathBuf,
        #[arg(long, default_value_t = 2)]
        kmin: usize,
        #[arg(long, default_value_t = 30)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a synthetic labeled dataset and its manifest.
    Synth {
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    app: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    store: PathBuf,
    /// Defaults to the built-in lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long)]
    time_budget_ms: Option<u64>,
    #[arg(long)]
    no_navigator: bool,
    /// Keep the navigator off until this logical time.
    #[arg(long, default_value_t = 0)]
    navigator_after: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Area under the cumulative coverage curve.
    Auc {
        reports: Vec<PathBuf>,
        /// Explicit comma-separated series R_0,R_1,... instead of reports.
        #[arg(long, value_delimiter = ',', conflicts_with = "reports")]
        series: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
    /// Set-union coverage of several runs of one app.
    Union {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Percent increase of new over base set-union coverage.
    Compare {
        #[arg(long, required = true, num_args = 1..)]
        base: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        new: Vec<PathBuf>,
    },
    /// Per-heuristic pass rates.
    Heuristics {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn parse_canvas(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("canvas dimensions must be positive".into());
    }
    Ok((w, h))
}

struct Failure {
    kind: &'static str,
    message: String,
}

fn fail<E: Display>(kind: &'static str) -> impl FnOnce(E) -> Failure {
    move |e| Failure {
        kind,
        message: e.to_string(),
    }
}

fn io_fail(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(io_fail(path))
}

fn load_reports(paths: &[PathBuf]) -> Result<Vec<SessionReport>, Failure> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_fail(p))?;
            SessionReport::from_json(&text).map_err(|e| Failure {
                kind: "report",
                message: format!("{}: {e}", p.display()),
            })
        })
        .collect()
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    let stdout_fail = fail::<std::io::Error>("io");
    let mut emit = |s: String| writeln!(out, "{s}").map_err(fail("io"));
    match cli.command {
        Command::Silhouette {
            hierarchy,
            regions,
            canvas,
            output,
        } => {
            let snap = UiSnapshot::load(&hierarchy, regions.as_deref()).map_err(fail("snapshot"))?;
            write_file(&output, &render(&snap, canvas).to_ppm())?;
        }
        Command::Dataset(DatasetCommand::Cluster {
            manifest,
            kmin,
            kmax,
            seed,
        }) => {
            let screens = load_manifest(&manifest).map_err(fail("dataset"))?;
            let docs: Vec<_> = screens.iter().map(|s| screen_document(&s.snapshot)).collect();
            let embedder = DefaultEmbedder {
                canvas: DEFAULT_CANVAS,
                grid: TrainConfig::default().grid,
                vectorizer: TfidfVectorizer::fit(&docs).map_err(fail("features"))?,
            };
            let embeddings = screens
                .iter()
                .map(|s| embedder.embed(&s.snapshot))
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail("features"))?;
            let clustering = cluster_screens(&embeddings, (kmin, kmax), seed).map_err(fail("cluster"))?;
            let assignments: serde_json::Map<_, _> = screens
                .iter()
                .zip(&clustering.fit.assignments)
                .map(|(s, &c)| (s.source_id.clone(), json!(c)))
                .collect();
            emit(
                serde_json::to_string_pretty(&json!({
                    "chosen_k": clustering.chosen_k,
                    "inertia_curve": clustering.inertia_curve,
                    "assignments": assignments,
                }))
                .expect("json"),
            )?;
        }
        Command::Dataset(DatasetCommand::Synth {
            per_class,
            seed,
            output,
        }) => {
            let path = write_manifest(&output, &synth_dataset(per_class, seed)).map_err(fail("dataset"))?;
            emit(path.display().to_string())?;
        }
        Command::Train {
            manifest,
            split,
            seed,
            output,
        } => {
            let screens = load_manifest(&manifest).map_err(fail("dataset"))?;
            let (model, report) = train_with(&screens, split, seed, &TrainConfig::default()).map_err(fail("train"))?;
            model.save(&output).map_err(fail("model"))?;
            emit(serde_json::to_string_pretty(&report).expect("json"))?;
        }
        Command::Classify {
            hierarchy,
            regions,
            model,
        } => {
            let model = FusedModel::load(&model).map_err(fail("model"))?;
            let snap = UiSnapshot::load(&hierarchy, regions.as_deref()).map_err(fail("snapshot"))?;
            for (label, p) in &model.predict(&snap).ranked {
                emit(format!("{label}\t{p:.6}"))?;
            }
        }
        Command::ExtractTarpits {
            trace,
            min_actions,
            min_ms,
            top_k,
        } => {
            let file = fs::File::open(&trace).map_err(io_fail(&trace))?;
            let steps = read_trace(file).map_err(fail("trace"))?;
            let params = TarpitParams {
                min_actions,
                min_ms,
                top_k,
            };
            for id in extract_tarpits(&steps, params) {
                emit(id)?;
            }
        }
        Command::Run(args) => {
            let app = SimApp::load(&args.app).map_err(fail("spec"))?;
            let model = FusedModel::load(&args.model).map_err(fail("model"))?;
            let store = FormValueStore::load(&args.store).map_err(fail("store"))?;
            let lexicon = match &args.lexicon {
                Some(p) => Lexicon::load(p).map_err(fail("lexicon"))?,
                None => Lexicon::builtin(),
            };
            let config = SessionConfig {
                seed: args.seed,
                action_budget: args.budget,
                time_budget_ms: args.time_budget_ms,
                navigator_enabled: !args.no_navigator,
                navigator_after_ms: args.navigator_after,
                ..SessionConfig::default()
            };
            let report = run_session(&app, &model, &store, &lexicon, &config).map_err(fail("session"))?;
            match args.output {
                Some(path) => write_file(&path, report.to_json().as_bytes())?,
                None => write!(out, "{}", report.to_json()).map_err(stdout_fail)?,
            }
        }
        Command::Report(cmd) => match cmd {
            ReportCommand::Auc { reports, series, dt } => {
                let series = match series {
                    Some(values) => CoverageSeries { values, dt },
                    None => {
                        let reports = load_reports(&reports)?;
                        CoverageSeries::cumulative(&reports, dt).map_err(fail("report"))?
                    }
                };
                emit(format!("{:.1}", auc(&series).map_err(fail("report"))?))?;
            }
            ReportCommand::Union { reports } => {
                let reports = load_reports(&reports)?;
                emit(set_union_coverage(&reports).map_err(fail("report"))?.to_string())?;
            }
            ReportCommand::Compare { base, new } => {
                let base = set_union_coverage(&load_reports(&base)?).map_err(fail("report"))?;
                let new = set_union_coverage(&load_reports(&new)?).map_err(fail("report"))?;
                let inc = percent_increase(base as f64, new as f64).map_err(fail("report"))?;
                emit(
                    serde_json::to_string_pretty(&json!({
                        "base": base,
                        "new": new,
                        "percent_increase": inc,
                    }))
                    .expect("json"),
                )?;
            }
            ReportCommand::Heuristics { reports } => {
                let reports = load_reports(&reports)?;
                write!(out, "{}", heuristic_success_table(&reports).render()).map_err(fail("io"))?;
            }
        },
    }
    Ok(())
}

fn error_record(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_record("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            error_record(f.kind, &f.message);
            ExitCode::from(1)
        }
    }
}
