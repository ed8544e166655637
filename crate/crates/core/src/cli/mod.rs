//! Command-line interface: argument parsing, configuration layering and the
//! six commands. Artifacts go to files under `--out` or to stdout; progress
//! messages go to stderr.

mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{DataSource, RawConfig, RunConfig};

use crate::error::{Error, Result};
use crate::evaluate::{friedman_nemenyi, hypersphere_volume, run_cv, CvConfig, Method, ScoreTable};
use crate::graphbuild::{make_folds, Graph, Label};
use crate::model::{classify, EncoderConfig, TrainedModel};
use crate::train::{read_snapshots_csv, train, train_ocgnn, write_file, TrainConfig, TrainTrace};

#[derive(Debug, Parser)]
#[command(name = "olga", version, about = "One-class graph autoencoder toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for cross-validation folds (0 = all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Override a configuration key, e.g. --set k=1,2
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the k-NN graph and write its edge list
    BuildGraph {
        /// Feature CSV or synth:<kind>:<n>:<m>
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Cross-validate a method over the configured grid
    Cv {
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        method: Option<String>,
    },
    /// Train one grid cell on one fold and save the model
    Train {
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        fold: Option<usize>,
    },
    /// Friedman test with Nemenyi critical difference over a score table
    Rank {
        /// CSV with a `dataset` column followed by one column per method
        scores: Option<PathBuf>,
    },
    /// Tabulate hypersphere volume against dimension
    Volume {
        /// Comma-separated radii
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Also write volume.svg
        #[arg(long)]
        svg: bool,
    },
    /// Render snapshot CSVs as per-epoch scatter plots
    ExportEmbeddings {
        /// Directory holding snapshots.csv (and optionally model.ckpt)
        trace_dir: Option<PathBuf>,
        /// Radius to draw when no model.ckpt is present
        #[arg(long)]
        radius: Option<f64>,
    },
}

/// Parses arguments and runs the command. Returns the process exit code:
/// 0 on success, 1 for usage or input errors, 2 for runtime failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}

fn log(message: impl AsRef<str>) {
    eprintln!("[olga] {}", message.as_ref());
}

/// Layers the configuration file, `--set` overrides and dedicated flags.
fn resolve(common: &Common, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut raw = match &common.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for pair in &common.overrides {
        raw.set_pair(pair)?;
    }
    let common_flags = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("jobs", common.jobs.map(|v| v.to_string())),
    ];
    for (key, value) in common_flags.iter().chain(flags) {
        if let Some(value) = value {
            raw.set(key, value)?;
        }
    }
    RunConfig::from_raw(&raw)
}

pub fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match cli.command {
        Command::BuildGraph { dataset, k } => {
            let config = resolve(c, &[("dataset", dataset), ("k", k.map(|k| k.to_string()))])?;
            cmd_build_graph(&config)
        }
        Command::Cv { dataset, method } => cmd_cv(&resolve(c, &[("dataset", dataset), ("method", method)])?),
        Command::Train { dataset, method, fold } => {
            let flags = [
                ("dataset", dataset),
                ("method", method),
                ("fold", fold.map(|f| f.to_string())),
            ];
            cmd_train(&resolve(c, &flags)?)
        }
        Command::Rank { scores } => {
            let config = resolve(c, &[("scores", scores.map(|p| p.display().to_string()))])?;
            cmd_rank(&config)
        }
        Command::Volume { radii, n_max, svg } => {
            let flags = [
                ("radii", radii),
                ("n_max", n_max.map(|n| n.to_string())),
                ("svg", svg.then(|| "true".to_string())),
            ];
            cmd_volume(&resolve(c, &flags)?)
        }
        Command::ExportEmbeddings { trace_dir, radius } => {
            let flags = [
                ("trace_dir", trace_dir.map(|p| p.display().to_string())),
                ("radius", radius.map(|r| r.to_string())),
            ];
            cmd_export_embeddings(&resolve(c, &flags)?)
        }
    }
}

fn out_dir(config: &RunConfig) -> Result<&Path> {
    let dir = config.out.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn single<T: Copy>(name: &str, values: &[T]) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::param(format!(
            "`{name}` must have exactly one value for this command"
        ))),
    }
}

pub fn cmd_build_graph(config: &RunConfig) -> Result<()> {
    let dataset = config.dataset()?;
    let k = single("k", &config.grid.k)?;
    let graph = Graph::from_features(dataset.features(), k, config.similarity)?;
    let edges = graph.edges();
    let mut csv = String::from("src,dst\n");
    for (a, b) in &edges {
        let _ = writeln!(csv, "{a},{b}");
    }
    let path = out_dir(config)?.join("edges.csv");
    write_file(&path, csv.as_bytes())?;
    println!("nodes={} edges={} k={}", graph.len(), edges.len(), k);
    log(format!("wrote {}", path.display()));
    Ok(())
}

pub fn cmd_cv(config: &RunConfig) -> Result<()> {
    let dataset = config.dataset()?;
    let cv = CvConfig {
        method: config.method,
        grid: config.grid.clone(),
        n_folds: config.folds,
        seed: config.seed,
        max_epochs: config.max_epochs,
        similarity: config.similarity,
        snapshot_every: config.snapshot_every,
        jobs: config.jobs,
    };
    let cells = cv.grid.cells(cv.method)?.len();
    log(format!(
        "cross-validating {} on {} ({} nodes): {} folds x {} grid cells",
        cv.method,
        dataset.name(),
        dataset.len(),
        cv.n_folds,
        cells
    ));
    let outcome = run_cv(&dataset, &cv)?;
    let dir = out_dir(config)?;
    for (i, (model, trace)) in outcome.models.iter().zip(&outcome.traces).enumerate() {
        let fold_dir = dir.join(format!("fold-{i:02}"));
        std::fs::create_dir_all(&fold_dir).map_err(|e| Error::io(&fold_dir, e))?;
        write_run_artifacts(&fold_dir, model, trace)?;
    }
    write_json(&dir.join("report.json"), &outcome.report)?;
    let r = &outcome.report;
    println!(
        "{} {}: f1-macro {:.3} ± {:.3} over {} folds",
        r.method,
        r.dataset,
        r.mean,
        r.std,
        r.folds.len()
    );
    log(format!("wrote {}", dir.join("report.json").display()));
    Ok(())
}

fn write_run_artifacts(dir: &Path, model: &TrainedModel, trace: &TrainTrace) -> Result<()> {
    model.save(&dir.join("model.ckpt"))?;
    trace.write_csv(&dir.join("trace.csv"))?;
    if !trace.snapshots.is_empty() {
        trace.write_snapshots_csv(&dir.join("snapshots.csv"))?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct TrainSummary {
    method: Method,
    dataset: String,
    fold: usize,
    k: usize,
    learning_rate: f64,
    patience: usize,
    embedding_dim: usize,
    best_epoch: usize,
    epochs_run: usize,
    val_f1: f64,
    test_f1: f64,
    radius: f64,
}

pub fn cmd_train(config: &RunConfig) -> Result<()> {
    let dataset = config.dataset()?;
    let g = &config.grid;
    let k = single("k", &g.k)?;
    let embedding_dim = single("embedding_dim", &g.embedding_dim)?;
    let train_config = TrainConfig {
        max_epochs: config.max_epochs,
        patience: single("patience", &g.patience)?,
        learning_rate: single("learning_rate", &g.learning_rate)?,
        seed: config.seed.wrapping_add(config.fold as u64),
        snapshot_every: config.snapshot_every,
    };
    let folds = make_folds(&dataset, config.folds, config.seed)?;
    let fold = &folds[config.fold];
    let graph = Graph::from_features(dataset.features(), k, config.similarity)?;
    let input = dataset.features().cols();
    log(format!(
        "training {} on {} fold {}",
        config.method,
        dataset.name(),
        config.fold
    ));
    let (model, trace) = match config.method {
        Method::Olga => {
            let encoder = EncoderConfig::olga(input, &g.hidden, embedding_dim)?;
            train(
                &graph,
                &dataset,
                fold,
                &encoder,
                single("radius", &g.radius)?,
                &train_config,
            )?
        }
        Method::OcgnnGcn => {
            let encoder = EncoderConfig::ocgnn(input, &g.hidden, embedding_dim)?;
            let nu = single("nu", &g.nu)?;
            let wd = single("weight_decay", &g.weight_decay)?;
            train_ocgnn(&graph, &dataset, fold, &encoder, &train_config, nu, wd)?
        }
    };

    let partitioned = graph.with_interest(&fold.train_interest)?;
    let predicted = classify(&model.embed(&partitioned, dataset.features())?, &model.sphere)?;
    let test = fold.test_nodes();
    let pred: Vec<Label> = test.iter().map(|&i| predicted[i]).collect();
    let truth: Vec<Label> = test.iter().map(|&i| dataset.labels()[i]).collect();
    let summary = TrainSummary {
        method: config.method,
        dataset: dataset.name().to_string(),
        fold: config.fold,
        k,
        learning_rate: train_config.learning_rate,
        patience: train_config.patience,
        embedding_dim,
        best_epoch: trace.best_epoch,
        epochs_run: trace.epochs.len(),
        val_f1: trace.best().map_or(f64::NAN, |r| r.val_f1),
        test_f1: crate::evaluate::f1_macro(&pred, &truth)?,
        radius: model.sphere.radius,
    };

    let dir = out_dir(config)?;
    write_run_artifacts(dir, &model, &trace)?;
    write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "best epoch {} of {}: val f1-macro {:.3}, test f1-macro {:.3}",
        summary.best_epoch, summary.epochs_run, summary.val_f1, summary.test_f1
    );
    Ok(())
}

pub fn cmd_rank(config: &RunConfig) -> Result<()> {
    let path = config
        .scores
        .as_ref()
        .ok_or_else(|| Error::param("no score table given (pass a path or set `scores`)"))?;
    let table = ScoreTable::from_csv(path)?;
    let result = friedman_nemenyi(&table)?;
    let dir = out_dir(config)?;
    write_json(&dir.join("ranks.json"), &result)?;
    print!("{}", result.summary());
    log(format!("wrote {}", dir.join("ranks.json").display()));
    Ok(())
}

pub fn cmd_volume(config: &RunConfig) -> Result<()> {
    let mut csv = String::from("n,r,volume\n");
    let mut series = Vec::new();
    for &r in &config.radii {
        let mut points = Vec::new();
        for n in 1..=config.n_max {
            let v = hypersphere_volume(n, r)?;
            let _ = writeln!(csv, "{n},{r:?},{v:e}");
            points.push((n as f64, v));
        }
        series.push((format!("r = {r}"), points));
    }
    let dir = out_dir(config)?;
    write_file(&dir.join("volume.csv"), csv.as_bytes())?;
    if config.svg {
        let chart = svg::line_chart("Hypersphere volume by dimension", "dimension n", "volume", &series);
        write_file(&dir.join("volume.svg"), chart.as_bytes())?;
    }
    println!(
        "{} rows for {} radii, n = 1..{}",
        config.radii.len() * config.n_max,
        config.radii.len(),
        config.n_max
    );
    Ok(())
}

pub fn cmd_export_embeddings(config: &RunConfig) -> Result<()> {
    let trace_dir = config.trace_dir.clone().unwrap_or_else(|| config.out.clone());
    let snapshots_path = trace_dir.join("snapshots.csv");
    if !snapshots_path.exists() {
        println!("no snapshots in {}; nothing exported", trace_dir.display());
        return Ok(());
    }
    let records = read_snapshots_csv(&snapshots_path)?;
    if records.is_empty() {
        println!("snapshot file is empty; nothing exported");
        return Ok(());
    }

    let model_path = trace_dir.join("model.ckpt");
    let (center, radius) = if model_path.exists() {
        let model = TrainedModel::load(&model_path)?;
        (model.sphere.center, model.sphere.radius)
    } else {
        let dim = records[0].coords.len();
        (vec![0.0; dim], config.grid.radius[0])
    };

    let dir = config.out.join("embeddings");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut epochs: Vec<usize> = records.iter().map(|r| r.epoch).collect();
    epochs.sort_unstable();
    epochs.dedup();
    let dim = records[0].coords.len();
    if dim != 2 {
        println!("{dim}-d snapshots cannot be drawn; writing per-epoch CSV files instead");
    }
    for &epoch in &epochs {
        let rows: Vec<_> = records.iter().filter(|r| r.epoch == epoch).collect();
        if dim == 2 {
            let points: Vec<(f64, f64, Label)> = rows.iter().map(|r| (r.coords[0], r.coords[1], r.label)).collect();
            let chart = svg::scatter(&format!("epoch {epoch}"), &points, (center[0], center[1]), radius);
            write_file(&dir.join(format!("epoch-{epoch:05}.svg")), chart.as_bytes())?;
        } else {
            let mut csv = String::from("node_id,label");
            for axis in ["x", "y", "z"].iter().take(dim) {
                let _ = write!(csv, ",{axis}");
            }
            csv.push('\n');
            for r in rows {
                let _ = write!(csv, "{},{}", r.node_id, r.label.code());
                for c in &r.coords {
                    let _ = write!(csv, ",{c:?}");
                }
                csv.push('\n');
            }
            write_file(&dir.join(format!("epoch-{epoch:05}.csv")), csv.as_bytes())?;
        }
    }
    println!("exported {} epochs to {}", epochs.len(), dir.display());
    Ok(())
}
