//! Command-line front end for the decision-analytics engine: `train` builds a
//! model bundle, `rank` scores and orders alternatives against a bundle,
//! `bench` runs the baseline comparison tables, and `stream` replays a record
//! stream through the speed layer and reports latency.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mcdl_core::baselines::bench;
use mcdl_core::config::PipelineConfig;
use mcdl_core::error::Error;
use mcdl_core::ingest::{load_csv, load_feature_csv, CsvSchema};
use mcdl_core::pipeline::{read_bundle, stream_seed, train_pipeline, write_bundle};
use mcdl_core::stream::{
    read_replay_csv, reports_to_csv, run_latency_experiment_with, synthetic_stream, SnapshotStore,
    SpeedLayer, PAPER_REFERENCE_OVERHEAD_PCT,
};

#[derive(Parser)]
#[command(
    name = "mcdl",
    about = "Decision analytics: hierarchical-cluster + shallow-network scoring with multi-criteria ranking",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the full pipeline on a CSV and write a model bundle.
    Train(TrainArgs),
    /// Score an alternatives CSV against a bundle and write the ranking.
    Rank(RankArgs),
    /// Benchmark the baselines and the proposed pipeline on a CSV.
    Bench(BenchArgs),
    /// Replay a stream through the speed layer and report latency.
    Stream(StreamArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Declarative config file (TOML); flags override file, file overrides
    /// defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pipeline seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the fixed-name result files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Primary format echoed to stdout: csv | json | md.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Training CSV (header row required).
    #[arg(long)]
    data: PathBuf,
    /// Target column name.
    #[arg(long)]
    target: String,
    /// Optional categorical label column name.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trained model bundle directory.
    #[arg(long)]
    bundle: PathBuf,
    /// Alternatives CSV; must contain the bundle's feature columns.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trained model bundle directory.
    #[arg(long)]
    bundle: PathBuf,
    /// Optional replay CSV (sequence_id,timestamp,features); synthetic
    /// stream when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Worker ladder, e.g. "1,2,4,8".
    #[arg(long)]
    workers: Option<String>,
    /// Stream length for the synthetic replay.
    #[arg(long)]
    records: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stream(args) => cmd_stream(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code: u8 = if e.is_environmental() { 2 } else { 1 };
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": { "code": code, "kind": e.kind(), "message": e.to_string() }
                })
            );
            ExitCode::from(code)
        }
    }
}

/// Load the effective config: defaults, then the file, then flag overrides.
fn load_config(common: &CommonArgs) -> Result<PipelineConfig, Error> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(format) = &common.format {
        config.io.format = format.clone();
    }
    config.validate()?;
    Ok(config)
}

fn ensure_out_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io { path, source: e })
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let config = load_config(&args.common)?;
    let schema = CsvSchema {
        target: args.target.clone(),
        label: args.label.clone(),
    };
    let loaded_at = Instant::now();
    let data = load_csv(&args.data, &schema)?;
    let load_time = loaded_at.elapsed();

    let train_at = Instant::now();
    let model = train_pipeline(&data, &config)?;
    let train_time = train_at.elapsed();

    ensure_out_dir(&args.common.out)?;
    write_bundle(&model, &args.common.out)?;

    println!(
        "trained {} rows x {} features -> {} leaves (depth {})",
        data.len(),
        data.dim(),
        model.tree.n_leaves,
        model.tree.depth
    );
    for (leaf, report) in model.leaf_reports.iter().enumerate() {
        println!(
            "  leaf {leaf}: {} members, final mse {:.6}",
            model.tree.leaves()[leaf].members.len(),
            report.final_loss
        );
    }
    println!(
        "timings: load {:.1} ms, train {:.1} ms",
        load_time.as_secs_f64() * 1e3,
        train_time.as_secs_f64() * 1e3
    );
    println!("bundle written to {}", args.common.out.display());
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), Error> {
    let model = read_bundle(&args.bundle)?;
    let mut config = model.config.clone();
    if let Some(format) = &args.common.format {
        config.io.format = format.clone();
    }
    let rows = load_feature_csv(&args.data, &model.schema.feature_names)?;
    let ranking = model.rank_alternatives(&rows)?;

    ensure_out_dir(&args.common.out)?;
    let csv = ranking.to_csv();
    let json = serde_json::to_string_pretty(&ranking)
        .map_err(|e| Error::Config(format!("ranking serialization failed: {e}")))?;
    write_out(&args.common.out, "ranking.csv", &csv)?;
    write_out(&args.common.out, "ranking.json", &(json.clone() + "\n"))?;

    match config.io.format.as_str() {
        "json" => println!("{json}"),
        _ => print!("{csv}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let config = load_config(&args.common)?;
    let schema = CsvSchema {
        target: args.target.clone(),
        label: args.label.clone(),
    };
    let data = load_csv(&args.data, &schema)?;
    let report = bench(&data, &config)?;

    ensure_out_dir(&args.common.out)?;
    write_out(&args.common.out, "bench.md", &report.to_markdown())?;
    write_out(&args.common.out, "bench.csv", &report.to_csv())?;
    write_out(&args.common.out, "bench.json", &(report.to_json() + "\n"))?;

    match config.io.format.as_str() {
        "json" => println!("{}", report.to_json()),
        "csv" => print!("{}", report.to_csv()),
        _ => print!("{}", report.to_markdown()),
    }
    Ok(())
}

fn parse_workers(list: &str) -> Result<Vec<usize>, Error> {
    let workers: Result<Vec<usize>, _> = list.split(',').map(|w| w.trim().parse()).collect();
    let workers = workers.map_err(|_| Error::Config(format!("bad --workers list '{list}'")))?;
    if workers.is_empty() || workers.contains(&0) {
        return Err(Error::Config("worker counts must be nonzero".into()));
    }
    Ok(workers)
}

fn cmd_stream(args: StreamArgs) -> Result<(), Error> {
    let mut model = read_bundle(&args.bundle)?;

    // Stream-time knobs: a config file replaces the bundle's stream section
    // and seed; flags win over both.
    if let Some(path) = &args.common.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let file_cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        model.config.stream = file_cfg.stream;
        model.config.seed = file_cfg.seed;
    }
    if let Some(seed) = args.common.seed {
        model.config.seed = seed;
    }
    if let Some(workers) = &args.workers {
        model.config.stream.workers = parse_workers(workers)?;
    }
    if let Some(records) = args.records {
        model.config.stream.records = records;
    }
    model.config.validate()?;

    let stream_cfg = model.config.stream.clone();
    let seed = stream_seed(&model.config);
    let store = SnapshotStore::new();
    let snapshot = store.publish(model)?;

    let records = match &args.data {
        Some(path) => {
            let records = read_replay_csv(path)?;
            if let Some(r) = records.first() {
                if r.features.len() != snapshot.model.dim() {
                    return Err(Error::DimMismatch {
                        expected: snapshot.model.dim(),
                        got: r.features.len(),
                    });
                }
            }
            records
        }
        None => synthetic_stream(&snapshot.model, stream_cfg.records, seed),
    };
    if records.len() < 1000 {
        eprintln!(
            "warning: {} records give unstable percentiles; 1000 or more recommended",
            records.len()
        );
    }

    let reports = run_latency_experiment_with(
        &stream_cfg.workers,
        &records,
        stream_cfg.repetitions,
        |_| SpeedLayer::new(snapshot.clone()),
    )?;

    ensure_out_dir(&args.common.out)?;
    let csv = reports_to_csv(&reports);
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| Error::Config(format!("latency serialization failed: {e}")))?;
    write_out(&args.common.out, "latency.csv", &csv)?;
    write_out(&args.common.out, "latency.json", &(json.clone() + "\n"))?;

    match snapshot.model.config.io.format.as_str() {
        "json" => println!("{json}"),
        _ => print!("{csv}"),
    }
    println!("paper_reference_overhead_pct: {PAPER_REFERENCE_OVERHEAD_PCT}");
    for r in &reports {
        println!(
            "workers {}: overhead_pct {:.2} (paper reference {PAPER_REFERENCE_OVERHEAD_PCT}%), wall {:.2} us/record",
            r.workers, r.overhead_pct, r.wall_us_per_record
        );
    }
    Ok(())
}
