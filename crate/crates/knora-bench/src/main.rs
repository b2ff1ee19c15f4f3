//! Command-line experiment runner.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on data errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use knora_bench::config::ExperimentConfig;
use knora_bench::error::HarnessError;
use knora_bench::report::emit_report;
use knora_bench::scenario::{scenario_divergence, trace_json_lines};
use knora_bench::synthetic::{generate_blobs, write_csv, write_keel, SyntheticSpec};
use knora_bench::{run_experiment, ScenarioOutcome};

#[derive(Parser)]
#[command(
    name = "knora-bench",
    about = "Dynamic ensemble selection benchmark harness (KNORA family)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full evaluation protocol from a TOML config file.
    Run(RunArgs),
    /// Replay the built-in borderline scenario where the selectors diverge.
    Scenario(ScenarioArgs),
    /// Generate a synthetic imbalanced dataset file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (TOML).
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the region of competence size.
    #[arg(long)]
    k: Option<usize>,
    /// Override the pool size.
    #[arg(long)]
    pool_size: Option<usize>,
    /// Override the technique list (comma separated, e.g.
    /// "knora-e,knora-bi,fknora-u").
    #[arg(long, value_delimiter = ',')]
    techniques: Option<Vec<String>>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write selection traces (JSON lines) for the first test samples
    /// of each dataset's first replication.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Number of test samples per dataset to trace with --traces.
    #[arg(long, default_value_t = 5)]
    trace_limit: usize,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Emit the selection traces as JSON lines instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Output file; extension picks the format unless --format is given.
    #[arg(long)]
    out: PathBuf,
    /// Output format: keel or csv.
    #[arg(long)]
    format: Option<String>,
    /// Dataset name.
    #[arg(long, default_value = "synthetic")]
    name: String,
    /// Total number of samples.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Feature dimensionality.
    #[arg(long, default_value_t = 5)]
    features: usize,
    /// Majority/minority imbalance ratio.
    #[arg(long, default_value_t = 9.0)]
    ir: f64,
    /// Distance between the class means.
    #[arg(long, default_value_t = 1.5)]
    separation: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn run(args: RunArgs) -> knora_bench::Result<()> {
    let mut cfg = ExperimentConfig::from_toml_file(&args.config)?;
    // Flags win over the file.
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(pool_size) = args.pool_size {
        cfg.pool_size = pool_size;
    }
    if let Some(techniques) = args.techniques {
        cfg.techniques = techniques;
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    cfg.validate()?;

    if let Some(trace_path) = &args.traces {
        let lines = knora_bench::experiment::sample_traces(&cfg, args.trace_limit)?;
        std::fs::write(trace_path, lines)?;
        println!("wrote {}", trace_path.display());
    }

    let report = run_experiment(&cfg)?;
    match &cfg.out_dir {
        Some(dir) => {
            let paths = emit_report(&report, dir)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        None => print!("{}", report.to_markdown()),
    }
    Ok(())
}

fn scenario(args: ScenarioArgs) -> knora_bench::Result<()> {
    let report = scenario_divergence()?;
    if args.json {
        print!("{}", trace_json_lines(&report));
        return Ok(());
    }
    println!(
        "query class: {} | neighbors nearest-first: {}",
        report.query_class,
        report.neighbor_labels.join(", ")
    );
    let describe = |o: &ScenarioOutcome| {
        let removals: Vec<String> = o
            .trace
            .removals()
            .iter()
            .map(|i| ["A", "B", "C", "D", "E"][*i].to_string())
            .collect();
        println!(
            "{:28} removed [{}] -> selected {:?}, predicted '{}' ({})",
            o.technique,
            removals.join(", "),
            o.selected_classifiers
                .iter()
                .map(|i| format!("c{}", i + 1))
                .collect::<Vec<_>>(),
            o.predicted,
            if o.correct { "correct" } else { "wrong" }
        );
    };
    describe(&report.knora_e);
    describe(&report.knora_b);
    describe(&report.knora_bi_minority_circle);
    describe(&report.knora_bi_minority_square);
    Ok(())
}

fn gen(args: GenArgs) -> knora_bench::Result<()> {
    let spec = SyntheticSpec {
        name: args.name.clone(),
        n: args.n,
        features: args.features,
        ir: args.ir,
        separation: args.separation,
        seed: args.seed,
    };
    let dataset = generate_blobs(&spec)?;
    let format = match &args.format {
        Some(f) => f.to_lowercase(),
        None => match args.out.extension().and_then(|e| e.to_str()) {
            Some("dat") => "keel".to_string(),
            Some("csv") => "csv".to_string(),
            _ => {
                return Err(HarnessError::Config(
                    "cannot infer format from extension; pass --format keel|csv".into(),
                ))
            }
        },
    };
    match format.as_str() {
        "keel" => write_keel(&dataset, &args.out)?,
        "csv" => write_csv(&dataset, &args.out)?,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown format '{other}', expected keel or csv"
            )))
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Scenario(args) => scenario(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
