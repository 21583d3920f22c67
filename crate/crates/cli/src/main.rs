use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use speclab::arith::WeightMode;
use speclab_cli::{cache_length_spectrum, load_cache, run_experiment, CacheStatus, ExperimentConfig, Kind, RunReport};

#[derive(Parser)]
#[command(name = "speclab", version, about = "Run speclab experiments and write CSV results")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Runs the assertion suite on the produced data; any failure exits nonzero.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run { config: PathBuf },
    /// Damped-wave spectrum, Weyl count and optional energy decay.
    Spectrum(ParamArgs),
    /// Pressure curve, rate function and optional large-deviation estimate.
    Thermo(ParamArgs),
    /// Geodesic-flow trajectories and cohomological averaging.
    Flowavg(ParamArgs),
    /// Length spectrum of a quaternion group.
    Arith(ParamArgs),
    /// R search, Gaussian trace sides and windowed second moments.
    Trace(ParamArgs),
    /// Semiclassical window counts and the Jensen check.
    Count(ParamArgs),
    /// Write or inspect a length-spectrum cache.
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter file (a JSON object).
    #[arg(long)]
    params: Option<PathBuf>,
    /// One parameter as key=value; the value is parsed as JSON, else taken as a string.
    #[arg(short = 'p', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum CacheCommand {
    /// Enumerate a length spectrum and write it to a cache file.
    Write {
        #[arg(long, default_value_t = 2)]
        a: i64,
        #[arg(long, default_value_t = 5)]
        p: i64,
        #[arg(long, default_value_t = 12)]
        m_max: i64,
        #[arg(long = "box", default_value_t = 12)]
        bx: i64,
        /// Synthetic stable norm; zero-form weights when absent.
        #[arg(long)]
        synthetic_norm: Option<f64>,
        #[arg(long)]
        path: PathBuf,
    },
    /// Load a cache and summarize it, optionally checking (A, p, box).
    Show {
        #[arg(long)]
        path: PathBuf,
        /// Expected parameters as A,p,box.
        #[arg(long, value_delimiter = ',')]
        expect: Option<Vec<i64>>,
    },
}

fn parameters(args: &ParamArgs) -> Result<Value> {
    let mut map = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            match serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))? {
                Value::Object(m) => m,
                _ => bail!("{} must hold a JSON object", path.display()),
            }
        }
        None => Map::new(),
    };
    for kv in &args.set {
        let Some((k, v)) = kv.split_once('=') else { bail!("expected KEY=VALUE, got {kv}") };
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        map.insert(k.to_string(), value);
    }
    Ok(Value::Object(map))
}

fn print_report(report: &RunReport, dir: &std::path::Path) {
    for f in &report.files {
        println!("wrote {} ({} bytes)", f.name, f.bytes);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    for a in &report.assertions {
        println!("{}", a.line());
    }
    println!("report: {}", dir.join(speclab_cli::REPORT_FILE).display());
}

fn experiment(cli: &Cli) -> Result<ExitCode> {
    let mut config = match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        Command::Cache(_) => unreachable!("handled separately"),
        cmd => {
            let (kind, args) = match cmd {
                Command::Spectrum(a) => (Kind::Spectrum, a),
                Command::Thermo(a) => (Kind::Thermo, a),
                Command::Flowavg(a) => (Kind::Flowavg, a),
                Command::Arith(a) => (Kind::Arith, a),
                Command::Trace(a) => (Kind::Trace, a),
                Command::Count(a) => (Kind::Count, a),
                _ => unreachable!(),
            };
            ExperimentConfig { kind, parameters: parameters(args)?, seed: 0, output_dir: PathBuf::from("out") }
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    let report = run_experiment(&config, cli.verify)?;
    print_report(&report, &config.output_dir);
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cache(cmd: &CacheCommand, seed: u64) -> Result<ExitCode> {
    match cmd {
        CacheCommand::Write { a, p, m_max, bx, synthetic_norm, path } => {
            let mode = synthetic_norm.map_or(WeightMode::ZeroForm, |stable_norm| WeightMode::Synthetic { stable_norm });
            let s = cache_length_spectrum(*a, *p, *m_max, *bx, mode, seed, path)?;
            println!(
                "wrote {} ({} traces, {} geodesic classes)",
                path.display(),
                s.entries.len(),
                s.geodesics().geodesics.len()
            );
        }
        CacheCommand::Show { path, expect } => {
            let expect = match expect.as_deref() {
                Some(&[a, p, bx]) => Some((a, p, bx)),
                Some(other) => bail!("--expect takes A,p,box, got {} values", other.len()),
                None => None,
            };
            match load_cache(path, expect)? {
                CacheStatus::Loaded(s) => {
                    println!(
                        "A={} p={} box={} m_max={} weights={} seed={}",
                        s.group.a(),
                        s.group.p(),
                        s.bx,
                        s.m_max,
                        s.weight_mode,
                        s.seed
                    );
                    print!("{}", speclab_cli::pipelines::lengths_csv(&s));
                }
                CacheStatus::Missing => bail!("{} does not exist", path.display()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Cache(cmd) => cache(cmd, cli.seed.unwrap_or(0)),
        _ => experiment(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
