use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cppdip_core::pipeline::{generate_scenario, plan, Bounds, ObjectiveStage, PlanConfig};
use cppdip_core::solver::SolverKind;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::output::{write_all_atomic, write_atomic};
use crate::report::{compare_csv, polyline_csv, CompareRow, RunReport};
use crate::svg::{render_svg, Layers};
use crate::treefile::{load_scenario, save_trees};

pub const THREADS_ENV: &str = "CPP_DIP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cppdip", version, about = "Coverage path planning over tree maps")]
pub struct Cli {
    /// Print the full default configuration as JSON (to PATH, or stdout) and exit.
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    pub emit_default_config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one route and write a JSON report.
    Plan(PlanArgs),
    /// Plan every solver x stage x seed combination and write a CSV table.
    Compare(CompareArgs),
    /// Write a seeded synthetic tree map.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tree file: CSV with an id,x,y[,r] header or a JSON array.
    #[arg(long)]
    pub trees: PathBuf,
    /// JSON configuration; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// ghi, aco or mcrl; overrides the config.
    #[arg(long)]
    pub solver: Option<SolverKind>,
    /// Objective stage 1..4.
    #[arg(long)]
    pub stage: Option<u8>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// SVG plot of the plan.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// CSV of the flown polyline.
    #[arg(long)]
    pub polyline: Option<PathBuf>,
    /// Plot layers to draw, comma separated.
    #[arg(long, default_value = "trees,coverage,hulls,sweeps,path,waypoints,crossings")]
    pub layers: String,
    /// Include per-phase wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated solvers.
    #[arg(long, default_value = "ghi,aco,mcrl")]
    pub solvers: String,
    /// Comma-separated objective stages.
    #[arg(long, default_value = "1,2,3,4")]
    pub stages: String,
    /// Comma-separated seeds; defaults to the configured seed.
    #[arg(long)]
    pub seeds: Option<String>,
    /// CSV table path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of trees.
    #[arg(long)]
    pub n: usize,
    /// Number of Gaussian clumps.
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    /// WIDTHxHEIGHT in pixels.
    #[arg(long, default_value = "3000x3000")]
    pub bounds: Bounds,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Crown radius r in pixels; trees are kept at least 2r apart.
    #[arg(long, default_value_t = 50.0)]
    pub crown_radius: f64,
    /// Output tree file; `.json` writes JSON, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn load_config(path: Option<&Path>) -> CliResult<PlanConfig> {
    let config = match path {
        None => PlanConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("config {}: {e}", p.display())))?
        }
    };
    config.validate().map_err(|e| CliError::config(format!("invalid config: {e}")))?;
    Ok(config)
}

fn parse_stage(v: u8) -> CliResult<ObjectiveStage> {
    ObjectiveStage::try_from(v).map_err(CliError::config)
}

fn parse_list<T>(list: &str, what: &str, parse: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    let items: Vec<T> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::config(format!("{what} list is empty")));
    }
    Ok(items)
}

pub fn cmd_plan(args: &PlanArgs) -> CliResult<()> {
    let mut config = load_config(args.input.config.as_deref())?;
    if let Some(s) = args.solver {
        config.solver = s;
    }
    if let Some(st) = args.stage {
        config.stage = parse_stage(st)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let layers = Layers::parse(&args.layers).map_err(CliError::config)?;
    let scenario = load_scenario(&args.input.trees, config.coverage.crown_radius)?;
    let result = plan(&scenario, &config)?;

    let report = RunReport::new(&result, &config, scenario.trees.len(), args.timings);
    let mut files: Vec<(&Path, Vec<u8>)> = vec![(args.out.as_path(), report.to_json().into_bytes())];
    if let Some(p) = &args.plot {
        let svg = render_svg(&result, &scenario.trees, config.coverage.fov_radius, &layers);
        files.push((p.as_path(), svg.into_bytes()));
    }
    if let Some(p) = &args.polyline {
        files.push((p.as_path(), polyline_csv(&result.polyline).into_bytes()));
    }
    write_all_atomic(&files)
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    let config = load_config(args.input.config.as_deref())?;
    let solvers = parse_list(&args.solvers, "solver", |s| s.parse::<SolverKind>().map_err(CliError::config))?;
    let stages = parse_list(&args.stages, "stage", |s| {
        s.parse::<u8>()
            .map_err(|_| CliError::config(format!("stage '{s}' is not a number")))
            .and_then(parse_stage)
    })?;
    let seeds = match &args.seeds {
        Some(list) => parse_list(list, "seed", |s| {
            s.parse::<u64>().map_err(|_| CliError::config(format!("seed '{s}' is not a u64")))
        })?,
        None => vec![config.seed],
    };
    let scenario = load_scenario(&args.input.trees, config.coverage.crown_radius)?;

    let mut jobs = Vec::new();
    for &solver in &solvers {
        for &stage in &stages {
            for &seed in &seeds {
                jobs.push(PlanConfig { solver, stage, seed, ..config.clone() });
            }
        }
    }
    let rows: Vec<CompareRow> = jobs
        .par_iter()
        .map(|cfg| plan(&scenario, cfg).map(|r| CompareRow::new(cfg.seed, &r, &config.quality)))
        .collect::<Result<_, _>>()?;
    write_atomic(&args.out, compare_csv(&rows).as_bytes())
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let scenario = generate_scenario(args.n, args.clusters, args.bounds, args.crown_radius, args.seed)
        .map_err(|e| match e {
            cppdip_core::Error::Infeasible(m) => CliError::config(format!("infeasible packing: {m}")),
            other => CliError::config(other.to_string()),
        })?;
    save_trees(&args.out, &scenario.trees)
}

pub fn emit_default_config(target: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&PlanConfig::default()).expect("config serializes");
    text.push('\n');
    if target == Path::new("-") {
        print!("{text}");
        Ok(())
    } else {
        write_atomic(target, text.as_bytes())
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // A pool may already exist when embedded; the first one wins.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    if let Some(target) = &cli.emit_default_config {
        return emit_default_config(target);
    }
    match &cli.command {
        Some(Command::Plan(a)) => cmd_plan(a),
        Some(Command::Compare(a)) => cmd_compare(a),
        Some(Command::Generate(a)) => cmd_generate(a),
        None => Err(CliError::input("no command given; see --help")),
    }
}

/// Parse arguments and run, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::error::EXIT_INPUT } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
