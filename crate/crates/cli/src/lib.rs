//! Command-line front end for the `mvmdp` solver.
//!
//! Every subcommand is a plain function from parsed flags to output text so
//! the binary and the tests share one code path. Exit codes: 0 success,
//! 2 malformed input, 3 solver failure, 4 policy space too large to enumerate.

pub mod document;
pub mod error;
pub mod numfmt;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvmdp::global::{
    frontier_is_monotone, local_sweep, pareto_frontier, solve, uniform_grid, Algorithm,
    SolveOptions,
};
use mvmdp::inventory::{build_inventory_mdp, InventoryParams};
use mvmdp::pseudo::solve_auxiliary_with;
use mvmdp::sensitivity::{classify_fixed_points, enumerate_segments_with};
use mvmdp::{Mdp, ObjectiveMode, Policy};

pub use document::{MdpDocument, ReportDocument};
pub use error::CliError;
use numfmt::fmt;

/// Overrides the auxiliary-solve budget of every search.
pub const MAX_AUX_SOLVES_ENV: &str = "MVMDP_MAX_AUX_SOLVES";

#[derive(Debug, Parser)]
#[command(
    name = "mvmdp",
    version,
    about = "Global mean-variance optimization for unichain MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and write a JSON report.
    Solve(SolveArgs),
    /// Sample the optimal pseudo objective over the pseudo-mean range.
    Curve(CurveArgs),
    /// Trace optimal (mean, variance) pairs over a grid of weights.
    Frontier(FrontierArgs),
    /// Compare the global searches against multi-start local iteration on inventory instances.
    Compare(CompareArgs),
    /// Write a benchmark instance as an MDP document.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchKind {
    Inventory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Global,
    GlobalPlus,
    Local,
    Brute,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Global => Algorithm::Global,
            AlgorithmArg::GlobalPlus => Algorithm::GlobalPlus,
            AlgorithmArg::Local => Algorithm::Local,
            AlgorithmArg::Brute => Algorithm::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    MeanVariance,
    Variance,
}

impl From<ModeArg> for ObjectiveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::MeanVariance => ObjectiveMode::MeanVariance,
            ModeArg::Variance => ObjectiveMode::VarianceOnly,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InventoryArgs {
    #[arg(long, default_value_t = 4)]
    pub capacity: usize,
    /// Per-customer demand probability.
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    /// Unit ordering cost.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Unit holding cost.
    #[arg(long, default_value_t = 0.7)]
    pub h: f64,
    /// Unit shortage cost.
    #[arg(long, default_value_t = 2.9)]
    pub l: f64,
}

impl InventoryArgs {
    fn params(&self, capacity: usize, beta: f64) -> InventoryParams<f64> {
        InventoryParams {
            capacity,
            p: self.p,
            b: self.b,
            h: self.h,
            l: self.l,
            beta,
        }
    }
}

/// Benchmarks default to this weight when `--beta` is absent.
pub const BENCH_DEFAULT_BETA: f64 = 10.0;

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// MDP document to load.
    #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub bench: Option<BenchKind>,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    /// Tradeoff weight; overrides the document's value.
    #[arg(long)]
    pub beta: Option<f64>,
}

impl InstanceArgs {
    pub fn load(&self) -> Result<(MdpDocument, Mdp<f64>), CliError> {
        match (&self.input, self.bench) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let doc = MdpDocument::from_json(&text)?;
                let mdp = doc.to_mdp(self.beta)?;
                Ok((doc, mdp))
            }
            (None, Some(BenchKind::Inventory)) => {
                let beta = self.beta.unwrap_or(BENCH_DEFAULT_BETA);
                let mdp = inventory_mdp(&self.inventory.params(self.inventory.capacity, beta))?;
                let name = format!("inventory-c{}", self.inventory.capacity);
                Ok((MdpDocument::from_mdp(&mdp, Some(name)), mdp))
            }
            (None, None) => Err(CliError::Input(
                "either --input or --bench is required".into(),
            )),
        }
    }
}

fn inventory_mdp(params: &InventoryParams<f64>) -> Result<Mdp<f64>, CliError> {
    build_inventory_mdp(params)
        .map_err(|e| CliError::Input(format!("bad inventory parameters: {e}")))
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "global")]
    pub algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "mean-variance")]
    pub mode: ModeArg,
    /// Starting pseudo mean of the local iteration (default: smallest reward).
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "mean-variance")]
    pub mode: ModeArg,
    /// Number of uniform samples over the reward range.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Also write the exact segment decomposition and its fixed points.
    #[arg(long)]
    pub segments: bool,
    #[arg(long, default_value = "curve")]
    pub output_prefix: String,
}

#[derive(Debug, Clone, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub beta_grid: Vec<f64>,
    #[arg(long, value_enum, default_value = "global")]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,7,10")]
    pub capacities: Vec<usize>,
    #[arg(long, default_value_t = BENCH_DEFAULT_BETA)]
    pub beta: f64,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    /// Explicit local starting points, shared by every capacity.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "y0_points"
    )]
    pub y0_grid: Option<Vec<f64>>,
    /// Uniform starting points over each instance's reward range.
    #[arg(long, default_value_t = 50)]
    pub y0_points: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(value_enum, default_value = "inventory")]
    pub kind: BenchKind,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    #[arg(long, default_value_t = BENCH_DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Solve options with the auxiliary-solve budget taken from
/// [`MAX_AUX_SOLVES_ENV`] when set.
pub fn base_options(
    algorithm: Algorithm,
    mode: ObjectiveMode,
) -> Result<SolveOptions<f64>, CliError> {
    let mut opts = SolveOptions::with_algorithm(algorithm).mode(mode);
    if let Ok(raw) = std::env::var(MAX_AUX_SOLVES_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{MAX_AUX_SOLVES_ENV}={raw:?} is not a count")))?;
        opts.max_aux_solves = Some(n);
    }
    Ok(opts)
}

pub fn solve_report(args: &SolveArgs) -> Result<ReportDocument, CliError> {
    let (doc, mdp) = args.instance.load()?;
    let mut opts = base_options(args.algorithm.into(), args.mode.into())?;
    opts.y0 = args.y0;
    let start = Instant::now();
    let report = solve(&mdp, &opts)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(ReportDocument::new(&report, &doc, elapsed))
}

/// CSV text produced by `curve`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveOutput {
    pub samples: String,
    pub segments: Option<String>,
    pub fixed_points: Option<String>,
}

pub fn curve_output(args: &CurveArgs) -> Result<CurveOutput, CliError> {
    let (_, mdp) = args.instance.load()?;
    let mode: ObjectiveMode = args.mode.into();
    let bounds = mdp.reward_bounds();
    let mut samples = String::from("y,eta_tilde_star\n");
    let mut warm: Option<Policy> = None;
    for y in uniform_grid(bounds.min, bounds.max, args.samples) {
        let aux = solve_auxiliary_with(&mdp, y, mode, warm.as_ref())?;
        samples.push_str(&format!("{},{}\n", fmt(y), fmt(aux.pseudo_objective)));
        warm = Some(aux.evaluated.policy);
    }
    if !args.segments {
        return Ok(CurveOutput {
            samples,
            segments: None,
            fixed_points: None,
        });
    }
    let segs = enumerate_segments_with(&mdp, mode)?;
    let mut segments = String::from("k,y_lo,y_hi,eta_k,mu_k\n");
    for (k, s) in segs.iter().enumerate() {
        segments.push_str(&format!(
            "{k},{},{},{},{}\n",
            fmt(s.lo),
            fmt(s.hi),
            fmt(s.objective),
            fmt(s.mean)
        ));
    }
    let mut fixed_points = String::from("y,kind\n");
    for p in classify_fixed_points(&segs) {
        fixed_points.push_str(&format!("{},{}\n", fmt(p.y), p.kind.name()));
    }
    Ok(CurveOutput {
        samples,
        segments: Some(segments),
        fixed_points: Some(fixed_points),
    })
}

/// Frontier CSV plus whether the monotonicity check passed.
pub fn frontier_output(args: &FrontierArgs) -> Result<(String, bool), CliError> {
    let (_, mdp) = args.instance.load()?;
    let opts = base_options(args.algorithm.into(), ObjectiveMode::MeanVariance)?;
    let points = pareto_frontier(&mdp, &args.beta_grid, &opts)?;
    let mut out = String::from("beta,mu,sigma,eta\n");
    for p in &points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(p.beta),
            fmt(p.mean),
            fmt(p.variance),
            fmt(p.objective)
        ));
    }
    Ok((out, frontier_is_monotone(&points, 1e-9)))
}

/// One row of the `compare` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub capacity: usize,
    pub global_eta: f64,
    pub global_aux_solves: usize,
    pub plus_eta: f64,
    pub plus_aux_solves: usize,
    pub y0s: Vec<f64>,
    pub local_etas: Vec<f64>,
}

pub const COMPARE_HEADER: &str =
    "capacity,global_eta,global_aux_solves,plus_eta,plus_aux_solves,local_eta_min,local_eta_max,local_etas";

impl CompareRow {
    pub fn csv(&self) -> String {
        let min = self
            .local_etas
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let max = self
            .local_etas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let etas: Vec<String> = self.local_etas.iter().map(|&e| fmt(e)).collect();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.capacity,
            fmt(self.global_eta),
            self.global_aux_solves,
            fmt(self.plus_eta),
            self.plus_aux_solves,
            fmt(min),
            fmt(max),
            etas.join(" ")
        )
    }
}

pub fn compare_rows(args: &CompareArgs) -> Result<Vec<CompareRow>, CliError> {
    if args.capacities.is_empty() {
        return Err(CliError::Input("--capacities is empty".into()));
    }
    let global = base_options(Algorithm::Global, ObjectiveMode::MeanVariance)?;
    let plus = base_options(Algorithm::GlobalPlus, ObjectiveMode::MeanVariance)?;
    let local = base_options(Algorithm::Local, ObjectiveMode::MeanVariance)?;
    args.capacities
        .iter()
        .map(|&c| {
            let mdp = inventory_mdp(&args.inventory.params(c, args.beta))?;
            let g = solve(&mdp, &global)?;
            let p = solve(&mdp, &plus)?;
            let y0s = match &args.y0_grid {
                Some(grid) => grid.clone(),
                None => {
                    let b = mdp.reward_bounds();
                    uniform_grid(b.min, b.max, args.y0_points)
                }
            };
            let locals = local_sweep(&mdp, &y0s, &local)?;
            Ok(CompareRow {
                capacity: c,
                global_eta: g.objective,
                global_aux_solves: g.aux_solves,
                plus_eta: p.objective,
                plus_aux_solves: p.aux_solves,
                y0s,
                local_etas: locals.iter().map(|r| r.objective).collect(),
            })
        })
        .collect()
}

pub fn bench_document(args: &BenchArgs) -> Result<MdpDocument, CliError> {
    let BenchKind::Inventory = args.kind;
    let mdp = inventory_mdp(&args.inventory.params(args.inventory.capacity, args.beta))?;
    Ok(MdpDocument::from_mdp(
        &mdp,
        Some(format!("inventory-c{}", args.inventory.capacity)),
    ))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(args) => {
            let report = solve_report(args)?;
            emit(args.output.as_deref(), &(report.to_json() + "\n"))
        }
        Command::Curve(args) => {
            let out = curve_output(args)?;
            let prefix = &args.output_prefix;
            emit(
                Some(Path::new(&format!("{prefix}_samples.csv"))),
                &out.samples,
            )?;
            if let (Some(segments), Some(fixed)) = (&out.segments, &out.fixed_points) {
                emit(Some(Path::new(&format!("{prefix}_segments.csv"))), segments)?;
                emit(
                    Some(Path::new(&format!("{prefix}_fixed_points.csv"))),
                    fixed,
                )?;
            }
            Ok(())
        }
        Command::Frontier(args) => {
            let (csv, monotone) = frontier_output(args)?;
            if !monotone {
                eprintln!("warning: frontier is not monotone in beta");
            }
            emit(args.output.as_deref(), &csv)
        }
        Command::Compare(args) => {
            let rows = compare_rows(args)?;
            let mut csv = format!("{COMPARE_HEADER}\n");
            for r in &rows {
                csv.push_str(&r.csv());
                csv.push('\n');
                if r.plus_aux_solves > r.global_aux_solves {
                    eprintln!(
                        "warning: capacity {}: global-plus used more auxiliary solves",
                        r.capacity
                    );
                }
            }
            emit(args.output.as_deref(), &csv)
        }
        Command::Bench(args) => {
            let doc = bench_document(args)?;
            emit(args.output.as_deref(), &(doc.to_json() + "\n"))
        }
    }
}
