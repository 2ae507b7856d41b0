use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use covsel::chow_liu::chow_liu_tree;
use covsel::generators::load_matrix_csv;
use covsel::graph::{covariance_select, verify_selection_rules, EdgeSet, TreeStructure};
use covsel::report::{
    add_monte_carlo, analyze, feasible_region, feasible_region_csv, log_grid, sweep, sweep_csv, QualityReport,
    SweepFamily, SweepParams,
};
use covsel::trees::{enumerate_spanning_trees, ensemble_metrics, mcmc_spanning_trees, sample_spanning_trees};
use covsel::{Error, QuadratureConfig, Result};

/// Selection rules must hold to this tolerance for non-tree structures.
const SELECTION_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "covsel", version, about = "Quality of covariance selection for Gaussian graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Divergences, exact AUC and bounds for one matrix and structure.
    Analyze(AnalyzeArgs),
    /// One row per dimension for a reference family.
    Sweep(SweepArgs),
    /// Per-tree KL and AUC over sampled or enumerated spanning trees.
    Trees(TreesArgs),
    /// Boundary of the feasible (AUC, KL) region.
    FeasibleRegion(FeasibleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Correlation matrix CSV.
    matrix: PathBuf,
    /// Edge list, one 0-based `u,v` per line.
    #[arg(long, conflicts_with = "chow_liu", required_unless_present = "chow_liu")]
    tree: Option<PathBuf>,
    /// Use the Chow–Liu tree of the matrix.
    #[arg(long)]
    chow_liu: bool,
    /// Rescale a covariance matrix to correlation form.
    #[arg(long)]
    normalize: bool,
    /// Append a Monte Carlo AUC from this many samples per hypothesis.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// toeplitz-star, toeplitz-chain or kernel-2d.
    #[arg(long)]
    family: SweepFamily,
    #[arg(long, default_value_t = 5)]
    n_min: usize,
    #[arg(long, default_value_t = 60)]
    n_max: usize,
    /// Correlation for the Toeplitz families.
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    /// Kernel bandwidth for kernel-2d.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Layouts averaged per dimension for kernel-2d.
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TreesArgs {
    matrix: PathBuf,
    /// Number of uniformly sampled trees.
    #[arg(long, conflicts_with = "enumerate", required_unless_present = "enumerate")]
    samples: Option<usize>,
    /// Every labelled spanning tree (n <= 8).
    #[arg(long)]
    enumerate: bool,
    /// Sample with the edge-swap Markov chain instead of the exact sampler.
    #[arg(long, requires = "samples")]
    mcmc: bool,
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FeasibleArgs {
    /// `lo:hi:count` (log-spaced) or a comma-separated list of values.
    #[arg(long, default_value = "1e-3:100:200")]
    a_grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn report_csv(r: &QualityReport) -> String {
    let mut header = vec!["n", "kl", "reverse_kl", "jeffreys", "auc", "one_minus_auc", "log10_one_minus_auc"];
    header.extend(["auc_lower", "auc_upper", "auc_lower_asymptotic", "auc_upper_asymptotic", "d_star"]);
    let mut vals = vec![
        r.kl,
        r.reverse_kl,
        r.jeffreys,
        r.auc,
        r.one_minus_auc,
        r.log10_one_minus_auc,
        r.auc_lower,
        r.auc_upper,
        r.auc_lower_asymptotic,
        r.auc_upper_asymptotic,
        r.d_star,
    ];
    if let (Some(a), Some(s)) = (r.mc_auc, r.mc_se) {
        header.extend(["mc_auc", "mc_se"]);
        vals.extend([a, s]);
    }
    let row: Vec<String> = std::iter::once(r.n.to_string())
        .chain(vals.iter().map(|v| format!("{v:.17e}")))
        .collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn run_analyze(a: &AnalyzeArgs) -> Result<()> {
    let cfg = QuadratureConfig::default();
    let sigma = load_matrix_csv(&a.matrix, a.normalize)?;
    let structure = match &a.tree {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            EdgeSet::parse(&text, sigma.dim())?
        }
        None => chow_liu_tree(&sigma)?.into(),
    };
    if TreeStructure::try_from(structure.clone()).is_err() {
        let model = covariance_select(&sigma, &structure)?;
        let rules = verify_selection_rules(&sigma, &model)?;
        if rules.max() > SELECTION_TOL {
            return Err(Error::InvalidStructure(format!(
                "selection rules violated by {:.3e} for this non-tree structure",
                rules.max()
            )));
        }
    }
    let mut report = analyze(&sigma, &structure, &cfg)?;
    if let Some(n) = a.mc {
        add_monte_carlo(&mut report, &sigma, &structure, n, a.seed)?;
    }
    let text = match a.format {
        Format::Json => to_json(&report),
        Format::Csv => report_csv(&report),
    };
    emit(&a.output, &text)
}

fn run_sweep(a: &SweepArgs) -> Result<()> {
    let param = match a.family {
        SweepFamily::Kernel2d => a.sigma,
        _ => a.rho,
    };
    let rows = sweep(
        &SweepParams {
            family: a.family,
            n_min: a.n_min,
            n_max: a.n_max,
            param,
            runs: a.runs,
            seed: a.seed,
        },
        &QuadratureConfig::default(),
    )?;
    let text = match a.format {
        Format::Json => to_json(&rows),
        Format::Csv => sweep_csv(&rows),
    };
    emit(&a.output, &text)
}

fn run_trees(a: &TreesArgs) -> Result<()> {
    let sigma = load_matrix_csv(&a.matrix, a.normalize)?;
    let n = sigma.dim();
    let trees = match a.samples {
        Some(k) if a.mcmc => mcmc_spanning_trees(n, k, a.seed)?,
        Some(k) => sample_spanning_trees(n, k, a.seed)?,
        None => enumerate_spanning_trees(n)?,
    };
    let ensemble = ensemble_metrics(&sigma, &trees, &QuadratureConfig::default())?;
    for (id, reason) in &ensemble.skipped {
        eprintln!("skipped tree {id}: {reason}");
    }
    if !ensemble.skipped.is_empty() {
        eprintln!("{} of {} trees skipped", ensemble.skipped.len(), trees.len());
    }
    let text = match a.format {
        Format::Json => to_json(&ensemble),
        Format::Csv => ensemble.to_csv(),
    };
    emit(&a.output, &text)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Parse { line: 0, message: m };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("bad grid value `{s}`: {e}")));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts[..] {
        [lo, hi, count] => {
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|e| bad(format!("bad grid count `{count}`: {e}")))?;
            log_grid(num(lo)?, num(hi)?, count)
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad(format!("grid `{spec}` is neither lo:hi:count nor a list"))),
    }
}

fn run_feasible(a: &FeasibleArgs) -> Result<()> {
    let points = feasible_region(&parse_grid(&a.a_grid)?)?;
    let text = match a.format {
        Format::Json => to_json(&points),
        Format::Csv => feasible_region_csv(&points),
    };
    emit(&a.output, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Trees(a) => run_trees(a),
        Command::FeasibleRegion(a) => run_feasible(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
