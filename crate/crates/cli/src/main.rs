//! `ifsjac`: compute, invert and analyze Jacobi matrices of IFS measures.

mod config;
mod error;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ifs_jacobi::fixtures::{named_fixtures, FixtureData};
use ifs_jacobi::io::{self, fmt_num, Format};
use ifs_jacobi::{
    capacity_report, closure, closure_atoms, delta_frontier, gauss_rule, invert, jacobi_from_discrete, jacobi_lebesgue,
    nevai_report, Atoms, FixConfig, Ifs, Jacobi,
};
use serde::Serialize;

use config::{Config, FormatName};
use error::CliError;

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ifsjac",
    version,
    about = "Jacobi matrices of measures generated by affine iterated function systems"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "IFSJAC_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Jacobi matrix of the invariant measure in a single pass.
    Closure(ClosureArgs),
    /// Jacobi matrix of the IFS convolution of two measures.
    Convolve(ConvolveArgs),
    /// Fixed-point iteration towards the invariant measure.
    Fixpoint(FixpointArgs),
    /// Recover sigma from a target Jacobi matrix at a given ratio.
    Invert(InvertArgs),
    /// Largest feasible contraction ratio for each truncation size.
    Frontier(FrontierArgs),
    /// Gauss rule (nodes and weights) of a Jacobi matrix.
    Gauss(GaussArgs),
    /// Continuity and capacity diagnostics of a Jacobi matrix.
    Analyze(AnalyzeArgs),
    /// Write the built-in fixtures to a directory.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Direct,
    Spectral,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Output encoding.
    #[arg(long, value_enum)]
    format: Option<FormatName>,
}

#[derive(Debug, Args)]
struct ClosureArgs {
    /// Fixed-point measure, as atoms or a Jacobi matrix.
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    size: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ConvolveArgs {
    #[arg(long)]
    sigma: PathBuf,
    /// Measure pushed through the maps, as atoms or a Jacobi matrix.
    #[arg(long)]
    eta: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    size: usize,
    #[arg(long, value_enum, default_value = "direct")]
    method: Method,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FixpointArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    size: usize,
    #[arg(long, value_enum, default_value = "direct")]
    method: Method,
    /// Starting measure; Lebesgue on [-1, 1] when absent.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Frobenius distance between successive iterates at which to stop.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Write `(m, d_m)` rows to this file.
    #[arg(long)]
    distances: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct InvertArgs {
    /// Target Jacobi matrix.
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    size: usize,
    /// Write `(n, |b_n - b~_n|)` rows comparing the target with the closure
    /// of the recovered sigma.
    #[arg(long)]
    roundtrip_errors: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FrontierArgs {
    #[arg(long)]
    mu: PathBuf,
    /// Truncation sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Relative width of the final bracket.
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GaussArgs {
    #[arg(long)]
    jacobi: PathBuf,
    #[arg(long)]
    size: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    jacobi: PathBuf,
    /// Limit of `a_n`; estimated from the tail when absent.
    #[arg(long, allow_hyphen_values = true)]
    a_inf: Option<f64>,
    /// Limit of `b_n`; estimated from the tail when absent.
    #[arg(long)]
    b_inf: Option<f64>,
    /// 1-based inclusive window `lo:hi` for the power-law fit.
    #[arg(long, value_parser = parse_window)]
    fit_window: Option<(usize, usize)>,
    /// Fixed-point measure of the IFS, for capacity bounds (needs `--delta`).
    #[arg(long, requires = "delta")]
    sigma: Option<PathBuf>,
    #[arg(long, requires = "sigma")]
    delta: Option<f64>,
    /// Second computation of the same matrix; adds the entrywise differences.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Directory for `(n, value)` series files.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FixturesArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Size of the fixtures given as Jacobi matrices.
    #[arg(long, default_value_t = 4000)]
    size: usize,
    #[arg(long, value_enum)]
    format: Option<FormatName>,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected `lo:hi`")?;
    let lo = lo.parse::<usize>().map_err(|e| e.to_string())?;
    let hi = hi.parse::<usize>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

/// A measure read from disk.
enum Measure {
    Atoms(Atoms),
    Jacobi(Jacobi),
}

impl Measure {
    fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| file_err(path, e.into()))?;
        let is_atoms = match io::detect_format(&text) {
            Format::Json => text.contains("\"nodes\""),
            Format::Text => text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .is_some_and(|l| l.starts_with("atoms")),
        };
        let parsed = if is_atoms {
            io::parse_atoms_any(&text).map(Measure::Atoms)
        } else {
            io::parse_jacobi_any(&text).map(Measure::Jacobi)
        };
        parsed.map_err(|e| file_err(path, e))
    }

    /// Atoms are converted at size `min(n, rank)`; matrices pass through.
    fn jacobi(&self, n: usize) -> CliResult<Jacobi> {
        Ok(match self {
            Measure::Atoms(m) => jacobi_from_discrete(m, n.min(m.distinct_nodes()))?,
            Measure::Jacobi(j) => j.clone(),
        })
    }

    fn ifs(&self, delta: f64, n: usize) -> CliResult<Ifs> {
        Ok(match self {
            Measure::Atoms(m) => Ifs::from_atoms(delta, m.clone())?,
            Measure::Jacobi(j) => Ifs::new(delta, j.truncate(n.min(j.size()))?)?,
        })
    }
}

fn file_err(path: &Path, source: ifs_jacobi::Error) -> CliError {
    CliError::File { path: path.to_path_buf(), source }
}

fn load_jacobi(path: &Path) -> CliResult<Jacobi> {
    io::load_jacobi(path).map_err(|e| file_err(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// `(n, value)` rows, `n` starting at `first`.
fn series(first: usize, values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        writeln!(s, "{} {}", first + i, fmt_num(v)).expect("writing to string");
    }
    s
}

struct Ctx {
    config: Config,
}

impl Ctx {
    fn format(&self, flag: Option<FormatName>) -> Format {
        match flag.or(self.config.output.format) {
            Some(FormatName::Json) => Format::Json,
            _ => Format::Text,
        }
    }

    fn emit_jacobi(&self, j: &Jacobi, out: &OutputArgs) -> CliResult<()> {
        emit(out.output.as_deref(), &io::jacobi_to_string(j, self.format(out.format)))
    }
}

fn run_closure(ctx: &Ctx, a: &ClosureArgs) -> CliResult<()> {
    let j = match Measure::load(&a.sigma)? {
        Measure::Atoms(m) => closure_atoms(&m, a.delta, a.size)?,
        Measure::Jacobi(s) => closure(&s, a.delta, a.size)?,
    };
    ctx.emit_jacobi(&j, &a.out)
}

fn run_convolve(ctx: &Ctx, a: &ConvolveArgs) -> CliResult<()> {
    let spec = Measure::load(&a.sigma)?.ifs(a.delta, a.size)?;
    let eta = Measure::load(&a.eta)?.jacobi(a.size)?;
    let j = match a.method {
        Method::Direct => spec.convolve(&eta, a.size)?,
        Method::Spectral => spec.convolve_spectral(&eta, a.size)?,
    };
    ctx.emit_jacobi(&j, &a.out)
}

fn run_fixpoint(ctx: &Ctx, a: &FixpointArgs) -> CliResult<()> {
    let spec = Measure::load(&a.sigma)?.ifs(a.delta, a.size)?;
    let init = match &a.init {
        Some(p) => Measure::load(p)?.jacobi(a.size)?,
        None => jacobi_lebesgue(a.size)?,
    };
    let mut cfg = FixConfig::for_size(a.size);
    if let Some(t) = a.tolerance.or(ctx.config.fixpoint.tolerance) {
        cfg.tolerance = t;
    }
    if let Some(m) = a.max_iterations.or(ctx.config.fixpoint.max_iterations) {
        cfg.max_iterations = m;
    }
    let (j, report) = match a.method {
        Method::Direct => spec.fixpoint(a.size, &init, &cfg)?,
        Method::Spectral => spec.fixpoint_spectral(a.size, &init, &cfg)?,
    };
    if let Some(p) = &a.distances {
        fs::write(p, series(1, report.distances.iter().copied()))?;
    }
    eprintln!(
        "iterations: {} converged: {} last distance: {}",
        report.iterations_run,
        report.converged,
        report.distances.last().map_or_else(|| "-".into(), |d| fmt_num(*d))
    );
    report.ensure_converged()?;
    ctx.emit_jacobi(&j, &a.out)
}

fn run_invert(ctx: &Ctx, a: &InvertArgs) -> CliResult<()> {
    let mu = load_jacobi(&a.mu)?;
    let r = invert(&mu, a.delta, a.size)?;
    eprintln!("feasible size: {} of {}", r.feasible_size, r.requested_size);
    if let Some(p) = &a.roundtrip_errors {
        let n = r.feasible_size;
        let back = closure(&r.sigma_jacobi, a.delta, n)?;
        fs::write(p, series(1, (1..n).map(|k| (back.b(k) - mu.b(k)).abs())))?;
    }
    ctx.emit_jacobi(&r.sigma_jacobi, &a.out)
}

fn run_frontier(ctx: &Ctx, a: &FrontierArgs) -> CliResult<()> {
    let mu = load_jacobi(&a.mu)?;
    let tol = a.tol_rel.or(ctx.config.frontier.tol_rel).unwrap_or(1e-3);
    let f = delta_frontier(&mu, &a.sizes, tol)?;
    let mut s = String::from("# n delta_n lower upper\n");
    for e in &f.entries {
        writeln!(s, "{} {} {} {}", e.n, fmt_num(e.delta_n), fmt_num(e.lower), fmt_num(e.upper))
            .expect("writing to string");
    }
    emit(a.output.as_deref(), &s)
}

fn run_gauss(ctx: &Ctx, a: &GaussArgs) -> CliResult<()> {
    let j = load_jacobi(&a.jacobi)?;
    let rule = gauss_rule(&j, a.size)?;
    emit(a.out.output.as_deref(), &io::atoms_to_string(&rule.to_measure(), ctx.format(a.out.format)))
}

#[derive(Serialize)]
struct FitJson {
    exponent: f64,
    prefactor: f64,
    residual: f64,
}

#[derive(Serialize)]
struct AnalyzeJson {
    size: usize,
    a_inf: f64,
    b_inf: f64,
    a_inf_estimated: bool,
    b_inf_estimated: bool,
    fit_window: [usize; 2],
    fit: Option<FitJson>,
    partial_sum: f64,
    capacity: f64,
    capacity_sigma: Option<f64>,
    capacity_bounds: Option<[f64; 2]>,
    reference_max_a_difference: Option<f64>,
    reference_max_b_difference: Option<f64>,
}

fn run_analyze(ctx: &Ctx, a: &AnalyzeArgs) -> CliResult<()> {
    let j = load_jacobi(&a.jacobi)?;
    let cfg = &ctx.config.analyze;
    let window = a.fit_window.or(cfg.fit_window.map(|[lo, hi]| (lo, hi))).map(|(lo, hi)| lo..=hi);
    let nevai = nevai_report(&j, a.a_inf.or(cfg.a_inf), a.b_inf.or(cfg.b_inf), window)?;
    let sigma = match (&a.sigma, a.delta) {
        (Some(p), Some(d)) => Some((Measure::load(p)?.jacobi(j.size())?, d)),
        _ => None,
    };
    let cap = capacity_report(&j, sigma.as_ref().map(|(s, d)| (s, *d)))?;
    let diffs = match &a.reference {
        Some(p) => {
            let r = load_jacobi(p)?;
            let n = j.size().min(r.size());
            let da: Vec<f64> = (0..n).map(|k| (j.a(k) - r.a(k)).abs()).collect();
            let db: Vec<f64> = (1..n).map(|k| (j.b(k) - r.b(k)).abs()).collect();
            Some((da, db))
        }
        None => None,
    };
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);

    let report = AnalyzeJson {
        size: j.size(),
        a_inf: nevai.a_inf,
        b_inf: nevai.b_inf,
        a_inf_estimated: nevai.a_inf_estimated,
        b_inf_estimated: nevai.b_inf_estimated,
        fit_window: [*nevai.window.start(), *nevai.window.end()],
        fit: nevai.fit.map(|f| FitJson { exponent: f.exponent, prefactor: f.prefactor, residual: f.residual }),
        partial_sum: *nevai.partial_sums.last().expect("size >= 2"),
        capacity: cap.final_estimate,
        capacity_sigma: cap.sigma_estimate,
        capacity_bounds: cap.bounds.map(|(lo, hi)| [lo, hi]),
        reference_max_a_difference: diffs.as_ref().map(|(da, _)| max(da)),
        reference_max_b_difference: diffs.as_ref().map(|(_, db)| max(db)),
    };

    if let Some(dir) = &a.plot_dir {
        fs::create_dir_all(dir)?;
        let files: [(&str, &[f64]); 5] = [
            ("a_deviations.dat", &nevai.a_deviations),
            ("b_deviations.dat", &nevai.b_deviations),
            ("deviations.dat", &nevai.deviations),
            ("partial_sums.dat", &nevai.partial_sums),
            ("capacity.dat", &cap.estimates),
        ];
        for (name, values) in files {
            fs::write(dir.join(name), series(1, values.iter().copied()))?;
        }
        if let Some((da, db)) = &diffs {
            fs::write(dir.join("a_differences.dat"), series(0, da.iter().copied()))?;
            fs::write(dir.join("b_differences.dat"), series(1, db.iter().copied()))?;
        }
    }
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    emit(a.output.as_deref(), &text)
}

#[derive(Serialize)]
struct FixtureEntry {
    name: &'static str,
    file: String,
    delta: Option<f64>,
}

fn run_fixtures(ctx: &Ctx, a: &FixturesArgs) -> CliResult<()> {
    if a.size == 0 {
        return Err(CliError::Usage("--size must be >= 1".into()));
    }
    fs::create_dir_all(&a.out_dir)?;
    let format = ctx.format(a.format);
    let ext = |base: &str| match format {
        Format::Text => base.to_string(),
        Format::Json => "json".to_string(),
    };
    let mut index = Vec::new();
    for (name, data) in named_fixtures::<f64>(a.size)? {
        let (file, text, delta) = match data {
            FixtureData::Ifs { delta, atoms } => {
                (format!("{name}.{}", ext("atoms")), io::atoms_to_string(&atoms, format), Some(delta))
            }
            FixtureData::Jacobi(j) => (format!("{name}.{}", ext("jac")), io::jacobi_to_string(&j, format), None),
        };
        fs::write(a.out_dir.join(&file), text)?;
        index.push(FixtureEntry { name, file, delta });
    }
    let mut text = serde_json::to_string_pretty(&index).expect("serializable index");
    text.push('\n');
    fs::write(a.out_dir.join("index.json"), text)?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let ctx = Ctx { config: Config::load(cli.config.as_deref())? };
    match &cli.command {
        Command::Closure(a) => run_closure(&ctx, a),
        Command::Convolve(a) => run_convolve(&ctx, a),
        Command::Fixpoint(a) => run_fixpoint(&ctx, a),
        Command::Invert(a) => run_invert(&ctx, a),
        Command::Frontier(a) => run_frontier(&ctx, a),
        Command::Gauss(a) => run_gauss(&ctx, a),
        Command::Analyze(a) => run_analyze(&ctx, a),
        Command::Fixtures(a) => run_fixtures(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
